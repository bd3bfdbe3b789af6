"""Plain-text serialization for states, spectra, channels, reports and traces.

Density operator files::

    # wehrl-density <modes> <dim> <tail_bound>
    re im re im ...      (one matrix row per line)

Spectra are one probability per line. Channels are JSON objects holding
the constructor parameters; the Kraus data is rebuilt on load.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from wehrl.channels import KrausChannel
from wehrl.errors import ShapeError
from wehrl.fock_core import DensityOperator, FockCutoff, Spectrum

DENSITY_MAGIC = "# wehrl-density"


def write_density(path, rho: DensityOperator) -> None:
    m = rho.matrix
    pairs = np.empty((m.shape[0], 2 * m.shape[1]))
    pairs[:, 0::2] = m.real
    pairs[:, 1::2] = m.imag
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{DENSITY_MAGIC} {rho.modes} {rho.dim} {rho.tail_bound!r}\n")
        for row in pairs:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_density(path) -> DensityOperator:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if " ".join(header[:2]) != DENSITY_MAGIC or len(header) != 5:
            raise ShapeError(f"{path}: not a density-operator file")
        modes, dim, tail = int(header[2]), int(header[3]), float(header[4])
        data = np.loadtxt(fh, ndmin=2)
    size = dim**modes
    if data.shape != (size, 2 * size):
        raise ShapeError(f"{path}: expected {size} rows of {2 * size} numbers, got {data.shape}")
    return DensityOperator(FockCutoff(dim, modes), data[:, 0::2] + 1j * data[:, 1::2], tail)


def write_spectrum(path, spec: Spectrum | Sequence[float]) -> None:
    probs = spec.probs if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    np.savetxt(path, probs, fmt="%.17g")


def read_spectrum(path) -> Spectrum:
    return Spectrum.from_values(np.loadtxt(path, ndmin=1))


def write_channel(path, channel: KrausChannel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_channel(path) -> KrausChannel:
    with open(path, encoding="utf-8") as fh:
        return KrausChannel.from_dict(json.load(fh))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated table with a header row; floats at 9 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.9g}" if isinstance(v, float) else str(v) for v in row) + "\n")


def write_trace(prefix, trace) -> tuple[Path, Path, Path]:
    """Optimization trace as <prefix>.csv, <prefix>.state and <prefix>.json."""
    prefix = Path(prefix)
    csv, state, summary = (prefix.with_suffix(s) for s in (".csv", ".state", ".json"))
    trace.to_csv(csv)
    write_density(state, trace.best_state)
    from wehrl.theorem_lab import _jsonable

    with open(summary, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(trace.summary()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv, state, summary


def fresh_path(directory, stem: str, suffix: str) -> Path:
    """A path in ``directory`` that does not exist yet (append-only report history)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}{suffix}"
    k = 1
    while path.exists():
        path = directory / f"{stem}-{k}{suffix}"
        k += 1
    return path


def write_json(path, payload: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
