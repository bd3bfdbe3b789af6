"""Command-line front end: ``wehrl compute | verify | sweep``.

Exit codes: 0 pass, 2 usage error, 3 accuracy or truncation budget
exceeded, 4 a hard inequality check failed.

Configuration comes from (lowest to highest precedence) built-in
defaults, a ``key = value`` file given with ``--config``, the
environment variables ``WEHRL_JOBS`` and ``WEHRL_OUT_DIR``, and flags.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from wehrl import __version__
from wehrl.errors import AccuracyError, DomainError, NotAStateError, ShapeError, TruncationError
from wehrl.fock_core import (
    FockCutoff,
    bound_f,
    coherent_vector,
    fock_state,
    pure_state,
    schatten_norm,
    thermal_state,
    von_neumann_entropy,
)
from wehrl.functionals import by_name
from wehrl.io import fresh_path, read_density, write_json, write_rows
from wehrl.phase_space import husimi_q_norm, wehrl_entropy

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY, EXIT_VIOLATION = 0, 2, 3, 4

QUANTITIES = {
    "wehrl": "wehrl",
    "vn_entropy": "vn_entropy",
    "entropy": "vn_entropy",
    "husimi_norm": "husimi_norm",
    "husimi": "husimi_norm",
    "schatten_norm": "schatten_norm",
    "schatten": "schatten_norm",
}
SUITE_NAMES = ("ha", "majorization", "pq", "entropy", "epni", "klein", "lemmas", "channels", "berezin")
SWEEPS = ("wehrl", "vn_entropy", "husimi_norm", "schatten_norm", "pq_rhs", "bound_f", "ha_vacuum")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    cutoff: int | None = None
    tail: float = 1e-12
    tol: float = 1e-9
    seed: int | None = 42
    trials: int | None = None
    kappas: list[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0])
    zs: list[float] = field(default_factory=lambda: [0.0, 0.3, 0.6, 0.9])
    lams: list[float] = field(default_factory=lambda: [0.3, 0.8])
    p: float = 2.0
    q: float = 2.0
    f: str = "square"
    jobs: int = 1
    out: str | None = None
    out_dir: str = "reports"
    deterministic: bool = False

    def validate(self) -> None:
        if not (self.tol > 0 and self.tail > 0):
            raise UsageError("tolerances must be > 0")
        for name in ("kappas", "zs", "lams"):
            if not getattr(self, name):
                raise UsageError(f"grid {name} is empty")
        if self.deterministic and self.seed is None:
            raise UsageError("deterministic mode needs a fixed seed")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        if self.cutoff is not None and self.cutoff < 2:
            raise UsageError("cutoff must be >= 2")


_LIST_KEYS = {"kappas", "zs", "lams"}


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:num`` (inclusive linspace)."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}") from exc


def _coerce(key: str, value: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise UsageError(f"unknown config key {key!r}")
    if key in _LIST_KEYS:
        return parse_grid(value)
    if key == "deterministic":
        return value.strip().lower() in ("1", "true", "yes", "on")
    if value.strip().lower() in ("none", ""):
        return None
    t = types[key]
    try:
        if "int" in t:
            return int(value)
        if "float" in t:
            return float(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def load_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = _coerce(k.replace("-", "_"), v)
    return out


def build_config(args: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    if env.get("WEHRL_JOBS"):
        values["jobs"] = _coerce("jobs", env["WEHRL_JOBS"])
    if env.get("WEHRL_OUT_DIR"):
        values["out_dir"] = env["WEHRL_OUT_DIR"]
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is None or v is False:
            continue
        values[f.name] = parse_grid(v) if f.name in _LIST_KEYS else v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# --- state specs -------------------------------------------------------------


def state_from_spec(spec: str, cfg: RunConfig):
    """``vacuum``, ``thermal:Z``, ``fock:N``, ``coherent:RE,IM`` or a density file path."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "vacuum":
            return fock_state(0, cfg.cutoff or 2)
        if kind == "thermal":
            z = float(arg)
            cut = FockCutoff(cfg.cutoff) if cfg.cutoff else FockCutoff.for_thermal(z, cfg.tail)
            return thermal_state(z, cut)
        if kind == "fock":
            n = int(arg)
            return fock_state(n, cfg.cutoff or max(n + 1, 2))
        if kind == "coherent":
            re, _, im = arg.partition(",")
            alpha = complex(float(re), float(im or 0.0))
            dim = cfg.cutoff or int(abs(alpha) ** 2 + 12 * abs(alpha) + 30)
            cut = FockCutoff(dim)
            return pure_state(coherent_vector(alpha, cut), cut)
        if Path(spec).is_file():
            return read_density(spec)
    except (ValueError, DomainError, NotAStateError, ShapeError, TruncationError) as exc:
        raise UsageError(f"bad state spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown state spec {spec!r} (use vacuum, thermal:Z, fock:N, coherent:RE,IM or a file)")


def _state_arg(args) -> str:
    given = [s for s in (
        args.state,
        None if args.thermal is None else f"thermal:{args.thermal}",
        None if args.fock is None else f"fock:{args.fock}",
    ) if s is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --state, --thermal, --fock")
    return given[0]


# --- reports -----------------------------------------------------------------


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.9g}"


def _write_report(cfg: RunConfig, stem: str, payload: dict) -> Path:
    if not cfg.deterministic:
        payload = dict(payload, created=time.strftime("%Y-%m-%dT%H:%M:%S"))
    if cfg.out:
        path = Path(cfg.out)
        path.parent.mkdir(parents=True, exist_ok=True)
    else:
        path = fresh_path(cfg.out_dir, f"{stem}-{time.strftime('%Y%m%d-%H%M%S')}", ".json")
    write_json(path, payload)
    return path


def _config_record(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    for k in ("out", "out_dir", "jobs"):
        d.pop(k)
    return d


def compute_value(what: str, rho, cfg: RunConfig) -> tuple[float, float]:
    if what == "wehrl":
        r = wehrl_entropy(rho, cfg.tol)
        return r.value, r.error
    if what == "vn_entropy":
        return von_neumann_entropy(rho), 0.0
    if what == "husimi_norm":
        r = husimi_q_norm(rho, cfg.q, cfg.tol)
        return r.value, r.error
    return schatten_norm(rho, cfg.p), 0.0


def cmd_compute(args, cfg: RunConfig) -> int:
    what = QUANTITIES.get(args.what)
    if what is None:
        raise UsageError(f"unknown quantity {args.what!r}; choose from {sorted(QUANTITIES)}")
    spec = _state_arg(args)
    rho = state_from_spec(spec, cfg)
    value, err = compute_value(what, rho, cfg)
    print(f"{what} = {_fmt(value)} +/- {err:.2g} (tol {cfg.tol:g}, tail {rho.tail_bound:.2g})")
    payload = {
        "command": "compute",
        "quantity": what,
        "state": spec,
        "dim": rho.dim,
        "modes": rho.modes,
        "value": float(_fmt(value)),
        "error": float(f"{err:.3g}"),
        "tail_bound": float(f"{rho.tail_bound:.3g}"),
        "config": _config_record(cfg),
    }
    if cfg.out or args.save:
        print(f"report: {_write_report(cfg, f'compute-{what}', payload)}")
    return EXIT_OK


def _suite_kwargs(suite: str, args, cfg: RunConfig) -> dict:
    kw: dict = {}
    if suite in ("majorization", "pq", "entropy", "epni", "klein", "berezin"):
        if cfg.trials is not None:
            kw["trials"] = cfg.trials
        if cfg.seed is not None:
            kw["seed"] = cfg.seed
    if suite == "ha":
        if args.state:
            kw["states"] = [(args.state, state_from_spec(args.state, cfg))]
        kw["fs"] = [by_name(cfg.f)]
        kw["kappas"] = cfg.kappas
    if suite == "epni" and args.kappas:
        kw["kappas"] = cfg.kappas
    if suite == "pq" and (args.p is not None or args.q is not None):
        kw["pairs"] = [(cfg.p, cfg.q)]
    if suite == "entropy" and args.zs:
        kw["thermal_z"] = cfg.zs
    return kw


def cmd_verify(args, cfg: RunConfig) -> int:
    from wehrl.theorem_lab import hard_failures, run_suite, table

    suites = list(SUITE_NAMES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITE_NAMES:
        raise UsageError(f"unknown suite {args.suite!r}")
    reports = []
    for name in suites:
        try:
            reps = run_suite(name, jobs=cfg.jobs, **_suite_kwargs(name, args, cfg))
        except (AccuracyError, TruncationError) as exc:
            print(f"budget exceeded in suite {name}: {exc}", file=sys.stderr)
            return EXIT_ACCURACY
        for r in reps:
            r.inputs.setdefault("suite", name)
        reports.extend(reps)
    print(table(reports) if not args.quiet else "")
    for r in reports:
        if r.series:
            flags = {k: v for d in r.details for k, v in d.items() if k == "monotone"}
            extra = f" monotone={flags['monotone']}" if flags else ""
            print(f"{r.name} series: " + ", ".join(f"{k:g}:{_fmt(v)}" for k, v in r.series) + extra)
    for r in reports:
        if r.classification == "infinite":
            print(f"{r.name} (p={r.inputs.get('p')}, q={r.inputs.get('q')}): infinite norm")
    failed = hard_failures(reports)
    evidence = [r for r in reports if not r.hard and not r.passed]
    passed = sum(r.passed for r in reports)
    print(f"summary: {passed}/{len(reports)} pass, {len(failed)} hard failures, {len(evidence)} conjecture-evidence failures")
    payload = {
        "command": "verify",
        "suite": args.suite,
        "config": _config_record(cfg),
        "reports": [r.to_dict() for r in reports],
        "summary": {"checks": len(reports), "passed": passed, "hard_failures": [r.name for r in failed]},
    }
    print(f"report: {_write_report(cfg, f'verify-{args.suite}', payload)}")
    for r in failed:
        print(f"hard failure: {r.name} {r.inputs} margin {_fmt(r.margin)} budget {_fmt(r.tolerance_budget)}", file=sys.stderr)
    return EXIT_VIOLATION if failed else EXIT_OK


def sweep_rows(quantity: str, grid: Sequence[float], cfg: RunConfig) -> list[tuple[float, float, float]]:
    from wehrl.theorem_lab import amplified_trace, pq_profile

    rows = []
    for x in grid:
        if quantity in ("wehrl", "vn_entropy", "husimi_norm", "schatten_norm"):
            rho = thermal_state(x, FockCutoff.for_thermal(x, cfg.tail))
            v, e = compute_value(quantity, rho, cfg)
        elif quantity == "pq_rhs":
            v, e = float(pq_profile(x, cfg.p, cfg.q)), 0.0
        elif quantity == "bound_f":
            v, e = bound_f(x), 0.0
        elif quantity == "ha_vacuum":
            v, tail = amplified_trace(fock_state(0, 2), by_name(cfg.f), x)
            e = tail
        else:
            raise UsageError(f"unknown sweep quantity {quantity!r}; choose from {SWEEPS}")
        rows.append((float(x), float(v), float(e)))
    return rows


def cmd_sweep(args, cfg: RunConfig) -> int:
    grid = parse_grid(args.grid)
    if not grid:
        raise UsageError("empty parameter grid")
    try:
        rows = sweep_rows(args.quantity, grid, cfg)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.out:
        path = Path(cfg.out)
    else:
        path = fresh_path(cfg.out_dir, f"sweep-{args.quantity}-{time.strftime('%Y%m%d-%H%M%S')}", ".csv")
    write_rows(path, ("parameter", "value", "error"), rows)
    print("parameter,value,error")
    for r in rows:
        print(",".join(_fmt(v) for v in r))
    print(f"table: {path}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--cutoff", type=int, help="Fock cutoff (levels per mode)")
    p.add_argument("--tail", type=float, help="truncation tail for automatic cutoffs")
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--seed", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--f", help="convex function: square, cube, xlogx, identity, power:Q")
    p.add_argument("--out", help="output file (default: timestamped file in --out-dir)")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--deterministic", action="store_true", help="ordered reduction, no timestamps in reports")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wehrl", description="Wehrl entropy, Husimi functionals and channel checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="evaluate one quantity on one state")
    c.add_argument("what", help="wehrl | vn_entropy | husimi_norm | schatten_norm")
    c.add_argument("--state", help="vacuum, thermal:Z, fock:N, coherent:RE,IM or a density file")
    c.add_argument("--thermal", type=float)
    c.add_argument("--fock", type=int)
    c.add_argument("--save", action="store_true", help="write a report file")
    _common(c)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help="|".join(SUITE_NAMES + ("all",)))
    v.add_argument("--trials", type=int)
    v.add_argument("--state", help="state for the ha suite")
    v.add_argument("--kappas", help="gain grid, a,b,c or start:stop:num")
    v.add_argument("--zs", help="thermal parameters for saturation checks")
    v.add_argument("--quiet", action="store_true")
    _common(v)

    s = sub.add_parser("sweep", help="tabulate a quantity over a grid")
    s.add_argument("quantity", help="|".join(SWEEPS))
    s.add_argument("--grid", required=True, help="a,b,c or start:stop:num")
    _common(s)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = build_config(args)
        handler = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep}[args.command]
        return handler(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, TruncationError) as exc:
        print(f"accuracy budget exceeded: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())
