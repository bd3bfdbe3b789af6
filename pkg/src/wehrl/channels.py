"""Gaussian quantum-limited amplifier and attenuator, the random-displacement
channel and the measure-reprepare channel, all in Kraus form.

Amplifier and attenuator Kraus operators shift the photon number by a
fixed amount, so they are stored as a coefficient table ``c[l, n]`` with
``K_l |n> = c[l, n] |n + s l>`` (``s = +1`` amplifier, ``-1`` attenuator)
and applied mode by mode. Dense matrices are only materialized on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln, roots_laguerre, xlogy
from scipy.stats import nbinom

from wehrl.errors import DomainError, ShapeError
from wehrl.fock_core import (
    DensityOperator,
    FockCutoff,
    as_cutoff,
    coherent_amplitudes,
    displacement_blocks,
)
from wehrl.phase_space import QuadratureScheme

KRAUS_DROP = 1e-14
OUTPUT_TAIL = 1e-12
KINDS = ("amplifier", "attenuator", "random_displacement", "measure_reprepare")


@dataclass
class KrausChannel:
    """Completely positive map on truncated Fock spaces.

    Exactly one internal representation is populated: ``shift`` (table
    for number-shifting Kraus operators, applied per mode), ``dense``
    (stack of single-mode Kraus matrices, applied per mode) or
    ``rank_one`` (``(weights, out_vectors, in_vectors)`` for
    ``K_i = sqrt(w_i) |u_i><v_i|``).
    """

    kind: str
    parameter: float
    in_cutoff: FockCutoff
    out_cutoff: FockCutoff
    shift: tuple[int, np.ndarray] | None = field(default=None, repr=False)
    dense: np.ndarray | None = field(default=None, repr=False)
    rank_one: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    discretization_error: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown channel kind {self.kind!r}")
        if self.in_cutoff.modes != self.out_cutoff.modes:
            raise ShapeError("input and output cutoffs must have the same number of modes")

    @property
    def modes(self) -> int:
        return self.in_cutoff.modes

    def single_mode_kraus(self) -> list[np.ndarray]:
        d_out, d_in = self.out_cutoff.dim, self.in_cutoff.dim
        if self.shift is not None:
            s, c = self.shift
            mats = []
            for l in range(c.shape[0]):
                k = np.zeros((d_out, d_in), dtype=complex)
                for n in range(d_in):
                    m = n + s * l
                    if 0 <= m < d_out and c[l, n] != 0:
                        k[m, n] = c[l, n]
                mats.append(k)
            return mats
        if self.dense is not None:
            return list(self.dense)
        w, u, v = self.rank_one
        return [math.sqrt(wi) * np.outer(ui, vi.conj()) for wi, ui, vi in zip(w, u, v)]

    @property
    def kraus(self) -> list[np.ndarray]:
        """Kraus matrices on the full M-mode space (out_size x in_size)."""
        single = self.single_mode_kraus()
        if self.modes == 1:
            return single
        out = single
        for _ in range(self.modes - 1):
            out = [np.kron(a, b) for a in out for b in single]
        return out

    def completeness(self) -> np.ndarray:
        """Sum of K^dag K on the input space (identity for trace preservation)."""
        d_in = self.in_cutoff.size
        return dual_apply(self, np.eye(self.out_cutoff.size, dtype=complex))[:d_in, :d_in]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "in_cutoff": [self.in_cutoff.dim, self.in_cutoff.modes],
            "out_cutoff": [self.out_cutoff.dim, self.out_cutoff.modes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausChannel":
        kind, par = data["kind"], float(data["parameter"])
        in_cut = FockCutoff(*data["in_cutoff"])
        builders = {
            "amplifier": amplifier,
            "attenuator": attenuator,
            "random_displacement": random_displacement,
            "measure_reprepare": measure_reprepare,
        }
        ch = builders[kind](par, in_cut)
        if [ch.out_cutoff.dim, ch.out_cutoff.modes] != list(data["out_cutoff"]):
            raise ShapeError("serialized output cutoff does not match the reconstruction")
        return ch


# --- construction ------------------------------------------------------------


def _drop_small_rows(c: np.ndarray) -> np.ndarray:
    keep = np.max(c**2, axis=1) >= KRAUS_DROP
    keep[0] = True
    last = int(np.nonzero(keep)[0][-1])
    return c[: last + 1]


def attenuator(lam: float, in_cutoff) -> KrausChannel:
    """Beamsplitter loss with transmissivity ``lam``; output cutoff equals input."""
    if not (0.0 <= lam <= 1.0):
        raise DomainError(f"transmissivity must lie in [0, 1], got {lam!r}")
    cut = as_cutoff(in_cutoff)
    d = cut.dim
    n = np.arange(d)[None, :]
    l = np.arange(d)[:, None]
    valid = l <= n
    nl = np.where(valid, n - l, 0)
    logc = 0.5 * (gammaln(n + 1) - gammaln(l + 1) - gammaln(nl + 1) + xlogy(nl, lam) + xlogy(l, 1.0 - lam))
    c = np.where(valid, np.exp(np.where(valid, logc, 0.0)), 0.0)
    return KrausChannel("attenuator", float(lam), cut, cut, shift=(-1, _drop_small_rows(c)))


def amplifier_output_dim(kappa: float, in_dim: int, tail: float = OUTPUT_TAIL) -> int:
    """Output cutoff keeping all but ``tail`` of the amplified top input level.

    Amplifying |n> produces a negative-binomial photon gain (n+1
    successes, success probability 1/kappa); the cutoff is at least
    ceil(kappa * in_dim) + 8.
    """
    if kappa == 1.0:
        return in_dim
    n = in_dim - 1
    base = int(math.ceil(kappa * in_dim)) + 8
    gain = int(nbinom.isf(tail, n + 1, 1.0 / kappa))
    while nbinom.sf(gain, n + 1, 1.0 / kappa) >= tail:
        gain += 1
    return max(base, n + gain + 2)


def amplifier(kappa: float, in_cutoff, out_dim: int | None = None) -> KrausChannel:
    """Quantum-limited amplifier with gain ``kappa``.

    K_l |n> = sqrt(C(n+l, l)) kappa^{-(n+1)/2} ((kappa-1)/kappa)^{l/2} |n+l>.
    """
    if not kappa >= 1.0:
        raise DomainError(f"gain must be >= 1, got {kappa!r}")
    cut = as_cutoff(in_cutoff)
    d_in = cut.dim
    d_out = amplifier_output_dim(kappa, d_in) if out_dim is None else int(out_dim)
    if d_out < d_in:
        raise ShapeError("amplifier output cutoff smaller than input cutoff")
    if kappa == 1.0:
        c = np.ones((1, d_in))
    else:
        n = np.arange(d_in)[None, :]
        l = np.arange(d_out)[:, None]
        logc = 0.5 * (gammaln(n + l + 1) - gammaln(l + 1) - gammaln(n + 1))
        logc += -0.5 * (n + 1) * math.log(kappa) + 0.5 * l * math.log((kappa - 1.0) / kappa)
        c = np.where(n + l < d_out, np.exp(logc), 0.0)
        c = _drop_small_rows(c)
    return KrausChannel("amplifier", float(kappa), cut, FockCutoff(d_out, cut.modes), shift=(1, c))


def laguerre_scheme(rate: float, n_radial: int, n_angles: int) -> QuadratureScheme:
    """Scheme exact for e^{-rate |z|^2} times polynomials of degree < 2 n_radial in |z|^2
    and angular frequency < n_angles."""
    s, w = roots_laguerre(n_radial)
    t = s / rate
    logw = np.log(w) + s - math.log(rate) - math.log(n_angles)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    z = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(np.exp(logw), n_angles)
    return QuadratureScheme("radial", z, weights, float(np.sqrt(t[-1])), t, np.exp(logw + math.log(n_angles)), n_angles)


def _exact_scheme(rate: float, out_dim: int, in_dim: int) -> QuadratureScheme:
    n_radial = (out_dim + in_dim) // 2 + 2
    n_angles = out_dim + in_dim + 1
    return laguerre_scheme(rate, n_radial, n_angles)


def _random_displacement_kraus(kappa: float, in_dim: int, out_dim: int, quad: QuadratureScheme) -> np.ndarray:
    z = quad.nodes[:, 0]
    logw = 0.5 * (np.log(quad.weights) + math.log(kappa) - kappa * np.abs(z) ** 2)
    blocks = displacement_blocks(z, out_dim, in_dim)
    return np.exp(logw)[:, None, None] * blocks


def random_displacement(kappa: float, cutoff, quad: QuadratureScheme | None = None, out_dim: int | None = None) -> KrausChannel:
    """Gaussian random displacement with density kappa e^{-kappa |z|^2} (one mode).

    The default quadrature is Gauss-Laguerre in |z|^2 times a uniform
    angular grid, exact for the matrix entries kept; the output cutoff is
    grown until the probability leaking past it is below 1e-12.
    """
    if not kappa >= 1.0:
        raise DomainError(f"kappa must be >= 1, got {kappa!r}")
    cut = as_cutoff(cutoff)
    if cut.modes != 1:
        raise DomainError("random displacement channel is built for one mode")
    d_in = cut.dim
    d_out = d_in + 16 if out_dim is None else int(out_dim)
    while True:
        scheme = quad if quad is not None else _exact_scheme(kappa + 1.0, d_out, d_in)
        K = _random_displacement_kraus(kappa, d_in, d_out, scheme)
        leak = 1.0 - float(np.min(np.real(np.einsum("lai,lai->i", K.conj(), K))))
        if out_dim is not None or quad is not None or leak < OUTPUT_TAIL or d_out > 8 * d_in + 400:
            break
        d_out += 16
    ch = KrausChannel("random_displacement", float(kappa), cut, FockCutoff(d_out), dense=K)
    ch.discretization_error = max(leak, 0.0) if quad is None else abs(leak)
    return ch


def measure_reprepare(kappa: float, cutoff, quad: QuadratureScheme | None = None, out_dim: int | None = None) -> KrausChannel:
    """Heterodyne measurement followed by preparation of |sqrt(kappa) z> (one mode)."""
    if not kappa >= 1.0:
        raise DomainError(f"kappa must be >= 1, got {kappa!r}")
    cut = as_cutoff(cutoff)
    if cut.modes != 1:
        raise DomainError("measure-reprepare channel is built for one mode")
    d_in = cut.dim
    if out_dim is None:
        out_dim = amplifier_output_dim(kappa, random_displacement_output_dim(kappa, d_in))
    scheme = quad if quad is not None else _exact_scheme(kappa + 1.0, out_dim, d_in)
    z = scheme.nodes[:, 0]
    u = coherent_amplitudes(math.sqrt(kappa) * z, out_dim)
    v = coherent_amplitudes(z, d_in)
    ch = KrausChannel("measure_reprepare", float(kappa), cut, FockCutoff(out_dim), rank_one=(scheme.weights, u, v))
    comp = np.real(np.diag(ch.completeness()))
    ch.discretization_error = float(np.max(np.abs(1.0 - comp)))
    return ch


def random_displacement_output_dim(kappa: float, in_dim: int) -> int:
    return random_displacement(kappa, FockCutoff(in_dim)).out_cutoff.dim


# --- application -------------------------------------------------------------


def _mode_axes_front(t: np.ndarray, k: int, M: int) -> np.ndarray:
    return np.moveaxis(t, (k, M + k), (0, 1))


def _mode_axes_back(t: np.ndarray, k: int, M: int) -> np.ndarray:
    return np.moveaxis(t, (0, 1), (k, M + k))


def _apply_single(channel: KrausChannel, t: np.ndarray) -> np.ndarray:
    """Apply the single-mode map to axes (0, 1) of ``t``; trailing axes ride along."""
    d_out, d_in = channel.out_cutoff.dim, channel.in_cutoff.dim
    rest = t.shape[2:]
    out = np.zeros((d_out, d_out) + rest, dtype=complex)
    if channel.shift is not None:
        s, c = channel.shift
        for l in range(c.shape[0]):
            lo = max(0, -s * l)
            hi = min(d_in, d_out - s * l)
            if hi <= lo:
                continue
            w = c[l, lo:hi]
            ww = np.multiply.outer(w, w).reshape((hi - lo, hi - lo) + (1,) * len(rest))
            o_lo, o_hi = lo + s * l, hi + s * l
            out[o_lo:o_hi, o_lo:o_hi] += ww * t[lo:hi, lo:hi]
        return out
    if channel.dense is not None:
        K = channel.dense
        return np.einsum("lai,ij...,lbj->ab...", K, t, K.conj(), optimize=True)
    w, u, v = channel.rank_one
    q = np.einsum("ni,ij...,nj->n...", v.conj(), t, v, optimize=True)
    return np.einsum("na,n...,nb->ab...", u, w.reshape((-1,) + (1,) * len(rest)) * q, u.conj(), optimize=True)


def _dual_single(channel: KrausChannel, t: np.ndarray) -> np.ndarray:
    d_out, d_in = channel.out_cutoff.dim, channel.in_cutoff.dim
    rest = t.shape[2:]
    out = np.zeros((d_in, d_in) + rest, dtype=complex)
    if channel.shift is not None:
        s, c = channel.shift
        for l in range(c.shape[0]):
            lo = max(0, -s * l)
            hi = min(d_in, d_out - s * l)
            if hi <= lo:
                continue
            w = c[l, lo:hi]
            ww = np.multiply.outer(w, w).reshape((hi - lo, hi - lo) + (1,) * len(rest))
            o_lo, o_hi = lo + s * l, hi + s * l
            out[lo:hi, lo:hi] += ww * t[o_lo:o_hi, o_lo:o_hi]
        return out
    if channel.dense is not None:
        K = channel.dense
        return np.einsum("lai,ab...,lbj->ij...", K.conj(), t, K, optimize=True)
    w, u, v = channel.rank_one
    q = np.einsum("na,ab...,nb->n...", u.conj(), t, u, optimize=True)
    return np.einsum("ni,n...,nj->ij...", v, w.reshape((-1,) + (1,) * len(rest)) * q, v.conj(), optimize=True)


def _per_mode(fn, channel: KrausChannel, matrix: np.ndarray, d_from: int, d_to: int) -> np.ndarray:
    M = channel.modes
    t = matrix.reshape((d_from,) * (2 * M))
    for k in range(M):
        t = _mode_axes_back(fn(channel, _mode_axes_front(t, k, M)), k, M)
    return t.reshape(d_to**M, d_to**M)


def apply(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Sum of K rho K^dag; the lost trace is added to the output tail bound."""
    if rho.cutoff != channel.in_cutoff:
        raise ShapeError(f"state cutoff {rho.cutoff} does not match channel input {channel.in_cutoff}")
    d_in, d_out = channel.in_cutoff.dim, channel.out_cutoff.dim
    out = _per_mode(_apply_single, channel, rho.matrix, d_in, d_out)
    out = 0.5 * (out + out.conj().T)
    leak = max(0.0, rho.trace - float(np.real(np.trace(out))))
    tail = rho.tail_bound + leak + channel.discretization_error
    return DensityOperator(channel.out_cutoff, out, tail)


def dual_apply(channel: KrausChannel, X: np.ndarray) -> np.ndarray:
    """Sum of K^dag X K (Heisenberg picture).

    A single-mode ``X`` smaller than the output space is zero-padded, i.e.
    taken to be supported on the lowest levels.
    """
    X = np.asarray(X.matrix if isinstance(X, DensityOperator) else X, dtype=complex)
    d_in, d_out = channel.in_cutoff.dim, channel.out_cutoff.dim
    size = channel.out_cutoff.size
    if X.shape != (size, size):
        if channel.modes == 1 and X.ndim == 2 and X.shape[0] == X.shape[1] and X.shape[0] < size:
            padded = np.zeros((size, size), dtype=complex)
            padded[: X.shape[0], : X.shape[0]] = X
            X = padded
        else:
            raise ShapeError(f"operator shape {X.shape} incompatible with channel output {size}")
    return _per_mode(_dual_single, channel, X, d_out, d_in)


def compose(first: KrausChannel, second: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """second(first(rho)), re-embedding the intermediate state into second's input cutoff."""
    mid = apply(first, rho)
    if mid.cutoff != second.in_cutoff:
        mid = embed(mid, second.in_cutoff.dim)
    return apply(second, mid)


def embed(rho: DensityOperator, dim: int) -> DensityOperator:
    """Zero-pad (or crop, moving the dropped trace into the tail) to a new cutoff."""
    if rho.modes != 1:
        raise DomainError("embed is implemented for one mode")
    m = np.zeros((dim, dim), dtype=complex)
    k = min(dim, rho.dim)
    m[:k, :k] = rho.matrix[:k, :k]
    lost = max(0.0, rho.trace - float(np.real(np.trace(m))))
    return DensityOperator(FockCutoff(dim), m, rho.tail_bound + lost)


# --- brute-force references --------------------------------------------------


def _two_mode_reference(generator_coeff: float, kind: str, in_dim: int, size: int) -> np.ndarray:
    """U |n>|0> for n < in_dim, U = exp(coeff * G) on a (size x size) two-mode space.

    G = a^dag b^dag - a b (squeezing) or a^dag b - a b^dag (beamsplitter).
    Returns amplitudes psi[n, a, b].
    """
    low = sparse.diags(np.sqrt(np.arange(1, size)), 1, format="csr")  # annihilation
    eye = sparse.identity(size, format="csr")
    a, b = sparse.kron(low, eye, format="csr"), sparse.kron(eye, low, format="csr")
    if kind == "squeeze":
        G = a.T @ b.T - a @ b
    else:
        G = a.T @ b - a @ b.T
    G = (generator_coeff * G).tocsc()
    starts = np.zeros((size * size, in_dim))
    for n in range(in_dim):
        starts[n * size, n] = 1.0
    psi = expm_multiply(G, starts)
    return np.transpose(psi.reshape(size, size, in_dim), (2, 0, 1))


def amplifier_reference(kappa: float, in_dim: int, out_dim: int, size: int = 96) -> np.ndarray:
    """Choi-type table A(|n><m|) from explicit two-mode squeezing with the vacuum.

    Returns ``T[n, m]`` = output matrix (out_dim x out_dim) of |n><m|.
    """
    psi = _two_mode_reference(math.acosh(math.sqrt(kappa)), "squeeze", in_dim, size)
    psi = psi[:, :out_dim, :]
    return np.einsum("nab,mcb->nmac", psi, psi.conj())


def attenuator_reference(lam: float, in_dim: int, size: int = 48) -> np.ndarray:
    psi = _two_mode_reference(math.acos(math.sqrt(lam)), "beamsplitter", in_dim, size)
    psi = psi[:, :in_dim, :]
    return np.einsum("nab,mcb->nmac", psi, psi.conj())


def channel_table(channel: KrausChannel) -> np.ndarray:
    """A(|n><m|) for all input matrix units, same layout as the references."""
    d_in, d_out = channel.in_cutoff.dim, channel.out_cutoff.dim
    units = np.zeros((d_in, d_in, d_in, d_in), dtype=complex)
    for n in range(d_in):
        for m in range(d_in):
            units[n, m, n, m] = 1.0
    t = np.moveaxis(units, (2, 3), (0, 1))
    out = _apply_single(channel, t)
    return np.moveaxis(out, (0, 1), (2, 3))[:, :, :d_out, :d_out]
