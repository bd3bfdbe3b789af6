"""Truncated Fock-space states, spectra, entropies and the scalar functions
``g``, ``g_inv`` and ``bound_f``.

Multi-mode operators use the row-major (``np.ndindex``) ordering of the
occupation numbers, so mode 0 is the most significant index.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammainc, gammaln, xlogy

from wehrl.errors import DomainError, NotAStateError, TruncationError

HERMITIAN_TOL = 1e-12
EIGEN_CLAMP = 1e-12
NEGATIVE_EIGEN_LIMIT = 1e-9
DEFAULT_TAIL = 1e-12


@dataclass(frozen=True)
class FockCutoff:
    """Levels ``0..dim-1`` kept in each of ``modes`` modes."""

    dim: int
    modes: int = 1

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"cutoff dim must be an integer >= 2, got {self.dim!r}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise DomainError(f"modes must be a positive integer, got {self.modes!r}")

    @property
    def size(self) -> int:
        return self.dim**self.modes

    def occupations(self) -> np.ndarray:
        """(size, modes) array of occupation numbers in basis order."""
        return np.array(list(np.ndindex(*([self.dim] * self.modes))), dtype=int).reshape(
            self.size, self.modes
        )

    def total_occupation(self) -> np.ndarray:
        return self.occupations().sum(axis=1)

    @classmethod
    def for_thermal(cls, z: float, tail: float = DEFAULT_TAIL, modes: int = 1) -> "FockCutoff":
        """Smallest cutoff whose geometric tail ``z**dim`` is below ``tail`` per mode."""
        _check_thermal_parameter(z)
        if z == 0.0:
            return cls(2, modes)
        dim = math.ceil(math.log(tail) / math.log(z))
        while z**dim >= tail:
            dim += 1
        return cls(max(dim, 2), modes)


def as_cutoff(cutoff, modes: int = 1) -> FockCutoff:
    if isinstance(cutoff, FockCutoff):
        return cutoff
    return FockCutoff(int(cutoff), modes)


@dataclass(frozen=True)
class Spectrum:
    """Nonincreasing probability vector."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise DomainError("empty spectrum")
        if np.any(p < -EIGEN_CLAMP) or np.any(p > 1 + EIGEN_CLAMP):
            raise DomainError("spectrum entries must lie in [0, 1]")
        if p.sum() > 1 + 1e-12:
            raise DomainError(f"spectrum sums to {p.sum():.16g} > 1")
        if np.any(np.diff(p) > 0):
            raise DomainError("spectrum must be sorted nonincreasing")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "Spectrum":
        v = np.clip(np.asarray(list(values), dtype=float), 0.0, None)
        return cls(np.sort(v)[::-1])

    @classmethod
    def thermal(cls, z: float, dim: int) -> "Spectrum":
        _check_thermal_parameter(z)
        return cls((1 - z) * z ** np.arange(dim, dtype=float))

    def __len__(self) -> int:
        return self.probs.size

    def entropy(self) -> float:
        return float(-np.sum(xlogy(self.probs, self.probs)))


@dataclass(frozen=True)
class CoherentAmplitude:
    """Phase-space point ``z`` in C^M."""

    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex)).ravel()
        if not np.all(np.isfinite(z)):
            raise DomainError("coherent amplitude must be finite")
        object.__setattr__(self, "z", z)

    @property
    def modes(self) -> int:
        return self.z.size


def as_amplitude(z) -> np.ndarray:
    if isinstance(z, CoherentAmplitude):
        return z.z
    return CoherentAmplitude(z).z


@dataclass
class DensityOperator:
    """Density matrix on a truncated M-mode Fock space.

    ``tail_bound`` is the certified probability of the represented ideal
    state outside the cutoff (0 when the state is exactly supported).
    """

    cutoff: FockCutoff
    matrix: np.ndarray
    tail_bound: float = 0.0
    validate: bool = field(default=True, repr=False, compare=False)
    _eig: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.cutoff = as_cutoff(self.cutoff)
        m = np.asarray(self.matrix, dtype=complex)
        n = self.cutoff.size
        if m.shape != (n, n):
            raise NotAStateError(f"matrix shape {m.shape} does not match cutoff size {n}")
        if self.tail_bound < 0:
            raise DomainError("tail_bound must be >= 0")
        self.matrix = m
        if self.validate:
            self.check()

    def check(self) -> None:
        m = self.matrix
        asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if asym > HERMITIAN_TOL:
            raise NotAStateError(f"matrix is not Hermitian (max deviation {asym:.3g})")
        lam = self.eigenvalues(clamp=False)
        if lam[0] < -EIGEN_CLAMP:
            raise NotAStateError(f"negative eigenvalue {lam[0]:.3g}")
        tr = self.trace
        if abs(tr - 1.0) > self.tail_bound + 1e-12:
            raise NotAStateError(f"trace {tr:.16g} deviates from 1 beyond tail {self.tail_bound:.3g}")

    @property
    def dim(self) -> int:
        return self.cutoff.dim

    @property
    def modes(self) -> int:
        return self.cutoff.modes

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def eigenvalues(self, clamp: bool = True) -> np.ndarray:
        """Ascending eigenvalues; values in [-1e-12, 0) are set to 0 when ``clamp``."""
        if self._eig is None:
            herm = 0.5 * (self.matrix + self.matrix.conj().T)
            self._eig = np.linalg.eigvalsh(herm)
        lam = self._eig
        if clamp:
            lam = np.where((lam < 0) & (lam >= -EIGEN_CLAMP), 0.0, lam)
        return lam

    def spectrum(self) -> Spectrum:
        lam = self.eigenvalues()
        if lam[0] < -NEGATIVE_EIGEN_LIMIT:
            raise NotAStateError(f"negative eigenvalue {lam[0]:.3g}")
        return Spectrum(np.clip(lam[::-1], 0.0, None))

    def is_diagonal(self, atol: float = 0.0) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)

    def with_matrix(self, matrix: np.ndarray, tail_bound: float | None = None) -> "DensityOperator":
        tb = self.tail_bound if tail_bound is None else tail_bound
        return DensityOperator(self.cutoff, matrix, tb)


def _check_thermal_parameter(z: float) -> None:
    if not (0.0 <= z < 1.0):
        raise DomainError(f"thermal parameter z must lie in [0, 1), got {z!r}")


def thermal_state(z: float, cutoff=None) -> DensityOperator:
    """Geometric state with populations (1-z) z^n, tensored over the modes.

    With ``cutoff=None`` the smallest single-mode cutoff with tail < 1e-12 is used.
    """
    _check_thermal_parameter(z)
    cutoff = FockCutoff.for_thermal(z) if cutoff is None else as_cutoff(cutoff)
    diag1 = (1 - z) * z ** np.arange(cutoff.dim, dtype=float)
    diag = diag1
    for _ in range(cutoff.modes - 1):
        diag = np.kron(diag, diag1)
    tail = 1.0 - (1.0 - z**cutoff.dim) ** cutoff.modes
    return DensityOperator(cutoff, np.diag(diag).astype(complex), max(tail, 0.0))


def fock_state(n: int | Sequence[int], cutoff) -> DensityOperator:
    cutoff = as_cutoff(cutoff, modes=1 if np.isscalar(n) else len(n))
    occ = np.atleast_1d(n)
    if occ.size != cutoff.modes or np.any(occ < 0) or np.any(occ >= cutoff.dim):
        raise DomainError(f"occupation {n!r} not representable under {cutoff}")
    idx = int(np.ravel_multi_index(tuple(occ), (cutoff.dim,) * cutoff.modes))
    m = np.zeros((cutoff.size, cutoff.size), dtype=complex)
    m[idx, idx] = 1.0
    return DensityOperator(cutoff, m)


def pure_state(vector: np.ndarray, cutoff) -> DensityOperator:
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    cutoff = as_cutoff(cutoff)
    return DensityOperator(cutoff, np.outer(v, v.conj()))


def mean_energy(rho: DensityOperator) -> float:
    n_tot = rho.cutoff.total_occupation()
    return float(np.real(np.diag(rho.matrix)) @ n_tot)


def g(E):
    """Entropy of the thermal state with mean photon number E."""
    E_arr = np.asarray(E, dtype=float)
    if np.any(E_arr < 0):
        raise DomainError("g is defined for E >= 0")
    safe = np.where(E_arr > 0, E_arr, 1.0)
    # ln(1 + 1/E) without overflowing 1/E for tiny E
    log_ratio = np.where(safe < 1.0, np.log1p(safe) - np.log(safe), np.log1p(1.0 / np.maximum(safe, 1.0)))
    val = np.log1p(E_arr) + np.where(E_arr > 0, E_arr * log_ratio, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def _g_prime(E: float) -> float:
    return math.log1p(E) - math.log(E) if E < 1.0 else math.log1p(1.0 / E)


def g_inv(S: float) -> float:
    """Inverse of ``g``: geometric bisection on a positive bracket, then a Newton polish."""
    S = float(S)
    if S < 0 or not math.isfinite(S):
        raise DomainError("g_inv is defined for finite S >= 0")
    if S == 0.0:
        return 0.0
    if S < 1e-12:
        # g(E) = E (1 - ln E) + O(E^2)
        E = S
        for _ in range(60):
            E_new = S / (1.0 - math.log(E)) if E > 0 else 0.0
            if E_new == E:
                break
            E = E_new
        return E
    # g(E) >= E below E = 0.58, and g(0.58) > 1/2
    hi = S if S < 0.5 else math.exp(S)
    lo = 0.5 * hi
    while g(lo) >= S:
        lo *= 1e-3
    for _ in range(400):
        mid = math.sqrt(lo) * math.sqrt(hi)
        if g(mid) < S:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-7 * hi:
            break
    E = math.sqrt(lo) * math.sqrt(hi)
    for _ in range(20):
        step = (g(E) - S) / _g_prime(E)
        E_new = min(max(E - step, lo), hi)
        if abs(E_new - E) <= 1e-15 * E:
            E = E_new
            break
        E = E_new
    return E


def bound_f(x: float) -> float:
    """Minimum single-mode Wehrl entropy at von Neumann entropy ``x``."""
    if x < 0:
        raise DomainError("bound_f is defined for x >= 0")
    return math.log1p(g_inv(x)) + 1.0


def _clamped_eigenvalues(rho) -> np.ndarray:
    lam = rho.eigenvalues() if isinstance(rho, DensityOperator) else np.linalg.eigvalsh(rho)
    if lam[0] < -NEGATIVE_EIGEN_LIMIT:
        raise NotAStateError(f"negative eigenvalue {lam[0]:.3g}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho: DensityOperator) -> float:
    lam = _clamped_eigenvalues(rho)
    return float(-np.sum(xlogy(lam, lam)))


def schatten_norm(rho: DensityOperator, p: float) -> float:
    if not p >= 1:
        raise DomainError(f"Schatten norm needs p >= 1, got {p!r}")
    lam = _clamped_eigenvalues(rho)
    if math.isinf(p):
        return float(lam.max())
    return float(np.sum(lam**p) ** (1.0 / p))


def coherent_amplitudes(z: np.ndarray, dim: int) -> np.ndarray:
    """Single-mode Fock amplitudes <n|z>, n < dim, for an array of points.

    Returns shape ``z.shape + (dim,)``. Computed in log space so large |z|
    does not overflow.
    """
    z = np.asarray(z, dtype=complex)
    n = np.arange(dim)
    r = np.abs(z)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(r)
        log_mag = -0.5 * r**2 + n * log_r - 0.5 * gammaln(n + 1)
    log_mag = np.where((r == 0) & (n == 0), 0.0, log_mag)
    phase = np.exp(1j * n * np.angle(z)[..., None])
    return np.exp(log_mag) * phase


def coherent_tail(z, cutoff) -> float:
    """Probability mass of |z> outside the cutoff (Poisson tail per mode)."""
    zz = as_amplitude(z)
    cutoff = as_cutoff(cutoff, modes=zz.size)
    per_mode = gammainc(cutoff.dim, np.abs(zz) ** 2)
    if zz.size == 1:
        return float(per_mode[0])
    return float(1.0 - np.prod(1.0 - per_mode))


def coherent_vector(z, cutoff) -> np.ndarray:
    """Truncated coherent state |z>; raises if more than half the norm is lost."""
    zz = as_amplitude(z)
    cutoff = as_cutoff(cutoff, modes=zz.size)
    if zz.size != cutoff.modes:
        raise DomainError(f"amplitude has {zz.size} modes, cutoff has {cutoff.modes}")
    tail = coherent_tail(zz, cutoff)
    if tail > 0.5:
        raise TruncationError(f"coherent state |z|^2={np.sum(np.abs(zz)**2):.3g} loses {tail:.3g} at dim={cutoff.dim}")
    amps = coherent_amplitudes(zz, cutoff.dim)
    vec = amps[0]
    for k in range(1, zz.size):
        vec = np.kron(vec, amps[k])
    return vec


@functools.lru_cache(maxsize=16)
def _generator_eigensystem(size: int) -> tuple[np.ndarray, np.ndarray]:
    # i(a^dag - a) is real symmetric tridiagonal after the basis phase i^n.
    off = np.sqrt(np.arange(1, size))
    evals, evecs = eigh_tridiagonal(np.zeros(size), off)
    return evals, evecs


def displacement_blocks(alphas, out_dim: int, in_dim: int) -> np.ndarray:
    """Blocks <a|D(alpha)|n>, a < out_dim, n < in_dim, for a batch of single-mode amplitudes.

    D(r e^{i phi}) = R(phi) exp(r (a^dag - a)) R(phi)^dag with
    R(phi) = diag(e^{i n phi}); the real part is diagonalized once on an
    enlarged space so the returned entries carry no truncation error.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    r_max = float(np.max(np.abs(alphas), initial=0.0))
    size = out_dim + in_dim + int(math.ceil(r_max * r_max + 12.0 * r_max)) + 48
    evals, evecs = _generator_eigensystem(size)
    # with P = diag(i^n): P^dag (a^dag - a) P = -i T, T the symmetric tridiagonal
    ph = (1j) ** np.arange(size)
    left = ph[:out_dim, None] * evecs[:out_dim]
    right = (ph[:in_dim, None] * evecs[:in_dim]).conj()
    out = np.empty((alphas.size, out_dim, in_dim), dtype=complex)
    n_out, n_in = np.arange(out_dim), np.arange(in_dim)
    for i, alpha in enumerate(alphas):
        r, phi = abs(alpha), float(np.angle(alpha))
        block = (left * np.exp(-1j * r * evals)) @ right.T
        out[i] = np.exp(1j * phi * n_out)[:, None] * block * np.exp(-1j * phi * n_in)[None, :]
    return out


def _displacement_single(alpha: complex, out_dim: int, in_dim: int) -> np.ndarray:
    return displacement_blocks([alpha], out_dim, in_dim)[0]


def displacement_matrix(z, cutoff, out_dim: int | None = None) -> np.ndarray:
    """Block of the displacement operator D(z) on levels below the cutoff.

    The entries are those of the infinite-dimensional operator (no
    truncation error); the block is unitary only up to the leakage of the
    displaced states past ``out_dim``.
    """
    zz = as_amplitude(z)
    cutoff = as_cutoff(cutoff, modes=zz.size)
    if zz.size != cutoff.modes:
        raise DomainError(f"amplitude has {zz.size} modes, cutoff has {cutoff.modes}")
    out_dim = cutoff.dim if out_dim is None else int(out_dim)
    mat = _displacement_single(zz[0], out_dim, cutoff.dim)
    for k in range(1, zz.size):
        mat = np.kron(mat, _displacement_single(zz[k], out_dim, cutoff.dim))
    return mat


def passive_rearrangement(rho: DensityOperator) -> DensityOperator:
    """Fock-diagonal state with the spectrum of ``rho`` sorted nonincreasing."""
    if rho.modes != 1:
        raise DomainError("passive rearrangement is defined for one mode")
    lam = np.clip(rho.eigenvalues(), 0.0, None)
    order = np.argsort(-lam, kind="stable")
    return DensityOperator(rho.cutoff, np.diag(lam[order]).astype(complex), rho.tail_bound)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from QR of a complex Ginibre matrix with phase fix."""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    return q * (d / np.abs(d))


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_isospectral_state(spec: Spectrum | Sequence[float], cutoff, seed) -> DensityOperator:
    """U diag(spec) U^dag with U Haar on the truncated space (numpy PCG64 seeded)."""
    if not isinstance(spec, Spectrum):
        spec = Spectrum.from_values(spec)
    cutoff = as_cutoff(cutoff)
    n = cutoff.size
    if len(spec) > n:
        raise DomainError(f"spectrum of length {len(spec)} does not fit in {n} levels")
    lam = np.zeros(n)
    lam[: len(spec)] = spec.probs
    u = haar_unitary(n, as_rng(seed))
    m = (u * lam) @ u.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(cutoff, m, max(0.0, 1.0 - float(lam.sum())))


def random_spectrum(dim: int, rng) -> Spectrum:
    """Flat-Dirichlet spectrum of length ``dim``."""
    rng = as_rng(rng)
    return Spectrum.from_values(rng.dirichlet(np.ones(dim)))


def random_state(dim: int, seed, modes: int = 1) -> DensityOperator:
    rng = as_rng(seed)
    cutoff = FockCutoff(dim, modes)
    return random_isospectral_state(random_spectrum(cutoff.size, rng), cutoff, rng)


def tensor(*states: DensityOperator) -> DensityOperator:
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise DomainError("tensor product needs equal per-mode cutoffs")
    m = states[0].matrix
    keep = 1.0 - states[0].tail_bound
    for s in states[1:]:
        m = np.kron(m, s.matrix)
        keep *= 1.0 - s.tail_bound
    modes = sum(s.modes for s in states)
    return DensityOperator(FockCutoff(dims.pop(), modes), m, max(0.0, 1.0 - keep))


def partial_trace_last(rho: DensityOperator) -> DensityOperator:
    """Trace out the last mode."""
    d, M = rho.dim, rho.modes
    if M < 2:
        raise DomainError("need at least two modes")
    rest = d ** (M - 1)
    t = rho.matrix.reshape(rest, d, rest, d)
    return DensityOperator(FockCutoff(d, M - 1), np.einsum("iaja->ij", t), rho.tail_bound)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity (Tr |sqrt(rho) sqrt(sigma)|)^2 on a common cutoff."""
    a, b = _common_matrices(rho, sigma)
    s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(np.sum(s) ** 2)


def trace_distance(rho, sigma) -> float:
    """Trace norm of the difference (no factor 1/2)."""
    a, b = _common_matrices(rho, sigma)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T)))))


def _common_matrices(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    b = sigma.matrix if isinstance(sigma, DensityOperator) else np.asarray(sigma, dtype=complex)
    if a.shape == b.shape:
        return a, b
    if isinstance(rho, DensityOperator) and rho.modes > 1:
        raise DomainError("padding to a common cutoff is implemented for one mode")
    n = max(a.shape[0], b.shape[0])
    pa = np.zeros((n, n), dtype=complex)
    pb = np.zeros((n, n), dtype=complex)
    pa[: a.shape[0], : a.shape[0]] = a
    pb[: b.shape[0], : b.shape[0]] = b
    return pa, pb
