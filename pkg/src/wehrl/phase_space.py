"""Phase-space integrals against the measure d^{2M}z / pi^M.

Single-mode integrals use polar coordinates with t = |z|^2, so that
``d^2z/pi = dt dtheta/(2 pi)``: composite Gauss-Legendre panels in t
(geometrically graded towards t = 0) and a uniform angular grid. Husimi
functions are evaluated on the angular grid through their Fourier
coefficients, which are finite because the operator lives on finitely
many Fock levels. Multi-mode integrals use tensor products of single-mode
schemes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaincc, gammaln

from wehrl.errors import AccuracyError, DomainError, PreconditionError
from wehrl.fock_core import DensityOperator, as_amplitude, coherent_amplitudes
from wehrl.functionals import IDENTITY, XLOGX, ConvexFunction, as_function, power, trace_function

TAIL_TOL = 1e-13
DEFAULT_TOL = 1e-9
GL_ORDER = 12
MAX_REFINEMENTS = 6


class Integral(NamedTuple):
    value: float
    error: float

    def __float__(self) -> float:
        return float(self.value)


@dataclass
class QuadratureScheme:
    """Nodes and weights for the integral over C^M with measure d^{2M}z/pi^M.

    ``mode`` is ``"radial"`` (polar grid, t = |z|^2) or ``"cartesian"``
    (Gauss-Legendre in Re z and Im z); multi-mode schemes are tensor
    products and keep the mode of their factors.
    """

    mode: str
    nodes: np.ndarray  # (N, M) complex
    weights: np.ndarray  # (N,)
    radius: float
    t_nodes: np.ndarray | None = field(default=None, repr=False)
    t_weights: np.ndarray | None = field(default=None, repr=False)
    n_angles: int = 0

    def __post_init__(self):
        if self.mode not in ("radial", "cartesian"):
            raise DomainError(f"unknown quadrature mode {self.mode!r}")
        self.nodes = np.asarray(self.nodes, dtype=complex)
        if self.nodes.ndim == 1:
            self.nodes = self.nodes[:, None]
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")

    @property
    def modes(self) -> int:
        return self.nodes.shape[1]

    def calibration(self) -> float:
        """Sum of w_i exp(-|z_i|^2); 1 up to the radial cutoff tail."""
        return float(self.weights @ np.exp(-np.sum(np.abs(self.nodes) ** 2, axis=1)))

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))


def radial_panels(T: float, n_panels: int, order: int = GL_ORDER, grading: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, T].

    The first uniform panel is split geometrically towards 0 so that
    integrands like t ln t are resolved.
    """
    h = T / n_panels
    breaks = np.concatenate(([0.0], h * 2.0 ** -np.arange(grading, 0, -1), h * np.arange(1, n_panels + 1)))
    x, w = leggauss(order)
    a, b = breaks[:-1], breaks[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def radial_scheme(T: float, n_panels: int, n_angles: int, order: int = GL_ORDER) -> QuadratureScheme:
    t, wt = radial_panels(T, n_panels, order)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    z = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w = np.repeat(wt / n_angles, n_angles)
    return QuadratureScheme("radial", z, w, math.sqrt(T), t, wt, n_angles)


def cartesian_scheme(R: float, n_panels: int, order: int = GL_ORDER) -> QuadratureScheme:
    breaks = np.linspace(-R, R, n_panels + 1)
    x, w = leggauss(order)
    mid, half = 0.5 * (breaks[:-1] + breaks[1:]), 0.5 * np.diff(breaks)
    xs = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    z = (xs[:, None] + 1j * xs[None, :]).ravel()
    wz = (ws[:, None] * ws[None, :]).ravel() / np.pi
    return QuadratureScheme("cartesian", z, wz, R)


def product_scheme(*schemes: QuadratureScheme) -> QuadratureScheme:
    nodes, weights = schemes[0].nodes, schemes[0].weights
    for s in schemes[1:]:
        n1, n2 = nodes.shape[0], s.nodes.shape[0]
        nodes = np.concatenate(
            [np.repeat(nodes, n2, axis=0), np.tile(s.nodes, (n1, 1))], axis=1
        )
        weights = np.outer(weights, s.weights).ravel()
    return QuadratureScheme(schemes[0].mode, nodes, weights, max(s.radius for s in schemes))


# --- Husimi evaluation -------------------------------------------------------


def _amplitude_moduli(r: np.ndarray, dim: int) -> np.ndarray:
    """|<n|z>| for |z| = r, shape (len(r), dim)."""
    n = np.arange(dim)
    with np.errstate(divide="ignore"):
        log_r = np.log(r)[:, None]
    logs = -0.5 * r[:, None] ** 2 + n * log_r - 0.5 * gammaln(n + 1)
    logs = np.where((r[:, None] == 0) & (n == 0), 0.0, logs)
    return np.exp(logs)


def fourier_coefficients(matrix: np.ndarray, r: np.ndarray) -> np.ndarray:
    """c_k(r), k = 0..d-1, with <z|A|z> = Re[c_0 + 2 sum_k c_k e^{i k theta}] at z = r e^{i theta}."""
    d = matrix.shape[0]
    a = _amplitude_moduli(np.asarray(r, dtype=float), d)
    c = np.empty((a.shape[0], d), dtype=complex)
    for k in range(d):
        c[:, k] = (a[:, : d - k] * a[:, k:]) @ np.diagonal(matrix, offset=k)
    return c


def grid_values(coeffs: np.ndarray, n_angles: int) -> np.ndarray:
    """Evaluate the Fourier series on a uniform angular grid, shape (Nr, n_angles)."""
    nr, d = coeffs.shape
    if n_angles < d:
        raise DomainError(f"need at least {d} angles to resolve {d} Fourier modes")
    spec = np.zeros((nr, n_angles), dtype=complex)
    spec[:, 0] = coeffs[:, 0]
    spec[:, 1:d] = 2.0 * coeffs[:, 1:]
    return np.real(np.fft.ifft(spec, axis=1)) * n_angles


def husimi_eval(rho: DensityOperator, z) -> float:
    """Q(rho)(z) = <z|rho|z>, exact for the truncated operator."""
    zz = as_amplitude(z)
    if zz.size != rho.modes:
        raise DomainError(f"point has {zz.size} modes, state has {rho.modes}")
    return float(husimi_values(rho.matrix, zz[None, :], rho.dim)[0])


def husimi_values(matrix: np.ndarray, nodes: np.ndarray, dim: int, chunk: int = 20000) -> np.ndarray:
    """<z|A|z> for each row of ``nodes`` (shape (N, M))."""
    nodes = np.asarray(nodes, dtype=complex)
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    out = np.empty(nodes.shape[0])
    for start in range(0, nodes.shape[0], chunk):
        block = nodes[start : start + chunk]
        v = coherent_amplitudes(block[:, 0], dim)
        for k in range(1, block.shape[1]):
            v = np.einsum("ni,nj->nij", v, coherent_amplitudes(block[:, k], dim)).reshape(block.shape[0], -1)
        out[start : start + chunk] = np.real(np.einsum("ni,ij,nj->n", v.conj(), matrix, v))
    return out


def _support_dim(matrix: np.ndarray) -> int:
    diag = np.abs(np.diagonal(matrix))
    nz = np.nonzero(diag > 0)[0]
    return int(nz[-1]) + 1 if nz.size else 1


def radial_extent(d_eff: int, scale: float = 1.0, tail: float = TAIL_TOL) -> float:
    """t-range beyond which a Husimi-type integrand from ``d_eff`` levels is negligible.

    Uses <z|A|z> <= P(Poisson(t) < d_eff) for 0 <= A <= I and a tail
    estimate of the form d_eff * B(T) * (1 + |ln B(T)|).
    """
    T = float(d_eff) + 10.0
    for _ in range(200):
        b = float(gammaincc(d_eff, T / scale))
        est = scale * d_eff * b * (1.0 + abs(math.log(b))) if b > 0 else 0.0
        if est < tail:
            return T
        T *= 1.15
    raise AccuracyError("could not bound the radial tail")


@dataclass
class _RadialProblem:
    """Integrand f(phi(r, theta)) on the polar grid, phi given by Fourier coefficients."""

    coeffs_at: Callable[[np.ndarray], np.ndarray]
    T: float
    d_modes: int
    isotropic: bool


def _radial_integral(problem: _RadialProblem, f: ConvexFunction, tol: float, max_refinements: int = MAX_REFINEMENTS) -> Integral:
    T = problem.T
    panels = max(8, int(math.ceil(T / 4.0)))
    angles = 1 if problem.isotropic else int(2 ** math.ceil(math.log2(max(2 * problem.d_modes, 16))))

    def evaluate(n_panels: int, n_angles: int) -> float:
        t, w = radial_panels(T, n_panels)
        c = problem.coeffs_at(np.sqrt(t))
        if problem.isotropic:
            vals = f(np.real(c[:, 0]))
        else:
            vals = f(grid_values(c, n_angles)).mean(axis=1)
        return float(w @ vals)

    prev = evaluate(panels, angles)
    radial_err = math.inf
    for _ in range(max_refinements):
        panels *= 2
        cur = evaluate(panels, angles)
        radial_err = abs(cur - prev)
        prev = cur
        if radial_err <= 0.5 * tol:
            break
    else:
        raise AccuracyError(f"radial quadrature did not converge: last change {radial_err:.3g} > {0.5 * tol:.3g}")
    angular_err = 0.0
    if not problem.isotropic:
        angular_err = math.inf
        for _ in range(max_refinements):
            angles *= 2
            cur = evaluate(panels, angles)
            angular_err = abs(cur - prev)
            prev = cur
            if angular_err <= 0.5 * tol:
                break
        else:
            raise AccuracyError(f"angular quadrature did not converge: last change {angular_err:.3g} > {0.5 * tol:.3g}")
    return Integral(prev, radial_err + angular_err + TAIL_TOL)


def _operator_problem(matrix: np.ndarray, scale: float = 1.0) -> _RadialProblem:
    """phi(z) = <z/scale|A|z/scale> as a radial problem."""
    d_eff = _support_dim(matrix)
    m = matrix[:d_eff, :d_eff]
    diagonal = not np.any(np.abs(m - np.diag(np.diagonal(m))) > 0)
    return _RadialProblem(
        coeffs_at=lambda r: fourier_coefficients(m, r / scale),
        T=radial_extent(d_eff, scale**2),
        d_modes=d_eff,
        isotropic=diagonal,
    )


def default_product_scheme(rho: DensityOperator, refine: int = 0) -> QuadratureScheme:
    d_eff = rho.dim
    T = radial_extent(d_eff)
    n_panels = max(4, int(math.ceil(T / 6.0))) * 2**refine
    n_angles = int(2 ** math.ceil(math.log2(max(2 * d_eff, 8)))) * 2**refine
    single = radial_scheme(T, n_panels, n_angles, order=8)
    return product_scheme(*([single] * rho.modes))


def convex_functional(rho: DensityOperator, f, tol: float = DEFAULT_TOL, scheme: QuadratureScheme | None = None) -> Integral:
    """Integral of f(<z|rho|z>) d^{2M}z/pi^M with an error estimate.

    One mode: adaptive polar quadrature (angular grid skipped for
    Fock-diagonal states). Several modes, or an explicit ``scheme``: fixed
    product scheme, error estimated against one refinement level.
    """
    f = as_function(f)
    if scheme is None and rho.modes == 1:
        return _radial_integral(_operator_problem(rho.matrix), f, tol)
    if scheme is None and rho.modes == 2:
        return _two_mode_integral(rho, f, tol)
    if scheme is not None:
        vals = f(husimi_values(rho.matrix, scheme.nodes, rho.dim))
        return Integral(scheme.integrate(vals), math.nan)
    coarse = default_product_scheme(rho, 0)
    fine = default_product_scheme(rho, 1)
    v0 = coarse.integrate(f(husimi_values(rho.matrix, coarse.nodes, rho.dim)))
    v1 = fine.integrate(f(husimi_values(rho.matrix, fine.nodes, rho.dim)))
    err = abs(v1 - v0)
    if err > tol:
        raise AccuracyError(f"product quadrature change {err:.3g} exceeds {tol:.3g}")
    return Integral(v1, err)


def _two_mode_blocks(matrix: np.ndarray, dim: int, z: np.ndarray, chunk: int):
    """Yield (start, Q[start:start+chunk, :]) on the product grid z x z.

    Contracts one mode at a time: cost N d^4 + N^2 d^2 instead of N^2 d^4,
    memory O(chunk N).
    """
    v = coherent_amplitudes(np.asarray(z, dtype=complex), dim)
    rho4 = matrix.reshape(dim, dim, dim, dim)  # [i1, i2, j1, j2]
    x = np.einsum("ai,ikjl,aj->akl", v.conj(), rho4, v, optimize=True)
    for start in range(0, v.shape[0], chunk):
        t = np.tensordot(x[start : start + chunk], v.T, axes=(2, 0))  # [a, k, b]
        yield start, np.real(np.einsum("bk,akb->ab", v.conj(), t))


def two_mode_values(matrix: np.ndarray, dim: int, z: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Q(z_a, z_b) on the product grid z x z, shape (N, N)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((z.size, z.size))
    for start, block in _two_mode_blocks(matrix, dim, z, chunk):
        out[start : start + block.shape[0]] = block
    return out


TWO_MODE_MAX_LEVEL = 3


def _two_mode_integral(rho: DensityOperator, f: ConvexFunction, tol: float) -> Integral:
    d = rho.dim
    T = radial_extent(d)

    def evaluate(level: int) -> float:
        t, wt = radial_panels(T, max(4, int(math.ceil(T / 8.0))) * 2**level, order=8, grading=6)
        n_angles = int(2 ** math.ceil(math.log2(2 * d))) * 2**level
        theta = 2 * np.pi * np.arange(n_angles) / n_angles
        z = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
        w = np.repeat(wt / n_angles, n_angles)
        total = 0.0
        for start, block in _two_mode_blocks(rho.matrix, d, z, 128):
            total += float(w[start : start + block.shape[0]] @ (f(np.clip(block, 0.0, None)) @ w))
        return total

    prev = evaluate(0)
    err = math.inf
    for level in range(1, TWO_MODE_MAX_LEVEL + 1):
        cur = evaluate(level)
        err = abs(cur - prev)
        if err <= tol:
            return Integral(cur, err + TAIL_TOL)
        prev = cur
    raise AccuracyError(f"two-mode quadrature change {err:.3g} exceeds {tol:.3g}")


def wehrl_entropy(rho: DensityOperator, tol: float = DEFAULT_TOL, scheme: QuadratureScheme | None = None) -> Integral:
    r = convex_functional(rho, XLOGX, tol, scheme)
    return Integral(-r.value, r.error)


def husimi_q_norm(rho: DensityOperator, q: float, tol: float = DEFAULT_TOL) -> Integral:
    """L^q norm of the Husimi function; the error is propagated to first order."""
    if not q >= 1:
        raise DomainError(f"q must be >= 1, got {q!r}")
    r = convex_functional(rho, IDENTITY if q == 1 else power(q), tol)
    val = r.value ** (1.0 / q)
    err = r.error * val / (q * r.value) if r.value > 0 else r.error
    return Integral(val, err)


# --- Husimi field export -----------------------------------------------------


@dataclass
class HusimiField:
    source: DensityOperator
    scheme: QuadratureScheme
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.scheme.modes != self.source.modes:
            raise DomainError("scheme and state have different numbers of modes")
        self.values = husimi_values(self.source.matrix, self.scheme.nodes, self.source.dim)

    def evaluator(self, z) -> float:
        return husimi_eval(self.source, z)

    def normalization(self) -> float:
        return self.scheme.integrate(self.values)

    def to_csv(self, path) -> None:
        M = self.scheme.modes
        header = ["z_re", "z_im"] if M == 1 else [c for k in range(M) for c in (f"z{k}_re", f"z{k}_im")]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header + ["weight", "Q"])
            for node, wt, q in zip(self.scheme.nodes, self.scheme.weights, self.values):
                coords = [f"{x:.17g}" for zk in node for x in (zk.real, zk.imag)]
                w.writerow(coords + [f"{wt:.17g}", f"{q:.17g}"])


def husimi_field(rho: DensityOperator, scheme: QuadratureScheme | None = None) -> HusimiField:
    if scheme is None:
        scheme = default_product_scheme(rho)
    return HusimiField(rho, scheme)


# --- Berezin-Lieb inequalities ----------------------------------------------


def _check_unit_interval_operator(A: np.ndarray, atol: float = 1e-10) -> None:
    if np.max(np.abs(A - A.conj().T), initial=0.0) > atol:
        raise PreconditionError("operator is not Hermitian")
    lam = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    if lam[0] < -atol or lam[-1] > 1 + atol:
        raise PreconditionError(f"operator spectrum [{lam[0]:.3g}, {lam[-1]:.3g}] not inside [0, 1]")


def _operator_matrix(A) -> np.ndarray:
    return A.matrix if isinstance(A, DensityOperator) else np.asarray(A, dtype=complex)


def berezin_lieb_lower_check(A, f, tol: float = DEFAULT_TOL):
    """Integral of f(<z|A|z>) against Tr f(A) for 0 <= A <= I (one mode)."""
    from wehrl.theorem_lab import VerificationReport

    f = as_function(f)
    m = _operator_matrix(A)
    _check_unit_interval_operator(m)
    lhs = _radial_integral(_operator_problem(m), f, tol)
    rhs = trace_function(m, f)
    return VerificationReport.inequality(
        "berezin_lieb_lower",
        {"f": f.name, "dim": m.shape[0]},
        lhs=lhs.value,
        rhs=rhs,
        budget=lhs.error + 1e-9,
    )


def function_operator(phi: "PhaseFunction", dim: int, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Block of the operator integral of phi(z)|z><z| on levels < dim.

    Entries are computed with the same adaptive polar quadrature used for
    scalar integrals; returns the matrix and the mass it misses
    (integral of phi minus its trace).
    """
    T = max(phi.extent, 1.0)
    panels = max(8, int(math.ceil(T / 4.0)))
    n_angles = int(2 ** math.ceil(math.log2(max(2 * (phi.fourier_modes + dim), 16))))

    def build(n_panels):
        t, w = radial_panels(T, n_panels)
        r = np.sqrt(t)
        c = phi.coeffs_at(r)  # phi = Re[c0 + 2 sum c_k e^{ik th}]
        a = _amplitude_moduli(r, dim)
        op = np.zeros((dim, dim), dtype=complex)
        # angular mean of phi e^{i(m-n)th} picks c_{n-m} for n >= m
        ck = np.zeros((c.shape[0], dim), dtype=complex)
        kk = min(dim, c.shape[1])
        ck[:, :kk] = c[:, :kk]
        for k in range(dim):
            diag_vals = (w[:, None] * a[:, : dim - k] * a[:, k:] * ck[:, k][:, None]).sum(axis=0)
            idx = np.arange(dim - k)
            op[idx, idx + k] = diag_vals
            op[idx + k, idx] = np.conj(diag_vals)
        return op

    prev = build(panels)
    for _ in range(MAX_REFINEMENTS):
        panels *= 2
        cur = build(panels)
        change = float(np.max(np.abs(cur - prev)))
        prev = cur
        if change <= tol:
            break
    else:
        raise AccuracyError("operator quadrature did not converge")
    total = _radial_integral(phi.problem(), IDENTITY, tol).value
    missing = max(0.0, total - float(np.real(np.trace(prev))))
    return prev, missing


@dataclass
class PhaseFunction:
    """phi(z) = scale_value * <z/scale|A|z/scale>, a [0, 1]-valued phase-space function."""

    matrix: np.ndarray
    scale: float = 1.0
    amplitude: float = 1.0

    def problem(self) -> _RadialProblem:
        base = _operator_problem(self.matrix, self.scale)
        amp = self.amplitude
        return _RadialProblem(lambda r: amp * base.coeffs_at(r), base.T, base.d_modes, base.isotropic)

    @property
    def extent(self) -> float:
        return self.problem().T

    @property
    def fourier_modes(self) -> int:
        return _support_dim(self.matrix)

    def coeffs_at(self, r: np.ndarray) -> np.ndarray:
        return self.problem().coeffs_at(r)

    def __call__(self, z) -> float:
        zz = as_amplitude(z) / self.scale
        return self.amplitude * float(husimi_values(self.matrix, zz[None, :], self.matrix.shape[0])[0])


def berezin_lieb_upper_check(phi: PhaseFunction | None, f, dim: int | None = None, tol: float = DEFAULT_TOL):
    """Tr f(integral of phi |z><z|) against the integral of f(phi); needs f(0) = 0."""
    from wehrl.theorem_lab import VerificationReport

    f = as_function(f)
    if abs(float(f(np.array([0.0]))[0])) > 0:
        raise PreconditionError("upper Berezin-Lieb check needs f(0) = 0")
    if phi is None or not np.any(phi.matrix) or phi.amplitude == 0:
        return VerificationReport.inequality("berezin_lieb_upper", {"f": f.name, "phi": "zero"}, 0.0, 0.0, 1e-9)
    if dim is None:
        T = phi.extent
        dim = int(math.ceil(T + 10.0 * math.sqrt(T) + 20))
    op, missing = function_operator(phi, dim, tol)
    lhs = trace_function(op, f)
    rhs = _radial_integral(phi.problem(), f, tol)
    # mass outside the block can only enter Tr f through values in [0, 1]
    budget = rhs.error + tol * dim + missing * max(1.0, f.derivative_sup if math.isfinite(f.derivative_sup) else 1.0) + 1e-9
    return VerificationReport.inequality(
        "berezin_lieb_upper",
        {"f": f.name, "scale": phi.scale, "amplitude": phi.amplitude, "dim": dim},
        lhs=lhs,
        rhs=rhs.value,
        budget=budget,
    )
