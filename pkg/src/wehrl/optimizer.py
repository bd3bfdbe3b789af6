"""Derivative-free searches over unitary orbits and thermal families."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from wehrl.errors import DomainError
from wehrl.fock_core import (
    DensityOperator,
    FockCutoff,
    Spectrum,
    as_cutoff,
    as_rng,
    bound_f,
    passive_rearrangement,
    random_isospectral_state,
    schatten_norm,
    thermal_state,
    trace_distance,
)
from wehrl.functionals import IDENTITY, XLOGX, ConvexFunction, as_function, power
from wehrl.phase_space import (
    _amplitude_moduli,
    husimi_q_norm,
    radial_extent,
    radial_panels,
    wehrl_entropy,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
STAGNATION = 200
INITIAL_STEP = 0.05
MIN_STEP = 1e-4
PATIENCE = 30
CENTERING_EVERY = 25
DIVERGENCE_PATH = (0.9, 0.99, 0.999)


def golden_section_sup(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section search for a maximum of ``fn`` on [lo, hi].

    The returned value is never below the endpoint values, so a monotone
    function yields its maximizing endpoint.
    """
    if not hi >= lo:
        raise DomainError(f"empty bracket [{lo}, {hi}]")

    def ev(x):
        v = float(fn(x))
        if not math.isfinite(v):
            raise DomainError(f"non-finite objective {v} at {x}")
        return v

    f_lo, f_hi = ev(lo), ev(hi)
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = ev(c), ev(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = ev(d)
    x, v = (c, fc) if fc >= fd else (d, fd)
    for xe, ve in ((lo, f_lo), (hi, f_hi)):
        if ve >= v:
            x, v = xe, ve
    return x, v


class GridFunctional:
    """Integral of f(<z|A|z>) on a fixed polar grid, for fast repeated evaluation.

    The grid is chosen for operators supported on ``dim`` levels; the final
    values reported by the searches come from the adaptive integrator.
    """

    def __init__(self, dim: int, f: ConvexFunction, panels_per_unit: float = 0.15, n_angles: int | None = None):
        self.dim = dim
        self.f = as_function(f)
        T = radial_extent(dim)
        t, w = radial_panels(T, max(4, int(math.ceil(T * panels_per_unit))), order=8, grading=6)
        a = _amplitude_moduli(np.sqrt(t), dim)
        # upper-triangle pairs grouped by offset k = n - m
        self.rows = np.concatenate([np.arange(dim - k) for k in range(dim)])
        self.cols = np.concatenate([np.arange(k, dim) for k in range(dim)])
        self.offsets = np.concatenate(([0], np.cumsum(np.arange(dim, 1, -1))))
        self.products = a[:, self.rows] * a[:, self.cols]
        self.n_angles = n_angles or int(2 ** math.ceil(math.log2(4 * dim)))
        self.weights = w / self.n_angles
        self._xlogx = self.f.name == XLOGX.name

    def __call__(self, matrix: np.ndarray) -> float:
        c = np.add.reduceat(self.products * matrix[self.rows, self.cols], self.offsets, axis=1)
        q = np.fft.irfft(c, n=self.n_angles, axis=1) * self.n_angles
        if self._xlogx:
            q = np.maximum(q, 1e-300)
            vals = q * np.log(q)
        else:
            vals = self.f(np.clip(q, 0.0, None))
        return float(self.weights @ vals.sum(axis=1))


def givens(matrix: np.ndarray, i: int, j: int, theta: float, phi: float) -> np.ndarray:
    """G m G^dag with G the rotation by ``theta`` (phase ``phi``) in the (i, j) plane."""
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    g2 = np.array([[c, -e * s], [np.conj(e) * s, c]])
    out = matrix.copy()
    idx = [i, j]
    out[idx, :] = g2 @ out[idx, :]
    out[:, idx] = out[:, idx] @ g2.conj().T
    return out


@dataclass
class OptimizationTrace:
    objective_history: list[float]
    best_state: DensityOperator
    best_value: float
    target: float
    gap: float
    iterations: int
    seed: int | None
    evaluations: int = 0
    best_error: float = 0.0
    partial: bool = False
    sense: str = "min"
    argmax_z: float | None = None
    proximity: float | None = None  # trace distance to the passive/thermal reference, not asserted
    divergence: list[tuple[float, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iteration,objective\n")
            for i, v in enumerate(self.objective_history):
                fh.write(f"{i},{v:.17g}\n")

    def summary(self) -> dict:
        return {
            "sense": self.sense,
            "best_value": self.best_value,
            "best_error": self.best_error,
            "target": self.target,
            "gap": self.gap,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "partial": self.partial,
            "seed": self.seed,
            "argmax_z": self.argmax_z,
            "proximity": self.proximity,
            "divergence": [list(p) for p in self.divergence],
            "notes": list(self.notes),
        }


def _orbit_search(
    matrix: np.ndarray,
    objective: Callable[[np.ndarray], float],
    rng: np.random.Generator,
    budget: int,
    sign: float,
) -> tuple[np.ndarray, list[float], int, bool]:
    """Strict descent of sign * objective by Givens rotations on random level pairs.

    For each pair, four probes at angle +-s with phases 0 and pi/2 give a
    local gradient and curvature in the rotation plane; a Newton step
    along the steepest phase is then tried with backtracking. The best
    strictly improving candidate is accepted. The probe angle s is
    annealed after PATIENCE consecutive rejections. Every CENTERING_EVERY
    proposals a truncated displacement that moves <a> to 0 is also tried,
    since displaced copies of a minimizer form a nearly flat valley.

    Returns the final matrix, the accepted-value history (objective
    units), the evaluation count and whether the budget ran out before
    stagnation.
    """
    d = matrix.shape[0]
    if d < 2:
        return matrix, [objective(matrix)], 1, False
    cur = sign * objective(matrix)
    history = [sign * cur]
    evals, probe, stale, rejected = 1, INITIAL_STEP, 0, 0

    def ev(i, j, theta, phi):
        nonlocal evals
        trial = givens(matrix, i, j, theta, phi)
        evals += 1
        return sign * objective(trial), trial

    lowering = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    proposals = 0
    while evals + 4 <= budget:
        proposals += 1
        if proposals % CENTERING_EVERY == 0:
            # truncated displacement towards <a> = 0: unitary on the d-level space
            alpha = complex(np.trace(matrix @ lowering))
            moved = False
            for frac in (1.0, 0.5, 0.25):
                beta = frac * alpha
                u = expm(np.conj(beta) * lowering - beta * lowering.conj().T)
                trial = u @ matrix @ u.conj().T
                val = sign * objective(trial)
                evals += 1
                if val < cur:
                    matrix, cur, moved = trial, val, True
                    history.append(sign * cur)
                    stale = rejected = 0
                    break
            if moved:
                continue
        i, j = (int(v) for v in rng.choice(d, size=2, replace=False))
        probes = [ev(i, j, th, ph) for th, ph in ((probe, 0.0), (-probe, 0.0), (probe, 0.5 * math.pi), (-probe, 0.5 * math.pi))]
        (fxp, _), (fxm, _), (fyp, _), (fym, _) = probes
        best_val, best_m = min(probes, key=lambda t: t[0])
        gx, gy = (fxp - fxm) / (2 * probe), (fyp - fym) / (2 * probe)
        gn = math.hypot(gx, gy)
        if gn > 0:
            cxx = (fxp + fxm - 2 * cur) / probe**2
            cyy = (fyp + fym - 2 * cur) / probe**2
            curv = (cxx * gx * gx + cyy * gy * gy) / gn**2
            theta = min(gn / curv, 0.25 * math.pi) if curv > 0 else 2 * probe
            phi = math.atan2(-gy, -gx)
            for _ in range(3):
                if evals >= budget:
                    break
                val, trial = ev(i, j, theta, phi)
                if val < best_val:
                    best_val, best_m = val, trial
                    break
                theta *= 0.5
        if best_val < cur:
            matrix, cur = best_m, best_val
            history.append(sign * cur)
            stale = rejected = 0
            if len(history) % 256 == 0:
                matrix = 0.5 * (matrix + matrix.conj().T)
            continue
        rejected += 1
        if probe <= MIN_STEP:
            stale += 1
            if stale >= STAGNATION:
                return matrix, history, evals, False
        elif rejected >= PATIENCE:
            probe, rejected = max(probe * 0.5, MIN_STEP), 0
    return matrix, history, evals, True


def minimize_wehrl_isospectral(
    spec: Spectrum | Sequence[float],
    cutoff,
    seed=None,
    budget: int = 50_000,
    initial: DensityOperator | None = None,
    tol: float = 1e-9,
) -> OptimizationTrace:
    """Search the unitary orbit of diag(spec) for the smallest Wehrl entropy.

    ``budget`` caps objective evaluations. ``iterations`` counts accepted
    moves, so a start at the optimum reports zero.
    """
    if not isinstance(spec, Spectrum):
        spec = Spectrum.from_values(spec)
    cutoff = as_cutoff(cutoff)
    if cutoff.modes != 1:
        raise DomainError("the orbit search is implemented for one mode")
    if len(spec) > cutoff.dim:
        raise DomainError(f"spectrum of length {len(spec)} does not fit under cutoff {cutoff.dim}")
    rng = as_rng(seed)
    start = initial if initial is not None else random_isospectral_state(spec, cutoff, rng)
    objective = GridFunctional(cutoff.dim, XLOGX)
    m, history, evals, partial = _orbit_search(start.matrix, objective, rng, budget, sign=-1.0)
    # objective integrates x ln x; the Wehrl entropy is its negative
    history = [-v for v in history]
    best = start.with_matrix(0.5 * (m + m.conj().T))
    W = wehrl_entropy(best, tol)
    target = bound_f(spec.entropy())
    trace = OptimizationTrace(
        objective_history=history,
        best_state=best,
        best_value=W.value,
        target=target,
        gap=W.value - target,
        iterations=len(history) - 1,
        seed=seed if isinstance(seed, (int, type(None))) else None,
        evaluations=evals,
        best_error=W.error,
        partial=partial,
        proximity=trace_distance(best, passive_rearrangement(best)),
    )
    if partial:
        trace.notes.append("evaluation budget exhausted before stagnation")
    return trace


def thermal_ratio(z: float, p: float, q: float, cutoff) -> float:
    """Norm ratio of the thermal state truncated (and renormalized) at ``cutoff``."""
    rho = _truncated_thermal(z, as_cutoff(cutoff))
    return husimi_q_norm(rho, q).value / schatten_norm(rho, p)


def _truncated_thermal(z: float, cutoff: FockCutoff) -> DensityOperator:
    probs = (1.0 - z) * z ** np.arange(cutoff.dim)
    probs /= probs.sum()
    return DensityOperator(cutoff, np.diag(probs).astype(complex))


def maximize_norm_ratio(p: float, q: float, cutoff, seed=None, budget: int = 2_000, grid: int = 24) -> OptimizationTrace:
    """Largest ||Q(rho)||_q / ||rho||_p found on the thermal family and its unitary perturbations.

    For p > q the trace carries divergence evidence along z -> 1 instead
    of a maximizer.
    """
    from wehrl.theorem_lab import pq_profile, pq_supremum

    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    cutoff = as_cutoff(cutoff)
    if cutoff.modes != 1:
        raise DomainError("the norm-ratio search is implemented for one mode")
    sup = pq_supremum(p, q)
    if p > q:
        path = [(z, float(pq_profile(z, p, q))) for z in DIVERGENCE_PATH]
        rho = _truncated_thermal(DIVERGENCE_PATH[-1], cutoff)
        return OptimizationTrace(
            objective_history=[v for _, v in path],
            best_state=rho,
            best_value=math.inf,
            target=math.inf,
            gap=math.nan,
            iterations=0,
            seed=seed if isinstance(seed, (int, type(None))) else None,
            sense="max",
            divergence=path,
            notes=["p > q: the thermal-family ratio grows without bound as z -> 1"],
        )
    # the truncation must hold the thermal state well: keep z^dim small
    z_max = min(0.999, 1e-3 ** (1.0 / cutoff.dim))
    zs = np.linspace(0.0, z_max, grid)
    vals = [thermal_ratio(z, p, q, cutoff) for z in zs]
    i = int(np.argmax(vals))
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, grid - 1)]
    z_best, v_best = golden_section_sup(lambda z: thermal_ratio(z, p, q, cutoff), lo, hi, 1e-4)
    if vals[i] > v_best:
        z_best, v_best = float(zs[i]), float(vals[i])
    history = [float(v) for v in np.maximum.accumulate(vals)] + [max(v_best, max(vals))]
    start = _truncated_thermal(z_best, cutoff)
    # the Schatten norm is orbit-invariant, so only the Husimi norm moves
    f = IDENTITY if q == 1 else power(q)
    objective = GridFunctional(cutoff.dim, f)
    rng = as_rng(seed)
    norm_p = schatten_norm(start, p)
    m, hist2, evals, partial = _orbit_search(start.matrix, objective, rng, budget, sign=-1.0)
    best = start.with_matrix(0.5 * (m + m.conj().T))
    val = husimi_q_norm(best, q)
    best_value = val.value / norm_p
    history += [max(history[-1], v ** (1.0 / q) / norm_p) for v in hist2[1:]]
    return OptimizationTrace(
        objective_history=history,
        best_state=best,
        best_value=best_value,
        target=sup.value,
        gap=sup.value - best_value,
        iterations=len(hist2) - 1,
        seed=seed if isinstance(seed, (int, type(None))) else None,
        evaluations=evals + grid,
        best_error=val.error / norm_p,
        partial=partial,
        sense="max",
        argmax_z=z_best,
        proximity=trace_distance(best, start),
    )


def _restart(args):
    spec, dim, seed, budget = args
    return minimize_wehrl_isospectral(spec, FockCutoff(dim), seed, budget)


def restarts(spec, dim: int, seeds: Sequence[int], budget: int = 50_000, jobs: int = 1) -> list[OptimizationTrace]:
    """Independent restarts, in parallel when ``jobs`` > 1; results follow ``seeds`` order."""
    tasks = [(spec, dim, s, budget) for s in seeds]
    if jobs <= 1:
        return [_restart(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_restart, tasks))


__all__ = [
    "GridFunctional",
    "OptimizationTrace",
    "golden_section_sup",
    "givens",
    "maximize_norm_ratio",
    "minimize_wehrl_isospectral",
    "restarts",
    "thermal_ratio",
]
