"""Executable inequality checks with explicit tolerance budgets.

Every check returns a :class:`VerificationReport`. Budgets are additive:
truncation tail, quadrature error estimate and a fixed slack of 1e-9.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from wehrl import channels
from wehrl.errors import DomainError, PreconditionError, TruncationError
from wehrl.fock_core import (
    DensityOperator,
    FockCutoff,
    Spectrum,
    as_rng,
    bound_f,
    fidelity,
    fock_state,
    g,
    g_inv,
    passive_rearrangement,
    random_isospectral_state,
    random_state,
    schatten_norm,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)
from wehrl.functionals import (
    MAJORIZATION_FAMILY,
    SQUARE,
    ConvexFunction,
    as_function,
    trace_function,
)
from wehrl.phase_space import (
    DEFAULT_TOL,
    PhaseFunction,
    berezin_lieb_lower_check,
    berezin_lieb_upper_check,
    convex_functional,
    husimi_q_norm,
    wehrl_entropy,
)

SLACK = 1e-9
SATURATION_TOL = 1e-4
MAX_AMPLIFIER_DIM = 4096
PQ_GRID = 1000
PQ_ZMAX = 0.999


@dataclass
class VerificationReport:
    name: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    tolerance_budget: float
    series: list[tuple[float, float]] | None = None
    hard: bool = True  # False: conjecture evidence, never a suite failure
    classification: str = "finite"
    saturated: bool | None = None
    notes: list[str] = field(default_factory=list)
    details: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tolerance_budget)

    @classmethod
    def inequality(cls, name: str, inputs: dict, lhs: float, rhs: float, budget: float, **kw) -> "VerificationReport":
        """Report for the claim lhs <= rhs."""
        margin = math.inf if math.isinf(rhs) and rhs > 0 else float(rhs) - float(lhs)
        return cls(name, dict(inputs), float(lhs), float(rhs), margin, float(budget), **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        if self.series is not None:
            d["series"] = [list(p) for p in self.series]
        return _jsonable(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def row(self) -> str:
        status = "PASS" if self.passed else ("FAIL" if self.hard else "EVIDENCE-FAIL")
        return (
            f"{self.name:<28} {fmt(self.lhs):>16} {fmt(self.rhs):>16} "
            f"{fmt(self.margin):>16} {fmt(self.tolerance_budget):>12}  {status}"
        )


def fmt(x: float) -> str:
    """Nine significant digits."""
    if x is None:
        return "-"
    return f"{x:.9g}"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return float(f"{x:.9g}")
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def table(reports: Iterable[VerificationReport]) -> str:
    head = f"{'check':<28} {'lhs':>16} {'rhs':>16} {'margin':>16} {'budget':>12}  status"
    return "\n".join([head, "-" * len(head)] + [r.row() for r in reports])


def _tail_cost(tail: float, f: ConvexFunction) -> float:
    """Bound on how much a probability leak of ``tail`` moves a trace functional."""
    if tail <= 0:
        return 0.0
    if math.isfinite(f.derivative_sup):
        return tail * f.derivative_sup
    return tail * (1.0 + abs(math.log(tail)))


# --- amplifier limit ---------------------------------------------------------


def amplified_trace(rho: DensityOperator, f, kappa: float) -> tuple[float, float]:
    """Tr f(kappa^M A_kappa(rho)) / kappa^M and the output tail bound."""
    f = as_function(f)
    ch = channels.amplifier(kappa, rho.cutoff)
    if ch.out_cutoff.size > MAX_AMPLIFIER_DIM:
        raise TruncationError(
            f"amplifier output needs {ch.out_cutoff.size} levels at kappa={kappa}; limit is {MAX_AMPLIFIER_DIM}"
        )
    out = channels.apply(ch, rho)
    scale = kappa**rho.modes
    m = out.matrix * scale
    if out.is_diagonal():
        val = float(np.sum(f(np.clip(np.real(np.diag(m)), 0.0, 1.0))))
    else:
        val = trace_function(m, f)
    return val / scale, out.tail_bound


def check_HA_limit(rho: DensityOperator, f, kappas: Sequence[float], tol: float = DEFAULT_TOL) -> VerificationReport:
    """Finite-gain amplifier traces against the phase-space integral of f(Q).

    At every gain the trace is an upper bound of the integral (lower
    Berezin-Lieb inequality), and the gap must shrink along the grid. The
    margin is the worst of those two conditions.
    """
    f = as_function(f)
    kappas = [float(k) for k in kappas]
    if not kappas or any(k < 1 for k in kappas) or any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise PreconditionError("kappas must be a nonempty increasing list of values >= 1")
    if abs(float(f(np.array([0.0]))[0])) > 0:
        raise PreconditionError("f(0) must vanish")
    target = convex_functional(rho, f, tol)
    series, budgets = [], []
    for k in kappas:
        val, tail = amplified_trace(rho, f, k)
        series.append((k, val))
        budgets.append(target.error + _tail_cost(tail, f) + SLACK)
    gaps = [v - target.value for _, v in series]
    lower = min(gaps)
    trend = min((gaps[i] - gaps[i + 1] for i in range(len(gaps) - 1)), default=0.0)
    budget = max(budgets)
    notes = []
    if not f.c1:
        notes.append("f is not C^1 on [0, 1]: only the lower half of the limit statement is theorem-backed")
    rep = VerificationReport(
        name="ha_limit",
        inputs={"f": f.name, "kappas": kappas, "dim": rho.dim, "modes": rho.modes},
        lhs=target.value,
        rhs=series[-1][1],
        margin=min(lower, trend),
        tolerance_budget=budget,
        series=series,
        notes=notes,
        details=[{"kappa": k, "value": v, "gap": gp} for (k, v), gp in zip(series, gaps)],
    )
    rep.details.append({"monotone": trend >= -budget, "lower_bound_ok": lower >= -budget})
    return rep


# --- majorization ------------------------------------------------------------


def check_majorization(
    rho: DensityOperator,
    f_family: Sequence = MAJORIZATION_FAMILY,
    seed=None,
    kappas: Sequence[float] = (2.0, 8.0),
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Integral of f(Q) for rho against its passive rearrangement, plus the amplifier version.

    ``seed`` is recorded in the inputs only; the check itself is deterministic.
    """
    if rho.modes != 1:
        raise DomainError("majorization check is defined for one mode")
    passive = passive_rearrangement(rho)
    family = [as_function(f) for f in f_family]
    details = []
    worst, budget = math.inf, 0.0
    lhs_w = rhs_w = 0.0
    for f in family:
        a = convex_functional(rho, f, tol)
        b = convex_functional(passive, f, tol)
        bud = a.error + b.error + SLACK
        m = b.value - a.value
        details.append({"f": f.name, "level": "husimi", "lhs": a.value, "rhs": b.value, "margin": m, "budget": bud})
        if m < worst:
            worst, lhs_w, rhs_w = m, a.value, b.value
        budget = max(budget, bud)
    for k in kappas:
        ch = channels.amplifier(k, rho.cutoff)
        out_a = channels.apply(ch, rho)
        out_b = channels.apply(ch, passive)
        lam_a = np.clip(np.linalg.eigvalsh(k * out_a.matrix), 0.0, 1.0)
        lam_b = np.clip(np.real(np.diag(k * out_b.matrix)), 0.0, 1.0)
        for f in family:
            va, vb = float(np.sum(f(lam_a))) / k, float(np.sum(f(lam_b))) / k
            bud = _tail_cost(out_a.tail_bound, f) + _tail_cost(out_b.tail_bound, f) + SLACK
            m = vb - va
            details.append({"f": f.name, "level": f"amplifier kappa={k:g}", "lhs": va, "rhs": vb, "margin": m, "budget": bud})
            if m < worst:
                worst, lhs_w, rhs_w = m, va, vb
            budget = max(budget, bud)
    return VerificationReport(
        name="majorization",
        inputs={"f_family": [f.name for f in family], "kappas": list(kappas), "dim": rho.dim, "seed": seed},
        lhs=lhs_w,
        rhs=rhs_w,
        margin=worst,
        tolerance_budget=budget,
        details=details,
    )


# --- p -> q norms ------------------------------------------------------------


def pq_profile(z, p: float, q: float):
    """(1 - z^p)^{1/p} / (q^{1/q} (1 - z)^{1/q}): the norm ratio of the thermal state omega_z."""
    z = np.asarray(z, dtype=float)
    return (1.0 - z**p) ** (1.0 / p) / (q ** (1.0 / q) * (1.0 - z) ** (1.0 / q))


@dataclass(frozen=True)
class PQSupremum:
    value: float
    argmax: float | None
    classification: str  # "attained", "limit", "infinite"


def pq_supremum(p: float, q: float, M: int = 1) -> PQSupremum:
    """Supremum over thermal states of the p -> q norm ratio, raised to the power M."""
    from wehrl.optimizer import golden_section_sup

    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    if p > q:
        return PQSupremum(math.inf, None, "infinite")
    zs = np.linspace(0.0, PQ_ZMAX, PQ_GRID)
    vals = pq_profile(zs, p, q)
    i = int(np.argmax(vals))
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, len(zs) - 1)]
    zstar, vstar = golden_section_sup(lambda z: float(pq_profile(z, p, q)), lo, hi, 1e-12)
    vstar = max(vstar, float(vals[i]))
    if p == q:
        # no finite z attains the value; the ratio tends to 1 as z -> 1
        return PQSupremum(1.0, 1.0, "limit")
    return PQSupremum(vstar**M, float(zstar), "attained")


def check_pq_bound(rho: DensityOperator, p: float, q: float, tol: float = DEFAULT_TOL) -> VerificationReport:
    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    M = rho.modes
    num = husimi_q_norm(rho, q, tol)
    den = schatten_norm(rho, p)
    lhs = num.value / den
    sup = pq_supremum(p, q, M)
    budget = num.error / den + SLACK
    hard = M == 1 or p == 1 or p == q
    notes = []
    if sup.classification == "infinite":
        notes.append("p > q: the thermal-family ratio grows without bound as z -> 1")
    if not hard:
        notes.append("multi-mode case with p not in {1, q}: conjecture evidence only")
    return VerificationReport.inequality(
        "pq_bound",
        {"p": p, "q": q, "dim": rho.dim, "modes": M},
        lhs,
        sup.value,
        budget,
        hard=hard,
        classification=sup.classification,
        notes=notes,
        details=[{"argmax_z": sup.argmax, "husimi_norm": num.value, "schatten_norm": den}],
    )


# --- entropy bounds ----------------------------------------------------------


def check_entropy_bound(rho: DensityOperator, tol: float = DEFAULT_TOL) -> VerificationReport:
    M = rho.modes
    S = von_neumann_entropy(rho)
    lhs = M * bound_f(S / M)
    W = wehrl_entropy(rho, tol)
    budget = W.error + _tail_cost(rho.tail_bound, as_function("xlogx")) + SLACK
    rep = VerificationReport.inequality(
        "entropy_bound", {"dim": rho.dim, "modes": M, "S": S}, lhs, W.value, budget
    )
    rep.saturated = bool(abs(rep.margin) <= SATURATION_TOL)
    return rep


def check_epni(rho: DensityOperator, kappa: float) -> VerificationReport:
    """Output entropy of the amplifier against the thermal-input value at equal input entropy."""
    if rho.modes != 1:
        raise DomainError("entropy photon-number check is defined for one mode")
    if kappa < 1:
        raise DomainError("gain must be >= 1")
    S = von_neumann_entropy(rho)
    out = channels.apply(channels.amplifier(kappa, rho.cutoff), rho)
    S_out = von_neumann_entropy(out)
    bound = float(g(kappa * g_inv(S) + kappa - 1.0))
    budget = _tail_cost(out.tail_bound, as_function("xlogx")) + SLACK
    return VerificationReport.inequality(
        "epni", {"kappa": kappa, "dim": rho.dim, "S_in": S}, bound, S_out, budget
    )


# --- appendix lemmas ---------------------------------------------------------


def _unit_interval(A: np.ndarray, atol: float = 1e-10) -> None:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError("operators must be square matrices")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > atol:
        raise PreconditionError("operator is not Hermitian")
    lam = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    if lam[0] < -atol or lam[-1] > 1 + atol:
        raise PreconditionError(f"spectrum [{lam[0]:.3g}, {lam[-1]:.3g}] is not inside [0, 1]")


def check_klein(A, B, f=SQUARE) -> VerificationReport:
    f = as_function(f)
    a = A.matrix if isinstance(A, DensityOperator) else np.asarray(A, dtype=complex)
    b = B.matrix if isinstance(B, DensityOperator) else np.asarray(B, dtype=complex)
    if a.shape != b.shape:
        raise PreconditionError("operators must have the same shape")
    _unit_interval(a)
    _unit_interval(b)
    if not math.isfinite(f.derivative_sup):
        raise PreconditionError("Klein's inequality needs a bounded derivative")
    lhs = trace_function(b, f)
    dist = trace_distance(a, b)
    rhs = trace_function(a, f) + dist * f.derivative_sup
    return VerificationReport.inequality(
        "klein", {"f": f.name, "dim": a.shape[0], "trace_distance": dist}, lhs, rhs, SLACK
    )


def lemma_q_threshold(r: float, q: float) -> float:
    return 1.0 - (r / q) ** (1.0 / (q - 1.0))


def check_lemma_q(r: float, q: float, xs=None) -> VerificationReport:
    """(1 - x)^q <= 1 - r x on [0, x_r]; no slack."""
    if not (1 <= r < q):
        raise DomainError("need 1 <= r < q")
    x_r = lemma_q_threshold(r, q)
    xs = np.linspace(0.0, x_r, 2001) if xs is None else np.asarray(xs, dtype=float)
    if xs.size == 0 or xs.min() < 0 or xs.max() > x_r + 1e-15:
        raise DomainError(f"grid must be nonempty and inside [0, {x_r}]")
    lhs = (1.0 - xs) ** q
    rhs = 1.0 - r * xs
    marg = rhs - lhs
    i = int(np.argmin(marg))
    return VerificationReport(
        "lemma_q", {"r": r, "q": q, "x_r": x_r, "points": int(xs.size)}, float(lhs[i]), float(rhs[i]), float(marg[i]), 0.0
    )


def check_bound_f_convexity(xs=None) -> VerificationReport:
    """bound_f increasing and convex, by first and second differences on a grid in (0, 10]."""
    xs = np.linspace(0.01, 10.0, 1000) if xs is None else np.asarray(xs, dtype=float)
    vals = np.array([bound_f(x) for x in xs])
    first = np.diff(vals)
    second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
    # second differences must be >= 0 up to rounding of three O(1) numbers
    budget = 1e-12
    margin = float(min(first.min(), second.min()))
    return VerificationReport(
        "bound_f_convexity",
        {"x_min": float(xs[0]), "x_max": float(xs[-1]), "points": int(xs.size)},
        0.0,
        margin,
        margin,
        budget,
        details=[{"min_first_difference": float(first.min()), "min_second_difference": float(second.min())}],
    )


def check_random_displacement_trend(rho: DensityOperator, kappas: Sequence[float] = (2.0, 4.0, 8.0, 16.0)) -> VerificationReport:
    """Trace distance between N_kappa(rho) and rho must decrease along the grid."""
    dists = []
    for k in kappas:
        out = channels.apply(channels.random_displacement(k, rho.cutoff), rho)
        dists.append(trace_distance(out, rho))
    steps = [dists[i] - dists[i + 1] for i in range(len(dists) - 1)]
    margin = min(steps, default=0.0)
    rate = None
    if len(dists) >= 2 and min(dists) > 0:
        slope = np.polyfit(np.log(kappas), np.log(dists), 1)[0]
        rate = float(slope)
    return VerificationReport(
        "random_displacement_trend",
        {"kappas": list(kappas), "dim": rho.dim},
        dists[0],
        dists[-1],
        margin,
        SLACK,
        series=list(zip(map(float, kappas), dists)),
        notes=[f"empirical log-log slope {rate:.4g}" if rate is not None else "distance vanished"],
    )


# --- channel identities ------------------------------------------------------


def check_amplifier_thermal(z: float, kappa: float) -> VerificationReport:
    """A_kappa(omega_z) = omega_{z'} with E' = kappa E + kappa - 1; claim: fidelity >= 1 - 1e-8."""
    rho = thermal_state(z, FockCutoff.for_thermal(z, 1e-14))
    out = channels.apply(channels.amplifier(kappa, rho.cutoff), rho)
    E = z / (1.0 - z)
    E_out = kappa * E + kappa - 1.0
    z_out = E_out / (E_out + 1.0)
    ref = thermal_state(z_out, out.cutoff)
    F = fidelity(out, ref)
    return VerificationReport.inequality("amplifier_thermal", {"z": z, "kappa": kappa}, 1.0 - 1e-8, F, 0.0)


def check_attenuator_coherent(alpha: complex, lam: float) -> VerificationReport:
    from wehrl.fock_core import coherent_tail, coherent_vector, pure_state

    dim = 12
    # amplitude errors scale like the square root of the dropped mass
    while coherent_tail(alpha, FockCutoff(dim)) > 1e-24:
        dim += 4
    cut = FockCutoff(dim)
    rho = pure_state(coherent_vector(alpha, cut), cut)
    out = channels.apply(channels.attenuator(lam, cut), rho)
    ref = pure_state(coherent_vector(math.sqrt(lam) * alpha, cut), cut)
    d = trace_distance(out, ref)
    return VerificationReport.inequality(
        "attenuator_coherent", {"alpha": str(complex(alpha)), "lambda": lam, "dim": dim}, d, 1e-10, 0.0
    )


def check_duality(kappa: float, in_dim: int = 8, safe: int | None = None) -> VerificationReport:
    """kappa A_kappa^dag(X) = E_{1/kappa}(X) on the sub-block where both are exactly represented."""
    amp = channels.amplifier(kappa, FockCutoff(in_dim))
    safe = in_dim if safe is None else safe
    att = channels.attenuator(1.0 / kappa, FockCutoff(in_dim))
    worst = 0.0
    for a in range(in_dim):
        for c in range(in_dim):
            X = np.zeros((in_dim, in_dim), dtype=complex)
            X[a, c] = 1.0
            lhs = kappa * channels.dual_apply(amp, X)
            rhs = channels._per_mode(channels._apply_single, att, X, in_dim, in_dim)
            worst = max(worst, float(np.max(np.abs(lhs[:safe, :safe] - rhs[:safe, :safe]))))
    return VerificationReport.inequality("amplifier_attenuator_duality", {"kappa": kappa, "dim": in_dim}, worst, 1e-10, 0.0)


def check_measure_reprepare(kappa: float = 2.0, dim: int = 12, seed=0) -> VerificationReport:
    """M_kappa(rho) = A_kappa(N_kappa(rho)) in trace distance."""
    rho = random_state(dim, seed)
    lhs_state = channels.apply(channels.measure_reprepare(kappa, rho.cutoff), rho)
    rhs_state = channels.compose(
        channels.random_displacement(kappa, rho.cutoff),
        channels.amplifier(kappa, FockCutoff(channels.random_displacement_output_dim(kappa, dim))),
        rho,
    )
    n = max(lhs_state.dim, rhs_state.dim)
    d = trace_distance(channels.embed(lhs_state, n), channels.embed(rhs_state, n))
    return VerificationReport.inequality(
        "measure_reprepare_factorization", {"kappa": kappa, "dim": dim, "seed": seed}, d, 1e-6, 0.0
    )


# --- randomized suites -------------------------------------------------------
#
# A suite is a list of tasks (function, args, labels). Tasks are picklable
# so they can be spread over worker processes; results keep task order.


@dataclass(frozen=True)
class Task:
    fn: Any
    args: tuple = ()
    kwargs: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)


def _run_task(task: Task) -> VerificationReport:
    rep = task.fn(*task.args, **task.kwargs)
    rep.inputs.update(task.labels)
    return rep


def run_tasks(tasks: Sequence[Task], jobs: int = 1) -> list[VerificationReport]:
    if jobs <= 1 or len(tasks) < 2:
        return [_run_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _trial_states(n: int, seed, max_dim: int = 24, min_dim: int = 2) -> list[DensityOperator]:
    rng = as_rng(seed)
    out = []
    for _ in range(n):
        d = int(rng.integers(min_dim, max_dim + 1))
        out.append(random_state(d, rng))
    return out


def check_entropy_saturation(z: float) -> VerificationReport:
    """Thermal states meet the entropy bound: claim |W - bound| <= 1e-4."""
    rep = check_entropy_bound(thermal_state(z, FockCutoff.for_thermal(z, 1e-13)))
    return VerificationReport(
        "entropy_saturation",
        {"z": z, "dim": rep.inputs["dim"]},
        abs(rep.margin),
        SATURATION_TOL,
        SATURATION_TOL - abs(rep.margin),
        0.0,
        saturated=rep.saturated,
    )


def tasks_entropy(trials: int = 200, seed=42, thermal_z: Sequence[float] = (0.0, 0.3, 0.6, 0.9)) -> list[Task]:
    tasks = [Task(check_entropy_bound, (r,), labels={"trial": i, "seed": seed}) for i, r in enumerate(_trial_states(trials, seed))]
    return tasks + [Task(check_entropy_saturation, (z,)) for z in thermal_z]


def tasks_majorization(trials: int = 100, seed=7, max_dim: int = 12) -> list[Task]:
    states = _trial_states(trials, seed, max_dim=max_dim)
    return [Task(check_majorization, (r,), {"seed": seed}, {"trial": i}) for i, r in enumerate(states)]


def tasks_pq(
    trials: int = 100,
    seed=11,
    pairs: Sequence[tuple[float, float]] = ((1, 1), (1, 2), (2, 2), (1.5, 3)),
    max_dim: int = 16,
) -> list[Task]:
    states = _trial_states(trials, seed, max_dim=max_dim)
    tasks = [Task(check_pq_bound, (r, p, q), labels={"trial": i}) for i, r in enumerate(states) for p, q in pairs]
    return tasks + [Task(check_pq_bound, (thermal_state(0.5), 2.0, 1.0), labels={"state": "thermal 0.5"})]


def tasks_epni(trials: int = 50, seed=5, kappas: Sequence[float] = (1.5, 2.0, 4.0), max_dim: int = 12) -> list[Task]:
    states = _trial_states(trials, seed, max_dim=max_dim)
    tasks = [Task(check_epni, (thermal_state(z), k), labels={"state": f"thermal {z:g}"}) for z in (0.0, 0.5) for k in kappas]
    return tasks + [Task(check_epni, (r, k), labels={"trial": i}) for i, r in enumerate(states) for k in kappas]


def random_unit_operator(dim: int, rng) -> np.ndarray:
    """Hermitian operator with Haar eigenvectors and uniform eigenvalues in [0, 1]."""
    from wehrl.fock_core import haar_unitary

    rng = as_rng(rng)
    u = haar_unitary(dim, rng)
    m = (u * rng.uniform(0.0, 1.0, dim)) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def tasks_klein(trials: int = 100, seed=3, dim: int = 8) -> list[Task]:
    rng = as_rng(seed)
    tasks = []
    for i in range(trials):
        a, b = random_unit_operator(dim, rng), random_unit_operator(dim, rng)
        tasks.append(Task(check_klein, (a, b, SQUARE), labels={"trial": i}))
    return tasks


def tasks_lemmas() -> list[Task]:
    tasks = [
        Task(check_lemma_q, (r, q, np.linspace(0.0, lemma_q_threshold(r, q), 20001)))
        for r, q in ((1, 2), (1.5, 3), (2, 5))
    ]
    tasks.append(Task(check_bound_f_convexity))
    tasks.append(Task(check_random_displacement_trend, (fock_state(1, 6),)))
    return tasks


def _upper_from_matrix(matrix, scale, amplitude, f) -> VerificationReport:
    return berezin_lieb_upper_check(PhaseFunction(matrix, scale, amplitude), f)


def tasks_berezin(trials: int = 50, seed=13, max_dim: int = 8) -> list[Task]:
    """Both Berezin-Lieb directions on random operators in [0, I] and random phase functions."""
    rng = as_rng(seed)
    tasks = []
    for i in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        f = MAJORIZATION_FAMILY[i % len(MAJORIZATION_FAMILY)]
        tasks.append(Task(berezin_lieb_lower_check, (random_unit_operator(d, rng), f), labels={"trial": i}))
        m = random_unit_operator(d, rng)
        scale, amp = float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.2, 1.0))
        tasks.append(Task(_upper_from_matrix, (m, scale, amp, f), labels={"trial": i}))
    return tasks


def tasks_channels() -> list[Task]:
    tasks = [Task(check_amplifier_thermal, (z, k)) for z in (0.0, 0.5) for k in (2.0, 4.0)]
    tasks += [Task(check_attenuator_coherent, (a, lam)) for a in (0.0, 1.0 + 0.5j, 2.0j) for lam in (0.3, 0.8)]
    tasks += [Task(check_duality, (k,)) for k in (2.0, 5.0)]
    tasks.append(Task(check_measure_reprepare, (2.0, 12, 0)))
    return tasks


def tasks_ha(states: Sequence[tuple[str, DensityOperator]] | None = None, fs: Sequence = (SQUARE,), kappas=(2, 4, 8, 16, 32)) -> list[Task]:
    if states is None:
        states = [("vacuum", fock_state(0, 2)), ("fock1", fock_state(1, 3))]
    return [Task(check_HA_limit, (rho, f, list(kappas)), labels={"state": label}) for label, rho in states for f in fs]


TASKS = {
    "ha": tasks_ha,
    "majorization": tasks_majorization,
    "pq": tasks_pq,
    "entropy": tasks_entropy,
    "epni": tasks_epni,
    "klein": tasks_klein,
    "lemmas": tasks_lemmas,
    "channels": tasks_channels,
    "berezin": tasks_berezin,
}


def run_suite(name: str, jobs: int = 1, **kwargs) -> list[VerificationReport]:
    try:
        build = TASKS[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(TASKS)}") from None
    return run_tasks(build(**kwargs), jobs)


def hard_failures(reports: Iterable[VerificationReport]) -> list[VerificationReport]:
    return [r for r in reports if r.hard and not r.passed]
