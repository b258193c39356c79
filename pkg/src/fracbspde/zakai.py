"""Fractional Zakai filter, adjoint equation, Hamiltonian, and control search.

The unnormalized conditional density p of the partially observed jump
diffusion follows

    dp = [-a(t) (-Delta)^(alpha/2) p - D(k p)] dt + h p dY,

driven by the observation Y, a Brownian motion under the reference measure;
a(t) = |mu(t)|^alpha comes from the jump scale.  Time stepping splits the
generator: an exact spectral factor for the fractional diffusion, a
conservative dealiased spectral transport step, and the exact multiplicative
(geometric) observation update, which is positivity-preserving.

The adjoint pair (q, l) solves the backward equation

    dq = [-L* q - f - h l] dt + l dY,   q(T) = g,

with L* the computed L2 adjoint of L phi = -a (-Delta)^(alpha/2) phi
- D(k phi), namely L* phi = -a (-Delta)^(alpha/2) phi + k D phi.  The other
reading of the adjoint's transport term, (Dk) phi, is exposed behind a flag
for side-by-side comparison but breaks discrete duality and is not used.

The Hamiltonian H(t, v, p, q) = <f(t,.,v), p> - <D(k(t,.,v) p), q> feeds the
pointwise optimality check for brute-force optimal open-loop policies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BlowUp,
    BudgetExceeded,
    PositivityViolation,
    StabilityError,
)
from .fraclap import check_alpha, frac_lap_multiplier
from .grid import Grid1D
from .kernel import CoefficientA, eval_A
from .regression import design_matrix, project_expectation

__all__ = [
    "ControlProblem",
    "ControlPolicy",
    "ZakaiState",
    "AdjointState",
    "apply_L",
    "apply_L_star",
    "duality_defect",
    "solve_zakai",
    "CostEstimate",
    "cost_functional",
    "solve_adjoint",
    "hamiltonian",
    "BruteForceResult",
    "brute_force_optimal_control",
    "MaxPrincipleReport",
    "verify_maximum_principle",
]

ControlField = Callable[[float, float], np.ndarray]  # (t, control value) -> field


@dataclass
class ControlProblem:
    """Partially observed control problem on the periodic grid.

    k(t, v) and f(t, v) map a time and a control value to field arrays;
    h(t) maps a time to the observation field; g is the terminal cost
    weight; p0 the initial density (nonnegative, unit mass).  The diffusion
    coefficient is a(t) = |mu(t)|^alpha.
    """

    grid: Grid1D
    alpha: float
    T: float
    mu: Callable[[float], float]
    k: ControlField
    h: Callable[[float], np.ndarray]
    f: ControlField
    g: np.ndarray
    U: tuple[float, ...]
    p0: np.ndarray

    def __post_init__(self):
        check_alpha(self.alpha)
        self.g = np.asarray(self.g, dtype=float)
        self.p0 = np.asarray(self.p0, dtype=float)
        if self.p0.min() < 0:
            raise PositivityViolation("initial density must be nonnegative")
        mass = float(np.sum(self.p0) * self.grid.dx)
        if abs(mass - 1.0) > 1e-8:
            raise PositivityViolation(
                f"initial density mass {mass} differs from 1 on the truncated domain"
            )
        if len(self.U) == 0:
            raise ValueError("control set U is empty")
        ts = np.linspace(0.0, self.T, 257)
        a_vals = np.array([abs(self.mu(t)) ** self.alpha for t in ts])
        if a_vals.min() <= 0:
            raise PositivityViolation("jump scale mu vanishes; a(t) must be positive")
        self.a = CoefficientA(
            lambda t: np.abs(np.vectorize(self.mu)(t)) ** self.alpha,
            float(a_vals.min()),
            float(a_vals.max()),
        )


@dataclass(frozen=True)
class ControlPolicy:
    """Open-loop piecewise-constant policy on [0, T]."""

    edges: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.edges) != len(self.values) + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("edges must be strictly increasing")

    def value_at(self, t: float) -> float:
        i = int(np.searchsorted(self.edges, t, side="right")) - 1
        return self.values[min(max(i, 0), len(self.values) - 1)]

    @classmethod
    def constant(cls, v: float, T: float) -> "ControlPolicy":
        return cls(edges=(0.0, T), values=(v,))

    @classmethod
    def uniform(cls, values: Sequence[float], T: float) -> "ControlPolicy":
        m = len(values)
        return cls(edges=tuple(np.linspace(0.0, T, m + 1)), values=tuple(values))


@dataclass
class ZakaiState:
    grid: Grid1D
    times: np.ndarray
    p: np.ndarray  # (paths, times, n)
    meta: dict = field(default_factory=dict)

    def p_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.p[:, i, :]

    def mass(self) -> np.ndarray:
        """Total mass per (path, time)."""
        return self.p.sum(axis=2) * self.grid.dx


@dataclass
class AdjointState:
    grid: Grid1D
    times: np.ndarray
    q: np.ndarray  # (paths, times, n)
    l: np.ndarray
    l_se: np.ndarray  # (times,) aggregate fitted-value standard error for l
    meta: dict = field(default_factory=dict)

    def q_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.q[:, i, :]

    def l_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.l[:, i, :]


# --- operators -----------------------------------------------------------------


def _fraclap(vals: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return np.real(np.fft.ifft(lam * np.fft.fft(vals, axis=-1), axis=-1))


def _deriv(vals: np.ndarray, grid: Grid1D) -> np.ndarray:
    mult = 1j * grid.xi
    mult[grid.n // 2] = 0.0
    return np.real(np.fft.ifft(mult * np.fft.fft(vals, axis=-1), axis=-1))


def _dealias_mask(grid: Grid1D) -> np.ndarray:
    k = np.fft.fftfreq(grid.n) * grid.n
    return (np.abs(k) <= grid.n // 3).astype(float)


def apply_L(
    phi: np.ndarray, t: float, v: float, problem: ControlProblem
) -> np.ndarray:
    """L phi = -a(t) (-Delta)^(alpha/2) phi - D(k(t,.,v) phi)."""
    g = problem.grid
    lam = frac_lap_multiplier(g, problem.alpha)
    a_t = float(problem.a(np.asarray([t]))[0])
    k_t = np.asarray(problem.k(t, v), dtype=float)
    return -a_t * _fraclap(phi, lam) - _deriv(k_t * phi, g)


def apply_L_star(
    phi: np.ndarray,
    t: float,
    v: float,
    problem: ControlProblem,
    printed_variant: bool = False,
) -> np.ndarray:
    """Computed adjoint L* phi = -a (-Delta)^(alpha/2) phi + k D phi.

    printed_variant=True evaluates -a (-Delta)^(alpha/2) phi + (Dk) phi
    instead, for side-by-side comparison; that form is not the discrete
    adjoint and violates the duality identity whenever Dk is not constant.
    """
    g = problem.grid
    lam = frac_lap_multiplier(g, problem.alpha)
    a_t = float(problem.a(np.asarray([t]))[0])
    k_t = np.asarray(problem.k(t, v), dtype=float)
    frac = -a_t * _fraclap(phi, lam)
    if printed_variant:
        return frac + _deriv(k_t, g) * phi
    return frac + k_t * _deriv(phi, g)


def duality_defect(
    phi: np.ndarray, psi: np.ndarray, t: float, v: float, problem: ControlProblem
) -> float:
    """|<L phi, psi> - <phi, L* psi>| with grid quadrature."""
    dx = problem.grid.dx
    lhs = float(np.sum(apply_L(phi, t, v, problem) * psi) * dx)
    rhs = float(np.sum(phi * apply_L_star(psi, t, v, problem)) * dx)
    return abs(lhs - rhs)


# --- Zakai time stepping ----------------------------------------------------------


def _zakai_stepper(
    problem: ControlProblem,
    policy: ControlPolicy,
    y_inc: np.ndarray,
    n_steps: int,
    guard: float,
):
    """Generator yielding (step index, t, p) after each full step, p shape (P, n)."""
    g = problem.grid
    lam = frac_lap_multiplier(g, problem.alpha)
    mask = _dealias_mask(g)
    dt = problem.T / n_steps
    times = np.linspace(0.0, problem.T, n_steps + 1)
    n_paths = y_inc.shape[0]
    if y_inc.shape != (n_paths, n_steps):
        raise ValueError(f"observation increments shape {y_inc.shape} != (paths, {n_steps})")

    p = np.broadcast_to(problem.p0, (n_paths, g.n)).copy()
    guard_level = guard * (float(np.abs(problem.p0).max()) + 1.0)

    def flux_derivative(k_field: np.ndarray, vals: np.ndarray) -> np.ndarray:
        spec = np.fft.fft(k_field * vals, axis=-1) * mask
        mult = 1j * g.xi
        mult[g.n // 2] = 0.0
        return np.real(np.fft.ifft(mult * spec, axis=-1))

    yield -1, 0.0, p
    for i in range(n_steps):
        t = times[i]
        # (1) exact spectral fractional-diffusion factor over the step
        dA = eval_A(problem.a, times[i], times[i + 1], n_sub=8)
        p = np.real(np.fft.ifft(np.exp(-dA * lam) * np.fft.fft(p, axis=-1), axis=-1))
        # (2) conservative transport, Heun stage pair on -D(k p)
        v = policy.value_at(t)
        k_field = np.asarray(problem.k(t, v), dtype=float)
        f1 = -flux_derivative(k_field, p)
        p_stage = p + dt * f1
        f2 = -flux_derivative(k_field, p_stage)
        p = p + 0.5 * dt * (f1 + f2)
        # (3) exact multiplicative observation update
        h_field = np.asarray(problem.h(t), dtype=float)
        p = p * np.exp(h_field[None, :] * y_inc[:, i][:, None] - 0.5 * h_field[None, :] ** 2 * dt)
        if not np.all(np.isfinite(p)) or float(np.abs(p).max()) > guard_level:
            raise BlowUp(
                f"density norm exceeded the blow-up guard at step {i + 1}/{n_steps}; "
                "reduce the step size"
            )
        yield i, times[i + 1], p


def _check_transport_cfl(
    problem: ControlProblem, policy: ControlPolicy, n_steps: int
) -> None:
    dt = problem.T / n_steps
    worst = 0.0
    for t in np.linspace(0.0, problem.T, 17):
        k_field = np.asarray(problem.k(t, policy.value_at(t)), dtype=float)
        worst = max(worst, float(np.abs(k_field).max()))
    number = worst * dt / problem.grid.dx
    if number > 1.0:
        raise StabilityError(
            f"transport CFL number {number:.3g} > 1; raise n_steps above "
            f"{int(np.ceil(n_steps * number))}"
        )


def solve_zakai(
    problem: ControlProblem,
    policy: ControlPolicy,
    y_inc: np.ndarray,
    n_steps: int = 64,
    output_times: Sequence[float] | None = None,
    guard: float = 1e6,
) -> ZakaiState:
    """Filter densities along observation paths; y_inc has shape (paths, n_steps)."""
    _check_transport_cfl(problem, policy, n_steps)
    times = np.linspace(0.0, problem.T, n_steps + 1)
    if output_times is None:
        out_idx = np.arange(n_steps + 1)
    else:
        out_idx = np.asarray(
            sorted({int(np.argmin(np.abs(times - t))) for t in output_times}), dtype=int
        )
    n_paths = y_inc.shape[0]
    p_out = np.empty((n_paths, out_idx.size, problem.grid.n))
    pos = {int(i): r for r, i in enumerate(out_idx)}
    for step, t, p in _zakai_stepper(problem, policy, y_inc, n_steps, guard):
        idx = step + 1
        if idx in pos:
            p_out[:, pos[idx], :] = p
    return ZakaiState(
        grid=problem.grid,
        times=times[out_idx],
        p=p_out,
        meta={"n_steps": n_steps, "policy": policy},
    )


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    stderr: float
    per_path: np.ndarray


def cost_functional(
    problem: ControlProblem,
    policy: ControlPolicy,
    y_inc: np.ndarray,
    n_steps: int = 64,
    guard: float = 1e6,
) -> CostEstimate:
    """J = E[int <f(t,.,u_t), p> dt + <g, p(T)>], left-rectangle in time."""
    _check_transport_cfl(problem, policy, n_steps)
    dx = problem.grid.dx
    dt = problem.T / n_steps
    n_paths = y_inc.shape[0]
    running = np.zeros(n_paths)
    p_final = None
    for step, t, p in _zakai_stepper(problem, policy, y_inc, n_steps, guard):
        if step < n_steps - 1:
            # cost integrand at the left point of the coming step
            tl = t
            v = policy.value_at(tl)
            f_field = np.asarray(problem.f(tl, v), dtype=float)
            running += dt * (p @ f_field) * dx
        if step == n_steps - 1:
            p_final = p
    # the loop yields the initial state first; the final yield is p(T)
    terminal = (p_final @ problem.g) * dx
    per_path = running + terminal
    return CostEstimate(
        mean=float(per_path.mean()),
        stderr=float(per_path.std(ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else 0.0,
        per_path=per_path,
    )


# --- adjoint -----------------------------------------------------------------------


def solve_adjoint(
    problem: ControlProblem,
    policy: ControlPolicy,
    y_inc: np.ndarray,
    n_steps: int = 64,
    output_times: Sequence[float] | None = None,
    basis_degree: int = 2,
    n_coarse: int = 6,
    cond_threshold: float = 1e8,
) -> AdjointState:
    """Backward regression scheme for dq = [-L* q - f - h l] dt + l dY, q(T) = g.

    l(t_i) is the regression of q(t_{i+1}) dY_i / dt on path functionals of Y;
    q(t_i) projects q(t_{i+1}) + dt (L* q(t_{i+1}) + f + h l(t_i)).  With
    h == 0 the updates are deterministic and reproduce the backward PDE with
    transport coefficient k.
    """
    g = problem.grid
    lam = frac_lap_multiplier(g, problem.alpha)
    dt = problem.T / n_steps
    times = np.linspace(0.0, problem.T, n_steps + 1)
    stiff = problem.a.upper * float(lam.max()) * dt
    if stiff > 2.0:
        raise StabilityError(
            f"explicit diffusion number a |xi|^alpha dt = {stiff:.3g} > 2; raise "
            f"n_steps above {int(np.ceil(n_steps * stiff / 2))}"
        )
    n_paths = y_inc.shape[0]
    y_cum = np.concatenate(
        [np.zeros((n_paths, 1)), np.cumsum(y_inc, axis=1)], axis=1
    )
    coarse_steps = np.unique(
        np.round(np.linspace(0, n_steps, min(n_coarse, n_steps) + 1)).astype(int)
    )[1:]

    if output_times is None:
        out_idx = np.arange(n_steps + 1)
    else:
        out_idx = np.asarray(
            sorted({int(np.argmin(np.abs(times - t))) for t in output_times}), dtype=int
        )
    pos = {int(i): r for r, i in enumerate(out_idx)}

    q = np.broadcast_to(problem.g, (n_paths, g.n)).copy()
    q_out = np.empty((n_paths, out_idx.size, g.n))
    l_out = np.zeros((n_paths, out_idx.size, g.n))
    l_se_out = np.zeros(out_idx.size)
    if n_steps in pos:
        q_out[:, pos[n_steps], :] = q
    max_cond = 0.0
    for i in range(n_steps - 1, -1, -1):
        t_hi = times[i + 1]
        v_hi = policy.value_at(times[i])
        design = design_matrix(y_cum, i, coarse_steps, basis_degree)
        targets_l = q * (y_inc[:, i][:, None] / dt)
        l_fit, l_se, cond1 = project_expectation(design, targets_l, cond_threshold)
        lq = apply_L_star(q, t_hi, v_hi, problem)
        f_field = np.asarray(problem.f(t_hi, v_hi), dtype=float)
        h_field = np.asarray(problem.h(times[i]), dtype=float)
        target_q = q + dt * (lq + f_field[None, :] + h_field[None, :] * l_fit)
        q, _, cond2 = project_expectation(design, target_q, cond_threshold)
        max_cond = max(max_cond, cond1, cond2)
        if i in pos:
            q_out[:, pos[i], :] = q
            l_out[:, pos[i], :] = l_fit
            l_se_out[pos[i]] = float(np.sqrt(np.mean(l_se**2)))
    return AdjointState(
        grid=g,
        times=times[out_idx],
        q=q_out,
        l=l_out,
        l_se=l_se_out,
        meta={"n_steps": n_steps, "max_design_cond": max_cond, "policy": policy},
    )


# --- Hamiltonian and the maximum principle --------------------------------------------


def hamiltonian(
    t: float,
    v: float,
    p: np.ndarray,
    q: np.ndarray,
    problem: ControlProblem,
) -> np.ndarray | float:
    """H(t, v, p, q) = <f(t,.,v), p> - <D(k(t,.,v) p), q>; vectorized over paths."""
    g = problem.grid
    dx = g.dx
    f_field = np.asarray(problem.f(t, v), dtype=float)
    k_field = np.asarray(problem.k(t, v), dtype=float)
    cost_part = (p @ f_field) * dx
    transport = _deriv(k_field * p, g)
    pairing = np.sum(transport * q, axis=-1) * dx
    out = cost_part - pairing
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class BruteForceResult:
    policy: ControlPolicy
    cost: float
    stderr: float
    table: list[tuple[tuple[float, ...], float, float]]


def brute_force_optimal_control(
    problem: ControlProblem,
    n_intervals: int,
    y_inc: np.ndarray,
    n_steps: int = 64,
    budget: int = 256,
) -> BruteForceResult:
    """Exhaustive search over |U|^m open-loop policies with common paths.

    Ties break toward the lexicographically smallest value tuple.
    """
    n_policies = len(problem.U) ** n_intervals
    if n_policies > budget:
        raise BudgetExceeded(
            f"|U|^m = {n_policies} exceeds the enumeration budget {budget}"
        )
    table = []
    best = None
    for values in itertools.product(sorted(problem.U), repeat=n_intervals):
        policy = ControlPolicy.uniform(values, problem.T)
        est = cost_functional(problem, policy, y_inc, n_steps=n_steps)
        table.append((values, est.mean, est.stderr))
        if best is None or est.mean < best[1] - 1e-15:
            best = (policy, est.mean, est.stderr)
    return BruteForceResult(policy=best[0], cost=best[1], stderr=best[2], table=table)


@dataclass(frozen=True)
class MarginEntry:
    t: float
    v: float
    margin: float
    stderr: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


@dataclass
class MaxPrincipleReport:
    entries: list[MarginEntry]
    worst_margin: float
    discretization_estimate: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def verify_maximum_principle(
    problem: ControlProblem,
    policy: ControlPolicy,
    y_inc: np.ndarray,
    n_steps: int = 64,
    check_times: Sequence[float] | None = None,
    discretization_estimate: float | None = None,
    subsample: int = 512,
) -> MaxPrincipleReport:
    """Check H(t, v, p, q) >= H(t, u_t, p, q) - tol along the given policy.

    Margins are path averages of the Hamiltonian gap at each checked (t, v);
    tol = 3 (stderr + discretization estimate).  When no discretization
    estimate is supplied, the pipeline is re-run at half the step count on a
    path subsample and the worst margin shift is used.
    """
    if check_times is None:
        mids = 0.5 * (np.asarray(policy.edges[:-1]) + np.asarray(policy.edges[1:]))
        check_times = list(mids)

    def margins(paths: np.ndarray, steps: int):
        zak = solve_zakai(problem, policy, paths, n_steps=steps, output_times=check_times)
        adj = solve_adjoint(problem, policy, paths, n_steps=steps, output_times=check_times)
        out = {}
        for t in check_times:
            p_t = zak.p_at(t)
            q_t = adj.q_at(t)
            h_base = hamiltonian(t, policy.value_at(t), p_t, q_t, problem)
            for v in problem.U:
                gap = hamiltonian(t, v, p_t, q_t, problem) - h_base
                out[(t, v)] = (
                    float(np.mean(gap)),
                    float(np.std(gap, ddof=1) / np.sqrt(gap.size)),
                )
        return out

    full = margins(y_inc, n_steps)
    if discretization_estimate is None:
        sub = y_inc[: min(subsample, y_inc.shape[0])]
        if n_steps % 2:
            raise ValueError("n_steps must be even for the internal refinement probe")
        sub_coarse = sub.reshape(sub.shape[0], n_steps // 2, 2).sum(axis=2)
        coarse = margins(sub_coarse, n_steps // 2)
        fine_sub = margins(sub, n_steps)
        discretization_estimate = max(
            abs(fine_sub[key][0] - coarse[key][0]) for key in coarse
        )

    entries = []
    for (t, v), (mean_gap, se) in sorted(full.items()):
        entries.append(
            MarginEntry(
                t=t,
                v=v,
                margin=mean_gap,
                stderr=se,
                tolerance=3.0 * (se + discretization_estimate),
            )
        )
    worst = min(e.margin for e in entries)
    return MaxPrincipleReport(
        entries=entries,
        worst_margin=worst,
        discretization_estimate=float(discretization_estimate),
    )
