"""Multi-solution solvers and the coupling-threshold estimator.

``newton_deflated`` runs damped Newton on the coefficient-space system

    G(u) = K(||u||^2) A u - lam b_f(u) - mu b_g(u) = 0

whose Jacobian is K(||u||^2) A + 2 K'(||u||^2) (Au)(Au)^T - lam db_f - mu db_g;
the nonlocal coefficient contributes the rank-one term, applied through a
Sherman-Morrison update of the sparse factorization.  Found roots are removed
by multiplicative deflation so later starts converge elsewhere.

``estimate_threshold`` minimizes the ratio of the diffusion energy to the
source potential over trial functions with positive potential.  Every control
quantity in the search is invariant under rescaling the source term, so
scaling f by c > 0 scales the estimate by exactly 1/c on identical seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .errors import FeasibilityError
from .fem import (
    AssembledOperators,
    FeFunction,
    a_distance,
    dirichlet_eigenpairs,
    h1_norm,
    zero_function,
)
from .model import KirchhoffLaw, Nonlinearity, probe_profiles, scale_nonlinearity
from .variational import (
    EnergyBreakdown,
    diffusion_energy,
    energy_breakdown,
    invert_diffusion_gradient,
    load_tangent,
    load_vector,
    perturbation_energy,
    perturbation_gradient,
    source_energy,
    source_gradient,
)


@dataclass(frozen=True)
class Problem:
    """One two-parameter problem instance on an assembled mesh."""

    ops: AssembledOperators
    law: KirchhoffLaw
    source: Nonlinearity
    perturbation: Optional[Nonlinearity] = None
    lam: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.mu != 0.0 and self.perturbation is None:
            raise ValueError("mu != 0 requires a perturbation term")


@dataclass(frozen=True)
class SolverOptions:
    accept_tol: float = 1e-8
    max_iter: int = 100
    damping_floor: float = 2.0**-20
    distinct_tol: float = 1e-3
    deflation_shift: float = 1.0
    fixed_point_tol: float = 1e-10
    fixed_point_max_iter: int = 500
    descent_max_iter: int = 500
    max_solutions: int = 20


@dataclass(frozen=True)
class CriticalPoint:
    u: FeFunction
    residual_norm: float
    energies: EnergyBreakdown
    iterations: int
    origin: str
    converged: bool = True


@dataclass(frozen=True)
class SolutionSet:
    """Distinct critical points of one problem, sorted by total energy."""

    points: tuple
    distinct_tol: float
    lam: float
    mu: float
    failures: tuple = ()

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def max_norm(self) -> float:
        return max((p.energies.norm for p in self.points), default=0.0)

    def min_pairwise_distance(self, ops: AssembledOperators) -> float:
        best = math.inf
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                best = min(best, a_distance(ops, self.points[i].u, self.points[j].u))
        return best


@dataclass(frozen=True)
class DivergenceReport:
    reason: str
    iterations: int
    last_norm: float
    last_step: float
    residual_norm: Optional[float] = None


def _system_state(problem: Problem, x: np.ndarray):
    """Residual vector G(x), stiffness image A x, squared norm and K value."""
    ops = problem.ops
    ax = ops.stiffness @ x
    s = float(x @ ax)
    k = float(problem.law.coefficient(s))
    g = k * ax
    u = FeFunction(ops.mesh, x)
    if problem.lam != 0.0:
        g = g - problem.lam * load_vector(ops, problem.source, u)
    if problem.mu != 0.0:
        g = g - problem.mu * load_vector(ops, problem.perturbation, u)
    return g, ax, s, k


def _residual_a_norm(problem: Problem, g: np.ndarray) -> float:
    """Energy norm of the residual representative, sqrt(G' A^-1 G)."""
    return float(np.sqrt(max(g @ problem.ops._solve(g), 0.0)))


def _deflation_factor(ops, x: np.ndarray, roots: Sequence[np.ndarray], shift: float) -> float:
    m = 1.0
    for r in roots:
        d2 = float((x - r) @ (ops.stiffness @ (x - r)))
        if d2 == 0.0:
            return math.inf
        m *= 1.0 / d2 + shift
    return m


def _deflation_grad_ratio(ops, x: np.ndarray, roots: Sequence[np.ndarray], shift: float) -> np.ndarray:
    """grad(m)/m for the multiplicative deflation factor."""
    out = np.zeros_like(x)
    for r in roots:
        diff = x - r
        adiff = ops.stiffness @ diff
        d2 = float(diff @ adiff)
        out -= 2.0 * adiff / (d2 * (shift * d2 + 1.0))
    return out


def _merit(problem, x, roots, shift) -> float:
    g, _, _, _ = _system_state(problem, x)
    m = _deflation_factor(problem.ops, x, roots, shift)
    return m * float(np.linalg.norm(g))


def _newton_run(problem: Problem, x0: np.ndarray, roots: Sequence[np.ndarray], opts: SolverOptions):
    """Damped Newton with multiplicative deflation; returns (x, iters, ok, reason)."""
    ops = problem.ops
    x = np.array(x0, dtype=float)
    for it in range(opts.max_iter + 1):
        g, ax, s, k = _system_state(problem, x)
        if not np.all(np.isfinite(g)):
            return x, it, False, "non-finite residual"
        if _residual_a_norm(problem, g) <= opts.accept_tol:
            return x, it, True, "converged"
        if it == opts.max_iter:
            break

        sparse_part = k * ops.stiffness
        u = FeFunction(ops.mesh, x)
        if problem.lam != 0.0:
            sparse_part = sparse_part - problem.lam * load_tangent(ops, problem.source, u)
        if problem.mu != 0.0:
            sparse_part = sparse_part - problem.mu * load_tangent(ops, problem.perturbation, u)
        sigma = 2.0 * problem.law.derivative_at(s)
        try:
            lu = spla.splu(sparse_part.tocsc())
        except RuntimeError:
            return x, it, False, "singular jacobian"
        sg = lu.solve(-g)
        if sigma != 0.0:
            sw = lu.solve(ax)
            denom = 1.0 + sigma * float(ax @ sw)
            if abs(denom) < 1e-14:
                return x, it, False, "singular jacobian"
            delta = sg - (sigma * float(ax @ sg) / denom) * sw
        else:
            delta = sg
        if not np.all(np.isfinite(delta)):
            return x, it, False, "singular jacobian"

        if roots:
            eta = _deflation_grad_ratio(ops, x, roots, opts.deflation_shift)
            denom = 1.0 - float(eta @ delta)
            if abs(denom) < 1e-12:
                return x, it, False, "singular deflated jacobian"
            delta = delta / denom

        base = _merit(problem, x, roots, opts.deflation_shift)
        alpha = 1.0
        accepted = False
        while alpha >= opts.damping_floor:
            trial = x + alpha * delta
            if _merit(problem, trial, roots, opts.deflation_shift) <= (1.0 - 1e-4 * alpha) * base:
                x = trial
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return x, it, False, "damping floor"
    return x, opts.max_iter, False, "max iterations"


def _make_point(problem: Problem, x: np.ndarray, iterations: int, origin: str) -> CriticalPoint:
    u = FeFunction(problem.ops.mesh, x)
    g, _, _, _ = _system_state(problem, x)
    return CriticalPoint(
        u=u,
        residual_norm=_residual_a_norm(problem, g),
        energies=energy_breakdown(problem.ops, problem.law, problem.source, problem.perturbation, u),
        iterations=iterations,
        origin=origin,
    )


def newton_deflated(
    problem: Problem,
    starts: Sequence[FeFunction],
    opts: SolverOptions = SolverOptions(),
    known_roots: Sequence[FeFunction] = (),
) -> SolutionSet:
    """Find distinct roots from every start, deflating each root as it is found.

    After each new root the start list is replayed against the enlarged
    deflation set until a full pass adds nothing.  ``known_roots`` are
    deflated from the outset but never reported.
    """
    ops = problem.ops
    roots = [np.array(r.coeffs, dtype=float) for r in known_roots]
    found: list[CriticalPoint] = []
    failures: list[tuple[int, str]] = []

    def dist_to_roots(x: np.ndarray) -> float:
        if not roots:
            return math.inf
        return min(
            float(np.sqrt(max((x - r) @ (ops.stiffness @ (x - r)), 0.0))) for r in roots
        )

    zero = np.zeros(ops.n_interior)
    g0, _, _, _ = _system_state(problem, zero)
    if _residual_a_norm(problem, g0) <= opts.accept_tol and dist_to_roots(zero) > opts.distinct_tol:
        found.append(_make_point(problem, zero, 0, "newton"))
        roots.append(zero)

    progress = True
    while progress and len(found) < opts.max_solutions:
        progress = False
        for idx, start in enumerate(starts):
            if len(found) >= opts.max_solutions:
                break
            x0 = np.asarray(start.coeffs, dtype=float)
            if dist_to_roots(x0) <= opts.distinct_tol:
                continue
            x, iters, ok, reason = _newton_run(problem, x0, roots, opts)
            if ok and dist_to_roots(x) > opts.distinct_tol:
                found.append(_make_point(problem, x, iters, "newton"))
                roots.append(x)
                progress = True
            elif not ok:
                failures.append((idx, reason))

    found.sort(key=lambda p: (p.energies.total(problem.lam, problem.mu), p.energies.norm))
    return SolutionSet(
        points=tuple(found),
        distinct_tol=opts.distinct_tol,
        lam=problem.lam,
        mu=problem.mu,
        failures=tuple(failures),
    )


def fixed_point_solve(
    problem: Problem, u0: FeFunction, opts: SolverOptions = SolverOptions()
):
    """Iterate u <- T(lam J'(u) + mu Psi'(u)) where T inverts the diffusion gradient.

    No convergence guarantee exists for this map; non-convergence yields a
    structured :class:`DivergenceReport`, never an exception.
    """
    ops = problem.ops
    x = FeFunction(ops.mesh, np.array(u0.coeffs, dtype=float))
    step = math.inf
    for it in range(1, opts.fixed_point_max_iter + 1):
        v = zero_function(ops.mesh)
        if problem.lam != 0.0:
            v = v + problem.lam * source_gradient(ops, problem.source, x)
        if problem.mu != 0.0:
            v = v + problem.mu * perturbation_gradient(ops, problem.perturbation, x)
        xn = invert_diffusion_gradient(ops, problem.law, v)
        if not np.all(np.isfinite(xn.coeffs)):
            return DivergenceReport("non-finite iterate", it, h1_norm(ops, x), step)
        step = a_distance(ops, xn, x)
        norm_prev = h1_norm(ops, x)
        x = xn
        if h1_norm(ops, x) > 1e8:
            return DivergenceReport("norm blow-up", it, h1_norm(ops, x), step)
        if step <= opts.fixed_point_tol * (1.0 + norm_prev):
            g, _, _, _ = _system_state(problem, x.coeffs)
            res = _residual_a_norm(problem, g)
            if res <= opts.accept_tol:
                point = _make_point(problem, x.coeffs, it, "fixed_point")
                return point
            return DivergenceReport(
                "stationary iterate fails the residual check", it, h1_norm(ops, x), step, res
            )
    return DivergenceReport(
        "max iterations", opts.fixed_point_max_iter, h1_norm(ops, x), step
    )


def minimize_energy(
    problem: Problem, u0: FeFunction, opts: SolverOptions = SolverOptions()
) -> CriticalPoint:
    """Gradient descent with Armijo backtracking on the total energy.

    The descent direction is the negative residual representative, so an
    accepted stationary point passes the weak-form residual check.
    """
    ops = problem.ops

    def total(x: FeFunction) -> float:
        e = diffusion_energy(ops, problem.law, x)
        if problem.lam != 0.0:
            e -= problem.lam * source_energy(ops, problem.source, x)
        if problem.mu != 0.0:
            e -= problem.mu * perturbation_energy(ops, problem.perturbation, x)
        return e

    x = FeFunction(ops.mesh, np.array(u0.coeffs, dtype=float))
    e = total(x)
    best = (e, x, math.inf, 0)
    alpha = 1.0
    for it in range(1, opts.descent_max_iter + 1):
        g, _, _, _ = _system_state(problem, x.coeffs)
        r = FeFunction(ops.mesh, ops._solve(g))
        rn2 = float(g @ r.coeffs)
        rn = math.sqrt(max(rn2, 0.0))
        if rn < best[2]:
            best = (e, x, rn, it - 1)
        if rn <= opts.accept_tol * (1.0 + abs(e)):
            return CriticalPoint(
                u=x,
                residual_norm=rn,
                energies=energy_breakdown(ops, problem.law, problem.source, problem.perturbation, x),
                iterations=it - 1,
                origin="energy_min",
            )
        alpha = min(alpha * 4.0, 1e6)
        accepted = False
        while alpha >= 2.0**-40:
            trial = x - alpha * r
            et = total(trial)
            if et <= e - 1e-4 * alpha * rn2:
                x, e = trial, et
                accepted = True
                break
            alpha *= 0.5
        if not accepted or h1_norm(ops, x) > 1e8:
            break
    e_best, x_best, rn_best, it_best = best
    return CriticalPoint(
        u=x_best,
        residual_norm=rn_best,
        energies=energy_breakdown(ops, problem.law, problem.source, problem.perturbation, x_best),
        iterations=it_best,
        origin="energy_min",
        converged=False,
    )


# ---------------------------------------------------------------------------
# threshold estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdOptions:
    n_eigen: int = 5
    n_random: int = 8
    t_min: float = 1e-3
    t_max: float = 1e3
    t_per_decade: int = 10
    golden_iters: int = 48
    polish_iters: int = 60
    seed: int = 0


@dataclass(frozen=True)
class ThresholdEstimate:
    """One-sided (upper) bound for the coupling threshold with its minimizer.

    ``value`` is the running minimum of the energy ratio over every probe
    with positive source potential evaluated during the run, and equals the
    ratio at ``minimizer`` exactly.
    """

    value: float
    minimizer: FeFunction
    mesh_id: str
    diagnostics: dict = field(default_factory=dict)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def estimate_threshold(
    ops: AssembledOperators,
    law: KirchhoffLaw,
    nl: Nonlinearity,
    opts: ThresholdOptions = ThresholdOptions(),
    extra_probes: Sequence[FeFunction] = (),
) -> ThresholdEstimate:
    """Minimize primitive(||u||^2) / (2 * source potential) over probes with
    positive potential: eigenfunction directions, library profiles, seeded
    random fields and optional caller-supplied probes, each amplitude-scanned,
    refined by golden section and finally polished by projected descent."""
    rng = np.random.default_rng(opts.seed)
    n = ops.n_interior
    mesh = ops.mesh

    state = {"best": math.inf, "argmin": None, "evaluations": 0}

    def ratio(x: np.ndarray) -> Optional[float]:
        u = FeFunction(mesh, x)
        j = source_energy(ops, nl, u)
        state["evaluations"] += 1
        if not j > 0.0:
            return None
        s = float(x @ (ops.stiffness @ x))
        val = law.primitive_at(s) / (2.0 * j)
        if val < state["best"]:
            state["best"] = val
            state["argmin"] = np.array(x)
        return val

    directions: list[np.ndarray] = []
    v0 = rng.standard_normal(n)
    k = min(opts.n_eigen, n)
    if k >= 1:
        _, vecs = dirichlet_eigenpairs(ops, k, v0=v0)
        for i in range(vecs.shape[1]):
            directions.append(vecs[:, i])
            directions.append(-vecs[:, i])
    for profile in probe_profiles(mesh).values():
        directions.append(np.array(profile.coeffs))
    for _ in range(opts.n_random):
        directions.append(rng.standard_normal(n))
    for probe in extra_probes:
        directions.append(np.array(probe.coeffs, dtype=float))

    def ratio_or_inf(x: np.ndarray) -> float:
        r = ratio(x)
        return math.inf if r is None else r

    ts = np.logspace(
        math.log10(opts.t_min),
        math.log10(opts.t_max),
        int(round((math.log10(opts.t_max) - math.log10(opts.t_min)) * opts.t_per_decade)) + 1,
    )
    scan_best = []
    for v in directions:
        nv = math.sqrt(max(float(v @ (ops.stiffness @ v)), 0.0))
        if nv == 0.0:
            continue
        v = v / nv
        vals = np.array([ratio_or_inf(t * v) for t in ts])
        if not np.any(np.isfinite(vals)):
            scan_best.append(None)
            continue
        i = int(np.argmin(vals))
        step = ts[1] / ts[0]
        lo = ts[i - 1] if i > 0 else ts[i] / step
        hi = ts[i + 1] if i + 1 < ts.size else ts[i] * step
        a, b = math.log(lo), math.log(hi)
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc = ratio_or_inf(math.exp(c) * v)
        fd = ratio_or_inf(math.exp(d) * v)
        for _ in range(opts.golden_iters):
            if fc <= fd:
                b, d, fd = d, c, fc
                c = b - _GOLDEN * (b - a)
                fc = ratio_or_inf(math.exp(c) * v)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLDEN * (b - a)
                fd = ratio_or_inf(math.exp(d) * v)
        scan_best.append(float(min(vals[i], fc, fd)))

    if state["argmin"] is None:
        raise FeasibilityError(
            "no probe produced a positive source potential; refine the mesh or "
            "widen the amplitude scan"
        )

    # projected-gradient polish; every control quantity is invariant under
    # scaling the source term, so rescaled runs retrace the same iterates
    x = np.array(state["argmin"])
    accepted = 0
    rho = ratio(x)
    for _ in range(opts.polish_iters):
        u = FeFunction(mesh, x)
        j = source_energy(ops, nl, u)
        s = float(x @ (ops.stiffness @ x))
        kt = law.primitive_at(s)
        gj = source_gradient(ops, nl, u).coeffs
        grad = (float(law.coefficient(s)) / j) * x - (kt / (2.0 * j * j)) * gj
        d = -grad / rho
        gn2 = float(grad @ (ops.stiffness @ grad))
        slope = -gn2 / rho
        dn = math.sqrt(max(float(d @ (ops.stiffness @ d)), 0.0))
        if dn == 0.0:
            break
        alpha = math.sqrt(s) / dn
        r_new = None
        for _ in range(40):
            r_new = ratio(x + alpha * d)
            if r_new is not None and r_new <= rho + 1e-4 * alpha * slope:
                break
            r_new = None
            alpha *= 0.5
        if r_new is None:
            break
        x = x + alpha * d
        accepted += 1
        stalled = rho - r_new <= 1e-14 * rho
        rho = r_new
        if stalled:
            break

    minimizer = FeFunction(mesh, state["argmin"])
    return ThresholdEstimate(
        value=state["best"],
        minimizer=minimizer,
        mesh_id=mesh.describe(),
        diagnostics={
            "seed": opts.seed,
            "directions": len(directions),
            "evaluations": state["evaluations"],
            "scan_best": scan_best,
            "polish_accepted": accepted,
            "source_potential": source_energy(ops, nl, minimizer),
        },
    )


def scale_invariance_check(
    ops: AssembledOperators,
    law: KirchhoffLaw,
    nl: Nonlinearity,
    c: float,
    opts: ThresholdOptions = ThresholdOptions(),
) -> dict:
    """Rerun the estimator with the source scaled by c on identical seeds; the
    estimate must scale by exactly 1/c within 1e-6 relative."""
    if not c > 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    base = estimate_threshold(ops, law, nl, opts)
    scaled = estimate_threshold(ops, law, scale_nonlinearity(nl, c), opts)
    expected = base.value / c
    disc = abs(scaled.value - expected)
    tol = 1e-6 * base.value
    return {
        "scale": c,
        "base_value": base.value,
        "scaled_value": scaled.value,
        "expected": expected,
        "discrepancy": disc,
        "tolerance": tol,
        "ok": disc <= tol,
    }


def standard_starts(
    ops: AssembledOperators,
    n_random: int = 12,
    seed: int = 0,
    amplitudes: Sequence[float] = (0.5, 1.5, 3.0),
    threshold_minimizer: Optional[FeFunction] = None,
) -> list[FeFunction]:
    """Start library: zero, signed eigenfunction multiples, library profiles,
    seeded Gaussian nodal fields, and the threshold minimizer rescaled."""
    mesh = ops.mesh
    rng = np.random.default_rng(seed)
    starts = [zero_function(mesh)]
    k = min(3, ops.n_interior)
    _, vecs = dirichlet_eigenpairs(ops, k, v0=rng.standard_normal(ops.n_interior))
    for i in range(vecs.shape[1]):
        v = vecs[:, i]
        v = v / np.max(np.abs(v))
        for amp in amplitudes:
            starts.append(FeFunction(mesh, amp * v))
            starts.append(FeFunction(mesh, -amp * v))
    for profile in probe_profiles(mesh).values():
        for amp in amplitudes:
            starts.append(amp * profile)
    for _ in range(n_random):
        starts.append(FeFunction(mesh, rng.standard_normal(ops.n_interior)))
    if threshold_minimizer is not None:
        for c in (0.5, 1.0, 2.0):
            starts.append(c * threshold_minimizer)
    return starts
