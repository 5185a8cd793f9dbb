"""Problem data: diffusion coefficient laws, source nonlinearities, specimens
and the numerical audit of the structural hypotheses behind the three-solution
phenomenon.

A :class:`KirchhoffLaw` bundles the scalar coefficient K(t) with its primitive,
its growth exponent and a flag saying whether t -> t*K(t^2) is strictly
increasing and onto [0, inf) (the practical criterion for a continuous left
inverse).  A :class:`Nonlinearity` bundles a Caratheodory source term f(x, t)
with its primitive in t and its growth exponent.

Limit conditions cannot be decided by sampling, so the audit reports a
three-valued status (pass / fail / inconclusive) with numeric evidence, and
"fail" always carries a concrete witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import (
    DomainError,
    IntegrationError,
    NoRootError,
    UnsupportedLawError,
)
from .fem import FeFunction, Mesh, assemble, interpolate

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def adaptive_simpson(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0

    def rec(x0, x2, f0, f1, f2, whole, tol, depth):
        x1 = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm, frm = fn(lm), fn(rm)
        left = (x1 - x0) / 6.0 * (f0 + 4.0 * flm + f1)
        right = (x2 - x1) / 6.0 * (f1 + 4.0 * frm + f2)
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        if depth >= max_depth:
            raise IntegrationError(
                f"adaptive quadrature did not converge on [{x0:g}, {x2:g}]"
            )
        return rec(x0, x1, f0, flm, f1, left, 0.5 * tol, depth + 1) + rec(
            x1, x2, f1, frm, f2, right, 0.5 * tol, depth + 1
        )

    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return rec(a, b, fa, fm, fb, whole, tol, 0)


@dataclass(frozen=True)
class KirchhoffLaw:
    """Scalar diffusion coefficient K with primitive and growth data.

    ``coefficient`` maps t >= 0 to K(t) and must accept NumPy arrays.
    ``primitive`` (optional) is the closed form of int_0^t K; ``derivative``
    (optional) is K'.  ``monotone_onto`` asserts that t -> t*K(t^2) is
    strictly increasing and onto [0, inf), which makes :meth:`left_inverse`
    available.
    """

    coefficient: Callable
    growth_exponent: float
    primitive: Optional[Callable] = None
    derivative: Optional[Callable] = None
    monotone_onto: bool = False
    name: str = ""

    def coefficient_at(self, t):
        return self.coefficient(np.asarray(t, dtype=float)) if np.ndim(t) else float(
            self.coefficient(float(t))
        )

    def primitive_at(self, t: float) -> float:
        """int_0^t K(s) ds, closed form when present, adaptive quadrature otherwise."""
        t = float(t)
        if t < 0:
            raise DomainError(f"primitive requires t >= 0, got {t}")
        if t == 0.0:
            return 0.0
        if self.primitive is not None:
            return float(self.primitive(t))
        return adaptive_simpson(lambda s: float(self.coefficient(s)), 0.0, t)

    def derivative_at(self, t: float) -> float:
        """K'(t), closed form when present, else central finite difference."""
        if self.derivative is not None:
            return float(self.derivative(float(t)))
        step = 1e-6 * (1.0 + abs(t))
        lo = max(t - step, 0.0)
        return (float(self.coefficient(t + step)) - float(self.coefficient(lo))) / (
            t + step - lo
        )

    def forward_map(self, t: float) -> float:
        """The scalar map t -> t * K(t^2) inverted by :meth:`left_inverse`."""
        return float(t) * float(self.coefficient(float(t) * float(t)))

    def left_inverse(self, s: float) -> float:
        """Solve t * K(t^2) = s for t >= 0 to |residual| <= 1e-12 (1 + s).

        Bracket expansion by doubling, then bisection, then a Newton polish.
        """
        if not self.monotone_onto:
            raise UnsupportedLawError(
                f"law {self.name or '<anonymous>'} does not declare t*K(t^2) "
                "strictly increasing and onto"
            )
        s = float(s)
        if s < 0:
            raise DomainError(f"left inverse requires s >= 0, got {s}")
        if s == 0.0:
            return 0.0
        hi = 1.0
        while self.forward_map(hi) < s:
            hi *= 2.0
            if hi > 1e12:
                raise NoRootError(
                    f"t*K(t^2) stayed below {s:g} up to t = 1e12; law not onto at this scale"
                )
        lo = 0.0
        for _ in range(200):
            if hi - lo <= 1e-16 * (1.0 + hi):
                break
            mid = 0.5 * (lo + hi)
            if self.forward_map(mid) < s:
                lo = mid
            else:
                hi = mid
        t = 0.5 * (lo + hi)
        tol = 1e-12 * (1.0 + s)
        for _ in range(4):
            r = self.forward_map(t) - s
            if abs(r) <= tol:
                return t
            t2 = float(t) * float(t)
            slope = float(self.coefficient(t2)) + 2.0 * t2 * self.derivative_at(t2)
            if slope <= 0 or not math.isfinite(slope):
                break
            step = r / slope
            if t - step < 0:
                break
            t -= step
        if abs(self.forward_map(t) - s) > tol:
            raise NoRootError(f"left inverse failed to reach tolerance at s = {s:g}")
        return t


@dataclass(frozen=True)
class Nonlinearity:
    """Caratheodory source term f(x, t) with primitive F(x, t) = int_0^t f(x, s) ds.

    Evaluators are vectorized: ``value(points, t)`` takes an (n, dim) point
    array and an (n,) value array.  ``t_derivative`` is df/dt when available.
    """

    value: Callable
    growth_exponent: float
    primitive: Optional[Callable] = None
    t_derivative: Optional[Callable] = None
    depends_on_x: bool = False
    name: str = ""

    def value_at(self, x: np.ndarray, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.asarray(self.value(x, t), dtype=float)

    def primitive_at(self, x: np.ndarray, t) -> np.ndarray:
        """F(x, t); falls back to adaptive quadrature from 0 to t per point."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.primitive is not None:
            return np.asarray(self.primitive(x, t), dtype=float)
        flat_t = np.atleast_1d(t).ravel()
        flat_x = x.reshape(flat_t.size, -1)
        out = np.empty(flat_t.size)
        for i, ti in enumerate(flat_t):
            xi = flat_x[i : i + 1]
            out[i] = adaptive_simpson(
                lambda s: float(self.value(xi, np.array([s]))[0]), 0.0, float(ti)
            )
        return out.reshape(np.shape(t))

    def t_derivative_at(self, x: np.ndarray, t) -> np.ndarray:
        if self.t_derivative is not None:
            return np.asarray(self.t_derivative(np.asarray(x, float), np.asarray(t, float)), dtype=float)
        t = np.asarray(t, dtype=float)
        step = 1e-6 * (1.0 + np.abs(t))
        return (self.value_at(x, t + step) - self.value_at(x, t - step)) / (2.0 * step)


def scale_nonlinearity(nl: Nonlinearity, c: float) -> Nonlinearity:
    """The source term scaled by a positive constant, closed forms preserved."""
    c = float(c)
    return replace(
        nl,
        value=lambda x, t, _f=nl.value: c * np.asarray(_f(x, t), dtype=float),
        primitive=None
        if nl.primitive is None
        else (lambda x, t, _F=nl.primitive: c * np.asarray(_F(x, t), dtype=float)),
        t_derivative=None
        if nl.t_derivative is None
        else (lambda x, t, _d=nl.t_derivative: c * np.asarray(_d(x, t), dtype=float)),
        name=f"{nl.name}*{c:g}",
    )


# ---------------------------------------------------------------------------
# specimen library
# ---------------------------------------------------------------------------


def affine_law(a: float, b: float) -> KirchhoffLaw:
    """K(t) = a + b t with primitive a t + b t^2 / 2."""
    if not a > 0 or b < 0:
        raise DomainError(f"affine law needs a > 0 and b >= 0, got ({a}, {b})")
    return KirchhoffLaw(
        coefficient=lambda t: a + b * np.asarray(t, dtype=float),
        growth_exponent=2.0 if b > 0 else 1.0,
        primitive=lambda t: a * t + 0.5 * b * t * t,
        derivative=lambda t: b,
        monotone_onto=True,
        name=f"affine({a:g},{b:g})",
    )


def constant_law(value: float = 1.0) -> KirchhoffLaw:
    if not value > 0:
        raise DomainError(f"constant law needs a positive value, got {value}")
    return KirchhoffLaw(
        coefficient=lambda t: np.full_like(np.asarray(t, dtype=float), value),
        growth_exponent=1.0,
        primitive=lambda t: value * t,
        derivative=lambda t: 0.0,
        monotone_onto=True,
        name=f"constant({value:g})",
    )


def decay_law() -> KirchhoffLaw:
    """K(t) = exp(-t); negative control: the infimum of K is 0."""
    return KirchhoffLaw(
        coefficient=lambda t: np.exp(-np.asarray(t, dtype=float)),
        growth_exponent=1.0,
        primitive=lambda t: -np.expm1(-t),
        derivative=lambda t: -math.exp(-t),
        monotone_onto=False,
        name="decay",
    )


def _bump_f(t):
    t = np.asarray(t, dtype=float)
    return np.maximum(0.0, (t - 1.0) * (2.0 - t))


def _bump_big_f(t):
    t = np.asarray(t, dtype=float)
    r = np.clip(t, 1.0, 2.0) - 1.0  # primitive in r = t - 1 vanishes exactly at r = 0
    return r * r * (0.5 - r / 3.0)


def bump_nonlinearity() -> Nonlinearity:
    """Non-negative source supported on [1, 2]: f(t) = max(0, (t-1)(2-t))."""
    return Nonlinearity(
        value=lambda x, t: _bump_f(t),
        growth_exponent=1.0,
        primitive=lambda x, t: _bump_big_f(t),
        t_derivative=lambda x, t: np.where(
            (np.asarray(t) > 1.0) & (np.asarray(t) < 2.0), 3.0 - 2.0 * np.asarray(t), 0.0
        ),
        depends_on_x=False,
        name="bump",
    )


def linear_nonlinearity() -> Nonlinearity:
    """f(t) = t; negative control: F/t^2 = 1/2 does not vanish near 0."""
    return Nonlinearity(
        value=lambda x, t: np.asarray(t, dtype=float),
        growth_exponent=1.0,
        primitive=lambda x, t: 0.5 * np.asarray(t, dtype=float) ** 2,
        t_derivative=lambda x, t: np.ones_like(np.asarray(t, dtype=float)),
        depends_on_x=False,
        name="linear",
    )


def sine_forcing() -> Nonlinearity:
    """t-independent forcing f(x, t) = sin(pi x_0); linear-solver oracle."""
    return Nonlinearity(
        value=lambda x, t: np.sin(np.pi * np.asarray(x, dtype=float)[..., 0]),
        growth_exponent=1.0,
        primitive=lambda x, t: np.sin(np.pi * np.asarray(x, dtype=float)[..., 0])
        * np.asarray(t, dtype=float),
        t_derivative=lambda x, t: np.zeros_like(np.asarray(t, dtype=float)),
        depends_on_x=True,
        name="sin_forcing",
    )


def sine_t_nonlinearity() -> Nonlinearity:
    """g(x, t) = sin(t); bounded perturbation term for budget sweeps."""
    return Nonlinearity(
        value=lambda x, t: np.sin(np.asarray(t, dtype=float)),
        growth_exponent=1.0,
        primitive=lambda x, t: 1.0 - np.cos(np.asarray(t, dtype=float)),
        t_derivative=lambda x, t: np.cos(np.asarray(t, dtype=float)),
        depends_on_x=False,
        name="sin_t",
    )


def specimen_library() -> dict:
    """Named laws and nonlinearities used by tests, probes and the CLI."""
    return {
        "affine(1,1)": affine_law(1.0, 1.0),
        "constant": constant_law(1.0),
        "decay": decay_law(),
        "bump": bump_nonlinearity(),
        "linear": linear_nonlinearity(),
        "sin_forcing": sine_forcing(),
        "sin_t": sine_t_nonlinearity(),
    }


# ---------------------------------------------------------------------------
# hypothesis audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplingConfig:
    """Deterministic sampling grids for the hypothesis audit."""

    points_per_decade: int = 200
    coefficient_t_min: float = 1e-8
    coefficient_t_max: float = 1e6
    tail_t_min: float = 1e2
    tail_t_max: float = 1e6
    small_t_min: float = 1e-8
    small_t_max: float = 1e-1
    positive_tol: float = 1e-9
    probe_amplitudes: tuple = (0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0)
    inverse_points: int = 25
    ambient_dim: Optional[int] = None


@dataclass(frozen=True)
class ConditionResult:
    status: str
    description: str
    evidence: dict = field(default_factory=dict)
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "description": self.description, "evidence": self.evidence}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class HypothesisReport:
    """Three-valued audit of the structural conditions, with evidence.

    ``gamma`` estimates inf K over the sampled range; ``tail_ratio`` estimates
    the lower tail bound of primitive(t) / t^alpha.
    """

    conditions: dict
    gamma: Optional[float]
    tail_ratio: Optional[float]
    dimension: int

    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.conditions.values())

    def failures(self) -> list:
        return [k for k, c in self.conditions.items() if c.status == FAIL]

    def to_dict(self) -> dict:
        return {
            "conditions": {k: c.to_dict() for k, c in self.conditions.items()},
            "gamma": self.gamma,
            "tail_ratio": self.tail_ratio,
            "dimension": self.dimension,
            "all_satisfied": self.ok(),
            "failures": self.failures(),
            "inconclusive": [
                k for k, c in self.conditions.items() if c.status == INCONCLUSIVE
            ],
        }


def _log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    decades = math.log10(hi) - math.log10(lo)
    n = max(int(round(decades * per_decade)), 2)
    return np.logspace(math.log10(lo), math.log10(hi), n + 1)


def _fit_log_slope(t: np.ndarray, y: np.ndarray) -> Optional[float]:
    mask = y > 0
    if mask.sum() < 2:
        return None
    slope = float(np.polyfit(np.log(t[mask]), np.log(y[mask]), 1)[0])
    return slope if math.isfinite(slope) else None


def probe_profiles(mesh: Mesh) -> dict:
    """Bump-shaped trial functions, sup-normalized, used as audit and scan probes."""
    if mesh.dimension == 1:
        (length,) = mesh.lengths

        def sine(p):
            return np.sin(np.pi * p[:, 0] / length)

        def parabola(p):
            return 4.0 * p[:, 0] * (length - p[:, 0]) / length**2

    else:
        lx, ly = mesh.lengths

        def sine(p):
            return np.sin(np.pi * p[:, 0] / lx) * np.sin(np.pi * p[:, 1] / ly)

        def parabola(p):
            return (
                16.0
                * p[:, 0]
                * (lx - p[:, 0])
                * p[:, 1]
                * (ly - p[:, 1])
                / (lx**2 * ly**2)
            )

    profiles = {
        "sine": interpolate(mesh, sine),
        "parabola": interpolate(mesh, parabola),
    }
    center = np.asarray(mesh.lengths) / 2.0
    dists = np.linalg.norm(mesh.interior_points() - center, axis=1)
    hat = np.zeros(mesh.n_interior)
    hat[int(np.argmin(dists))] = 1.0
    profiles["center_hat"] = FeFunction(mesh, hat)
    return profiles


def _audit_positive_source(nl, ops, cfg) -> ConditionResult:
    desc = "source potential attains positive values on some trial function"
    best = {"value": -math.inf}
    from .variational import source_energy  # deferred: variational builds on this module

    for pname, profile in probe_profiles(ops.mesh).items():
        for amp in cfg.probe_amplitudes:
            for sign in (1.0, -1.0):
                val = source_energy(ops, nl, (sign * amp) * profile)
                if val > best["value"]:
                    best = {"value": val, "profile": pname, "amplitude": sign * amp}
    if best["value"] > cfg.positive_tol:
        return ConditionResult(PASS, desc, evidence=best, witness=best)
    return ConditionResult(INCONCLUSIVE, desc, evidence=best)


def _audit_coefficient_positive(law, cfg) -> ConditionResult:
    desc = "diffusion coefficient is bounded below by a positive constant"
    ts = np.concatenate(
        ([0.0], _log_grid(cfg.coefficient_t_min, cfg.coefficient_t_max, cfg.points_per_decade))
    )
    ks = np.asarray(law.coefficient(ts), dtype=float)
    if not np.all(np.isfinite(ks)):
        bad = int(np.flatnonzero(~np.isfinite(ks))[0])
        return ConditionResult(
            FAIL, desc, evidence={"min": None}, witness={"t": float(ts[bad]), "K": float(ks[bad])}
        )
    imin = int(np.argmin(ks))
    kmin = float(ks[imin])
    evidence = {"min": kmin, "argmin": float(ts[imin]), "samples": int(ts.size)}
    if kmin <= cfg.positive_tol:
        # first sample at or below tolerance is the witness
        ibad = int(np.flatnonzero(ks <= cfg.positive_tol)[0])
        return ConditionResult(
            FAIL, desc, evidence=evidence, witness={"t": float(ts[ibad]), "K": float(ks[ibad])}
        )
    tail = ks[ts >= 0.01 * cfg.coefficient_t_max]
    tail_slope = _fit_log_slope(ts[ts >= 0.01 * cfg.coefficient_t_max], tail)
    evidence["tail_slope"] = tail_slope
    if tail_slope is not None and tail_slope < -0.05:
        return ConditionResult(INCONCLUSIVE, desc, evidence=evidence)
    return ConditionResult(PASS, desc, evidence=evidence)


def _audit_primitive_growth(law, cfg) -> tuple[ConditionResult, Optional[float]]:
    desc = "primitive of the coefficient grows at least like t^alpha"
    alpha = law.growth_exponent
    ts = _log_grid(cfg.tail_t_min, cfg.tail_t_max, max(cfg.points_per_decade // 10, 4))
    kt = np.array([law.primitive_at(t) for t in ts])
    ratios = kt / ts**alpha
    slope = _fit_log_slope(ts, kt)
    ratio_min = float(np.min(ratios))
    evidence = {
        "alpha": alpha,
        "log_slope": slope,
        "ratio_min": ratio_min,
        "ratio_at_max_t": float(ratios[-1]),
    }
    if ratio_min > cfg.positive_tol and slope is not None and slope >= alpha - 0.05:
        return ConditionResult(PASS, desc, evidence=evidence), ratio_min
    return ConditionResult(INCONCLUSIVE, desc, evidence=evidence), ratio_min


def _audit_left_inverse(law, cfg) -> ConditionResult:
    desc = "the map t -> t K(t^2) admits a continuous left inverse"
    if not law.monotone_onto:
        return ConditionResult(
            INCONCLUSIVE,
            desc,
            evidence={"monotone_onto": False, "note": "law does not claim the monotone-onto criterion"},
        )
    ss = np.concatenate(([0.0], np.logspace(-6, 6, cfg.inverse_points)))
    try:
        for s in ss:
            law.left_inverse(float(s))
    except (NoRootError, DomainError) as exc:
        return ConditionResult(
            FAIL, desc, evidence={"monotone_onto": True}, witness={"s": float(s), "error": str(exc)}
        )
    ts = np.concatenate(([0.0], np.logspace(-6, 6, cfg.inverse_points)))
    worst = 0.0
    for t in ts:
        err = abs(law.left_inverse(law.forward_map(float(t))) - t)
        worst = max(worst, err / (1.0 + t))
        if err > 1e-9 * (1.0 + t):
            return ConditionResult(
                FAIL,
                desc,
                evidence={"monotone_onto": True},
                witness={"t": float(t), "roundtrip_error": float(err)},
            )
    return ConditionResult(
        PASS, desc, evidence={"monotone_onto": True, "max_relative_roundtrip": worst}
    )


def _sup_over_x(nl, xs: np.ndarray, t: float) -> float:
    if not nl.depends_on_x:
        x = xs[:1]
        return float(np.max(nl.primitive_at(x, np.full(1, t))))
    return float(np.max(nl.primitive_at(xs, np.full(xs.shape[0], t))))


def _limit_trend(ts: np.ndarray, ratios: np.ndarray, tol: float, desc: str) -> ConditionResult:
    """Classify sampled sup ratios along a grid ordered toward the limit.

    pass: the closest decade sits at or below the tolerance;
    fail: it stays above tolerance and shows no decay decade over decade.
    """
    n_last = max(ts.size // 4, 2)
    last = ratios[-n_last:]
    prev = ratios[-2 * n_last : -n_last] if ts.size >= 2 * n_last else ratios[:n_last]
    evidence = {
        "closest_block_max": float(np.max(last)),
        "closest_block_min": float(np.min(last)),
        "previous_block_max": float(np.max(prev)),
    }
    if np.max(last) <= tol:
        return ConditionResult(PASS, desc, evidence=evidence)
    if np.min(last) > tol and np.max(last) > 0.5 * np.max(prev):
        iworst = int(np.argmax(last))
        return ConditionResult(
            FAIL,
            desc,
            evidence=evidence,
            witness={"t": float(ts[-n_last + iworst]), "ratio": float(last[iworst])},
        )
    return ConditionResult(INCONCLUSIVE, desc, evidence=evidence)


def _audit_small_t(nl, xs, cfg) -> ConditionResult:
    desc = "source potential is non-positive to second order near zero"
    ts = _log_grid(cfg.small_t_min, cfg.small_t_max, max(cfg.points_per_decade // 20, 3))
    ts = ts[::-1]  # shrink toward the limit t -> 0
    ratios = np.array(
        [max(_sup_over_x(nl, xs, t), _sup_over_x(nl, xs, -t)) / t**2 for t in ts]
    )
    return _limit_trend(ts, ratios, cfg.positive_tol, desc)


def _audit_large_t(nl, law, xs, cfg) -> ConditionResult:
    desc = "source potential grows slower than |t|^(2 alpha) at infinity"
    if cfg.ambient_dim is not None and cfg.ambient_dim >= 3:
        threshold = cfg.ambient_dim / (cfg.ambient_dim - 2)
        if law.growth_exponent >= threshold:
            return ConditionResult(
                PASS,
                desc,
                evidence={
                    "shortcut": "growth exponent dominates the embedding exponent",
                    "ambient_dim": cfg.ambient_dim,
                    "alpha": law.growth_exponent,
                    "required": threshold,
                },
            )
    two_alpha = 2.0 * law.growth_exponent
    ts = _log_grid(cfg.tail_t_min, cfg.tail_t_max, max(cfg.points_per_decade // 20, 3))
    ratios = np.array(
        [
            max(_sup_over_x(nl, xs, t), _sup_over_x(nl, xs, -t)) / t**two_alpha
            for t in ts
        ]
    )
    return _limit_trend(ts, ratios, cfg.positive_tol, desc)


def _audit_growth_class(nl, xs, cfg, dim: int) -> ConditionResult:
    desc = "source term has subcritical polynomial growth"
    q = nl.growth_exponent
    ts = _log_grid(1e-2, cfg.tail_t_max, max(cfg.points_per_decade // 20, 3))
    sup_f = np.array(
        [
            max(
                float(np.max(np.abs(nl.value_at(xs, np.full(xs.shape[0], t))))),
                float(np.max(np.abs(nl.value_at(xs, np.full(xs.shape[0], -t))))),
            )
            for t in ts
        ]
    )
    ratios = sup_f / (1.0 + ts**q)
    slope = _fit_log_slope(ts[ts >= 1.0], sup_f[ts >= 1.0])
    evidence = {"q": q, "max_ratio": float(np.max(ratios)), "tail_slope_of_sup_f": slope}
    if dim == 1:
        # integrability over x of sup_{|t|<=r} |f|: record sampled sup per radius
        evidence["sup_by_radius"] = {
            str(r): float(
                np.max(np.abs(nl.value_at(xs, np.full(xs.shape[0], r))))
            )
            for r in (1.0, 10.0, 100.0)
        }
    n_tail = max(ts.size // 4, 2)
    growing = ratios[-n_tail:].min() > 10.0 * max(ratios[: -n_tail].max(), cfg.positive_tol)
    if growing and slope is not None and slope > q + 0.5:
        return ConditionResult(
            FAIL,
            desc,
            evidence=evidence,
            witness={"t": float(ts[-1]), "ratio": float(ratios[-1])},
        )
    if ratios[-n_tail:].max() <= cfg.positive_tol:
        # bounded or vanishing source: the ratio dies off at the tail
        return ConditionResult(PASS, desc, evidence=evidence)
    if slope is not None and slope <= q + 0.05:
        return ConditionResult(PASS, desc, evidence=evidence)
    return ConditionResult(INCONCLUSIVE, desc, evidence=evidence)


def check_hypotheses(
    law: KirchhoffLaw,
    nl: Nonlinearity,
    mesh: Mesh,
    cfg: SamplingConfig = SamplingConfig(),
) -> HypothesisReport:
    """Audit the structural conditions on deterministic sampling grids.

    Statuses are three-valued because the conditions involve limits; a
    "fail" always carries a concrete witness sample.
    """
    ops = assemble(mesh)
    xs = ops.quad_points_flat()

    a2 = _audit_coefficient_positive(law, cfg)
    a3, tail_ratio = _audit_primitive_growth(law, cfg)
    conditions = {
        "a1": _audit_positive_source(nl, ops, cfg),
        "a2": a2,
        "a3": a3,
        "a4": _audit_left_inverse(law, cfg),
        "a5": _audit_small_t(nl, xs, cfg),
        "a6": _audit_large_t(nl, law, xs, cfg),
        "growth": _audit_growth_class(nl, xs, cfg, mesh.dimension),
    }
    gamma = a2.evidence.get("min")
    return HypothesisReport(
        conditions=conditions,
        gamma=gamma,
        tail_ratio=tail_ratio,
        dimension=mesh.dimension,
    )
