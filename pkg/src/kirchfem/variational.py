"""Energy functionals, their gradients in the energy inner product, and the
weak-form residual.

All gradients are returned as elements of the discrete space itself (the
representative whose energy inner product with any test function reproduces
the directional derivative), obtained through the cached stiffness solve.
This makes the closed-form identities hold verbatim:

* the gradient of the diffusion energy at u is K(||u||^2) u,
* the inverse operator built from the scalar left inverse maps it back to u,
* a zero residual characterizes a discrete weak solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import UnsupportedLawError
from .fem import AssembledOperators, FeFunction, h1_norm, riesz_solve, zero_function
from .model import KirchhoffLaw, Nonlinearity


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy parts of one trial function: diffusion, source and perturbation
    potentials plus the energy norm used."""

    diffusion: float
    source: float
    perturbation: float
    norm: float

    def total(self, lam: float, mu: float) -> float:
        return self.diffusion - lam * self.source - mu * self.perturbation

    def to_dict(self) -> dict:
        return {
            "diffusion": self.diffusion,
            "source": self.source,
            "perturbation": self.perturbation,
            "norm": self.norm,
        }


def diffusion_energy(ops: AssembledOperators, law: KirchhoffLaw, u: FeFunction) -> float:
    """Half the coefficient primitive evaluated at the squared energy norm."""
    n = h1_norm(ops, u)
    return 0.5 * law.primitive_at(n * n)


def diffusion_gradient(
    ops: AssembledOperators, law: KirchhoffLaw, u: FeFunction
) -> FeFunction:
    """Gradient of the diffusion energy: K(||u||^2) u, exactly."""
    n = h1_norm(ops, u)
    return float(law.coefficient(n * n)) * u


def _pointwise(ops: AssembledOperators, nl: Nonlinearity, u: FeFunction, which: str):
    uq = ops.interp_at_qp(u)
    xs = ops.quad_points_flat()
    fn = {"value": nl.value_at, "primitive": nl.primitive_at, "t_derivative": nl.t_derivative_at}[which]
    return fn(xs, uq.ravel()).reshape(uq.shape)


def source_energy(ops: AssembledOperators, nl: Nonlinearity, u: FeFunction) -> float:
    """int F(x, u_h(x)) dx by the per-element Gauss rules."""
    return ops.integrate_pointwise(_pointwise(ops, nl, u, "primitive"))


def load_vector(ops: AssembledOperators, nl: Nonlinearity, u: FeFunction) -> np.ndarray:
    """Interior load b_i = int f(x, u_h) phi_i by element quadrature."""
    return ops.load_from_pointwise(_pointwise(ops, nl, u, "value"))


def source_gradient(ops: AssembledOperators, nl: Nonlinearity, u: FeFunction) -> FeFunction:
    """Energy-space representative of the source derivative at u."""
    return riesz_solve(ops, load_vector(ops, nl, u))


def load_tangent(ops: AssembledOperators, nl: Nonlinearity, u: FeFunction) -> sp.csr_matrix:
    """Interior matrix int (df/dt)(x, u_h) phi_i phi_j; derivative by closed
    form when present, central differences otherwise."""
    return ops.tangent_from_pointwise(_pointwise(ops, nl, u, "t_derivative"))


# the perturbation term has the same contracts with g in place of f
perturbation_energy = source_energy
perturbation_gradient = source_gradient


def invert_diffusion_gradient(
    ops: AssembledOperators, law: KirchhoffLaw, v: FeFunction
) -> FeFunction:
    """Continuous inverse of the diffusion gradient: rescale v by the scalar
    left inverse of t -> t K(t^2); maps the gradient at u back to u."""
    norm = h1_norm(ops, v)
    if norm == 0.0:
        return zero_function(ops.mesh)
    t = law.left_inverse(norm)
    return (t / norm) * v


def residual(
    ops: AssembledOperators,
    law: KirchhoffLaw,
    f: Nonlinearity,
    g: Optional[Nonlinearity],
    lam: float,
    mu: float,
    u: FeFunction,
) -> tuple[FeFunction, float]:
    """Weak-form residual representative and its energy norm.

    Zero norm characterizes a discrete weak solution of the two-parameter
    problem.
    """
    if mu != 0.0 and g is None:
        raise UnsupportedLawError("a perturbation term is required when mu != 0")
    r = diffusion_gradient(ops, law, u)
    if lam != 0.0:
        r = r - lam * source_gradient(ops, f, u)
    if mu != 0.0:
        r = r - mu * perturbation_gradient(ops, g, u)
    return r, h1_norm(ops, r)


def energy_breakdown(
    ops: AssembledOperators,
    law: KirchhoffLaw,
    f: Nonlinearity,
    g: Optional[Nonlinearity],
    u: FeFunction,
) -> EnergyBreakdown:
    return EnergyBreakdown(
        diffusion=diffusion_energy(ops, law, u),
        source=source_energy(ops, f, u),
        perturbation=0.0 if g is None else perturbation_energy(ops, g, u),
        norm=h1_norm(ops, u),
    )
