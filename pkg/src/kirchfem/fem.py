"""P1 finite element core on interval and rectangle meshes.

Provides uniform meshes of (0, L) and (0, Lx) x (0, Ly), assembly of the
stiffness matrix A_ij = int grad(phi_i) . grad(phi_j) and the mass matrix
M_ij = int phi_i phi_j, the energy norm ||u|| = sqrt(u' A u) on the interior
degrees of freedom, and a cached sparse SPD solve used to pull linear
functionals back into the discrete space.

Quadrature is 2-point Gauss per segment in 1D and a 3-point interior rule per
triangle in 2D; both are exact for the polynomial integrands of A and M and
are reused for the composed nonlinear integrands downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import AssemblyError, InvalidMeshError, LinearSolveError, ShapeError

_RIESZ_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    """Uniform P1 mesh with homogeneous Dirichlet boundary flags.

    ``nodes`` is (n_nodes,) in 1D and (n_nodes, 2) in 2D; ``elements`` holds
    segment or triangle connectivity; ``interior_ids`` maps the interior
    numbering 0..n_interior-1 to full node ids.
    """

    dimension: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_mask: np.ndarray
    interior_ids: np.ndarray
    full_to_interior: np.ndarray
    lengths: tuple[float, ...]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior_ids.shape[0]

    def points(self) -> np.ndarray:
        """Node coordinates as an (n_nodes, dimension) array."""
        if self.dimension == 1:
            return self.nodes.reshape(-1, 1)
        return self.nodes

    def interior_points(self) -> np.ndarray:
        return self.points()[self.interior_ids]

    def element_measures(self) -> np.ndarray:
        """Length of each segment or (signed) area of each triangle."""
        pts = self.points()
        if self.dimension == 1:
            return pts[self.elements[:, 1], 0] - pts[self.elements[:, 0], 0]
        p0 = pts[self.elements[:, 0]]
        e1 = pts[self.elements[:, 1]] - p0
        e2 = pts[self.elements[:, 2]] - p0
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def describe(self) -> str:
        if self.dimension == 1:
            return f"interval(cells={self.n_elements}, length={self.lengths[0]})"
        nx = round(self.lengths[0] / (self.nodes[1, 0] - self.nodes[0, 0]))
        ny = self.n_elements // (2 * nx)
        return (
            f"rectangle(cells={nx}x{ny}, "
            f"lengths={self.lengths[0]}x{self.lengths[1]})"
        )


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def build_interval_mesh(n_cells: int, length: float) -> Mesh:
    """Uniform mesh of (0, length) with ``n_cells`` segments."""
    if n_cells < 2:
        raise InvalidMeshError(f"n_cells must be >= 2, got {n_cells}")
    if not length > 0:
        raise InvalidMeshError(f"length must be positive, got {length}")
    nodes = np.linspace(0.0, length, n_cells + 1)
    elements = np.stack(
        [np.arange(n_cells), np.arange(1, n_cells + 1)], axis=1
    ).astype(np.int64)
    boundary = np.zeros(n_cells + 1, dtype=bool)
    boundary[[0, -1]] = True
    interior = np.arange(1, n_cells, dtype=np.int64)
    full_to_interior = np.full(n_cells + 1, -1, dtype=np.int64)
    full_to_interior[interior] = np.arange(interior.size)
    _freeze(nodes, elements, boundary, interior, full_to_interior)
    return Mesh(1, nodes, elements, boundary, interior, full_to_interior, (length,))


def build_rect_mesh(nx: int, ny: int, lx: float, ly: float) -> Mesh:
    """Uniform grid of (0, lx) x (0, ly), each cell split into two triangles."""
    if nx < 2 or ny < 2:
        raise InvalidMeshError(f"nx and ny must be >= 2, got ({nx}, {ny})")
    if not (lx > 0 and ly > 0):
        raise InvalidMeshError(f"lengths must be positive, got ({lx}, {ly})")
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    xg, yg = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.stack([xg.ravel(), yg.ravel()], axis=1)

    def nid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            bl, br = nid(i, j), nid(i + 1, j)
            tl, tr = nid(i, j + 1), nid(i + 1, j + 1)
            # consistent diagonal bl-tr; both triangles counterclockwise
            tris.append((bl, br, tr))
            tris.append((bl, tr, tl))
    elements = np.asarray(tris, dtype=np.int64)

    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    boundary = ((ii == 0) | (ii == nx) | (jj == 0) | (jj == ny)).ravel()
    interior = np.flatnonzero(~boundary).astype(np.int64)
    full_to_interior = np.full(nodes.shape[0], -1, dtype=np.int64)
    full_to_interior[interior] = np.arange(interior.size)
    _freeze(nodes, elements, boundary, interior, full_to_interior)
    return Mesh(2, nodes, elements, boundary, interior, full_to_interior, (lx, ly))


@dataclass(frozen=True)
class FeFunction:
    """Coefficients of u = sum u_i phi_i over interior nodes; zero trace on the boundary.

    Treated as immutable: operations return new instances and never write to
    ``coeffs``, so instances are safe to share across solver workers.
    """

    mesh: Mesh
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.mesh.n_interior,):
            raise ShapeError(
                f"expected {self.mesh.n_interior} interior coefficients, "
                f"got shape {self.coeffs.shape}"
            )

    def to_full(self) -> np.ndarray:
        full = np.zeros(self.mesh.n_nodes)
        full[self.mesh.interior_ids] = self.coeffs
        return full

    def with_coeffs(self, coeffs: np.ndarray) -> "FeFunction":
        return FeFunction(self.mesh, np.asarray(coeffs, dtype=float))

    def __add__(self, other: "FeFunction") -> "FeFunction":
        self._check_compatible(other)
        return FeFunction(self.mesh, self.coeffs + other.coeffs)

    def __sub__(self, other: "FeFunction") -> "FeFunction":
        self._check_compatible(other)
        return FeFunction(self.mesh, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "FeFunction":
        return FeFunction(self.mesh, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "FeFunction":
        return FeFunction(self.mesh, -self.coeffs)

    def _check_compatible(self, other: "FeFunction") -> None:
        if other.mesh is not self.mesh and other.mesh.n_interior != self.mesh.n_interior:
            raise ShapeError("operands live on incompatible meshes")


def zero_function(mesh: Mesh) -> FeFunction:
    return FeFunction(mesh, np.zeros(mesh.n_interior))


def interpolate(mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]) -> FeFunction:
    """Nodal interpolant of ``fn`` (callable on (n, dim) point arrays)."""
    values = np.asarray(fn(mesh.interior_points()), dtype=float)
    return FeFunction(mesh, values.reshape(mesh.n_interior))


@dataclass(frozen=True, eq=False)
class AssembledOperators:
    """Stiffness/mass matrices plus the quadrature tables of one mesh.

    ``stiffness`` and ``mass`` act on interior coefficients; ``mass_full``
    keeps the boundary rows so that the sum of all its entries equals the
    domain measure.  The SPD factorization of ``stiffness`` is computed once
    here and shared read-only afterwards.
    """

    mesh: Mesh
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    mass_full: sp.csr_matrix
    phi: np.ndarray        # (n_local, n_qp) basis values at quadrature points
    qpoints: np.ndarray    # (n_elements, n_qp, dim) physical quadrature points
    qweights: np.ndarray   # (n_elements, n_qp) weight times element measure
    _solve: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _tangent_rows: np.ndarray = field(repr=False)
    _tangent_cols: np.ndarray = field(repr=False)
    _tangent_keep: np.ndarray = field(repr=False)

    @property
    def conn(self) -> np.ndarray:
        return self.mesh.elements

    @property
    def n_interior(self) -> int:
        return self.mesh.n_interior

    def interp_at_qp(self, u: FeFunction) -> np.ndarray:
        return _kernels.interp_at_qp(u.to_full(), self.conn, self.phi)

    def quad_points_flat(self) -> np.ndarray:
        return self.qpoints.reshape(-1, self.mesh.dimension)

    def load_from_pointwise(self, fq: np.ndarray) -> np.ndarray:
        """Interior load vector int fq * phi_i from per-quadrature-point values."""
        b_full = _kernels.scatter_load(
            self.conn, self.phi, self.qweights, fq, self.mesh.n_nodes
        )
        return b_full[self.mesh.interior_ids]

    def tangent_from_pointwise(self, fpq: np.ndarray) -> sp.csr_matrix:
        """Interior matrix int fpq * phi_i * phi_j from per-point values."""
        vals = _kernels.tangent_element_values(self.phi, self.qweights, fpq)
        vals = vals.reshape(-1)[self._tangent_keep]
        n = self.n_interior
        return sp.coo_matrix(
            (vals, (self._tangent_rows, self._tangent_cols)), shape=(n, n)
        ).tocsr()

    def integrate_pointwise(self, gq: np.ndarray) -> float:
        """int g over the domain from per-quadrature-point values."""
        return float(np.vdot(self.qweights, gq))


def _quadrature_1d(mesh: Mesh):
    xi = np.array([-1.0, 1.0]) / np.sqrt(3.0)
    phi = np.stack([(1.0 - xi) / 2.0, (1.0 + xi) / 2.0])  # (2 local, 2 qp)
    pts = mesh.points()
    x0 = pts[mesh.elements[:, 0], 0]
    h = pts[mesh.elements[:, 1], 0] - x0
    qp = x0[:, None] + (xi[None, :] + 1.0) / 2.0 * h[:, None]
    wq = np.repeat((h / 2.0)[:, None], 2, axis=1)
    return phi, qp[:, :, None], wq


def _quadrature_2d(mesh: Mesh, areas: np.ndarray):
    # interior 3-point rule, exact for quadratics
    bary = np.array(
        [
            [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        ]
    )
    phi = bary.T.copy()  # phi[local, qp] = barycentric coordinate
    pts = mesh.points()
    corners = pts[mesh.elements]  # (ne, 3, 2)
    qp = np.einsum("ql,elk->eqk", bary, corners)
    wq = np.repeat((areas / 3.0)[:, None], 3, axis=1)
    return phi, qp, wq


def assemble(mesh: Mesh) -> AssembledOperators:
    """Assemble stiffness and mass by standard P1 element integration."""
    measures = mesh.element_measures()
    bad = np.flatnonzero(measures <= 1e-14 * max(mesh.lengths) ** mesh.dimension)
    if bad.size:
        raise AssemblyError(f"degenerate element {int(bad[0])} (measure {measures[bad[0]]:g})")

    ne = mesh.n_elements
    if mesh.dimension == 1:
        h = measures
        a_loc = np.empty((ne, 2, 2))
        a_loc[:, 0, 0] = a_loc[:, 1, 1] = 1.0 / h
        a_loc[:, 0, 1] = a_loc[:, 1, 0] = -1.0 / h
        m_loc = np.empty((ne, 2, 2))
        m_loc[:, 0, 0] = m_loc[:, 1, 1] = h / 3.0
        m_loc[:, 0, 1] = m_loc[:, 1, 0] = h / 6.0
        phi, qp, wq = _quadrature_1d(mesh)
    else:
        pts = mesh.points()
        p = pts[mesh.elements]  # (ne, 3, 2)
        # gradient of local basis i is the rotated opposite edge over twice the area
        grads = np.empty((ne, 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grads[:, i, 0] = p[:, j, 1] - p[:, k, 1]
            grads[:, i, 1] = p[:, k, 0] - p[:, j, 0]
        grads /= (2.0 * measures)[:, None, None]
        a_loc = np.einsum("e,eik,ejk->eij", measures, grads, grads)
        m_loc = (measures / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))
        phi, qp, wq = _quadrature_2d(mesh, measures)

    nloc = mesh.elements.shape[1]
    rows = np.repeat(mesh.elements, nloc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nloc)).ravel()
    nv = mesh.n_nodes
    a_full = sp.coo_matrix((a_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    m_full = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()

    ids = mesh.interior_ids
    a_int = a_full[ids][:, ids].tocsr()
    m_int = m_full[ids][:, ids].tocsr()

    try:
        lu = spla.splu(a_int.tocsc())
    except RuntimeError as exc:
        raise LinearSolveError(f"stiffness factorization failed: {exc}") from exc

    # cached COO pattern of the interior block of int w(x) phi_i phi_j
    is_int = ~mesh.boundary_mask
    keep = is_int[rows] & is_int[cols]
    t_rows = mesh.full_to_interior[rows[keep]]
    t_cols = mesh.full_to_interior[cols[keep]]

    _freeze(phi, qp, wq)
    return AssembledOperators(
        mesh=mesh,
        stiffness=a_int,
        mass=m_int,
        mass_full=m_full,
        phi=phi,
        qpoints=qp,
        qweights=wq,
        _solve=lu.solve,
        _tangent_rows=t_rows,
        _tangent_cols=t_cols,
        _tangent_keep=np.flatnonzero(keep),
    )


def _check_dims(ops: AssembledOperators, u: FeFunction) -> None:
    if u.coeffs.shape != (ops.n_interior,):
        raise ShapeError(
            f"coefficient vector of length {u.coeffs.shape[0]} does not match "
            f"{ops.n_interior} interior nodes"
        )


def a_inner(ops: AssembledOperators, u: FeFunction, v: FeFunction) -> float:
    """Energy inner product <u, v> = u' A v."""
    _check_dims(ops, u)
    _check_dims(ops, v)
    return float(u.coeffs @ (ops.stiffness @ v.coeffs))


def h1_norm(ops: AssembledOperators, u: FeFunction) -> float:
    """Energy norm sqrt(u' A u); zero iff u = 0."""
    _check_dims(ops, u)
    return float(np.sqrt(max(u.coeffs @ (ops.stiffness @ u.coeffs), 0.0)))


def a_distance(ops: AssembledOperators, u: FeFunction, v: FeFunction) -> float:
    return h1_norm(ops, u - v)


def riesz_solve(ops: AssembledOperators, rhs: np.ndarray) -> FeFunction:
    """Solve A w = rhs; w represents the linear functional rhs in the energy inner product."""
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    if rhs.shape != (ops.n_interior,):
        raise ShapeError(
            f"load vector of length {rhs.shape[0]} does not match "
            f"{ops.n_interior} interior nodes"
        )
    w = ops._solve(rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0:
        res = np.linalg.norm(ops.stiffness @ w - rhs)
        if res > _RIESZ_TOL * scale:
            w = w + ops._solve(rhs - ops.stiffness @ w)  # one refinement step
            res = np.linalg.norm(ops.stiffness @ w - rhs)
            if res > _RIESZ_TOL * scale:
                raise LinearSolveError(
                    f"relative residual {res / scale:.3e} exceeds {_RIESZ_TOL:g}"
                )
    if not np.all(np.isfinite(w)):
        raise LinearSolveError("solver produced non-finite values")
    return FeFunction(ops.mesh, w)


def dirichlet_eigenpairs(
    ops: AssembledOperators, k: int, v0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """First ``k`` eigenpairs of A w = lam M w on the interior nodes, ascending."""
    n = ops.n_interior
    k = min(k, n)
    if n <= max(2 * k + 1, 12):
        vals, vecs = scipy.linalg.eigh(
            ops.stiffness.toarray(), ops.mass.toarray()
        )
        return vals[:k], vecs[:, :k]
    vals, vecs = spla.eigsh(
        ops.stiffness, k=k, M=ops.mass, sigma=0.0, which="LM", v0=v0
    )
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def evaluate_fe(u: FeFunction, points: np.ndarray) -> np.ndarray:
    """Evaluate the piecewise-linear field at arbitrary points of the closed domain."""
    mesh = u.mesh
    pts = np.asarray(points, dtype=float).reshape(-1, mesh.dimension)
    full = u.to_full()
    if mesh.dimension == 1:
        xs = mesh.nodes
        return np.interp(pts[:, 0], xs, full)
    lx, ly = mesh.lengths
    nxs = np.unique(mesh.nodes[:, 0])
    nys = np.unique(mesh.nodes[:, 1])
    nx, ny = nxs.size - 1, nys.size - 1
    hx, hy = lx / nx, ly / ny
    x = np.clip(pts[:, 0], 0.0, lx)
    y = np.clip(pts[:, 1], 0.0, ly)
    i = np.minimum((x / hx).astype(int), nx - 1)
    j = np.minimum((y / hy).astype(int), ny - 1)
    xi = x / hx - i
    eta = y / hy - j

    def nid(ii, jj):
        return jj * (nx + 1) + ii

    lower = xi >= eta  # triangle (bl, br, tr) below the bl-tr diagonal
    vals = np.where(
        lower,
        full[nid(i, j)] * (1 - xi)
        + full[nid(i + 1, j)] * (xi - eta)
        + full[nid(i + 1, j + 1)] * eta,
        full[nid(i, j)] * (1 - eta)
        + full[nid(i + 1, j + 1)] * xi
        + full[nid(i, j + 1)] * (eta - xi),
    )
    return vals
