"""Pure-NumPy implementations of the per-element quadrature kernels.

These mirror the compiled extension in ``_core.pyx`` exactly; results may
differ by rounding only (different reduction order).
"""

import numpy as np


def interp_at_qp(u_full, conn, phi):
    """Values of a P1 field at every quadrature point.

    u_full : (n_nodes,) nodal values including boundary zeros
    conn   : (n_elements, n_local) int64 connectivity
    phi    : (n_local, n_qp) basis values at the reference quadrature points

    Returns (n_elements, n_qp).
    """
    return u_full[conn] @ phi


def scatter_load(conn, phi, wq, fq, n_nodes):
    """Nodal load vector b_i = sum_e sum_q wq[e,q] * fq[e,q] * phi_i(q)."""
    contrib = (wq * fq) @ phi.T
    return np.bincount(conn.ravel(), weights=contrib.ravel(), minlength=n_nodes)


def tangent_element_values(phi, wq, fpq):
    """Local matrices int fpq * phi_i * phi_j, one (n_local, n_local) block per element."""
    return np.einsum("eq,iq,jq->eij", wq * fpq, phi, phi, optimize=True)
