"""Quadrature kernels: compiled extension when available, NumPy fallback otherwise.

The backend is chosen once at import time.  Set ``KIRCHFEM_PURE_PYTHON=1`` to
force the fallback (used by the benchmark and by tests that compare backends).
"""

import os

if os.environ.get("KIRCHFEM_PURE_PYTHON") == "1":
    from ._fallback import interp_at_qp, scatter_load, tangent_element_values

    BACKEND = "numpy"
else:
    try:
        from ._core import interp_at_qp, scatter_load, tangent_element_values

        BACKEND = "compiled"
    except ImportError:
        from ._fallback import interp_at_qp, scatter_load, tangent_element_values

        BACKEND = "numpy"

__all__ = ["BACKEND", "interp_at_qp", "scatter_load", "tangent_element_values"]
