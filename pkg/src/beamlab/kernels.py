"""Backend selection for the pointwise kernels.

The compiled extension ``beamlab._ckernels`` is used when it imports; set
``BEAMLAB_PURE_PYTHON=1`` to force the numpy fallback.  Both backends expose
the same two functions and agree to rounding.
"""
import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("BEAMLAB_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "compiled" if _ckernels is not None else "python"


def _even_integer(e):
    return e >= 0 and e <= 128 and e == int(e) and int(e) % 2 == 0


def _compiled_power(u, kappa, omega):
    # numpy's vectorised pow beats a scalar loop for non-integer exponents
    if not _even_integer(kappa - 1.0):
        return _kernels_py.power_nonlinearity(u, kappa, omega)
    u = np.asarray(u)
    flat = np.ascontiguousarray(u).reshape(-1)
    if np.iscomplexobj(flat):
        out = _ckernels.power_complex(flat.astype(np.complex128, copy=False), kappa, omega)
    else:
        out = _ckernels.power_real(flat.astype(np.float64, copy=False), kappa, omega)
    return out.reshape(u.shape)


def _compiled_hermite5(nodes, y, dy, ddy, q):
    q = np.asarray(q, dtype=np.float64)
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (nodes, y, dy, ddy)]
    val, der = _ckernels.hermite5(*args, np.ascontiguousarray(q).reshape(-1))
    return val.reshape(q.shape), der.reshape(q.shape)


def get_backend(name=None):
    """Return ``(power_nonlinearity, hermite5)`` for ``name`` (default: active backend)."""
    name = name or BACKEND
    if name == "python":
        return _kernels_py.power_nonlinearity, _kernels_py.hermite5
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _compiled_power, _compiled_hermite5
    raise ValueError(f"unknown backend {name!r}")


power_nonlinearity, hermite5 = get_backend()
