"""Kernel backend selection.

Hot numeric kernels exist twice: a numba ``@njit`` build and a pure-numpy
fallback with identical semantics. The environment variable ``S2GPT_BACKEND``
picks one at import time:

    auto    numba when importable, numpy otherwise (default)
    numba   require the numba build, fail if numba is missing
    numpy   force the pure-numpy fallback

``s2gpt kernel-bench`` compares the two on representative workloads.
"""

import os

from .errors import ConfigError

_CHOICES = ("auto", "numba", "numpy")


def _select(requested: str):
    if requested not in _CHOICES:
        raise ConfigError(
            f"S2GPT_BACKEND={requested!r} not understood; pick one of {_CHOICES}"
        )
    if requested in ("auto", "numba"):
        try:
            from . import _kernels_numba as impl
            return "numba", impl
        except ImportError:
            if requested == "numba":
                raise ConfigError("S2GPT_BACKEND=numba but numba is not importable")
    from . import _kernels_numpy as impl
    return "numpy", impl


BACKEND_NAME, _impl = _select(os.environ.get("S2GPT_BACKEND", "auto").strip().lower())

residual_batch = _impl.residual_batch
residual_partials_batch = _impl.residual_partials_batch
tanh_jet_forward = _impl.tanh_jet_forward
tanh_jet_backward = _impl.tanh_jet_backward
sparse_loss_grad = _impl.sparse_loss_grad
helmholtz_q = _impl.helmholtz_q


def backend_name() -> str:
    return BACKEND_NAME
