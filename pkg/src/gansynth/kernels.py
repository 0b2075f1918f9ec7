"""Backend selection for the hot kernels.

The compiled extension is used when it imported cleanly; otherwise, or when
``GANSYNTH_BACKEND=python`` is set, the numpy fallback is used.  ``use()``
switches at runtime (tests and the benchmark compare both).
"""

import os

from . import _fallback

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_NAMES = (
    "adam_update",
    "leaky_forward",
    "leaky_dropout_forward",
    "leaky_backward",
    "sigmoid",
    "best_gini_cut_sorted",
    "nearest_sq_distances",
)

BACKEND = None


def available():
    """Names of the backends importable in this environment."""
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def use(name):
    """Route every kernel through backend ``name`` ('compiled' or 'python')."""
    global BACKEND
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built; reinstall with a C compiler")
        module = _ckernels
    elif name == "python":
        module = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    for attr in _NAMES:
        globals()[attr] = getattr(module, attr)
    BACKEND = name


def backend_module(name):
    return _ckernels if name == "compiled" else _fallback


_requested = os.environ.get("GANSYNTH_BACKEND", "").strip().lower()
if _requested == "python" or _ckernels is None:
    use("python")
else:
    use("compiled")
