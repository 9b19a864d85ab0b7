"""LSTM kernel backend selection.

The compiled Cython core is used when its extension module imported cleanly;
otherwise the pure numpy implementation takes over.  Setting
URDU_ABSSUM_KERNEL=python forces the pure backend, URDU_ABSSUM_KERNEL=cython
demands the compiled one (raising if it is unavailable).  Both backends
implement the same four functions with identical semantics.
"""

from __future__ import annotations

import os

from . import _pure

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

lstm_cell_forward = None
lstm_cell_backward = None
lstm_seq_forward = None
lstm_seq_backward = None
_BACKEND = ""

_FUNCTIONS = ("lstm_cell_forward", "lstm_cell_backward", "lstm_seq_forward", "lstm_seq_backward")


def set_backend(name: str) -> None:
    """Bind the module-level kernel functions to 'python' or 'cython'."""
    global _BACKEND
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available in this build")
        impl = _ckernels
    elif name == "python":
        impl = _pure
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    for fn in _FUNCTIONS:
        globals()[fn] = getattr(impl, fn)
    _BACKEND = name


def backend() -> str:
    return _BACKEND


def available_backends() -> tuple[str, ...]:
    return ("python", "cython") if _ckernels is not None else ("python",)


_requested = os.environ.get("URDU_ABSSUM_KERNEL", "").strip().lower()
if _requested in ("python", "pure", "py"):
    set_backend("python")
elif _requested in ("cython", "c", "compiled"):
    set_backend("cython")
else:
    set_backend("cython" if _ckernels is not None else "python")
