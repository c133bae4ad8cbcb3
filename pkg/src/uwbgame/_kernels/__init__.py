"""Hot-loop kernels with a compiled core and a NumPy fallback.

The compiled extension is used when importable. Setting the environment
variable ``UWBGAME_KERNELS=python`` forces the fallback; ``cython`` makes a
missing extension an import error instead of a silent fallback.
"""
import importlib
import os

from . import _pykernels

_choice = os.environ.get("UWBGAME_KERNELS", "auto").lower()
if _choice not in ("auto", "python", "cython"):
    raise ImportError(f"UWBGAME_KERNELS must be auto, python or cython, not {_choice!r}")

_compiled = None
if _choice != "python":
    try:
        _compiled = importlib.import_module("._ckernels", __name__)
    except ImportError:
        if _choice == "cython":
            raise

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _pykernels

brpc_iterate = _impl.brpc_iterate

# Direct correlation costs ~K^2 L^2 multiply-adds; past this the FFT route wins
# even against compiled loops (see benchmarks/bench_kernels.py).
DIRECT_MAX_WORK = 100_000


def correlation_gains(alpha, beta, N, N_c):
    K, L = alpha.shape
    if _compiled is not None and K * K * L * L <= DIRECT_MAX_WORK:
        return _compiled.correlation_gains(alpha, beta, N, N_c)
    return _pykernels.correlation_gains(alpha, beta, N, N_c)


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
