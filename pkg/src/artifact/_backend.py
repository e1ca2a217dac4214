"""Pick the compiled kernels when available, else the pure-Python ones.

Set ARTIFACT_PURE_PYTHON=1 to force the fallback.
"""
import os

BACKEND = "python"
if not os.environ.get("ARTIFACT_PURE_PYTHON"):
    try:
        from ._ckernels import cn_propagate, phase_sum, sample_transform
        BACKEND = "cython"
    except ImportError:
        pass
if BACKEND == "python":
    from ._pykernels import cn_propagate, phase_sum, sample_transform

__all__ = ["BACKEND", "cn_propagate", "phase_sum", "sample_transform"]
