"""Discrete torus laboratory: parabolic solution operators and tent-space norms.

The compiled core lives in ``tentlab._tentlab``. When running against an
in-tree CMake build the extension sits directly on ``PYTHONPATH`` instead of
inside the package, so fall back to a top-level import in that case.
"""

try:
    from ._tentlab import *  # noqa: F401,F403
    from . import _tentlab as _impl
except ImportError:  # in-tree build directory on PYTHONPATH
    from _tentlab import *  # noqa: F401,F403
    import _tentlab as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
