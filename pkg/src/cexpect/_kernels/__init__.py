"""Kernel backend selection.

The compiled Cython extension is preferred when importable; the numpy
fallback is selected otherwise, or when CEXPECT_DISABLE_EXT is set in the
environment.  Both backends implement the same contract and produce
bit-identical results (asserted in tests/test_kernels.py), so backend choice
never affects report bytes.
"""

import os

from . import fallback

if os.environ.get("CEXPECT_DISABLE_EXT"):
    _impl = fallback
else:
    try:
        from . import _ext as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
scan_records = _impl.scan_records


def available_backends():
    """The importable backends, for benchmarks and tests."""
    impls = {"fallback": fallback}
    try:
        from . import _ext

        impls["ext"] = _ext
    except ImportError:
        pass
    return impls
