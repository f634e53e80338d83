"""Backend selection for the pairwise summation core.

The compiled extension is preferred when importable; setting the
environment variable CAUSALCZ_FORCE_FALLBACK=1 (before import) forces the
numpy implementation.  Both expose the same two functions; see
benchmarks/bench_backends.py for a speed comparison.
"""

from __future__ import annotations

import os

from . import _fallback

try:
    from . import _speedups
except ImportError:  # pragma: no cover - build-dependent
    _speedups = None

_FORCED = os.environ.get("CAUSALCZ_FORCE_FALLBACK", "") not in ("", "0")

COMPILED_AVAILABLE = _speedups is not None
USING_COMPILED = COMPILED_AVAILABLE and not _FORCED


def backend_name() -> str:
    return "compiled" if USING_COMPILED else "numpy"


def get_backend(force_fallback: bool = False):
    if force_fallback or not USING_COMPILED:
        return _fallback
    return _speedups
