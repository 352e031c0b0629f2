"""Dyadic interval kernel with a compiled core and a pure-Python fallback.

Every bound is a pair of ints ``(man, exp)`` standing for ``man * 2**exp``;
an interval is the 4-tuple ``(lo_man, lo_exp, hi_man, hi_exp)``.  All
operations round the lower endpoint toward -inf and the upper endpoint
toward +inf, so enclosures are preserved at any mantissa precision.

Set ``REACH_PURE_PY=1`` to force the pure-Python implementation.
"""

import os

if os.environ.get("REACH_PURE_PY"):
    from ._core_py import *  # noqa: F401,F403
    from ._core_py import KERNEL_NAME  # noqa: F401
else:
    try:
        from ._core_c import *  # type: ignore[assignment]  # noqa: F401,F403
        from ._core_c import KERNEL_NAME  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        from ._core_py import *  # noqa: F401,F403
        from ._core_py import KERNEL_NAME  # noqa: F401
