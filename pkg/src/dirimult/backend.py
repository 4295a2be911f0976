"""Monte-Carlo kernel selection.

The compiled extension is preferred when importable; the pure-Python lane
is the fallback.  Both produce byte-identical results (asserted by the
test suite), so the choice only affects speed.  Set ``DIRIMULT_BACKEND``
to ``python`` or ``compiled`` before import to force a lane; forcing
``compiled`` raises if the extension is missing.
"""

from __future__ import annotations

import os

from dirimult import rng as _pure

_requested = os.environ.get("DIRIMULT_BACKEND", "").strip().lower()

if _requested not in ("", "python", "compiled"):
    raise ImportError(
        f"DIRIMULT_BACKEND={_requested!r} not recognized; "
        "use 'python' or 'compiled'"
    )

if _requested == "python":
    BACKEND = "python"
    predictive_mc_moments = _pure.predictive_mc_moments
else:
    try:
        from dirimult import _mckernel as _compiled
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "DIRIMULT_BACKEND=compiled but the dirimult._mckernel "
                "extension is not built; reinstall with a C compiler"
            ) from None
        BACKEND = "python"
        predictive_mc_moments = _pure.predictive_mc_moments
    else:
        BACKEND = "compiled"
        predictive_mc_moments = _compiled.predictive_mc_moments

__all__ = ["BACKEND", "predictive_mc_moments"]
