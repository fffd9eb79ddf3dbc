"""Hot-loop kernels: compiled when available, pure Python otherwise.

Set ``CHEMSANDBOX_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("CHEMSANDBOX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pure

BACKEND: str = _impl.BACKEND
fnv1a64 = _impl.fnv1a64
morgan_environments = _impl.morgan_environments
refine_ranks = _impl.refine_ranks
subgraph_matches = _impl.subgraph_matches

__all__ = [
    "BACKEND",
    "fnv1a64",
    "morgan_environments",
    "refine_ranks",
    "subgraph_matches",
]
