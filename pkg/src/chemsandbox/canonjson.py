"""Canonical JSON: sorted keys, compact separators, shortest float repr.

Byte equality of two canonical renderings is the equality used for replay.
"""

from __future__ import annotations

import json
from typing import Any


def dumps(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def normalize(text: str) -> str:
    """Re-render arbitrary JSON text canonically."""
    return dumps(json.loads(text))
