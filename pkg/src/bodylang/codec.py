"""Canonical text encoding shared by the event log, wire protocol, and scenario files.

One encoding rule for the whole platform: JSON with sorted keys, compact
separators, and no NaN/Infinity. Floats serialize via Python's shortest
round-trip repr, so encode -> decode is bit-identical for every value the
domain produces.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_dumps(payload: Any) -> str:
    """Encode a JSON-compatible value in canonical form (stable byte-for-byte)."""
    return json.dumps(
        payload,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_loads(text: str) -> Any:
    return json.loads(text)


def digest(payload: Any) -> str:
    """SHA-256 hex digest of the canonical encoding; used for vocabulary handshakes."""
    return hashlib.sha256(canonical_dumps(payload).encode("utf-8")).hexdigest()


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from arbitrary labeled parts.

    Hash-based (not ``hash()``) so the value survives interpreter restarts,
    which the deterministic-replay contract depends on.
    """
    material = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")
