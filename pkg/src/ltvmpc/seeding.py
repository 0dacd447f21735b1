"""Deterministic derivation of named RNG substreams.

Every random draw in the library comes from a substream keyed by a tuple of
tokens (integers, floats, strings).  Tokens are hashed with BLAKE2b into a
64-bit seed, so distinct experiments, cells, and purposes ("disturbance",
"prediction-noise", "nn-init") never share a stream, and the same tokens
always reproduce the same draws regardless of call order or thread schedule.
"""

from __future__ import annotations

import struct
from hashlib import blake2b

import numpy as np

_SEP = b"\x1f"


def _token_bytes(token) -> bytes:
    if isinstance(token, bool):
        return b"b" + bytes([int(token)])
    if isinstance(token, (int, np.integer)):
        return b"i" + (int(token) & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    if isinstance(token, (float, np.floating)):
        # Bit pattern, not decimal text: 0.1 and float("0.1") stay identical.
        return b"f" + struct.pack("<d", float(token))
    if isinstance(token, str):
        return b"s" + token.encode("utf-8")
    raise TypeError(f"unsupported seed token type: {type(token)!r}")


def seed_mix(*tokens) -> int:
    """Mix tokens into a 64-bit unsigned seed (stable across runs/platforms)."""
    h = blake2b(digest_size=8)
    for token in tokens:
        h.update(_token_bytes(token))
        h.update(_SEP)
    return int.from_bytes(h.digest(), "little")


def substream(*tokens) -> np.random.Generator:
    """PCG64 generator seeded from the mixed tokens."""
    return np.random.default_rng(seed_mix(*tokens))
