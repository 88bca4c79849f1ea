"""Counter-based randomness.

Every random draw in the package is a pure function of integer keys, so
results never depend on execution order or on how work is chunked.
"""

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


def splitmix64(x):
    """Finalizer of the SplitMix64 generator, elementwise on uint64 arrays."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def to_unit(x):
    """Map uint64 hashes to floats in [0, 1) using the top 53 bits."""
    return (np.asarray(x, dtype=np.uint64) >> _S11).astype(np.float64) * _INV53


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable key parts.

    Uses blake2b rather than ``hash`` so values survive interpreter restarts.
    Floats are keyed by ``repr`` which round-trips exactly.
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        token = repr(p) if isinstance(p, float) else str(p)
        h.update(token.encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def run_keys(seeds, runs: int):
    """Per-run keys, shape ``(len(seeds), runs)``, for a batch of master seeds."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    idx = splitmix64(np.arange(1, runs + 1, dtype=np.uint64))
    return splitmix64(seeds[:, None] ^ idx[None, :])


def edge_uniforms(row_keys, edge_ids):
    """Uniform draw for (run key, directed edge id) pairs."""
    edge_ids = np.asarray(edge_ids, dtype=np.uint64)
    with np.errstate(over="ignore"):
        mixed = row_keys ^ (edge_ids * _GOLDEN + _M2)
    return to_unit(splitmix64(mixed))
