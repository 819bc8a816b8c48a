"""Counter-based pseudo-random bits for walk sampling.

Walk sampling uses a keyed splitmix64 finalizer instead of a stateful
generator so that the random stream for walk slot ``s`` of node ``v`` is a
pure function of ``(seed, v, s, step)``.  That makes corpora independent of
chunking and scheduling, and lets the compiled and pure-numpy kernels produce
bit-identical output.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
SLOT_SALT = np.uint64(0xD1342543DE82EF95)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

UINT64_MASK = 0xFFFFFFFFFFFFFFFF


def mix64(z):
    """splitmix64 finalizer.

    Accepts uint64 scalars or arrays; also compiles under numba unchanged.
    All constants are np.uint64 so mixed-type promotion to float64 never
    happens inside a jitted kernel.
    """
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def walk_base_seeds(seed: int, nodes, slots):
    """Per-walk base seed for node array ``nodes`` and slot array ``slots``."""
    s0 = np.uint64(seed & UINT64_MASK)
    v = nodes.astype(np.uint64) + np.uint64(1)
    s = slots.astype(np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return mix64(mix64(s0 + v * GOLDEN) + s * SLOT_SALT)
