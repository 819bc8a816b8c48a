"""Pure-numpy kernels: the fallback path and the reference for parity tests.

``sample_walks`` is vectorised across walks and bit-identical to the numba
version.  ``train_epoch`` runs the same per-update rule with numpy vector
ops inside a Python loop; it is exact but slow, so it is only practical for
small corpora and for checking the compiled path.
"""

from __future__ import annotations

import numpy as np

from .rng import GOLDEN, UINT64_MASK, mix64, walk_base_seeds

NAME = "numpy"
PARALLEL = False


def sample_walks(indptr, indices, starts, samples, length, seed):
    """Sample ``samples`` walks of ``length`` edges from every start node.

    Returns an int32 array of shape (len(starts), samples, length + 1).
    Every start must have degree >= 1.
    """
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    nwalks = starts.size * samples
    cur = np.repeat(starts, samples)
    slots = np.tile(np.arange(samples, dtype=np.uint64), starts.size)
    base = walk_base_seeds(seed, cur, slots)
    out = np.empty((nwalks, length + 1), np.int32)
    out[:, 0] = cur
    with np.errstate(over="ignore"):
        for step in range(length):
            r = mix64(base + np.uint64((step + 1) & UINT64_MASK) * GOLDEN)
            left = indptr[cur]
            deg = (indptr[cur + 1] - left).astype(np.uint64)
            cur = indices[left + (r % deg).astype(np.int64)].astype(np.int64)
            out[:, step + 1] = cur
    return out.reshape(starts.size, samples, length + 1)


def train_epoch(node_vecs, token_vecs, pred_w, pred_b, inner_vecs, contexts,
                path_ptr, path_nodes, path_bits, order, window,
                lr_start, lr_end, total_updates, done):
    """One pass over ``order`` of hierarchical-softmax PV-DM updates.

    Gradient ascent on log p(target | window, node).  ``pred_b`` is a
    1-element array so the scalar bias can be updated in place.  Learning
    rate decays linearly with the global update counter starting at ``done``.
    """
    dim = node_vecs.shape[1]
    interior = contexts.shape[1] - 2 * window
    lr_span = lr_end - lr_start
    b = pred_b[0]
    for i in range(order.size):
        lr = lr_start + lr_span * ((done + i) / total_updates)
        flat = order[i]
        row = flat // interior
        t = window + flat % interior
        ctx = contexts[row, t - window:t + window + 1]
        target = ctx[window]
        ids = np.concatenate((ctx[:window], ctx[window + 1:]))
        hidden = np.concatenate((token_vecs[ids].sum(axis=0), node_vecs[row]))

        lo, hi = path_ptr[target], path_ptr[target + 1]
        inner = path_nodes[lo:hi]
        uv = pred_w + inner_vecs[inner]
        score = b + uv @ hidden
        grad = (1.0 - path_bits[lo:hi]) - 1.0 / (1.0 + np.exp(-score))
        ghidden = grad @ uv

        inner_vecs[inner] += (lr * grad)[:, None] * hidden[None, :]
        gsum = grad.sum()
        pred_w += (lr * gsum) * hidden
        b += lr * gsum
        np.add.at(token_vecs, ids, lr * ghidden[:dim])
        node_vecs[row] += lr * ghidden[dim:]
    pred_b[0] = b
