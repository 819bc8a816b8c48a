"""Numba-compiled kernels: the default hot path.

Mirrors :mod:`hawe.kernels_np`.  Walk sampling produces bit-identical
output; training applies the identical update rule with scalar loops.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .rng import GOLDEN, SLOT_SALT, UINT64_MASK

NAME = "numba"
PARALLEL = True

_U1 = np.uint64(1)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _sample_walks(indptr, indices, starts, samples, length, seed):
    nstarts = starts.size
    out = np.empty((nstarts, samples, length + 1), np.int32)
    for bi in range(nstarts):
        v = starts[bi]
        vkey = _mix64(seed + (np.uint64(v) + _U1) * GOLDEN)
        for s in range(samples):
            base = _mix64(vkey + (np.uint64(s) + _U1) * SLOT_SALT)
            cur = v
            out[bi, s, 0] = cur
            for step in range(length):
                r = _mix64(base + (np.uint64(step) + _U1) * GOLDEN)
                left = indptr[cur]
                deg = np.uint64(indptr[cur + 1] - left)
                cur = indices[left + np.int64(r % deg)]
                out[bi, s, step + 1] = cur
    return out


def sample_walks(indptr, indices, starts, samples, length, seed):
    """Compiled twin of kernels_np.sample_walks; same bits, same shape."""
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    return _sample_walks(indptr, indices, starts, samples, length,
                         np.uint64(seed & UINT64_MASK))


@njit(cache=True)
def _train_epoch(node_vecs, token_vecs, pred_w, pred_b, inner_vecs, contexts,
                 path_ptr, path_nodes, path_bits, order, window,
                 lr_start, lr_end, total_updates, done, grad_buf):
    dim = node_vecs.shape[1]
    dim2 = 2 * dim
    interior = contexts.shape[1] - 2 * window
    lr_span = lr_end - lr_start
    hidden = np.empty(dim2)
    ghidden = np.empty(dim2)
    b = pred_b[0]
    for i in range(order.size):
        lr = lr_start + lr_span * ((done + i) / total_updates)
        flat = order[i]
        row = flat // interior
        t = window + flat % interior
        target = contexts[row, t]

        for j in range(dim2):
            hidden[j] = 0.0
        for c in range(t - window, t + window + 1):
            if c == t:
                continue
            wid = contexts[row, c]
            for j in range(dim):
                hidden[j] += token_vecs[wid, j]
        for j in range(dim):
            hidden[dim + j] = node_vecs[row, j]

        lo = path_ptr[target]
        hi = path_ptr[target + 1]
        for j in range(dim2):
            ghidden[j] = 0.0
        gsum = 0.0
        for p in range(lo, hi):
            inner = path_nodes[p]
            score = b
            for j in range(dim2):
                score += (pred_w[j] + inner_vecs[inner, j]) * hidden[j]
            g = (1.0 - path_bits[p]) - 1.0 / (1.0 + np.exp(-score))
            grad_buf[p - lo] = g
            gsum += g
            for j in range(dim2):
                ghidden[j] += g * (pred_w[j] + inner_vecs[inner, j])
        for p in range(lo, hi):
            glr = lr * grad_buf[p - lo]
            inner = path_nodes[p]
            for j in range(dim2):
                inner_vecs[inner, j] += glr * hidden[j]
        glr = lr * gsum
        for j in range(dim2):
            pred_w[j] += glr * hidden[j]
        b += glr

        for c in range(t - window, t + window + 1):
            if c == t:
                continue
            wid = contexts[row, c]
            for j in range(dim):
                token_vecs[wid, j] += lr * ghidden[j]
        for j in range(dim):
            node_vecs[row, j] += lr * ghidden[dim + j]
    pred_b[0] = b


@njit(cache=True, parallel=True)
def _train_epoch_hogwild(node_vecs, token_vecs, pred_w, pred_b, inner_vecs,
                         contexts, path_ptr, path_nodes, path_bits,
                         shard_ptr, order, window,
                         lr_start, lr_end, total_updates, done, max_code):
    # lock-free shared updates; shards hold disjoint context rows
    dim = node_vecs.shape[1]
    dim2 = 2 * dim
    interior = contexts.shape[1] - 2 * window
    lr_span = lr_end - lr_start
    for w in prange(shard_ptr.size - 1):
        hidden = np.empty(dim2)
        ghidden = np.empty(dim2)
        grad_buf = np.empty(max_code)
        for i in range(shard_ptr[w], shard_ptr[w + 1]):
            lr = lr_start + lr_span * ((done + i) / total_updates)
            if lr < lr_end:
                lr = lr_end
            flat = order[i]
            row = flat // interior
            t = window + flat % interior
            target = contexts[row, t]
            for j in range(dim2):
                hidden[j] = 0.0
            for c in range(t - window, t + window + 1):
                if c == t:
                    continue
                wid = contexts[row, c]
                for j in range(dim):
                    hidden[j] += token_vecs[wid, j]
            for j in range(dim):
                hidden[dim + j] = node_vecs[row, j]
            lo = path_ptr[target]
            hi = path_ptr[target + 1]
            for j in range(dim2):
                ghidden[j] = 0.0
            gsum = 0.0
            b = pred_b[0]
            for p in range(lo, hi):
                inner = path_nodes[p]
                score = b
                for j in range(dim2):
                    score += (pred_w[j] + inner_vecs[inner, j]) * hidden[j]
                g = (1.0 - path_bits[p]) - 1.0 / (1.0 + np.exp(-score))
                grad_buf[p - lo] = g
                gsum += g
                for j in range(dim2):
                    ghidden[j] += g * (pred_w[j] + inner_vecs[inner, j])
            for p in range(lo, hi):
                glr = lr * grad_buf[p - lo]
                inner = path_nodes[p]
                for j in range(dim2):
                    inner_vecs[inner, j] += glr * hidden[j]
            glr = lr * gsum
            for j in range(dim2):
                pred_w[j] += glr * hidden[j]
            pred_b[0] += glr
            for c in range(t - window, t + window + 1):
                if c == t:
                    continue
                wid = contexts[row, c]
                for j in range(dim):
                    token_vecs[wid, j] += lr * ghidden[j]
            for j in range(dim):
                node_vecs[row, j] += lr * ghidden[dim + j]


def train_epoch(node_vecs, token_vecs, pred_w, pred_b, inner_vecs, contexts,
                path_ptr, path_nodes, path_bits, order, window,
                lr_start, lr_end, total_updates, done):
    max_code = 1
    if path_ptr.size > 1:
        max_code = int(np.diff(path_ptr).max())
    grad_buf = np.empty(max(max_code, 1))
    _train_epoch(node_vecs, token_vecs, pred_w, pred_b, inner_vecs, contexts,
                 path_ptr, path_nodes, path_bits, order, window,
                 float(lr_start), float(lr_end), float(total_updates),
                 float(done), grad_buf)


def train_epoch_hogwild(node_vecs, token_vecs, pred_w, pred_b, inner_vecs,
                        contexts, path_ptr, path_nodes, path_bits,
                        shard_ptr, order, window,
                        lr_start, lr_end, total_updates, done):
    max_code = 1
    if path_ptr.size > 1:
        max_code = int(np.diff(path_ptr).max())
    _train_epoch_hogwild(node_vecs, token_vecs, pred_w, pred_b, inner_vecs,
                         contexts, path_ptr, path_nodes, path_bits,
                         shard_ptr, order, window,
                         float(lr_start), float(lr_end), float(total_updates),
                         float(done), max(max_code, 1))
