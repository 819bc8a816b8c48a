"""Evaluation harness: classification, nearest neighbors, sweeps, benchmarks.

The classifier is a from-scratch multinomial logistic regression (full-batch
gradient descent with a Lipschitz step size and a small L2 penalty) so
results do not depend on an external solver's version.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as model_mod
from .corpus import build_corpus
from .graph import HeteroGraph, gen_ba, gen_er


@dataclass
class EvalReport:
    task: str
    accuracies: list[float]
    mean_accuracy: float
    config: dict = field(default_factory=dict)


@dataclass
class NeighborList:
    target: str
    neighbors: list  # (raw id, distance), ascending distance


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def _fit_softmax(x: np.ndarray, y: np.ndarray, num_classes: int,
                 l2: float, max_iter: int, tol: float):
    """Multinomial logistic regression by full-batch gradient descent.

    Minimises mean cross-entropy + (l2/2)||W||^2 (bias unpenalised) with
    constant step 1/L where L bounds the Hessian spectral norm: softmax
    cross-entropy is (1/2)-smooth in the logits, so L = 0.5 s_max(X~)^2 / n
    + l2 with X~ the bias-augmented design matrix.
    """
    n, d = x.shape
    xa = np.hstack((x, np.ones((n, 1))))
    w = np.zeros((d + 1, num_classes))
    onehot = np.zeros((n, num_classes))
    onehot[np.arange(n), y] = 1.0
    smax = np.linalg.svd(xa, compute_uv=False)[0]
    step = 1.0 / (0.5 * smax * smax / n + l2)
    for _ in range(max_iter):
        logits = xa @ w
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        grad = xa.T @ (p - onehot) / n
        grad[:d] += l2 * w[:d]
        if np.linalg.norm(grad) < tol:
            break
        w -= step * grad
    return w


def _predict(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    xa = np.hstack((x, np.ones((x.shape[0], 1))))
    return np.argmax(xa @ w, axis=1)


def _stratified_split(y: np.ndarray, train_frac: float, rng) -> np.ndarray:
    """Boolean train mask with round(train_frac * n_c) per class, min 1."""
    mask = np.zeros(y.size, dtype=bool)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        take = int(round(train_frac * idx.size))
        take = min(max(take, 1), idx.size - 1) if idx.size > 1 else 1
        mask[rng.permutation(idx)[:take]] = True
    return mask


def classify(embeddings: np.ndarray, labels: np.ndarray, train_frac: float = 0.7,
             repeats: int = 50, seed: int = 0, l2: float = 1e-4,
             max_iter: int = 500, tol: float = 1e-6) -> EvalReport:
    """Repeated stratified splits + logistic regression on the embeddings.

    Rows with label < 0 are ignored.  Each repeat derives its own split
    stream from (seed, repeat); a repeat whose training fold misses a class
    is redrawn, at most 10 times, before erroring out.
    """
    labels = np.asarray(labels)
    keep = np.flatnonzero(labels >= 0)
    if keep.size == 0:
        raise ValueError("no labeled rows")
    x = np.asarray(embeddings, dtype=np.float64)[keep]
    _, y = np.unique(labels[keep], return_inverse=True)
    num_classes = int(y.max()) + 1
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    counts = np.bincount(y)
    if counts.min() < 2:
        raise ValueError("every class needs at least 2 labeled nodes")
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    accs = []
    for rep in range(repeats):
        rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, rep]))
        for _attempt in range(10):
            mask = _stratified_split(y, train_frac, rng)
            if np.unique(y[mask]).size == num_classes and not mask.all():
                break
        else:
            raise RuntimeError("could not draw a split covering every class")
        w = _fit_softmax(x[mask], y[mask], num_classes, l2, max_iter, tol)
        pred = _predict(w, x[~mask])
        accs.append(float(np.mean(pred == y[~mask])))
    return EvalReport("classification", accs, float(np.mean(accs)),
                      {"train_frac": train_frac, "repeats": repeats, "seed": seed,
                       "classes": num_classes, "rows": int(keep.size)})


def nn_accuracy(embeddings: np.ndarray, labels: np.ndarray) -> float:
    """Leave-one-out 1-nearest-neighbor label agreement (ties by lowest id)."""
    x = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    nearest = dist.argmin(axis=1)
    return float(np.mean(labels[nearest] == labels))


# ---------------------------------------------------------------------------
# Similarity search
# ---------------------------------------------------------------------------

def topk_search(embeddings: np.ndarray, raw_ids, target: str, k: int) -> NeighborList:
    """Exact Euclidean top-k neighbors of ``target``, ties broken by row order."""
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must be in 1..{n - 1}")
    ids = list(raw_ids)
    try:
        idx = ids.index(target)
    except ValueError:
        raise KeyError(f"unknown node id {target!r}") from None
    diff = x - x[idx]
    dist = np.sqrt((diff * diff).sum(axis=1))
    order = np.lexsort((np.arange(n), dist))
    order = order[order != idx][:k]
    return NeighborList(target, [(ids[i], float(dist[i])) for i in order])


# ---------------------------------------------------------------------------
# Pipeline plumbing shared by sweep and bench
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Everything needed to go graph -> corpus -> embeddings -> accuracy."""
    samples: int = 1024
    walk_length: int = 6
    mode: str = "haw"
    dim: int = 128
    window: int = 5
    epochs: int = 100
    lr_start: float = 0.025
    lr_end: float = 1e-4
    seed: int = 1
    train_frac: float = 0.7
    repeats: int = 50

    def train_config(self) -> model_mod.TrainConfig:
        return model_mod.TrainConfig(dim=self.dim, window=self.window,
                                     epochs=self.epochs, lr_start=self.lr_start,
                                     lr_end=self.lr_end, seed=self.seed)


def run_pipeline(graph: HeteroGraph, labels: np.ndarray,
                 cfg: PipelineConfig) -> EvalReport:
    """Corpus, training and classification in one deterministic shot."""
    corp, lex = build_corpus(graph, cfg.samples, cfg.walk_length, cfg.mode, cfg.seed)
    emb = model_mod.train(corp, lex, cfg.train_config())
    row_labels = np.asarray(labels)[corp.node_ids]
    return classify(emb.node_vecs, row_labels, cfg.train_frac, cfg.repeats, cfg.seed)


SWEEPABLE = {"T": "samples", "L": "walk_length", "d": "dim", "window": "window"}


def sweep(param: str, values, graph: HeteroGraph, labels,
          base: PipelineConfig) -> list[tuple]:
    """Re-run the pipeline for each value of one knob; returns (value, mean acc)."""
    if param not in SWEEPABLE:
        known = ", ".join(sorted(SWEEPABLE))
        raise ValueError(f"cannot sweep {param!r}; choose one of {known}")
    field_name = SWEEPABLE[param]
    if not values:
        raise ValueError("values must be non-empty")
    out = []
    for value in values:
        cfg = replace(base, **{field_name: value})
        report = run_pipeline(graph, labels, cfg)
        out.append((value, report.mean_accuracy))
    return out


# ---------------------------------------------------------------------------
# Runtime benchmark
# ---------------------------------------------------------------------------

def bench_runtime(sizes, family: str, cfg: PipelineConfig, runs: int = 5,
                  p_numerator: float = 10.0, edges_per_node: int = 1,
                  num_types: int = 2, seed: int = 0) -> list[dict]:
    """Wall-clock corpus+train time per graph size, averaged over runs.

    ER graphs use p = p_numerator / n so the expected degree stays constant
    across sizes; BA graphs attach ``edges_per_node`` edges per arrival.
    A small warm-up run precedes timing so kernel compilation is excluded.
    """
    if family not in ("er", "ba"):
        raise ValueError("family must be 'er' or 'ba'")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    warm = gen_er(64, 0.1, num_types, seed=seed)
    _bench_once(warm, cfg)
    rows = []
    for n in sizes:
        if family == "er":
            graph = gen_er(int(n), min(1.0, p_numerator / int(n)), num_types, seed=seed)
        else:
            graph = gen_ba(int(n), edges_per_node, num_types, seed=seed)
        times = []
        for _run in range(runs):
            start = time.perf_counter()
            _bench_once(graph, cfg)
            times.append(time.perf_counter() - start)
        rows.append({"n": int(n), "edges": graph.num_edges,
                     "seconds": float(np.mean(times)),
                     "per_run": [float(t) for t in times]})
    return rows


def _bench_once(graph: HeteroGraph, cfg: PipelineConfig) -> None:
    corp, lex = build_corpus(graph, cfg.samples, cfg.walk_length, cfg.mode, cfg.seed)
    model_mod.train(corp, lex, cfg.train_config())
