"""Paragraph-vector training with hierarchical softmax.

Each corpus node owns a d-dim vector; each token owns a d-dim vector.  To
predict the token at position t, the 2Δ surrounding token vectors are summed
(the target position itself is excluded), concatenated with the node vector
into a 2d hidden vector h, and scored against a frequency-weighted Huffman
tree: the decision at internal node j is

    sigma(pred_bias + (pred_weight + inner_vecs[j]) . h)

so a single shared affine readout (pred_weight, pred_bias) is composed with
one vector per internal node.  Leaf probabilities multiply the branch
sigmoids along the root-to-leaf code, which sums to one over the lexicon by
construction.  Training maximises mean log-probability by SGD with a
linearly decaying step size.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .corpus import Corpus, Lexicon

__all__ = [
    "HuffmanTree", "TrainConfig", "EmbeddingModel", "build_huffman",
    "init_model", "score", "window_log_prob", "corpus_log_likelihood",
    "full_batch_step", "grad_check", "train", "export_embeddings",
    "load_embeddings",
]


@dataclass
class HuffmanTree:
    """Prefix codes over the lexicon plus per-internal-node parameters.

    ``path_nodes[path_ptr[t]:path_ptr[t+1]]`` are the internal nodes on the
    root-to-leaf path of token t, ``path_bits`` the branch taken at each
    (0 = first-popped child).  ``inner_vecs`` is allocated by init_model.
    """
    path_ptr: np.ndarray
    path_nodes: np.ndarray
    path_bits: np.ndarray
    num_internal: int
    inner_vecs: np.ndarray | None = None

    def code_length(self, token_id: int) -> int:
        return int(self.path_ptr[token_id + 1] - self.path_ptr[token_id])

    @property
    def max_code_length(self) -> int:
        if self.path_ptr.size <= 1:
            return 0
        return int(np.diff(self.path_ptr).max())


def build_huffman(lexicon: Lexicon) -> HuffmanTree:
    """Frequency-weighted Huffman codes with deterministic tie-breaking.

    Heap entries are (frequency, creation id); leaves use their token id, so
    equal frequencies resolve by token id and the tree is a pure function of
    the lexicon.  A single-token lexicon yields an empty code.
    """
    n = len(lexicon)
    if n == 0:
        raise ValueError("lexicon is empty")
    if n == 1:
        return HuffmanTree(np.zeros(2, dtype=np.int64), np.empty(0, np.int32),
                           np.empty(0, np.uint8), 0)
    freqs = lexicon.frequencies
    parent = np.full(2 * n - 1, -1, dtype=np.int64)
    bit = np.zeros(2 * n - 1, dtype=np.uint8)
    heap = [(int(freqs[i]), i) for i in range(n)]
    heapq.heapify(heap)
    nxt = n
    while len(heap) > 1:
        f0, a = heapq.heappop(heap)
        f1, b = heapq.heappop(heap)
        parent[a] = nxt
        parent[b] = nxt
        bit[b] = 1
        heapq.heappush(heap, (f0 + f1, nxt))
        nxt += 1
    ptr = np.zeros(n + 1, dtype=np.int64)
    paths = []
    bits = []
    for t in range(n):
        rev_nodes = []
        rev_bits = []
        node = t
        while parent[node] >= 0:
            rev_bits.append(bit[node])
            rev_nodes.append(parent[node] - n)  # internal ids are 0-based
            node = parent[node]
        paths.extend(reversed(rev_nodes))
        bits.extend(reversed(rev_bits))
        ptr[t + 1] = len(paths)
    return HuffmanTree(ptr, np.asarray(paths, dtype=np.int32),
                       np.asarray(bits, dtype=np.uint8), n - 1)


@dataclass
class TrainConfig:
    dim: int = 128
    window: int = 5
    epochs: int = 100
    lr_start: float = 0.025
    lr_end: float = 1e-4
    seed: int = 1
    threads: int = 1
    deterministic: bool = True


@dataclass
class EmbeddingModel:
    node_vecs: np.ndarray   # (corpus nodes, d)
    token_vecs: np.ndarray  # (lexicon, d)
    pred_weight: np.ndarray  # (2d,) shared readout weights
    pred_bias: float
    tree: HuffmanTree
    config: TrainConfig
    node_ids: np.ndarray
    node_raw_ids: list[str]
    mode: str = ""
    walk_length: int = 0
    samples: int = 0
    _rows: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return int(self.node_vecs.shape[1])

    def row_of(self, node: int) -> int:
        if not self._rows:
            self._rows.update({int(v): i for i, v in enumerate(self.node_ids)})
        try:
            return self._rows[int(node)]
        except KeyError:
            raise KeyError(f"node {node} is not in the trained corpus") from None

    def all_finite(self) -> bool:
        return (np.isfinite(self.node_vecs).all() and np.isfinite(self.token_vecs).all()
                and np.isfinite(self.pred_weight).all() and np.isfinite(self.pred_bias)
                and np.isfinite(self.tree.inner_vecs).all())


def init_model(corpus: Corpus, lexicon: Lexicon, cfg: TrainConfig) -> EmbeddingModel:
    """Allocate parameters: vectors uniform in [-0.5/d, 0.5/d], readout zero."""
    if cfg.dim < 1:
        raise ValueError("dim must be >= 1")
    if cfg.window < 1:
        raise ValueError("window must be >= 1")
    if corpus.samples <= 2 * cfg.window:
        raise ValueError(
            f"samples={corpus.samples} leaves no interior positions for window={cfg.window}")
    tree = build_huffman(lexicon)
    rng = np.random.default_rng(cfg.seed)
    d = cfg.dim
    node_vecs = (rng.random((corpus.num_nodes, d)) - 0.5) / d
    token_vecs = (rng.random((len(lexicon), d)) - 0.5) / d
    tree.inner_vecs = np.zeros((tree.num_internal, 2 * d))
    return EmbeddingModel(node_vecs, token_vecs, np.zeros(2 * d), 0.0, tree,
                          replace(cfg), corpus.node_ids.copy(),
                          list(corpus.node_raw_ids), corpus.mode,
                          corpus.walk_length, corpus.samples)


# ---------------------------------------------------------------------------
# Scoring (reference path, plain numpy)
# ---------------------------------------------------------------------------

def _hidden(model: EmbeddingModel, context_token_ids, row: int) -> np.ndarray:
    ctx = np.asarray(context_token_ids, dtype=np.int64)
    summed = model.token_vecs[ctx].sum(axis=0) if ctx.size else np.zeros(model.dim)
    return np.concatenate((summed, model.node_vecs[row]))


def score(model: EmbeddingModel, context_token_ids, node: int, target: int) -> float:
    """Shared-readout score pred_bias + pred_weight . [sum(ctx), node vec].

    ``context_token_ids`` must already exclude the target position (the
    window minus its centre); the target id selects the Huffman path in
    window_log_prob and is accepted here for interface symmetry.
    """
    del target
    h = _hidden(model, context_token_ids, model.row_of(node))
    return float(model.pred_bias + model.pred_weight @ h)


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    # stable: -log(1 + exp(-|x|)) + min(x, 0)
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


def _window_ids(corpus: Corpus, row: int, t: int, window: int):
    lo, hi = t - window, t + window + 1
    if lo < 0 or hi > corpus.samples:
        raise ValueError(
            f"t={t} is not interior: need {window} <= t <= {corpus.samples - window - 1}")
    seq = corpus.contexts[row]
    ctx = np.concatenate((seq[lo:t], seq[t + 1:hi])).astype(np.int64)
    return ctx, int(seq[t])


def window_log_prob(model: EmbeddingModel, corpus: Corpus, node: int, t: int) -> float:
    """log p(token at position t | surrounding window, node vector)."""
    row = model.row_of(node)
    ctx, target = _window_ids(corpus, row, t, model.config.window)
    h = _hidden(model, ctx, row)
    tree = model.tree
    lo, hi = tree.path_ptr[target], tree.path_ptr[target + 1]
    if lo == hi:
        return 0.0  # single-token lexicon: probability 1
    uv = model.pred_weight + tree.inner_vecs[tree.path_nodes[lo:hi]]
    s = model.pred_bias + uv @ h
    signs = 1.0 - 2.0 * tree.path_bits[lo:hi].astype(np.float64)
    return float(_log_sigmoid(signs * s).sum())


def leaf_log_probs(model: EmbeddingModel, corpus: Corpus, node: int, t: int) -> np.ndarray:
    """log p for every token in the lexicon at (node, t); sums to one in prob."""
    row = model.row_of(node)
    ctx, _ = _window_ids(corpus, row, t, model.config.window)
    h = _hidden(model, ctx, row)
    tree = model.tree
    n = tree.path_ptr.size - 1
    out = np.empty(n)
    for tok in range(n):
        lo, hi = tree.path_ptr[tok], tree.path_ptr[tok + 1]
        if lo == hi:
            out[tok] = 0.0
            continue
        uv = model.pred_weight + tree.inner_vecs[tree.path_nodes[lo:hi]]
        s = model.pred_bias + uv @ h
        signs = 1.0 - 2.0 * tree.path_bits[lo:hi].astype(np.float64)
        out[tok] = _log_sigmoid(signs * s).sum()
    return out


# ---------------------------------------------------------------------------
# Reference gradients
# ---------------------------------------------------------------------------

@dataclass
class _WindowGrads:
    row: int
    node: np.ndarray          # d
    tokens: dict              # token id -> d (multiplicity folded in)
    pred_weight: np.ndarray   # 2d
    pred_bias: float
    inner: dict               # internal id -> 2d


def _window_grads(model: EmbeddingModel, corpus: Corpus, node: int, t: int) -> _WindowGrads:
    """Analytic gradient of window_log_prob in every parameter block."""
    row = model.row_of(node)
    ctx, target = _window_ids(corpus, row, t, model.config.window)
    h = _hidden(model, ctx, row)
    d = model.dim
    tree = model.tree
    lo, hi = tree.path_ptr[target], tree.path_ptr[target + 1]
    nodes = tree.path_nodes[lo:hi]
    uv = model.pred_weight + tree.inner_vecs[nodes]
    s = model.pred_bias + uv @ h
    g = (1.0 - tree.path_bits[lo:hi]) - 1.0 / (1.0 + np.exp(-s))
    ghidden = g @ uv if nodes.size else np.zeros(2 * d)
    tokens: dict[int, np.ndarray] = {}
    for tok in ctx.tolist():
        if tok in tokens:
            tokens[tok] = tokens[tok] + ghidden[:d]
        else:
            tokens[tok] = ghidden[:d].copy()
    inner = {int(j): g[k] * h for k, j in enumerate(nodes)}
    return _WindowGrads(row, ghidden[d:].copy(), tokens,
                        float(g.sum()) * h, float(g.sum()), inner)


def corpus_log_likelihood(model: EmbeddingModel, corpus: Corpus) -> float:
    """Mean window log-probability over all nodes and interior positions."""
    window = model.config.window
    total = 0.0
    count = 0
    for node in corpus.node_ids.tolist():
        for t in range(window, corpus.samples - window):
            total += window_log_prob(model, corpus, node, t)
            count += 1
    return total / count


def full_batch_step(model: EmbeddingModel, corpus: Corpus, lr: float) -> None:
    """One full-batch gradient ascent step on the mean log-likelihood."""
    window = model.config.window
    d = model.dim
    g_node = np.zeros_like(model.node_vecs)
    g_tok = np.zeros_like(model.token_vecs)
    g_w = np.zeros(2 * d)
    g_b = 0.0
    g_inner = np.zeros_like(model.tree.inner_vecs)
    count = 0
    for node in corpus.node_ids.tolist():
        for t in range(window, corpus.samples - window):
            grads = _window_grads(model, corpus, node, t)
            g_node[grads.row] += grads.node
            for tok, vec in grads.tokens.items():
                g_tok[tok] += vec
            g_w += grads.pred_weight
            g_b += grads.pred_bias
            for j, vec in grads.inner.items():
                g_inner[j] += vec
            count += 1
    scale = lr / count
    model.node_vecs += scale * g_node
    model.token_vecs += scale * g_tok
    model.pred_weight += scale * g_w
    model.pred_bias += scale * g_b
    model.tree.inner_vecs += scale * g_inner


def grad_check(model: EmbeddingModel, corpus: Corpus, node: int, t: int,
               epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Covers the node vector, every context token vector, the shared readout
    weights and bias, and the internal vectors on the target's path.  The
    relative error uses max(1, |a|, |n|) in the denominator so coordinates
    with true zero gradient are judged by absolute error.
    """
    grads = _window_grads(model, corpus, node, t)
    worst = 0.0

    def check(analytic: float, plus: float, minus: float) -> None:
        nonlocal worst
        numeric = (plus - minus) / (2.0 * epsilon)
        err = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
        worst = max(worst, err)

    def reval() -> float:
        return window_log_prob(model, corpus, node, t)

    for i in range(model.dim):
        orig = model.node_vecs[grads.row, i]
        model.node_vecs[grads.row, i] = orig + epsilon
        up = reval()
        model.node_vecs[grads.row, i] = orig - epsilon
        down = reval()
        model.node_vecs[grads.row, i] = orig
        check(grads.node[i], up, down)
    for tok, vec in grads.tokens.items():
        for i in range(model.dim):
            orig = model.token_vecs[tok, i]
            model.token_vecs[tok, i] = orig + epsilon
            up = reval()
            model.token_vecs[tok, i] = orig - epsilon
            down = reval()
            model.token_vecs[tok, i] = orig
            check(vec[i], up, down)
    for i in range(2 * model.dim):
        orig = model.pred_weight[i]
        model.pred_weight[i] = orig + epsilon
        up = reval()
        model.pred_weight[i] = orig - epsilon
        down = reval()
        model.pred_weight[i] = orig
        check(grads.pred_weight[i], up, down)
    orig_b = model.pred_bias
    model.pred_bias = orig_b + epsilon
    up = reval()
    model.pred_bias = orig_b - epsilon
    down = reval()
    model.pred_bias = orig_b
    check(grads.pred_bias, up, down)
    for j, vec in grads.inner.items():
        for i in range(2 * model.dim):
            orig = model.tree.inner_vecs[j, i]
            model.tree.inner_vecs[j, i] = orig + epsilon
            up = reval()
            model.tree.inner_vecs[j, i] = orig - epsilon
            down = reval()
            model.tree.inner_vecs[j, i] = orig
            check(vec[i], up, down)
    return worst


# ---------------------------------------------------------------------------
# SGD training
# ---------------------------------------------------------------------------

def train(corpus: Corpus, lexicon: Lexicon, cfg: TrainConfig) -> EmbeddingModel:
    """SGD over shuffled (node, position) pairs for cfg.epochs passes.

    Deterministic given (corpus, lexicon, cfg) on a fixed backend.  With
    ``deterministic=False`` and ``threads > 1`` on the compiled backend,
    updates run lock-free over row shards.  Raises FloatingPointError if any
    parameter turns non-finite after an epoch.
    """
    if cfg.epochs < 1:
        raise ValueError("epochs must be >= 1")
    if cfg.lr_start <= 0 or cfg.lr_end <= 0 or cfg.lr_end > cfg.lr_start:
        raise ValueError("need lr_start >= lr_end > 0")
    model = init_model(corpus, lexicon, cfg)
    kern = backend.get_kernels()
    interior = corpus.samples - 2 * cfg.window
    pairs = corpus.num_nodes * interior
    total = float(cfg.epochs) * pairs
    # shuffle stream kept separate from the init stream
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & 0xFFFFFFFF, 1]))
    bias = np.array([model.pred_bias])
    tree = model.tree
    # threads > 1 with deterministic=True or the numpy backend falls back to
    # serial updates; lock-free sharding needs the compiled path
    hogwild = (cfg.threads > 1 and not cfg.deterministic and kern.PARALLEL)
    threads = cfg.threads
    if hogwild:
        import numba

        threads = min(threads, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(threads)
        shard_of_row = np.arange(corpus.num_nodes) % threads
    for epoch in range(cfg.epochs):
        order = rng.permutation(pairs)
        done = epoch * pairs
        if hogwild:
            shard = shard_of_row[order // interior]
            grouped = np.argsort(shard, kind="stable")
            order = order[grouped]
            shard_ptr = np.zeros(threads + 1, dtype=np.int64)
            np.cumsum(np.bincount(shard, minlength=threads), out=shard_ptr[1:])
            kern.train_epoch_hogwild(
                model.node_vecs, model.token_vecs, model.pred_weight, bias,
                tree.inner_vecs, corpus.contexts, tree.path_ptr,
                tree.path_nodes, tree.path_bits, shard_ptr, order,
                cfg.window, cfg.lr_start, cfg.lr_end, total, done)
        else:
            kern.train_epoch(
                model.node_vecs, model.token_vecs, model.pred_weight, bias,
                tree.inner_vecs, corpus.contexts, tree.path_ptr,
                tree.path_nodes, tree.path_bits, order,
                cfg.window, cfg.lr_start, cfg.lr_end, total, done)
        model.pred_bias = float(bias[0])
        if not model.all_finite():
            raise FloatingPointError(f"non-finite parameters after epoch {epoch}")
    return model


# ---------------------------------------------------------------------------
# Embedding IO
# ---------------------------------------------------------------------------

def export_embeddings(model: EmbeddingModel, id_map, path) -> None:
    """TSV: raw node id then d floats at 9 significant digits.

    ``id_map`` supplies the raw id per model row.  The header comment
    records dim, mode, walk_length, samples, window for provenance.
    """
    if len(id_map) != model.node_vecs.shape[0]:
        raise ValueError("id_map length does not match the embedding matrix")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim={model.dim} mode={model.mode} "
                 f"walk_length={model.walk_length} samples={model.samples} "
                 f"window={model.config.window}\n")
        for rid, vec in zip(id_map, model.node_vecs):
            cells = "\t".join(f"{x:.9g}" for x in vec)
            fh.write(f"{rid}\t{cells}\n")


def load_embeddings(path) -> tuple[list[str], np.ndarray, dict]:
    """Read an embedding TSV back: (raw ids, matrix, header metadata)."""
    meta: dict[str, str] = {}
    ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                for part in stripped[1:].split():
                    if "=" in part:
                        key, val = part.split("=", 1)
                        meta[key] = val
                continue
            fields = stripped.split("\t")
            if len(fields) < 2:
                raise ValueError(f"{path}:{lineno}: expected id and floats")
            ids.append(fields[0])
            rows.append([float(x) for x in fields[1:]])
    if not ids:
        raise ValueError(f"{path}: no embedding rows")
    mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"{path}: ragged embedding rows")
    return ids, mat, meta
