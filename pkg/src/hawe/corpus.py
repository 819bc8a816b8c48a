"""Walk corpora: per-node token sequences plus an interned lexicon.

``build_corpus`` samples a fixed number of walks per non-isolated node,
anonymizes them under the chosen mode, and interns the resulting tokens into
dense ids.  Token ids are assigned by first occurrence in (node order, walk
slot) order, which is independent of chunking and of the kernel backend.

The on-disk format is a little-endian binary blob with a magic header, ideal
for byte-level reproducibility checks; a human-readable TSV export exists
for debugging.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import backend
from .walks import MODES

MAGIC = b"HAWCORP1"
FORMAT_VERSION = 1


class CorpusFormatError(ValueError):
    """Corpus file is not readable: bad magic, version, or truncation."""


@dataclass
class Lexicon:
    tokens: list[str]
    frequencies: np.ndarray  # int64 corpus counts, aligned with tokens

    def __post_init__(self):
        self._ids = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._ids[token]


@dataclass
class Corpus:
    contexts: np.ndarray    # (num_ctx_nodes, samples) int32 token ids
    node_ids: np.ndarray    # graph node id per row
    node_raw_ids: list[str]
    isolated: np.ndarray    # graph node ids excluded for degree 0
    samples: int
    walk_length: int
    mode: str
    seed: int
    num_graph_nodes: int

    def __post_init__(self):
        self._rows = None

    @property
    def num_nodes(self) -> int:
        return int(self.contexts.shape[0])

    def row_of(self, node: int) -> int:
        if self._rows is None:
            self._rows = {int(v): i for i, v in enumerate(self.node_ids)}
        try:
            return self._rows[int(node)]
        except KeyError:
            raise KeyError(f"node {node} has no walks (isolated or out of range)") from None


# ---------------------------------------------------------------------------
# Vectorized anonymization of walk batches
# ---------------------------------------------------------------------------

def _positions(walks: np.ndarray) -> np.ndarray:
    """First-occurrence positions for every row of an (n, l+1) walk batch."""
    span = walks.shape[1]
    eq = walks[:, :, None] == walks[:, None, :]
    first = eq.argmax(axis=2)
    is_first = first == np.arange(span)[None, :]
    seen = np.cumsum(is_first, axis=1)
    return (np.take_along_axis(seen, first, axis=1) - 1).astype(np.int32)


def _encode_rows(walks: np.ndarray, node_types: np.ndarray, mode: str,
                 num_types: int) -> np.ndarray:
    """Fixed-width int32 row encoding of each walk's token, per mode.

    Rows are equal iff the canonical token strings are equal, so interning
    can run on the rows and defer string rendering to unique tokens.
    """
    span = walks.shape[1]
    pos = _positions(walks)
    if mode == "aw":
        return pos
    tw = node_types[walks].astype(np.int32)
    if mode == "haw":
        return np.hstack((pos, tw))
    # chaw: ordered type census. A walk touches at most span distinct types.
    width = min(num_types, span)
    onehot = tw[:, :, None] == np.arange(num_types, dtype=np.int32)[None, None, :]
    counts = onehot.sum(axis=1, dtype=np.int32)
    present = counts > 0
    first = np.where(present, onehot.argmax(axis=1), span)
    order = np.argsort(first, axis=1, kind="stable")[:, :width]
    ptype = np.take_along_axis(np.broadcast_to(
        np.arange(num_types, dtype=np.int32), counts.shape), order, axis=1)
    pcount = np.take_along_axis(counts, order, axis=1)
    live = np.take_along_axis(present, order, axis=1)
    ptype = np.where(live, ptype, -1)
    pcount = np.where(live, pcount, -1)
    rows = np.empty((walks.shape[0], span + 2 * width), dtype=np.int32)
    rows[:, :span] = pos
    rows[:, span::2] = ptype
    rows[:, span + 1::2] = pcount
    return rows


def _decode_row(row: np.ndarray, span: int, mode: str, type_names) -> str:
    pos = row[:span]
    aw = "-".join(str(int(p)) for p in pos)
    if mode == "aw":
        return aw
    if mode == "haw":
        return "-".join(f"{int(p)}{type_names[t]}" for p, t in zip(pos, row[span:]))
    pairs = row[span:]
    census = ",".join(
        f"{type_names[pairs[i]]}:{int(pairs[i + 1])}"
        for i in range(0, pairs.size, 2) if pairs[i] >= 0)
    return f"{aw}|{census}"


# ---------------------------------------------------------------------------
# Corpus construction
# ---------------------------------------------------------------------------

def build_corpus(graph, samples: int, walk_length: int, mode: str, seed: int,
                 chunk_nodes: int | None = None) -> tuple[Corpus, Lexicon]:
    """Sample ``samples`` walks of ``walk_length`` edges per non-isolated node.

    Isolated nodes are skipped and recorded on the corpus.  Output is fully
    determined by (graph, samples, walk_length, mode, seed): walk randomness
    is counter-based per (node, slot) and token ids follow first occurrence
    in row-major context order regardless of ``chunk_nodes``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if walk_length < 1:
        raise ValueError("walk_length must be >= 1")
    degrees = graph.degrees()
    ctx_nodes = np.flatnonzero(degrees > 0).astype(np.int64)
    isolated = np.flatnonzero(degrees == 0).astype(np.int64)
    if ctx_nodes.size == 0:
        raise ValueError("graph has no edges; corpus would be empty")
    span = walk_length + 1
    if chunk_nodes is None:
        # keep the (rows, span, span) comparison tensor around 100 MB
        chunk_nodes = max(1, 2_000_000 // (samples * span) or 1)
    kern = backend.get_kernels()
    contexts = np.empty((ctx_nodes.size, samples), dtype=np.int32)
    interned: dict[bytes, int] = {}
    unique_rows: list[np.ndarray] = []
    freqs: list[int] = []
    for lo in range(0, ctx_nodes.size, chunk_nodes):
        chunk = ctx_nodes[lo:lo + chunk_nodes]
        walks = kern.sample_walks(graph.indptr, graph.indices, chunk,
                                  samples, walk_length, seed)
        rows = _encode_rows(walks.reshape(-1, span), graph.node_types, mode,
                            graph.num_types)
        uniq, inverse, counts = _chunk_unique(rows)
        ids = np.empty(len(uniq), dtype=np.int32)
        for k, urow in enumerate(uniq):
            key = urow.tobytes()
            tid = interned.get(key)
            if tid is None:
                tid = len(interned)
                interned[key] = tid
                unique_rows.append(urow)
                freqs.append(0)
            ids[k] = tid
            freqs[tid] += int(counts[k])
        contexts[lo:lo + chunk.size] = ids[inverse].reshape(chunk.size, samples)
    tokens = [_decode_row(r, span, mode, graph.type_names) for r in unique_rows]
    lex = Lexicon(tokens, np.asarray(freqs, dtype=np.int64))
    corp = Corpus(contexts, ctx_nodes, [graph.raw_ids[i] for i in ctx_nodes],
                  isolated, samples, walk_length, mode, seed, graph.num_nodes)
    return corp, lex


def _chunk_unique(rows: np.ndarray):
    """np.unique(axis=0) with ids renumbered by first occurrence order."""
    uniq, index, inverse, counts = np.unique(
        rows, axis=0, return_index=True, return_inverse=True, return_counts=True)
    # np.unique sorts lexicographically; reorder by first appearance so ids
    # do not depend on how the batch was chunked
    order = np.argsort(index, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return [uniq[i].copy() for i in order], rank[inverse.ravel()], counts[order]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_corpus(corpus: Corpus, lexicon: Lexicon, path) -> None:
    """Write the corpus + lexicon as one little-endian binary file."""
    mode_code = MODES.index(corpus.mode)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IB3xIIqqqqq", FORMAT_VERSION, mode_code,
                             corpus.samples, corpus.walk_length,
                             corpus.num_graph_nodes, corpus.num_nodes,
                             int(corpus.isolated.size), len(lexicon),
                             corpus.seed))
        fh.write(corpus.node_ids.astype("<i8").tobytes())
        fh.write(corpus.isolated.astype("<i8").tobytes())
        fh.write(corpus.contexts.astype("<i4").tobytes())
        fh.write(lexicon.frequencies.astype("<i8").tobytes())
        _write_strings(fh, corpus.node_raw_ids)
        _write_strings(fh, lexicon.tokens)


def load_corpus(path) -> tuple[Corpus, Lexicon]:
    """Read a corpus file; exact inverse of save_corpus."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CorpusFormatError(f"{path}: not a corpus file (bad magic)")
        header = _read_exact(fh, path, struct.calcsize("<IB3xIIqqqqq"))
        (version, mode_code, samples, walk_length, num_graph_nodes,
         num_ctx, num_isolated, lex_size, seed) = struct.unpack("<IB3xIIqqqqq", header)
        if version != FORMAT_VERSION:
            raise CorpusFormatError(
                f"{path}: unsupported corpus version {version} (expected {FORMAT_VERSION})")
        if not 0 <= mode_code < len(MODES):
            raise CorpusFormatError(f"{path}: bad mode code {mode_code}")
        node_ids = _read_array(fh, path, "<i8", num_ctx)
        isolated = _read_array(fh, path, "<i8", num_isolated)
        contexts = _read_array(fh, path, "<i4", num_ctx * samples)
        contexts = contexts.reshape(num_ctx, samples)
        freqs = _read_array(fh, path, "<i8", lex_size)
        raw_ids = _read_strings(fh, path, num_ctx)
        tokens = _read_strings(fh, path, lex_size)
        if fh.read(1):
            raise CorpusFormatError(f"{path}: trailing bytes after corpus payload")
    lex = Lexicon(tokens, freqs.astype(np.int64))
    corp = Corpus(contexts.astype(np.int32), node_ids.astype(np.int64), raw_ids,
                  isolated.astype(np.int64), int(samples), int(walk_length),
                  MODES[mode_code], int(seed), int(num_graph_nodes))
    return corp, lex


def _write_strings(fh, items) -> None:
    for s in items:
        raw = s.encode("utf-8")
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)


def _read_exact(fh, path, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise CorpusFormatError(f"{path}: truncated corpus file")
    return data


def _read_array(fh, path, dtype, count) -> np.ndarray:
    raw = _read_exact(fh, path, int(count) * np.dtype(dtype).itemsize)
    return np.frombuffer(raw, dtype=dtype).copy()


def _read_strings(fh, path, count) -> list[str]:
    out = []
    for _ in range(int(count)):
        (size,) = struct.unpack("<I", _read_exact(fh, path, 4))
        out.append(_read_exact(fh, path, size).decode("utf-8"))
    return out


def export_corpus_tsv(corpus: Corpus, lexicon: Lexicon, path) -> None:
    """Debug view: one line per node, tokens space-separated."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# mode={corpus.mode} samples={corpus.samples} "
                 f"walk_length={corpus.walk_length} seed={corpus.seed}\n")
        if corpus.isolated.size:
            fh.write(f"# isolated_nodes={corpus.isolated.size}\n")
        for row, rid in enumerate(corpus.node_raw_ids):
            toks = " ".join(lexicon.tokens[t] for t in corpus.contexts[row])
            fh.write(f"{rid}\t{toks}\n")
