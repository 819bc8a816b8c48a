"""Heterogeneous graph container, TSV IO, synthetic generators, WL roles.

Graphs are undirected, simple (no self-loops, no parallel edges) and store a
type id per node.  Adjacency lives in CSR form: ``indices[indptr[u]:indptr[u+1]]``
are the sorted neighbors of ``u``.  Node ids are dense integers; the original
string ids from input files are kept in ``raw_ids``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """A node or edge file violates the TSV contract."""


@dataclass
class HeteroGraph:
    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    node_types: np.ndarray
    type_names: list[str]
    raw_ids: list[str]
    labels: np.ndarray | None = None  # class id per node, -1 = unlabeled
    label_names: list[str] = field(default_factory=list)

    @property
    def num_types(self) -> int:
        return len(self.type_names)

    @property
    def num_edges(self) -> int:
        return int(self.indices.size) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def index_of(self, raw_id: str) -> int:
        try:
            return self.raw_ids.index(raw_id)
        except ValueError:
            raise KeyError(f"unknown node id {raw_id!r}") from None

    def validate(self) -> None:
        """Full-scan invariant check; raises AssertionError on corruption."""
        assert self.indptr.shape == (self.num_nodes + 1,)
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.size
        assert np.all(np.diff(self.indptr) >= 0)
        assert self.node_types.shape == (self.num_nodes,)
        if self.num_nodes:
            assert 0 <= self.node_types.min() and self.node_types.max() < self.num_types
        pairs = set()
        for u in range(self.num_nodes):
            nbrs = self.neighbors(u)
            assert np.all(np.diff(nbrs) > 0), f"neighbors of {u} not strictly sorted"
            assert not np.any(nbrs == u), f"self-loop at {u}"
            for v in nbrs:
                pairs.add((u, int(v)))
        for u, v in pairs:
            assert (v, u) in pairs, f"edge {u}-{v} missing reverse direction"


def default_type_names(num_types: int) -> list[str]:
    letters = string.ascii_uppercase
    if num_types <= len(letters):
        return list(letters[:num_types])
    return [f"T{i}" for i in range(num_types)]


def from_edge_list(num_nodes, edges, node_types, type_names,
                   raw_ids=None, labels=None, label_names=None) -> HeteroGraph:
    """Build a HeteroGraph from an (m, 2) int array of undirected edges.

    Duplicate edges are dropped; self-loops raise ValueError.
    """
    node_types = np.asarray(node_types, dtype=np.int32)
    if raw_ids is None:
        raw_ids = [str(i) for i in range(num_nodes)]
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size:
        if edges.min() < 0 or edges.max() >= num_nodes:
            raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        key = lo * num_nodes + hi
        order = np.argsort(key, kind="stable")
        keep = np.ones(order.size, dtype=bool)
        keep[1:] = key[order[1:]] != key[order[:-1]]
        lo, hi = lo[order[keep]], hi[order[keep]]
        src = np.concatenate((lo, hi))
        dst = np.concatenate((hi, lo))
    else:
        src = dst = np.empty(0, dtype=np.int64)
    counts = np.bincount(src, minlength=num_nodes)
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int32)
    return HeteroGraph(num_nodes, indptr, indices, node_types, list(type_names),
                       list(raw_ids), labels, list(label_names or []))


# ---------------------------------------------------------------------------
# TSV IO
# ---------------------------------------------------------------------------

def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped.split()


def load_graph(node_file, edge_file) -> HeteroGraph:
    """Read a graph from a node TSV (raw_id, type [, label]) and an edge TSV.

    Blank lines and '#' comments are skipped.  Raises GraphFormatError with a
    file:line prefix for malformed lines, unknown ids, conflicting duplicate
    node rows, or self-loops.  Duplicate edges are deduplicated silently.
    """
    raw_ids: list[str] = []
    id_of: dict[str, int] = {}
    types: list[int] = []
    type_ids: dict[str, int] = {}
    type_names: list[str] = []
    labels: list[int] = []
    label_ids: dict[str, int] = {}
    label_names: list[str] = []
    for lineno, fields in _data_lines(node_file):
        if len(fields) not in (2, 3):
            raise GraphFormatError(
                f"{node_file}:{lineno}: expected 'id type [label]', got {len(fields)} fields")
        rid, tname = fields[0], fields[1]
        if tname not in type_ids:
            type_ids[tname] = len(type_names)
            type_names.append(tname)
        tid = type_ids[tname]
        lab = -1
        if len(fields) == 3:
            lname = fields[2]
            if lname not in label_ids:
                label_ids[lname] = len(label_names)
                label_names.append(lname)
            lab = label_ids[lname]
        if rid in id_of:
            prev = id_of[rid]
            if types[prev] != tid or labels[prev] != lab:
                raise GraphFormatError(
                    f"{node_file}:{lineno}: node {rid!r} listed twice with conflicting data")
            continue
        id_of[rid] = len(raw_ids)
        raw_ids.append(rid)
        types.append(tid)
        labels.append(lab)
    if not raw_ids:
        raise GraphFormatError(f"{node_file}: no nodes")

    edges = []
    for lineno, fields in _data_lines(edge_file):
        if len(fields) != 2:
            raise GraphFormatError(
                f"{edge_file}:{lineno}: expected 'src dst', got {len(fields)} fields")
        try:
            u = id_of[fields[0]]
        except KeyError:
            raise GraphFormatError(
                f"{edge_file}:{lineno}: unknown node id {fields[0]!r}") from None
        try:
            v = id_of[fields[1]]
        except KeyError:
            raise GraphFormatError(
                f"{edge_file}:{lineno}: unknown node id {fields[1]!r}") from None
        if u == v:
            raise GraphFormatError(f"{edge_file}:{lineno}: self-loop at {fields[0]!r}")
        edges.append((u, v))

    label_arr = None
    if any(lab >= 0 for lab in labels):
        label_arr = np.asarray(labels, dtype=np.int32)
    return from_edge_list(len(raw_ids), np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                          types, type_names, raw_ids, label_arr, label_names)


def save_graph(graph: HeteroGraph, node_file, edge_file) -> None:
    """Write the node and edge TSV files read back by load_graph."""
    with open(node_file, "w", encoding="utf-8") as fh:
        fh.write("# node_id\ttype" + ("\tlabel\n" if graph.labels is not None else "\n"))
        for i, rid in enumerate(graph.raw_ids):
            tname = graph.type_names[graph.node_types[i]]
            if graph.labels is not None and graph.labels[i] >= 0:
                lname = (graph.label_names[graph.labels[i]]
                         if graph.label_names else str(int(graph.labels[i])))
                fh.write(f"{rid}\t{tname}\t{lname}\n")
            else:
                fh.write(f"{rid}\t{tname}\n")
    with open(edge_file, "w", encoding="utf-8") as fh:
        fh.write("# src\tdst\n")
        for u in range(graph.num_nodes):
            for v in graph.neighbors(u):
                if u < v:
                    fh.write(f"{graph.raw_ids[u]}\t{graph.raw_ids[v]}\n")


def write_roles_tsv(graph: HeteroGraph, roles, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# node_id\trole\n")
        for i, rid in enumerate(graph.raw_ids):
            fh.write(f"{rid}\t{int(roles[i])}\n")


def read_id_value_tsv(path) -> dict[str, str]:
    """Read a two-column TSV into an id -> value dict (later rows win)."""
    out: dict[str, str] = {}
    for lineno, fields in _data_lines(path):
        if len(fields) != 2:
            raise GraphFormatError(
                f"{path}:{lineno}: expected 'id value', got {len(fields)} fields")
        out[fields[0]] = fields[1]
    return out


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

def gen_pinwheel(num_blades: int, blade_len: int, heterogeneous: bool = False,
                 seed: int = 0) -> HeteroGraph:
    """Hub ring with a pendant path per hub.

    Hubs 0..num_blades-1 form a cycle; blade i hangs a path of ``blade_len``
    nodes off hub i.  With ``heterogeneous`` the blades (hub plus its path)
    alternate between two types around the ring, so ``num_blades`` must be
    even.  Construction is deterministic; ``seed`` is accepted for interface
    uniformity only.
    """
    del seed
    if num_blades < 3:
        raise ValueError("num_blades must be >= 3")
    if blade_len < 1:
        raise ValueError("blade_len must be >= 1")
    if heterogeneous and num_blades % 2:
        raise ValueError("heterogeneous pinwheel needs an even number of blades")
    n = num_blades * (1 + blade_len)
    edges = []
    for i in range(num_blades):
        edges.append((i, (i + 1) % num_blades))
        first = num_blades + i * blade_len
        edges.append((i, first))
        for j in range(blade_len - 1):
            edges.append((first + j, first + j + 1))
    types = np.zeros(n, dtype=np.int32)
    if heterogeneous:
        for i in range(num_blades):
            t = i % 2
            types[i] = t
            start = num_blades + i * blade_len
            types[start:start + blade_len] = t
        type_names = ["A", "B"]
    else:
        type_names = ["A"]
    return from_edge_list(n, np.asarray(edges), types, type_names)


def gen_er(num_nodes: int, edge_prob: float, num_types: int = 1,
           seed: int = 0) -> HeteroGraph:
    """G(n, p) with uniformly random node types.

    Exact two-stage sampling: draw the edge count from Binomial(n(n-1)/2, p),
    then that many distinct vertex pairs uniformly.  Runs in O(n + m), so
    sparse graphs scale to n ~ 1e5 and beyond.
    """
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must be in [0, 1]")
    if num_types < 1:
        raise ValueError("num_types must be >= 1")
    rng = np.random.default_rng(seed)
    npairs = num_nodes * (num_nodes - 1) // 2
    m = int(rng.binomial(npairs, edge_prob)) if npairs and edge_prob > 0 else 0
    picked = np.empty(0, dtype=np.int64)
    while picked.size < m:
        want = m - picked.size
        draw = rng.integers(0, npairs, size=want + max(16, want // 16), dtype=np.int64)
        draw = draw[~np.isin(draw, picked)]
        # keep first occurrences in draw order: first-m-distinct of an iid
        # stream is a uniform distinct sample
        _, first = np.unique(draw, return_index=True)
        picked = np.concatenate((picked, draw[np.sort(first)][:want]))
    # decode linear pair index k into (i, j), row-major over i < j
    row_starts = np.zeros(num_nodes, dtype=np.int64)
    if num_nodes > 1:
        row_lens = num_nodes - 1 - np.arange(num_nodes - 1, dtype=np.int64)
        row_starts[1:] = np.cumsum(row_lens)
    i = np.searchsorted(row_starts, picked, side="right") - 1
    j = picked - row_starts[i] + i + 1
    edges = np.stack((i, j), axis=1) if m else np.empty((0, 2), dtype=np.int64)
    types = rng.integers(0, num_types, size=num_nodes).astype(np.int32)
    return from_edge_list(num_nodes, edges, types, default_type_names(num_types))


def gen_ba(num_nodes: int, edges_per_node: int, num_types: int = 1,
           seed: int = 0) -> HeteroGraph:
    """Preferential attachment via the repeated-endpoints trick.

    Each arriving node attaches to ``edges_per_node`` distinct existing nodes
    picked uniformly from the list of prior edge endpoints, which realises
    degree-proportional attachment.  ``edges_per_node=1`` yields a tree.
    """
    m = edges_per_node
    if m < 1:
        raise ValueError("edges_per_node must be >= 1")
    if num_nodes <= m:
        raise ValueError("num_nodes must exceed edges_per_node")
    rng = np.random.default_rng(seed)
    targets = list(range(m))
    repeated: list[int] = []
    edges = np.empty(((num_nodes - m) * m, 2), dtype=np.int64)
    pos = 0
    for source in range(m, num_nodes):
        for t in targets:
            edges[pos, 0] = source
            edges[pos, 1] = t
            pos += 1
        repeated.extend(targets)
        repeated.extend([source] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[int(rng.integers(0, len(repeated)))])
        targets = sorted(chosen)
    types = rng.integers(0, num_types, size=num_nodes).astype(np.int32)
    return from_edge_list(num_nodes, edges, types, default_type_names(num_types))


# ---------------------------------------------------------------------------
# WL role oracle
# ---------------------------------------------------------------------------

@dataclass
class RoleLabeling:
    roles: np.ndarray  # int32, contiguous ids starting at 0
    num_roles: int


def wl_roles(graph: HeteroGraph, max_iters: int = 32) -> RoleLabeling:
    """Typed Weisfeiler-Lehman color refinement.

    Colors start at the node types; each round a node's new color is the
    interned pair (own color, sorted multiset of neighbor colors).  Stops
    when the number of classes stops growing or after ``max_iters`` rounds.
    Role ids are renumbered by first occurrence in node order, so two nodes
    share a role iff refinement cannot distinguish them.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    n = graph.num_nodes
    colors = _renumber(graph.node_types.astype(np.int64))
    num_classes = int(colors.max()) + 1 if n else 0
    rows = np.repeat(np.arange(n, dtype=np.int64), graph.degrees())
    for _ in range(max_iters):
        nbr = colors[graph.indices.astype(np.int64)]
        order = np.lexsort((nbr, rows))
        nbr_sorted = nbr[order]
        table: dict[tuple[int, bytes], int] = {}
        fresh = np.empty(n, dtype=np.int64)
        for u in range(n):
            sig = (int(colors[u]), nbr_sorted[graph.indptr[u]:graph.indptr[u + 1]].tobytes())
            fresh[u] = table.setdefault(sig, len(table))
        if len(table) == num_classes:
            break
        colors = fresh
        num_classes = len(table)
    roles = _renumber(colors).astype(np.int32)
    return RoleLabeling(roles, num_classes)


def _renumber(values: np.ndarray) -> np.ndarray:
    """Map values to dense ids ordered by first occurrence."""
    out = np.empty(values.shape, dtype=np.int64)
    seen: dict[int, int] = {}
    for i, v in enumerate(values.tolist()):
        out[i] = seen.setdefault(v, len(seen))
    return out
