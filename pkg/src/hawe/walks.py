"""Walk sampling and the anonymization family: AW, typed AW, coarse typed AW.

A walk of length ``l`` visits ``l + 1`` nodes (length counts edges).  Its
anonymized form replaces each node by the number of distinct nodes seen
strictly before that node's first occurrence, so positions start at 0 and a
new node always gets position max-so-far + 1.

Three token alphabets are built on top of this:

* ``aw``   -- the position tuple alone, e.g. ``0-1-2-0``.
* ``haw``  -- each position paired with the node's type, e.g. ``0A-1B-2A-0A``.
* ``chaw`` -- the position tuple plus an ordered census of type occurrence
  counts (order of first appearance, counts over all l + 1 positions),
  e.g. ``0-1-2-0|A:3,B:1``.

Canonical token strings are fixed: they are the on-disk lexicon format and
the keys of the exact distributions computed here.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

MODES = ("aw", "haw", "chaw")

MAX_ENUM_LENGTH = 10
DEFAULT_BUDGET = 10_000_000


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the expansion budget."""


class Chaw(NamedTuple):
    aw: tuple
    type_counts: tuple  # ((type_id, count), ...) in order of first appearance


def sample_walk(graph, start: int, length: int, rng) -> list[int]:
    """One uniform random walk of ``length`` edges from ``start``.

    ``rng`` is a numpy Generator.  Raises ValueError on an isolated start
    (the walk cannot leave it, so no distribution over walks exists).
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if graph.degree(start) == 0:
        raise ValueError(f"node {start} is isolated; walks are undefined")
    walk = [start]
    cur = start
    for _ in range(length):
        nbrs = graph.neighbors(cur)
        cur = int(nbrs[rng.integers(0, nbrs.size)])
        walk.append(cur)
    return walk


def anonymize(walk) -> tuple:
    """Map node ids to first-occurrence positions: (5,9,2,7,2,9) -> (0,1,2,3,2,1)."""
    first: dict = {}
    out = []
    for v in walk:
        if v not in first:
            first[v] = len(first)
        out.append(first[v])
    return tuple(out)


def to_haw(walk, graph) -> tuple:
    """Pair each anonymized position with the visited node's type id."""
    aw = anonymize(walk)
    return tuple((p, int(graph.node_types[v])) for p, v in zip(aw, walk))


def to_chaw(haw) -> Chaw:
    """Coarsen a typed walk: keep the AW, collapse types to ordered counts.

    Counts are per position (a node revisited k times contributes k to its
    type), so the counts always sum to the walk's l + 1 entries.
    """
    counts: dict[int, int] = {}
    for _, t in haw:
        counts[t] = counts.get(t, 0) + 1
    return Chaw(tuple(p for p, _ in haw), tuple(counts.items()))


def aw_token(aw) -> str:
    return "-".join(str(p) for p in aw)


def haw_token(haw, type_names) -> str:
    return "-".join(f"{p}{type_names[t]}" for p, t in haw)


def chaw_token(chaw: Chaw, type_names) -> str:
    census = ",".join(f"{type_names[t]}:{c}" for t, c in chaw.type_counts)
    return f"{aw_token(chaw.aw)}|{census}"


def walk_token(walk, graph, mode: str) -> str:
    """Anonymize a walk under ``mode`` and render its canonical string."""
    if mode == "aw":
        return aw_token(anonymize(walk))
    if mode == "haw":
        return haw_token(to_haw(walk, graph), graph.type_names)
    if mode == "chaw":
        return chaw_token(to_chaw(to_haw(walk, graph)), graph.type_names)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


# ---------------------------------------------------------------------------
# Counting oracles
# ---------------------------------------------------------------------------

def bell(length: int) -> int:
    """Number of distinct anonymized walks of ``length`` edges.

    Computed by the Bell recurrence B_n = sum_k C(n-1, k) B_k with
    B_0 = B_1 = 1; exact integer arithmetic.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    b = [1]
    for n in range(1, length + 1):
        b.append(sum(math.comb(n - 1, k) * b[k] for k in range(n)))
    return b[length]


def enumerate_aws(length: int) -> list[tuple]:
    """All anonymized walks of ``length`` edges, lexicographically sorted.

    Guarded to ``length <= 10`` (counts grow like the Bell numbers).
    """
    if not 1 <= length <= MAX_ENUM_LENGTH:
        raise ValueError(f"length must be in 1..{MAX_ENUM_LENGTH}")
    out: list[tuple] = []
    seq = [0] * (length + 1)

    def extend(i: int, mx: int) -> None:
        if i == length + 1:
            out.append(tuple(seq))
            return
        for v in range(mx + 2):
            if v == seq[i - 1]:
                continue  # consecutive nodes differ: walks traverse edges
            seq[i] = v
            extend(i + 1, mx if v <= mx else v)

    extend(1, 0)
    return out


def count_haws(length: int, num_types: int) -> tuple[int, int]:
    """Exact count of typed anonymized walks, and the closed-form bound.

    The exact count assigns one type per distinct position:
    sum over AWs of num_types ** (distinct positions).  The bound
    num_types ** length * bell(length) is also returned; the two are
    reported side by side rather than asserted equal because neither
    dominates for all arguments.
    """
    if num_types < 1:
        raise ValueError("num_types must be >= 1")
    exact = sum(num_types ** (max(aw) + 1) for aw in enumerate_aws(length))
    bound = num_types ** length * bell(length)
    return exact, bound


# ---------------------------------------------------------------------------
# Exact distribution oracle
# ---------------------------------------------------------------------------

def exact_walk_distribution(graph, start: int, length: int, mode: str,
                            budget: int = DEFAULT_BUDGET) -> dict[str, float]:
    """Exhaustive token distribution of uniform walks from ``start``.

    Enumerates the full walk tree, weighting each walk by the product of
    1/degree along it, and accumulates per canonical token string.  Raises
    EnumerationBudgetError once more than ``budget`` tree nodes would be
    expanded; only feasible for small graphs or short walks.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if length < 0:
        raise ValueError("length must be >= 0")
    if graph.degree(start) == 0:
        raise ValueError(f"node {start} is isolated; walks are undefined")
    dist: dict[str, float] = {}
    walk = [start]
    spent = [0]

    def descend(prob: float) -> None:
        if len(walk) == length + 1:
            tok = walk_token(walk, graph, mode)
            dist[tok] = dist.get(tok, 0.0) + prob
            return
        nbrs = graph.neighbors(walk[-1])
        spent[0] += nbrs.size
        if spent[0] > budget:
            raise EnumerationBudgetError(
                f"exact enumeration exceeded {budget} expansions")
        step = prob / nbrs.size
        for v in nbrs:
            walk.append(int(v))
            descend(step)
            walk.pop()

    descend(1.0)
    return dist


def save_distribution_tsv(dist: dict[str, float], path) -> None:
    """Write token/probability rows, descending probability, ties by token."""
    rows = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# token\tprobability\n")
        for tok, p in rows:
            fh.write(f"{tok}\t{p:.17g}\n")
