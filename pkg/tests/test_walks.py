import math

import numpy as np
import pytest

from hawe.graph import from_edge_list, gen_er, gen_pinwheel
from hawe.walks import (Chaw, EnumerationBudgetError, anonymize, aw_token, bell,
                        chaw_token, count_haws, enumerate_aws,
                        exact_walk_distribution, haw_token, sample_walk,
                        save_distribution_tsv, to_chaw, to_haw, walk_token)


def triangle():
    return from_edge_list(3, [(0, 1), (1, 2), (0, 2)], [0, 0, 0], ["A"])


def typed_path():
    return from_edge_list(3, [(0, 1), (1, 2)], [0, 1, 0], ["A", "B"])


# ---------------------------------------------------------------------------
# Anonymization
# ---------------------------------------------------------------------------

def test_anonymize_hand_cases():
    assert anonymize([5, 9, 2, 7, 2, 9]) == (0, 1, 2, 3, 2, 1)
    assert anonymize([3, 8, 1, 3, 1, 4]) == (0, 1, 2, 0, 2, 3)
    assert anonymize([4]) == (0,)


def test_anonymize_identity_invariance():
    # relabeling node ids never changes the anonymized walk
    walk = [10, 20, 10, 30, 20]
    relabeled = [7, 1, 7, 99, 1]
    assert anonymize(walk) == anonymize(relabeled) == (0, 1, 0, 2, 1)


def test_to_haw_and_tokens():
    g = typed_path()
    haw = to_haw([0, 1, 2, 1], g)
    assert haw == ((0, 0), (1, 1), (2, 0), (1, 1))
    assert haw_token(haw, g.type_names) == "0A-1B-2A-1B"
    assert aw_token(anonymize([0, 1, 2, 1])) == "0-1-2-1"


def test_to_chaw_counts_positions():
    g = typed_path()
    chaw = to_chaw(to_haw([0, 1, 0, 1], g))
    # node revisits count every visit, so counts sum to walk entries
    assert chaw == Chaw((0, 1, 0, 1), ((0, 2), (1, 2)))
    assert chaw_token(chaw, g.type_names) == "0-1-0-1|A:2,B:2"
    assert sum(c for _, c in chaw.type_counts) == 4


def test_chaw_type_order_is_first_appearance():
    g = from_edge_list(3, [(0, 1), (1, 2)], [1, 0, 1], ["A", "B"])
    chaw = to_chaw(to_haw([1, 2, 1, 0], g))
    # walk visits types A,B,A,B so A is listed first despite id order
    assert chaw.type_counts == ((0, 2), (1, 2))
    assert chaw_token(chaw, g.type_names).endswith("|A:2,B:2")


def test_walk_token_dispatch():
    g = typed_path()
    assert walk_token([0, 1, 0], g, "aw") == "0-1-0"
    assert walk_token([0, 1, 0], g, "haw") == "0A-1B-0A"
    assert walk_token([0, 1, 0], g, "chaw") == "0-1-0|A:2,B:1"
    with pytest.raises(ValueError):
        walk_token([0, 1, 0], g, "typed")


# ---------------------------------------------------------------------------
# Counting oracles
# ---------------------------------------------------------------------------

def test_bell_sequence():
    assert [bell(i) for i in range(9)] == [1, 1, 2, 5, 15, 52, 203, 877, 4140]
    with pytest.raises(ValueError):
        bell(-1)


def test_enumerate_aws_counts_match_bell():
    for length in range(1, 9):
        assert len(enumerate_aws(length)) == bell(length)


def test_enumerate_aws_invariants():
    for length in (1, 2, 3, 4, 5):
        aws = enumerate_aws(length)
        assert aws == sorted(aws)
        assert len(set(aws)) == len(aws)
        for aw in aws:
            assert aw[0] == 0
            running_max = 0
            for prev, cur in zip(aw, aw[1:]):
                assert cur != prev
                assert cur <= running_max + 1
                running_max = max(running_max, cur)
            # positions are contiguous 0..max
            assert set(aw) == set(range(max(aw) + 1))


def test_enumerate_aws_bounds():
    with pytest.raises(ValueError):
        enumerate_aws(0)
    with pytest.raises(ValueError):
        enumerate_aws(11)


def test_count_haws_hand_case():
    # l=3, 2 types: sum over the 5 AWs of 2^(distinct positions)
    # = 4 + 8 + 8 + 8 + 16 = 44; closed form 2^3 * 5 = 40
    assert count_haws(3, 2) == (44, 40)


def test_count_haws_single_type_equals_bell():
    for length in (1, 2, 3, 4, 5):
        exact, bound = count_haws(length, 1)
        assert exact == bound == bell(length)


def test_count_haws_validation():
    with pytest.raises(ValueError):
        count_haws(3, 0)


# ---------------------------------------------------------------------------
# Exact distribution
# ---------------------------------------------------------------------------

def test_exact_distribution_triangle():
    d = exact_walk_distribution(triangle(), 0, 2, "aw")
    assert d == {"0-1-0": pytest.approx(0.5), "0-1-2": pytest.approx(0.5)}


def test_exact_distribution_typed_path():
    g = typed_path()
    d = exact_walk_distribution(g, 0, 2, "haw")
    assert d == {"0A-1B-0A": pytest.approx(0.5), "0A-1B-2A": pytest.approx(0.5)}
    d2 = exact_walk_distribution(g, 1, 1, "haw")
    assert d2 == {"0B-1A": pytest.approx(1.0)}


def test_exact_distribution_sums_to_one():
    rng = np.random.default_rng(0)
    for trial in range(10):
        g = gen_er(10, 0.4, int(rng.integers(1, 4)), seed=trial)
        start = int(np.argmax(g.degrees()))
        for mode in ("aw", "haw", "chaw"):
            d = exact_walk_distribution(g, start, 4, mode)
            assert abs(sum(d.values()) - 1.0) < 1e-9


def test_exact_distribution_budget():
    g = gen_er(30, 0.5, 1, seed=1)
    start = int(np.argmax(g.degrees()))
    with pytest.raises(EnumerationBudgetError):
        exact_walk_distribution(g, start, 8, "aw", budget=1000)


def test_exact_distribution_isolated_start():
    g = from_edge_list(3, [(0, 1)], [0, 0, 0], ["A"])
    with pytest.raises(ValueError):
        exact_walk_distribution(g, 2, 2, "aw")


def test_distribution_tsv_sorted(tmp_path):
    d = {"b": 0.25, "a": 0.25, "c": 0.5}
    path = tmp_path / "dist.tsv"
    save_distribution_tsv(d, path)
    lines = [l.split("\t")[0] for l in path.read_text().splitlines()[1:]]
    assert lines == ["c", "a", "b"]  # descending prob, ties by token


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_sample_walk_follows_edges():
    g = gen_pinwheel(6, 2)
    rng = np.random.default_rng(5)
    for _ in range(50):
        walk = sample_walk(g, 0, 5, rng)
        assert len(walk) == 6
        for u, v in zip(walk, walk[1:]):
            assert v in g.neighbors(u)


def test_sample_walk_reproducible():
    g = gen_pinwheel(6, 2)
    w1 = sample_walk(g, 2, 8, np.random.default_rng(42))
    w2 = sample_walk(g, 2, 8, np.random.default_rng(42))
    assert w1 == w2


def test_sample_walk_isolated():
    g = from_edge_list(2, [], [0, 0], ["A"])
    with pytest.raises(ValueError):
        sample_walk(g, 0, 3, np.random.default_rng(0))


def test_sample_matches_exact_distribution():
    # empirical token frequencies approach the enumerated distribution
    g = triangle()
    exact = exact_walk_distribution(g, 0, 3, "aw")
    rng = np.random.default_rng(3)
    counts: dict[str, int] = {}
    n = 4000
    for _ in range(n):
        tok = walk_token(sample_walk(g, 0, 3, rng), g, "aw")
        counts[tok] = counts.get(tok, 0) + 1
    assert set(counts) <= set(exact)
    tv = 0.5 * sum(abs(exact[t] - counts.get(t, 0) / n) for t in exact)
    assert tv < 0.05
