from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from sentlu.codec import encode
from sentlu.graph import LabeledGraph
from sentlu.strategies import (
    ALL_STRATEGIES,
    Strategy,
    choose_extension,
    choose_restart,
    choose_start,
    make_rng,
)

# hub 0 (deg 4) with leaves 1-3; node 4 (deg 3) closes a triangle with 5 and 6
KITE = LabeledGraph.unlabeled(7, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (4, 6), (5, 6)])


def test_parse_aliases():
    assert Strategy.parse("min_degree") is Strategy.MIN_DEGREE
    assert Strategy.parse("MAX") is Strategy.MAX_DEGREE
    assert Strategy.parse(Strategy.ANCHOR) is Strategy.ANCHOR
    with pytest.raises(ValueError, match="unknown strategy"):
        Strategy.parse("bfs")


def test_make_rng_is_keyed():
    a = make_rng(1, 2, 3).integers(1 << 30, size=4)
    b = make_rng(1, 2, 3).integers(1 << 30, size=4)
    c = make_rng(1, 2, 4).integers(1 << 30, size=4)
    assert (a == b).all() and (a != c).any()


def test_empty_candidates_rejected():
    for s in ALL_STRATEGIES:
        with pytest.raises(ValueError):
            choose_start(s, KITE, [], make_rng(0))


def test_start_rules():
    rng = make_rng(0)
    everyone = list(range(KITE.n))
    for _ in range(50):
        assert choose_start(Strategy.MAX_DEGREE, KITE, everyone, rng) == 0
        assert KITE.degrees[choose_start(Strategy.MIN_DEGREE, KITE, everyone, rng)] == 1
        assert choose_start(Strategy.ANCHOR, KITE, everyone, rng) == 0


def test_extension_rules():
    rng = make_rng(1)
    for _ in range(50):
        # from the hub: leaves 1-3 have degree 1, node 4 has degree 3
        assert choose_extension(Strategy.MIN_DEGREE, KITE, 0, [1, 2, 3, 4], rng) in {1, 2, 3}
        assert choose_extension(Strategy.ANCHOR, KITE, 0, [1, 2, 3, 4], rng) in {1, 2, 3}
        assert choose_extension(Strategy.MAX_DEGREE, KITE, 0, [1, 2, 3, 4], rng) == 4


def test_restart_uses_start_rule():
    rng = make_rng(2)
    assert choose_restart(Strategy.MAX_DEGREE, KITE, [1, 4, 5], rng) == 4
    assert choose_restart(Strategy.MIN_DEGREE, KITE, [1, 4, 5], rng) == 1
    assert choose_restart(Strategy.ANCHOR, KITE, [1, 4, 5], rng) == 4


@pytest.mark.parametrize("strategy", ALL_STRATEGIES)
def test_ties_are_broken_uniformly(strategy):
    # leaves 1, 2, 3 tie under the min rule; under Random all four are eligible
    cands = [1, 2, 3] if strategy is not Strategy.MAX_DEGREE else [5, 6]
    if strategy is Strategy.RANDOM:
        cands = [1, 2, 3, 4]
    rng = make_rng(7, int(ALL_STRATEGIES.index(strategy)))
    draws = Counter(choose_extension(strategy, KITE, 0, cands, rng) for _ in range(6000))
    assert set(draws) == set(cands)
    assert chisquare([draws[c] for c in cands]).pvalue > 1e-3


def test_tie_break_does_not_depend_on_candidate_order():
    a = [choose_start(Strategy.MIN_DEGREE, KITE, [3, 2, 1], make_rng(5, i)) for i in range(100)]
    b = [choose_start(Strategy.MIN_DEGREE, KITE, [1, 2, 3], make_rng(5, i)) for i in range(100)]
    assert a == b


def test_encodings_follow_policy():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(4, 10))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4]
        g = LabeledGraph.unlabeled(n, edges)
        for strategy, want in ((Strategy.MIN_DEGREE, min), (Strategy.MAX_DEGREE, max),
                               (Strategy.ANCHOR, max)):
            s = encode(g, strategy, int(rng.integers(1 << 30)))
            start = s.node_order[0]
            # start is extreme among nodes with an edge, when any exists
            pool = [v for v in range(n) if g.degrees[v] > 0] or list(range(n))
            assert g.degrees[start] == want(g.degrees[v] for v in pool)
