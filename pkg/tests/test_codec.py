from __future__ import annotations

import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sentlu import codec
from sentlu.codec import (
    EnumerationLimitError,
    GrammarError,
    TokenSequence,
    TokenType,
    TokenVocab,
    classify_token,
    decode,
    encode,
    enumerate_linearizations,
    legal_next_tokens,
    read_sequences,
    sequence_stats,
    write_sequences,
)
from sentlu.graph import LabeledGraph, canonical_certificate
from sentlu.strategies import ALL_STRATEGIES, Strategy

P3_TEXT = "BOS N0 L:X E:e N1 L:X E:e N2 L:X EOS"
TRIANGLE_TEXT = "BOS N0 L:A E:b N1 L:A E:b N2 L:A [ E:b N0 ] EOS"


def p3() -> LabeledGraph:
    return LabeledGraph.build(["X"] * 3, [(0, 1, "e"), (1, 2, "e")])


def triangle() -> LabeledGraph:
    return LabeledGraph.build(["A"] * 3, [(0, 1, "b"), (1, 2, "b"), (0, 2, "b")])


@st.composite
def graphs(draw, n_max=12):
    n = draw(st.integers(1, n_max))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=30)) if pairs else []
    nl = draw(st.lists(st.sampled_from("CNO"), min_size=n, max_size=n))
    el = draw(st.lists(st.sampled_from(["s", "d"]), min_size=len(chosen), max_size=len(chosen)))
    return LabeledGraph.build(nl, [(u, v, b) for (u, v), b in zip(chosen, el)])


# --- encode -----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_p3_min_degree_example(seed):
    s = encode(p3(), Strategy.MIN_DEGREE, seed)
    assert str(s) == P3_TEXT
    assert len(s) == 10


def test_triangle_example():
    # every start and extension is equivalent on the triangle
    for st_ in ALL_STRATEGIES:
        for seed in range(5):
            assert str(encode(triangle(), st_, seed)) == TRIANGLE_TEXT


def test_isolated_node_example():
    s = encode(LabeledGraph.unlabeled(1, []), Strategy.RANDOM, 0)
    assert str(s) == "BOS N0 L:X EOS"


def test_node_cap():
    with pytest.raises(ValueError):
        encode(LabeledGraph.unlabeled(5, []), Strategy.RANDOM, 0, max_nodes=4)


@settings(max_examples=200, deadline=None)
@given(graphs(), st.sampled_from(ALL_STRATEGIES), st.integers(0, 2**31))
def test_roundtrip_and_edge_cover(g, strategy, seed):
    s = encode(g, strategy, seed)
    assert decode(s).relabel(s.node_order) == g
    stats = s.stats
    trail_steps = sum(stats.trail_lengths) - stats.n_segments
    assert trail_steps + stats.n_chords == g.m
    assert len(s) == stats.expected_length
    assert sorted(s.node_order) == list(range(g.n))


@settings(max_examples=60, deadline=None)
@given(graphs(n_max=8), st.sampled_from(ALL_STRATEGIES), st.integers(0, 1000))
def test_encoder_output_passes_mask_everywhere(g, strategy, seed):
    s = encode(g, strategy, seed)
    vocab = TokenVocab.from_graphs([g], max_nodes=8)
    for t in range(1, len(s)):
        assert s.tokens[t] in legal_next_tokens(s.tokens[:t], vocab)


def test_determinism_under_seed():
    g = LabeledGraph.unlabeled(7, [(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (4, 5), (5, 6), (6, 4)])
    for st_ in ALL_STRATEGIES:
        assert encode(g, st_, (3, 1, 4)) == encode(g, st_, (3, 1, 4))


def test_isolated_nodes_come_last_as_single_segments():
    g = LabeledGraph.unlabeled(4, [(1, 2)])
    s = encode(g, Strategy.RANDOM, 0)
    assert s.stats.trail_lengths[-2:] == (1, 1)
    assert set(s.node_order[2:]) == {0, 3}


# --- decode -----------------------------------------------------------------

def test_decode_examples():
    assert decode(TokenSequence.from_text(P3_TEXT)) == p3()
    assert decode(TokenSequence.from_text(TRIANGLE_TEXT)) == triangle()


def test_self_loop_reported_with_position():
    with pytest.raises(GrammarError, match="self-loop at position 5") as info:
        decode(TokenSequence.from_text("BOS N0 L:X E:e N0 EOS"))
    assert info.value.position == 5


@pytest.mark.parametrize("text,position", [
    ("N0 L:X EOS", 1),                                  # missing BOS
    ("BOS N1 L:X EOS", 2),                              # non-contiguous index
    ("BOS N0 L:X E:e N1 L:X E:e N0 E:e N1 EOS", 8),     # duplicate edge 0-1
    ("BOS N0 E:e N1 L:X EOS", 3),                       # new node without label
    ("BOS N0 L:X E:e N1 L:X [ ] EOS", 7),               # no chord is possible
    ("BOS N0 L:X E:e N1 L:X EOS EOS", 8),               # token after EOS
])
def test_ungrammatical_positions(text, position):
    with pytest.raises(GrammarError) as info:
        decode(TokenSequence.from_text(text))
    assert info.value.position == position


def test_unknown_token_text():
    with pytest.raises(GrammarError, match="position 3"):
        TokenSequence.from_text("BOS N0 X:Y EOS")


def test_revisit_start_segments_decode():
    # second segment starts at a seen node and extends from it
    s = TokenSequence.from_text("BOS N0 L:X E:e N1 L:X SEP N0 E:e N2 L:X EOS")
    g = decode(s)
    assert g.labeled_edges() == [(0, 1, "e"), (0, 2, "e")]
    assert len(s) == s.stats.expected_length


# --- legal_next_tokens ------------------------------------------------------

def test_mask_examples():
    vocab = TokenVocab(("A", "X"), ("b", "e"), max_nodes=3)
    assert legal_next_tokens([codec.BOS], vocab) == {codec.node(0)}
    assert legal_next_tokens([codec.BOS, codec.node(0)], vocab) == {codec.nlabel("A"), codec.nlabel("X")}
    tri = TokenSequence.from_text(TRIANGLE_TEXT).tokens[:-1]
    assert legal_next_tokens(tri, vocab) == {codec.EOS, codec.SEP}


def test_mask_soundness_random_walks():
    vocab = TokenVocab(("A", "X"), ("b", "e"), max_nodes=6)
    rng = np.random.default_rng(0)
    for _ in range(200):
        state = codec.SentState(vocab)
        toks = [codec.BOS]
        state.advance(codec.BOS)
        while not state.done:
            legal = state.legal() if len(toks) < 150 else state.closing()
            assert legal
            tok = legal[int(rng.integers(len(legal)))]
            state.advance(tok)
            toks.append(tok)
        s = TokenSequence(tuple(toks))
        g = decode(s, vocab)
        assert len(s) == s.stats.expected_length
        assert g.n <= 6


# --- enumeration ------------------------------------------------------------

def test_enumeration_examples():
    edge = LabeledGraph.unlabeled(2, [(0, 1)])
    pre = enumerate_linearizations(edge)
    assert len(pre) == 2
    assert len(enumerate_linearizations(LabeledGraph.unlabeled(1, []))) == 1
    for s in enumerate_linearizations(triangle()) + pre:
        g = decode(s)
        assert canonical_certificate(g) in {canonical_certificate(triangle()), canonical_certificate(edge)}


def test_enumeration_limit():
    k5 = LabeledGraph.unlabeled(5, itertools.combinations(range(5), 2))
    with pytest.raises(EnumerationLimitError):
        enumerate_linearizations(k5, limit=10)


@pytest.mark.parametrize("g", [LabeledGraph.unlabeled(2, [(0, 1)]),
                               LabeledGraph.build(["A"] * 3, [(0, 1, "b"), (1, 2, "b"), (0, 2, "b")]),
                               LabeledGraph.unlabeled(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
                               LabeledGraph.unlabeled(4, [(0, 1), (2, 3)])])
def test_random_strategy_support_equals_enumeration(g):
    pre = {(s.tokens, s.node_order) for s in enumerate_linearizations(g)}
    seen = {(s.tokens, s.node_order) for s in (encode(g, Strategy.RANDOM, i) for i in range(10_000))}
    assert seen == pre
    for tokens, order in pre:
        assert decode(TokenSequence(tokens)).relabel(order) == g


# --- classification and statistics -----------------------------------------

def test_classify_examples():
    tri = TokenSequence.from_text(TRIANGLE_TEXT)
    assert classify_token(tri, 11) is TokenType.REVISIT     # N0 inside [ ]
    assert classify_token(tri, 7) is TokenType.NEW_NODE     # N2
    s = TokenSequence.from_text("BOS N0 L:X SEP N1 L:X EOS")
    assert classify_token(s, 3) is TokenType.SPECIAL
    assert classify_token(s, 2) is TokenType.NODE_LABEL
    assert classify_token(tri, 3) is TokenType.EDGE_LABEL
    with pytest.raises(IndexError):
        classify_token(s, 7)


def test_stats_examples():
    assert sequence_stats(TokenSequence.from_text(P3_TEXT)).as_tuple() == (3, 2, 1, 0, 0, [3])
    assert sequence_stats(TokenSequence.from_text(TRIANGLE_TEXT)).as_tuple() == (3, 3, 1, 1, 1, [3])
    assert sequence_stats(TokenSequence.from_text("BOS N0 L:X EOS")).as_tuple() == (1, 0, 1, 0, 0, [1])


# --- vocab and files --------------------------------------------------------

def test_vocab_ids_roundtrip():
    vocab = TokenVocab(("C", "H"), ("single",), max_nodes=4)
    assert vocab.size == 5 + 4 + 2 + 1
    assert [vocab.tokens[i] for i in vocab.ids(vocab.tokens)] == list(vocab.tokens)
    assert TokenVocab.from_json(vocab.to_json()) == vocab
    with pytest.raises(KeyError):
        vocab.id(codec.node(4))


def test_sequence_file_roundtrip(tmp_path):
    seqs = [TokenSequence.from_text(P3_TEXT), TokenSequence.from_text(TRIANGLE_TEXT)]
    write_sequences(seqs, tmp_path / "s.txt")
    assert (tmp_path / "s.txt").read_text() == P3_TEXT + "\n" + TRIANGLE_TEXT + "\n"
    assert [s.tokens for s in read_sequences(tmp_path / "s.txt")] == [s.tokens for s in seqs]


def test_random_start_is_uniform_on_the_path():
    # P3 under Random: starting at either leaf or the middle
    starts = Counter(encode(p3(), Strategy.RANDOM, i).node_order[0] for i in range(3000))
    assert set(starts) == {0, 1, 2}
