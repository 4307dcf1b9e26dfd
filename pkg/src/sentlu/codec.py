"""Segmented Eulerian neighborhood-trail codec.

Grammar realized here::

    sequence   := BOS segment (SEP segment)* EOS
    segment    := node-intro trail-step*
    node-intro := NODE(i) [NLABEL(a) [nbr-set]]      # label + nbr-set only on first occurrence
    trail-step := ELABEL(b) NODE(j) [NLABEL(a) [nbr-set]]
    nbr-set    := NBR_OPEN (ELABEL(b) NODE(u))+ NBR_CLOSE

Node indices are assigned by first appearance. Trail steps add the edge
{current, j}; chord entries add {new node, u} with ``u`` an earlier node.
Chord targets inside one nbr-set are strictly ascending. Every edge is
created exactly once, so a grammatical sequence decodes to a simple graph.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .graph import LabeledGraph, connected_components
from .strategies import Strategy, choose_extension, choose_restart, choose_start, make_rng

DEFAULT_MAX_NODES = 64


class Kind(enum.IntEnum):
    BOS = 0
    EOS = 1
    SEP = 2
    NBR_OPEN = 3
    NBR_CLOSE = 4
    NODE = 5
    NLABEL = 6
    ELABEL = 7


class Token(NamedTuple):
    kind: Kind
    value: int | str | None = None

    def __str__(self) -> str:
        if self.kind is Kind.NODE:
            return f"N{self.value}"
        if self.kind is Kind.NLABEL:
            return f"L:{self.value}"
        if self.kind is Kind.ELABEL:
            return f"E:{self.value}"
        return _SPECIAL_TEXT[self.kind]


BOS = Token(Kind.BOS)
EOS = Token(Kind.EOS)
SEP = Token(Kind.SEP)
NBR_OPEN = Token(Kind.NBR_OPEN)
NBR_CLOSE = Token(Kind.NBR_CLOSE)

_SPECIAL_TEXT = {Kind.BOS: "BOS", Kind.EOS: "EOS", Kind.SEP: "SEP", Kind.NBR_OPEN: "[",
                 Kind.NBR_CLOSE: "]"}
_TEXT_SPECIAL = {v: Token(k) for k, v in _SPECIAL_TEXT.items()}


def node(i: int) -> Token:
    return Token(Kind.NODE, int(i))


def nlabel(a: str) -> Token:
    return Token(Kind.NLABEL, a)


def elabel(b: str) -> Token:
    return Token(Kind.ELABEL, b)


def parse_token(text: str) -> Token:
    if text in _TEXT_SPECIAL:
        return _TEXT_SPECIAL[text]
    if text.startswith("L:") and len(text) > 2:
        return nlabel(text[2:])
    if text.startswith("E:") and len(text) > 2:
        return elabel(text[2:])
    if text.startswith("N") and text[1:].isdigit():
        return node(int(text[1:]))
    raise GrammarError(f"unrecognized token {text!r}")


class TokenType(str, enum.Enum):
    NEW_NODE = "new_node"
    REVISIT = "revisit"
    NODE_LABEL = "node_label"
    EDGE_LABEL = "edge_label"
    SPECIAL = "special"


class GrammarError(ValueError):
    """Ungrammatical token; ``position`` is 1-based, ``expected`` lists token kinds."""

    def __init__(self, message: str, position: int | None = None,
                 expected: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.position = position
        self.expected = tuple(expected)


class EnumerationLimitError(RuntimeError):
    def __init__(self, count: int, limit: int) -> None:
        super().__init__(f"more than {limit} linearizations (found {count} before stopping)")
        self.count = count
        self.limit = limit


@dataclass(frozen=True)
class TokenVocab:
    """Token <-> integer id map: specials, NODE(0..max_nodes-1), node labels, edge labels."""

    node_labels: tuple[str, ...]
    edge_labels: tuple[str, ...]
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_labels", tuple(self.node_labels))
        object.__setattr__(self, "edge_labels", tuple(self.edge_labels))
        for lab in self.node_labels + self.edge_labels:
            if not lab or any(c.isspace() for c in lab):
                raise ValueError(f"label {lab!r} is empty or contains whitespace")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be positive")

    @classmethod
    def from_graphs(cls, graphs: Iterable[LabeledGraph],
                    max_nodes: int = DEFAULT_MAX_NODES) -> "TokenVocab":
        nodes: set[str] = set()
        edges: set[str] = set()
        for g in graphs:
            nodes.update(g.node_label(v) for v in range(g.n))
            edges.update(lab for _, _, lab in g.labeled_edges())
        return cls(tuple(sorted(nodes)), tuple(sorted(edges)), max_nodes)

    @cached_property
    def tokens(self) -> tuple[Token, ...]:
        return (
            BOS, EOS, SEP, NBR_OPEN, NBR_CLOSE,
            *(node(i) for i in range(self.max_nodes)),
            *(nlabel(a) for a in self.node_labels),
            *(elabel(b) for b in self.edge_labels),
        )

    @cached_property
    def _index(self) -> dict[Token, int]:
        return {t: i for i, t in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        return len(self.tokens)

    def id(self, tok: Token) -> int:
        try:
            return self._index[tok]
        except KeyError:
            raise KeyError(f"token {tok} is outside the vocabulary") from None

    def ids(self, tokens: Iterable[Token]) -> list[int]:
        index = self._index
        try:
            return [index[t] for t in tokens]
        except KeyError as exc:
            raise KeyError(f"token {exc.args[0]} is outside the vocabulary") from None

    def to_json(self) -> dict:
        return {"node_labels": list(self.node_labels), "edge_labels": list(self.edge_labels),
                "max_nodes": self.max_nodes}

    @classmethod
    def from_json(cls, d: dict) -> "TokenVocab":
        return cls(tuple(d["node_labels"]), tuple(d["edge_labels"]), int(d["max_nodes"]))


@dataclass(frozen=True)
class SequenceStats:
    n_nodes: int
    n_edges: int
    n_segments: int
    n_chords: int
    n_nonempty_nbr_sets: int
    trail_lengths: tuple[int, ...]

    def as_tuple(self) -> tuple:
        return (self.n_nodes, self.n_edges, self.n_segments, self.n_chords,
                self.n_nonempty_nbr_sets, list(self.trail_lengths))

    @property
    def expected_length(self) -> int:
        """Token count implied by the length identity n + 2m + 2s + 2c + 1."""
        return (self.n_nodes + 2 * self.n_edges + 2 * self.n_segments
                + 2 * self.n_nonempty_nbr_sets + 1)


@dataclass(frozen=True)
class TokenSequence:
    """A linearization. ``node_order[k]`` is the input node id that got index ``k``."""

    tokens: tuple[Token, ...]
    node_order: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def __str__(self) -> str:
        return " ".join(map(str, self.tokens))

    @classmethod
    def from_text(cls, text: str) -> "TokenSequence":
        toks = []
        for pos, t in enumerate(text.split(), 1):
            try:
                toks.append(parse_token(t))
            except GrammarError as exc:
                raise GrammarError(f"{exc} at position {pos}", pos) from None
        return cls(tuple(toks))

    @cached_property
    def stats(self) -> SequenceStats:
        return sequence_stats(self)

    @property
    def n_segments(self) -> int:
        return self.stats.n_segments

    @property
    def n_chords(self) -> int:
        return self.stats.n_chords

    @property
    def n_nonempty_nbr_sets(self) -> int:
        return self.stats.n_nonempty_nbr_sets


# ---------------------------------------------------------------------------
# grammar state machine
# ---------------------------------------------------------------------------


class _Phase(enum.IntEnum):
    INIT = 0
    START = 1        # expecting a segment's first NODE
    NEED_LABEL = 2   # a new node was introduced
    AFTER_LABEL = 3  # new node labeled; nbr-set may open
    BOUNDARY = 4     # segment may continue, split or end
    NBR_ELABEL = 5   # after NBR_OPEN
    NBR_NODE = 6     # chord target expected
    NBR_NEXT = 7     # after a chord entry
    STEP_NODE = 8    # trail-step target expected
    DONE = 9


_EXPECTED = {
    _Phase.INIT: ("BOS",),
    _Phase.START: ("NODE",),
    _Phase.NEED_LABEL: ("NLABEL",),
    _Phase.AFTER_LABEL: ("NBR_OPEN", "ELABEL", "SEP", "EOS"),
    _Phase.BOUNDARY: ("ELABEL", "SEP", "EOS"),
    _Phase.NBR_ELABEL: ("ELABEL",),
    _Phase.NBR_NODE: ("NODE",),
    _Phase.NBR_NEXT: ("ELABEL", "NBR_CLOSE"),
    _Phase.STEP_NODE: ("NODE",),
    _Phase.DONE: (),
}


class SentState:
    """Incremental parser for the grammar; also answers which tokens may come next.

    ``vocab`` is needed for :meth:`legal` and enables label/cap validation.
    """

    def __init__(self, vocab: TokenVocab | None = None) -> None:
        self.vocab = vocab
        self.max_nodes = vocab.max_nodes if vocab is not None else None
        self._node_vocab = set(vocab.node_labels) if vocab is not None else None
        self._edge_vocab = set(vocab.edge_labels) if vocab is not None else None
        self.phase = _Phase.INIT
        self.pos = 0
        self.n = 0
        self.labels: list[str | None] = []
        self.adj: list[set[int]] = []
        self.edges: list[tuple[int, int, str]] = []
        self.cur = -1
        self.last_chord = -1
        self.pending: str | None = None
        self.n_segments = 0
        self.n_chords = 0
        self.n_nonempty = 0
        self.trail_lengths: list[int] = []

    @property
    def done(self) -> bool:
        return self.phase is _Phase.DONE

    @property
    def at_boundary(self) -> bool:
        return self.phase in (_Phase.AFTER_LABEL, _Phase.BOUNDARY)

    def _fail(self, msg: str, expected: Sequence[str] = ()) -> GrammarError:
        return GrammarError(f"{msg} at position {self.pos}", self.pos, expected)

    def _new_node(self) -> int:
        i = self.n
        self.n += 1
        self.labels.append(None)
        self.adj.append(set())
        return i

    def _add_edge(self, u: int, v: int, label: str) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edges.append((min(u, v), max(u, v), label))

    def _check_edge_label(self, value) -> None:
        if not isinstance(value, str):
            raise self._fail("edge label token without a label")
        if self._edge_vocab is not None and value not in self._edge_vocab:
            raise self._fail(f"edge label {value!r} outside vocabulary")

    def _target(self, j: int) -> None:
        # shared checks for trail-step and chord targets
        if j > self.n:
            raise self._fail(f"non-contiguous node index N{j} (next new index is N{self.n})",
                             ("NODE",))
        if j == self.cur:
            raise self._fail("self-loop")
        if j < self.n and j in self.adj[self.cur]:
            raise self._fail(f"duplicate edge ({self.cur}, {j})")

    def advance(self, tok: Token) -> TokenType:
        """Consume one token and return its type; raises :class:`GrammarError`."""
        self.pos += 1
        phase = self.phase
        kind = tok.kind
        expected = _EXPECTED[phase]
        if phase is _Phase.DONE:
            raise self._fail("token after EOS", expected)
        if phase is _Phase.INIT:
            if kind is not Kind.BOS:
                raise self._fail(f"unexpected {tok}", expected)
            self.phase = _Phase.START
            return TokenType.SPECIAL

        if phase is _Phase.START:
            if kind is not Kind.NODE:
                raise self._fail(f"unexpected {tok}", expected)
            i = tok.value
            self.n_segments += 1
            self.trail_lengths.append(1)
            if i == self.n:
                if self.max_nodes is not None and i >= self.max_nodes:
                    raise self._fail(f"node cap {self.max_nodes} exceeded")
                self.cur = self._new_node()
                self.phase = _Phase.NEED_LABEL
                return TokenType.NEW_NODE
            if 0 <= i < self.n:
                self.cur = i
                self.phase = _Phase.BOUNDARY
                return TokenType.REVISIT
            raise self._fail(f"non-contiguous node index N{i} (next new index is N{self.n})",
                             expected)

        if phase is _Phase.NEED_LABEL:
            if kind is not Kind.NLABEL:
                raise self._fail(f"unexpected {tok}", expected)
            if self._node_vocab is not None and tok.value not in self._node_vocab:
                raise self._fail(f"node label {tok.value!r} outside vocabulary")
            self.labels[self.cur] = tok.value
            self.last_chord = -1
            self.phase = _Phase.AFTER_LABEL
            return TokenType.NODE_LABEL

        if phase in (_Phase.AFTER_LABEL, _Phase.BOUNDARY):
            if kind is Kind.NBR_OPEN and phase is _Phase.AFTER_LABEL:
                if not self._chord_targets():
                    raise self._fail("neighborhood set has no possible entries")
                self.n_nonempty += 1
                self.phase = _Phase.NBR_ELABEL
                return TokenType.SPECIAL
            if kind is Kind.ELABEL:
                self._check_edge_label(tok.value)
                self.pending = tok.value
                self.phase = _Phase.STEP_NODE
                return TokenType.EDGE_LABEL
            if kind is Kind.SEP:
                self.phase = _Phase.START
                return TokenType.SPECIAL
            if kind is Kind.EOS:
                self.phase = _Phase.DONE
                return TokenType.SPECIAL
            raise self._fail(f"unexpected {tok}", expected)

        if phase in (_Phase.NBR_ELABEL, _Phase.NBR_NEXT):
            if kind is Kind.ELABEL:
                self._check_edge_label(tok.value)
                self.pending = tok.value
                self.phase = _Phase.NBR_NODE
                return TokenType.EDGE_LABEL
            if kind is Kind.NBR_CLOSE and phase is _Phase.NBR_NEXT:
                self.phase = _Phase.BOUNDARY
                return TokenType.SPECIAL
            raise self._fail(f"unexpected {tok}", expected)

        if phase is _Phase.NBR_NODE:
            if kind is not Kind.NODE:
                raise self._fail(f"unexpected {tok}", expected)
            u = tok.value
            if u >= self.n:
                raise self._fail(f"chord target N{u} is not a previously seen node", expected)
            self._target(u)
            if u <= self.last_chord:
                raise self._fail(f"chord targets must be ascending (N{u} after N{self.last_chord})")
            self._add_edge(self.cur, u, self.pending)
            self.last_chord = u
            self.n_chords += 1
            self.phase = _Phase.NBR_NEXT
            return TokenType.REVISIT

        # STEP_NODE
        if kind is not Kind.NODE:
            raise self._fail(f"unexpected {tok}", expected)
        j = tok.value
        self._target(j)
        self.trail_lengths[-1] += 1
        prev = self.cur
        if j == self.n:
            if self.max_nodes is not None and j >= self.max_nodes:
                raise self._fail(f"node cap {self.max_nodes} exceeded")
            self.cur = self._new_node()
            self._add_edge(prev, self.cur, self.pending)
            self.phase = _Phase.NEED_LABEL
            return TokenType.NEW_NODE
        self._add_edge(prev, j, self.pending)
        self.cur = j
        self.phase = _Phase.BOUNDARY
        return TokenType.REVISIT

    def _chord_targets(self) -> list[int]:
        adj = self.adj[self.cur]
        return [u for u in range(self.last_chord + 1, self.n) if u != self.cur and u not in adj]

    def _step_targets(self) -> list[int]:
        adj = self.adj[self.cur]
        out = [j for j in range(self.n) if j != self.cur and j not in adj]
        if self.n < self.max_nodes:
            out.append(self.n)
        return out

    def legal(self) -> list[Token]:
        """Tokens that keep the prefix completable to a grammatical sequence."""
        if self.vocab is None:
            raise ValueError("legal-token queries need a TokenVocab")
        phase = self.phase
        v = self.vocab
        if phase is _Phase.INIT:
            return [BOS]
        if phase is _Phase.START:
            out = [node(i) for i in range(self.n)]
            if self.n < self.max_nodes:
                out.append(node(self.n))
            return out
        if phase is _Phase.NEED_LABEL:
            return [nlabel(a) for a in v.node_labels]
        if phase in (_Phase.AFTER_LABEL, _Phase.BOUNDARY):
            out = []
            if phase is _Phase.AFTER_LABEL and self._chord_targets():
                out.append(NBR_OPEN)
            if self._step_targets():
                out.extend(elabel(b) for b in v.edge_labels)
            out.extend((SEP, EOS))
            return out
        if phase is _Phase.NBR_ELABEL:
            return [elabel(b) for b in v.edge_labels]
        if phase is _Phase.NBR_NODE:
            return [node(u) for u in self._chord_targets()]
        if phase is _Phase.NBR_NEXT:
            out = [elabel(b) for b in v.edge_labels] if self._chord_targets() else []
            out.append(NBR_CLOSE)
            return out
        if phase is _Phase.STEP_NODE:
            return [node(j) for j in self._step_targets()]
        return []

    def closing(self) -> list[Token]:
        """Legal tokens restricted to the shortest route to EOS (used near a length cap)."""
        legal = self.legal()
        if self.phase in (_Phase.AFTER_LABEL, _Phase.BOUNDARY):
            return [EOS]
        if self.phase is _Phase.NBR_NEXT:
            return [NBR_CLOSE]
        if self.phase is _Phase.STEP_NODE:
            revisits = [t for t in legal if t.value < self.n]
            return revisits or legal
        return legal

    def graph(self, vocab: TokenVocab | None = None) -> LabeledGraph:
        vocab = vocab or self.vocab
        labels = list(self.labels)
        if vocab is not None:
            nv, ev = vocab.node_labels, vocab.edge_labels
        else:
            nv = tuple(sorted(set(labels))) or None
            ev = tuple(sorted({e[2] for e in self.edges})) or None
        return LabeledGraph.build(labels, self.edges, nv, ev)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _run(tokens: Iterable[Token], vocab: TokenVocab | None = None) -> SentState:
    state = SentState(vocab)
    for tok in tokens:
        state.advance(tok)
    return state


def decode(s: TokenSequence | Sequence[Token], vocab: TokenVocab | None = None) -> LabeledGraph:
    """Graph whose edges are the trail steps plus chord entries of ``s``."""
    state = _run(s, vocab)
    if not state.done:
        raise GrammarError(f"sequence ended early at position {state.pos}", state.pos,
                           _EXPECTED[state.phase])
    return state.graph()


def legal_next_tokens(prefix: TokenSequence | Sequence[Token], vocab: TokenVocab) -> set[Token]:
    return set(_run(prefix, vocab).legal())


def token_types(s: TokenSequence | Sequence[Token]) -> list[TokenType]:
    state = SentState()
    return [state.advance(t) for t in s]


def classify_token(s: TokenSequence | Sequence[Token], position: int) -> TokenType:
    """Type of the token at 0-based ``position``."""
    if not 0 <= position < len(s):
        raise IndexError(f"position {position} outside a sequence of length {len(s)}")
    state = SentState()
    for t in list(s)[:position]:
        state.advance(t)
    return state.advance(s[position])


def sequence_stats(s: TokenSequence | Sequence[Token]) -> SequenceStats:
    st = _run(s)
    return SequenceStats(st.n, len(st.edges), st.n_segments, st.n_chords, st.n_nonempty,
                         tuple(st.trail_lengths))


Chooser = Callable[[str, int, list[int]], int]


def _traverse(g: LabeledGraph, choose: Chooser) -> tuple[tuple[Token, ...], tuple[int, ...]]:
    """Linearize ``g``; ``choose(kind, current, candidates)`` resolves every decision."""
    adj = g.adjacency
    unc = [set(a) for a in adj]
    comp = [0] * g.n
    for ci, part in enumerate(connected_components(g)):
        for v in part:
            comp[v] = ci
    index = [-1] * g.n
    order: list[int] = []
    toks: list[Token] = [BOS]

    def introduce(v: int) -> None:
        index[v] = len(order)
        order.append(v)
        toks.append(node(index[v]))
        toks.append(nlabel(g.node_label(v)))
        chords = sorted((u for u in unc[v] if index[u] >= 0), key=index.__getitem__)
        if chords:
            toks.append(NBR_OPEN)
            for u in chords:
                toks.append(elabel(adj[v][u]))
                toks.append(node(index[u]))
                unc[v].discard(u)
                unc[u].discard(v)
            toks.append(NBR_CLOSE)

    first = True
    current_comp = -1
    while True:
        with_edges = [v for v in range(g.n) if unc[v]]
        if with_edges:
            cands = [v for v in with_edges if comp[v] == current_comp] or with_edges
        else:
            cands = [v for v in range(g.n) if index[v] < 0]
            if not cands:
                break
        start = choose("start" if first else "restart", -1, cands)
        if not first:
            toks.append(SEP)
        first = False
        current_comp = comp[start]
        if index[start] < 0:
            introduce(start)
        else:
            toks.append(node(index[start]))
        cur = start
        while unc[cur]:
            nxt = choose("extend", cur, sorted(unc[cur]))
            unc[cur].discard(nxt)
            unc[nxt].discard(cur)
            toks.append(elabel(adj[cur][nxt]))
            if index[nxt] < 0:
                introduce(nxt)
            else:
                toks.append(node(index[nxt]))
            cur = nxt
    toks.append(EOS)
    return tuple(toks), tuple(order)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return make_rng(*seed)
    return make_rng(int(seed))


def encode(g: LabeledGraph, strategy: Strategy | str, seed=0,
           max_nodes: int = DEFAULT_MAX_NODES) -> TokenSequence:
    """Linearize ``g`` under ``strategy``.

    ``seed`` is an int, a tuple of ints (e.g. ``(seed, graph_index, perm_index)``)
    or a ``numpy`` Generator.
    """
    if g.n > max_nodes:
        raise ValueError(f"graph has {g.n} nodes, above the cap of {max_nodes}")
    strategy = Strategy.parse(strategy)
    rng = _as_rng(seed)

    def choose(kind: str, cur: int, cands: list[int]) -> int:
        if kind == "extend":
            return choose_extension(strategy, g, cur, cands, rng)
        if kind == "start":
            return choose_start(strategy, g, cands, rng)
        return choose_restart(strategy, g, cands, rng)

    toks, order = _traverse(g, choose)
    return TokenSequence(toks, order)


def enumerate_linearizations(g: LabeledGraph, limit: int = 100_000) -> list[TokenSequence]:
    """Every distinct (tokens, node_order) reachable by some start/extension/restart choice.

    This is the pre-image of ``g`` under decoding, counted over distinct
    traversal orders, for the fixed ascending chord convention.
    """
    seen: dict[tuple, TokenSequence] = {}
    stack: list[list[int]] = [[]]
    while stack:
        prefix = stack.pop()
        taken: list[int] = []
        widths: list[int] = []

        def choose(kind: str, cur: int, cands: list[int]) -> int:
            i = len(taken)
            pick = prefix[i] if i < len(prefix) else 0
            taken.append(pick)
            widths.append(len(cands))
            return cands[pick]

        toks, order = _traverse(g, choose)
        key = (toks, order)
        if key not in seen:
            seen[key] = TokenSequence(toks, order)
            if len(seen) > limit:
                raise EnumerationLimitError(len(seen), limit)
        for i in range(len(taken) - 1, len(prefix) - 1, -1):
            for alt in range(widths[i] - 1, 0, -1):
                stack.append(taken[:i] + [alt])
    return sorted(seen.values(), key=lambda s: (str(s), s.node_order))


# ---------------------------------------------------------------------------
# text I/O
# ---------------------------------------------------------------------------


def read_sequences(path: str | Path) -> list[TokenSequence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(TokenSequence.from_text(line))
            except GrammarError as exc:
                raise GrammarError(f"{path}:{lineno}: {exc}") from None
    return out


def write_sequences(seqs: Iterable[TokenSequence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in seqs:
            fh.write(str(s) + "\n")
