"""Autoregressive scorers: smoothed n-gram baseline, constrained generation, NLL ingestion."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import codec
from .codec import (
    SentState,
    Token,
    TokenSequence,
    TokenType,
    TokenVocab,
    decode,
    enumerate_linearizations,
    token_types,
)
from .graph import LabeledGraph, canonical_certificate
from .strategies import make_rng

MODEL_FORMAT = "sentlu-ngram"
MODEL_VERSION = 1

DEFAULT_ORDER = 4
DEFAULT_SMOOTHING = 0.1
DEFAULT_BACKOFF = 1.0


class Scorer:
    """Next-token model over ``vocab``; subclasses implement :meth:`distribution`."""

    vocab: TokenVocab
    name: str = "scorer"
    # number of trailing prefix tokens the model looks at; None = all
    context_window: int | None = None

    def distribution(self, prefix: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def predict(self, prefix: Sequence[int]) -> tuple[np.ndarray, float, int]:
        """(distribution, top-1 probability, argmax id)."""
        p = self.distribution(prefix)
        top = int(np.argmax(p))
        return p, float(p[top]), top

    def sequence_nll(self, s: TokenSequence) -> float:
        return score(self, s).total_nll


class UniformScorer(Scorer):
    name = "uniform"

    def __init__(self, vocab: TokenVocab) -> None:
        self.vocab = vocab
        self._p = np.full(vocab.size, 1.0 / vocab.size)

    def distribution(self, prefix: Sequence[int]) -> np.ndarray:
        return self._p


class NgramScorer(Scorer):
    """Order-``m`` count model with add-k unigrams and Dirichlet-prior backoff.

    ``p(w | h) = (c(h, w) + backoff * p(w | h[1:])) / (c(h) + backoff)``, so
    each context spends ``backoff`` pseudo-counts on the shorter context's
    distribution; contexts never seen in training use the shorter context
    as is. The unigram level is ``(c(w) + k) / (N + k V)``.
    """

    name = "ngram"

    def __init__(self, vocab: TokenVocab, order: int = DEFAULT_ORDER, smoothing: float = DEFAULT_SMOOTHING,
                 backoff: float = DEFAULT_BACKOFF, counts: dict | None = None,
                 strategy: str | None = None) -> None:
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing <= 0:
            raise ValueError("smoothing must be > 0")
        if backoff <= 0:
            raise ValueError("backoff must be > 0")
        self.vocab = vocab
        self.order = order
        self.smoothing = smoothing
        self.backoff = backoff
        self.strategy = strategy
        self.counts: dict[tuple[int, ...], dict[int, int]] = counts if counts is not None else {}
        self.context_window = order - 1
        self._cache: dict[tuple[int, ...], tuple[np.ndarray, float, int]] = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

    def _entry(self, ctx: tuple[int, ...]) -> tuple[np.ndarray, float, int]:
        hit = self._cache.get(ctx)
        if hit is not None:
            return hit
        V = self.vocab.size
        if not ctx:
            c = np.zeros(V)
            for w, k in self.counts.get((), {}).items():
                c[w] = k
            p = (c + self.smoothing) / (c.sum() + self.smoothing * V)
        else:
            lower = self._entry(ctx[1:])[0]
            row = self.counts.get(ctx)
            if not row:
                p = lower
            else:
                p = self.backoff * lower
                for w, k in row.items():
                    p[w] += k
                p /= sum(row.values()) + self.backoff
        top = int(np.argmax(p))
        entry = (p, float(p[top]), top)
        self._cache[ctx] = entry
        return entry

    def context(self, prefix: Sequence[int]) -> tuple[int, ...]:
        k = self.order - 1
        return tuple(prefix[-k:]) if k else ()

    def distribution(self, prefix: Sequence[int]) -> np.ndarray:
        return self._entry(self.context(prefix))[0]

    def predict(self, prefix: Sequence[int]) -> tuple[np.ndarray, float, int]:
        return self._entry(self.context(prefix))

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "order": self.order,
            "smoothing": self.smoothing,
            "backoff": self.backoff,
            "strategy": self.strategy,
            "vocab": self.vocab.to_json(),
            "counts": [
                [list(ctx), sorted(row.items())] for ctx, row in sorted(self.counts.items())
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "NgramScorer":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a {MODEL_FORMAT} model file")
        if d.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        counts = {tuple(ctx): {int(w): int(c) for w, c in row} for ctx, row in d["counts"]}
        return cls(TokenVocab.from_json(d["vocab"]), d["order"], d["smoothing"], d["backoff"],
                   counts, d.get("strategy"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), separators=(",", ":")) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramScorer":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train_ngram(corpus: Iterable[TokenSequence], vocab: TokenVocab, order: int = DEFAULT_ORDER,
                smoothing: float = DEFAULT_SMOOTHING, backoff: float = DEFAULT_BACKOFF,
                strategy: str | None = None) -> NgramScorer:
    counts: dict[tuple[int, ...], dict[int, int]] = defaultdict(lambda: defaultdict(int))
    n_seq = 0
    for s in corpus:
        n_seq += 1
        ids = vocab.ids(s.tokens)
        for t in range(1, len(ids)):
            w = ids[t]
            for j in range(min(order - 1, t) + 1):
                counts[tuple(ids[t - j:t])][w] += 1
    if n_seq == 0:
        raise ValueError("empty training corpus")
    frozen = {ctx: dict(row) for ctx, row in counts.items()}
    return NgramScorer(vocab, order, smoothing, backoff, frozen, strategy)


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------


@dataclass
class ScoredSequence:
    """Teacher-forced scores of every token after BOS."""

    tokens: tuple[Token, ...]
    token_nll: np.ndarray
    confidence: np.ndarray
    correct: np.ndarray
    token_types: tuple[TokenType, ...]
    total_nll: float
    distributions: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_tokens(self) -> int:
        return len(self.token_nll)


def _mask(p: np.ndarray, legal: list[int]) -> np.ndarray:
    q = np.zeros_like(p)
    q[legal] = p[legal]
    z = q.sum()
    if z <= 0:
        # degenerate model: uniform over legal tokens
        q[legal] = 1.0 / len(legal)
        return q
    return q / z


def score(scorer: Scorer, s: TokenSequence, masked: bool = False,
          keep_distributions: bool = False) -> ScoredSequence:
    """Score ``s`` token by token. BOS conditions but is not scored; EOS is.

    With ``masked`` the conditional is restricted to grammatical tokens and
    renormalized, which is the distribution constrained generation samples from.
    """
    vocab = scorer.vocab
    ids = vocab.ids(s.tokens)
    types = tuple(token_types(s))[1:]
    T = len(ids) - 1
    nll = np.empty(T)
    conf = np.empty(T)
    correct = np.empty(T, dtype=bool)
    dists = np.empty((T, vocab.size)) if keep_distributions else None
    state = SentState(vocab) if masked else None
    window = scorer.context_window
    if state is not None:
        state.advance(s.tokens[0])
    total = 0.0
    for t in range(1, len(ids)):
        p, top_p, top = scorer.predict(ids[max(0, t - window):t] if window is not None else ids[:t])
        if state is not None:
            p = _mask(p, vocab.ids(state.legal()))
            top = int(np.argmax(p))
            top_p = float(p[top])
            state.advance(s.tokens[t])
        target = ids[t]
        pt = p[target]
        val = -math.log(pt) if pt > 0 else math.inf
        total += val
        nll[t - 1] = val
        conf[t - 1] = top_p
        correct[t - 1] = top == target
        if dists is not None:
            dists[t - 1] = p
    return ScoredSequence(tuple(s.tokens), nll, conf, correct, types, total, dists)


# ---------------------------------------------------------------------------
# constrained generation
# ---------------------------------------------------------------------------


@dataclass
class Generation:
    sequence: TokenSequence
    nll: float
    truncated: bool

    @property
    def n_tokens(self) -> int:
        return len(self.sequence) - 1


def generate(scorer: Scorer, max_len: int = 512, temperature: float = 1.0, seed=0) -> Generation:
    """Sample a grammatical sequence; logits of illegal tokens are masked out.

    ``nll`` is the Generation NLL under the grammar-masked, renormalized
    model distribution at temperature 1. Within 4 tokens of ``max_len`` the
    sampler only follows the shortest route to EOS; ``truncated`` records
    whether that cut off any option.
    """
    if max_len < 4:
        raise ValueError("max_len must be >= 4")
    vocab = scorer.vocab
    rng = seed if isinstance(seed, np.random.Generator) else (
        make_rng(*seed) if isinstance(seed, (tuple, list)) else make_rng(int(seed)))
    state = SentState(vocab)
    toks: list[Token] = [codec.BOS]
    state.advance(codec.BOS)
    ids = [vocab.id(codec.BOS)]
    total = 0.0
    truncated = False
    while not state.done:
        legal = vocab.ids(state.legal())
        allowed = legal
        if len(toks) + 4 >= max_len:
            allowed = vocab.ids(state.closing())
            truncated = truncated or len(allowed) < len(legal)
        p = _mask(scorer.distribution(ids), legal)
        if temperature <= 0:
            q = p[allowed]
            pick = allowed[int(np.argmax(q))]
        else:
            q = p[allowed]
            if temperature != 1.0:
                with np.errstate(divide="ignore"):
                    q = np.exp(np.log(q) / temperature)
            z = q.sum()
            q = q / z if z > 0 else np.full(len(allowed), 1.0 / len(allowed))
            pick = allowed[int(rng.choice(len(allowed), p=q))]
        total += -math.log(p[pick]) if p[pick] > 0 else math.inf
        tok = vocab.tokens[pick]
        state.advance(tok)
        toks.append(tok)
        ids.append(pick)
    return Generation(TokenSequence(tuple(toks)), total, truncated)


# ---------------------------------------------------------------------------
# invariant oracle
# ---------------------------------------------------------------------------


class UniformGraphOracle:
    """Sequence-level model: p(s) = 1/|graphs| * 1/|pre-image of decode(s)|.

    Assigns one NLL to every linearization of a graph, so it satisfies
    linearization invariance by construction. Only total NLL is exposed.
    """

    name = "uniform-graph-oracle"

    def __init__(self, graphs: Sequence[LabeledGraph], limit: int = 100_000) -> None:
        self.graphs: list[LabeledGraph] = []
        self.preimages: list[list[TokenSequence]] = []
        self._index: dict[bytes, int] = {}
        for g in graphs:
            cert = canonical_certificate(g)
            if cert in self._index:
                continue
            self._index[cert] = len(self.graphs)
            self.graphs.append(g)
            self.preimages.append(enumerate_linearizations(g, limit))
        self._members = [{s.tokens for s in pre} for pre in self.preimages]
        self.log_n_graphs = math.log(len(self.graphs))

    def preimage_size(self, g: LabeledGraph) -> int:
        return len(self.preimages[self._index[canonical_certificate(g)]])

    def sequence_nll(self, s: TokenSequence) -> float:
        try:
            i = self._index[canonical_certificate(decode(s))]
        except KeyError:
            return math.inf
        if tuple(s.tokens) not in self._members[i]:
            return math.inf
        return self.log_n_graphs + math.log(len(self.preimages[i]))

    def generate(self, seed=0) -> Generation:
        rng = make_rng(*seed) if isinstance(seed, (tuple, list)) else make_rng(int(seed))
        i = int(rng.integers(len(self.graphs)))
        pre = self.preimages[i]
        s = pre[int(rng.integers(len(pre)))]
        return Generation(TokenSequence(s.tokens), self.sequence_nll(s), False)


# ---------------------------------------------------------------------------
# external NLL ingestion
# ---------------------------------------------------------------------------

NLL_COLUMNS = ("graph_id", "perm_index", "strategy", "nll", "n_tokens")


@dataclass(frozen=True)
class NllRecord:
    graph_id: str
    perm_index: int
    strategy: str
    nll: float
    n_tokens: int


class NllFormatError(ValueError):
    pass


def ingest_nll(path: str | Path) -> list[NllRecord]:
    """Parse an NLL CSV (``graph_id,perm_index,strategy,nll,n_tokens``)."""
    records: list[NllRecord] = []
    seen: set[tuple[str, int]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in NLL_COLUMNS:
            if col not in header:
                raise NllFormatError(f"{path}: missing column {col!r}")
        for row in reader:
            line = reader.line_num
            try:
                rec = NllRecord(
                    graph_id=str(row["graph_id"]),
                    perm_index=int(row["perm_index"]),
                    strategy=str(row["strategy"]),
                    nll=float(row["nll"]),
                    n_tokens=int(row["n_tokens"]),
                )
            except (TypeError, ValueError) as exc:
                raise NllFormatError(f"{path}:{line}: malformed row ({exc})") from None
            if not math.isfinite(rec.nll) or rec.nll < 0:
                raise NllFormatError(f"{path}:{line}: nll must be finite and >= 0, got {rec.nll}")
            key = (rec.graph_id, rec.perm_index)
            if key in seen:
                raise NllFormatError(
                    f"{path}:{line}: duplicate (graph_id, perm_index) = {key}"
                )
            seen.add(key)
            records.append(rec)
    return records


def group_by_graph(records: Iterable[NllRecord]) -> dict[str, list[NllRecord]]:
    """Records per graph id, in first-appearance order, each sorted by perm_index."""
    groups: dict[str, list[NllRecord]] = {}
    for r in records:
        groups.setdefault(r.graph_id, []).append(r)
    return {k: sorted(v, key=lambda r: r.perm_index) for k, v in groups.items()}


def write_nll_csv(records: Iterable[NllRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NLL_COLUMNS)
        for r in records:
            w.writerow([r.graph_id, r.perm_index, r.strategy, repr(float(r.nll)), r.n_tokens])
