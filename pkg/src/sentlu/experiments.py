"""Experiment harness: strategy-conditioned training, cross evaluation, self-assessment,
stability predictors and training-size sweeps.

Every random choice is drawn from ``make_rng(seed, stream, graph index, draw index)``
so results do not depend on how work is split across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .codec import GrammarError, TokenSequence, TokenVocab, decode, encode
from .graph import LabeledGraph, canonical_certificate, connected_components, is_planar
from .metrics import (
    BOND_ORDERS,
    K_SWEEP,
    NODE_INDEX,
    VALENCY_TABLE,
    ece_of_scored,
    k_sweep,
    linearization_uncertainty,
    roc_auc,
    sequence_diversity,
    spearman,
    stability,
    vun,
)
from .model import (
    DEFAULT_BACKOFF,
    DEFAULT_ORDER,
    DEFAULT_SMOOTHING,
    NgramScorer,
    generate,
    score,
    train_ngram,
)
from .datasets import DatasetSpec, generate as generate_dataset, strip_hydrogens, toy_molecules
from .strategies import ALL_STRATEGIES, Strategy, make_rng

# rng streams; the second element of every rng key
STREAM_TRAIN = 1
STREAM_EVAL = 2
STREAM_GENERATE = 3
STREAM_RESAMPLE = 4
STREAM_PERTURB = 5

DEFAULT_EPOCHS = 10


# ---------------------------------------------------------------------------
# deterministic work distribution
# ---------------------------------------------------------------------------

_CONTEXT: dict = {}


def _install(ctx: dict) -> None:
    _CONTEXT.clear()
    _CONTEXT.update(ctx)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1, context: dict | None = None) -> list:
    """``[fn(x) for x in items]`` on up to ``workers`` processes, results in input order.

    ``context`` is installed once per worker and read by ``fn`` via
    :func:`context`, so large shared objects (a trained scorer) are not
    pickled per item.
    """
    ctx = dict(context or {})
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        saved = dict(_CONTEXT)
        _install(ctx)
        try:
            return [fn(x) for x in items]
        finally:
            _install(saved)
    chunk = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=_install, initargs=(ctx,)) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def context() -> dict:
    return _CONTEXT


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def training_corpus(graphs: Sequence[LabeledGraph], strategy: Strategy | str, seed: int = 0,
                    epochs: int = DEFAULT_EPOCHS, max_nodes: int | None = None) -> list[TokenSequence]:
    """One fresh linearization of every graph per epoch, epoch-major order."""
    st = Strategy.parse(strategy)
    kw = {} if max_nodes is None else {"max_nodes": max_nodes}
    return [encode(g, st, (seed, STREAM_TRAIN, i, e), **kw)
            for e in range(epochs) for i, g in enumerate(graphs)]


def train_strategy_model(graphs: Sequence[LabeledGraph], strategy: Strategy | str,
                         vocab: TokenVocab, seed: int = 0, epochs: int = DEFAULT_EPOCHS,
                         order: int = DEFAULT_ORDER, smoothing: float = DEFAULT_SMOOTHING,
                         backoff: float = DEFAULT_BACKOFF) -> NgramScorer:
    st = Strategy.parse(strategy)
    corpus = training_corpus(graphs, st, seed, epochs, vocab.max_nodes)
    return train_ngram(corpus, vocab, order=order, smoothing=smoothing, backoff=backoff,
                       strategy=st.value)


# ---------------------------------------------------------------------------
# evaluation over K linearizations
# ---------------------------------------------------------------------------


def linearizations(g: LabeledGraph, strategy: Strategy | str, seed: int, graph_index: int,
                   k: int, stream: int = STREAM_EVAL, max_nodes: int | None = None) -> list[TokenSequence]:
    st = Strategy.parse(strategy)
    kw = {} if max_nodes is None else {"max_nodes": max_nodes}
    return [encode(g, st, (seed, stream, graph_index, j), **kw) for j in range(k)]


def _has_token_scores(scorer) -> bool:
    return hasattr(scorer, "predict")


@dataclass
class GraphScores:
    """Scores of one graph's K linearizations."""

    nlls: list[float]
    n_tokens: list[int]
    scored: list = field(default_factory=list, repr=False)


def _score_graph(item: tuple) -> GraphScores:
    gi, g = item
    ctx = context()
    scorer = ctx["scorer"]
    seqs = linearizations(g, ctx["strategy"], ctx["seed"], gi, ctx["k"], ctx.get("stream", STREAM_EVAL),
                          scorer.vocab.max_nodes if hasattr(scorer, "vocab") else None)
    if _has_token_scores(scorer):
        scored = [score(scorer, s) for s in seqs]
        return GraphScores([x.total_nll for x in scored], [x.n_tokens for x in scored], scored)
    return GraphScores([scorer.sequence_nll(s) for s in seqs], [len(s) - 1 for s in seqs])


def score_graphs(scorer, graphs: Sequence[LabeledGraph], strategy: Strategy | str, k: int,
                 seed: int = 0, workers: int = 1, stream: int = STREAM_EVAL) -> list[GraphScores]:
    ctx = {"scorer": scorer, "strategy": Strategy.parse(strategy).value, "k": k, "seed": seed,
           "stream": stream}
    return parallel_map(_score_graph, list(enumerate(graphs)), workers, ctx)


@dataclass
class CellResult:
    """Metrics of one scorer on K encodings of every test graph under one strategy."""

    nll_per_token: float
    lu: float
    ece: float | None
    ece_by_type: dict[str, float]
    tok_per_graph: float
    per_graph_lu: list[float]
    nll_matrix: list[list[float]] = field(repr=False)

    def summary(self) -> dict:
        return {
            "nll_per_token": self.nll_per_token,
            "lu": self.lu,
            "ece": self.ece,
            "ece_by_type": dict(sorted(self.ece_by_type.items())),
            "tok_per_graph": self.tok_per_graph,
        }


def summarize_scores(results: Sequence[GraphScores]) -> CellResult:
    if not results:
        raise ValueError("no graphs to evaluate")
    total = math.fsum(x for r in results for x in r.nlls)
    n_tok = sum(n for r in results for n in r.n_tokens)
    lus = [linearization_uncertainty(r.nlls).lu for r in results]
    scored = [s for r in results for s in r.scored]
    if scored:
        e = ece_of_scored(scored)
        ece, by_type = e.ece, e.by_type
    else:
        ece, by_type = None, {}
    tok = float(np.mean([np.mean(r.n_tokens) for r in results]))
    return CellResult(total / n_tok, float(np.mean(lus)), ece, by_type, tok, lus,
                      [list(r.nlls) for r in results])


def evaluate(scorer, graphs: Sequence[LabeledGraph], strategy: Strategy | str, k: int,
             seed: int = 0, workers: int = 1) -> CellResult:
    if k < 2:
        raise ValueError("K must be >= 2 for linearization uncertainty")
    return summarize_scores(score_graphs(scorer, graphs, strategy, k, seed, workers))


def cross_eval(scorers: Mapping[Strategy, object], graphs: Sequence[LabeledGraph], k: int,
               seed: int = 0, workers: int = 1,
               eval_strategies: Sequence[Strategy] = ALL_STRATEGIES,
               progress: Callable[[str], None] | None = None) -> dict[tuple[Strategy, Strategy], CellResult]:
    """Grid cell (i, j): scorer trained on i, evaluated on K strategy-j encodings.

    Encodings of a given (graph, column) are shared across rows.
    """
    vocabs = [s.vocab.to_json() for s in scorers.values() if hasattr(s, "vocab")]
    if any(v != vocabs[0] for v in vocabs):
        raise ValueError("scorers in a cross evaluation must share one vocabulary")
    grid = {}
    for tr, scorer in scorers.items():
        for ev in eval_strategies:
            if progress:
                progress(f"cross-eval {Strategy.parse(tr).value} -> {ev.value}")
            grid[Strategy.parse(tr), ev] = evaluate(scorer, graphs, ev, k, seed, workers)
    return grid


SUMMARY_COLUMNS = ("nll_per_token_native", "nll_per_token_random", "lu_native", "lu_random",
                  "ece_native", "ece_random", "tok_per_graph")


def summary_table(grid: Mapping[tuple[Strategy, Strategy], CellResult]) -> dict[str, dict]:
    """Native vs random-evaluation columns per training strategy."""
    rows = {}
    for tr in dict.fromkeys(t for t, _ in grid):
        nat, rnd = grid[tr, tr], grid[tr, Strategy.RANDOM]
        rows[tr.value] = {
            "nll_per_token_native": nat.nll_per_token,
            "nll_per_token_random": rnd.nll_per_token,
            "lu_native": nat.lu,
            "lu_random": rnd.lu,
            "ece_native": nat.ece,
            "ece_random": rnd.ece,
            "tok_per_graph": nat.tok_per_graph,
        }
    return rows


def ece_increase_by_type(grid: Mapping[tuple[Strategy, Strategy], CellResult],
                         strategy: Strategy) -> dict[str, float]:
    """Mean off-diagonal ECE minus diagonal ECE per token type for one training row.

    The node-index union group is left out; only the individual token types compete.
    """
    diag = grid[strategy, strategy].ece_by_type
    offs = [cell.ece_by_type for (tr, ev), cell in grid.items() if tr is strategy and ev is not strategy]
    out = {}
    for t in sorted(diag):
        if t == NODE_INDEX:
            continue
        vals = [o[t] for o in offs if t in o]
        if vals:
            out[t] = float(np.mean(vals)) - diag[t]
    return out


# ---------------------------------------------------------------------------
# self-assessment: own generations vs native re-linearizations
# ---------------------------------------------------------------------------


@dataclass
class SelfAssessRow:
    index: int
    gen_tokens: int
    resamp_tokens: float
    gen_nll: float
    resamp_nll: float
    lu: float
    mol_stable: bool | None
    truncated: bool


def _labels_known(g: LabeledGraph) -> bool:
    return (all(g.node_label(v) in VALENCY_TABLE for v in range(g.n))
            and all(lab in BOND_ORDERS for _, _, lab in g.labeled_edges()))


def _mol_stable(g: LabeledGraph) -> bool | None:
    return stability(g).mol_stable if g.n and _labels_known(g) else None


def _generate_one(scorer, seed: int, index: int, max_len: int, temperature: float):
    if hasattr(scorer, "preimages"):
        return scorer.generate((seed, STREAM_GENERATE, index))
    return generate(scorer, max_len, temperature, (seed, STREAM_GENERATE, index))


def _sequence_nll(scorer, s: TokenSequence) -> float:
    return scorer.sequence_nll(s)


def _self_assess_item(i: int):
    ctx = context()
    scorer, seed, k = ctx["scorer"], ctx["seed"], ctx["k"]
    gen = _generate_one(scorer, seed, i, ctx["max_len"], ctx["temperature"])
    try:
        g = decode(gen.sequence, getattr(scorer, "vocab", None))
    except GrammarError:
        return None
    if g.n == 0:
        return None
    seqs = linearizations(g, ctx["strategy"], seed, i, k, STREAM_RESAMPLE,
                          scorer.vocab.max_nodes if hasattr(scorer, "vocab") else None)
    nlls = [_sequence_nll(scorer, s) for s in seqs]
    if not all(math.isfinite(x) for x in nlls):
        return None
    return SelfAssessRow(i, gen.n_tokens, float(np.mean([len(s) - 1 for s in seqs])), gen.nll,
                         float(np.mean(nlls)), linearization_uncertainty(nlls).lu, _mol_stable(g),
                         gen.truncated), g, nlls


@dataclass
class SelfAssessment:
    rows: list[SelfAssessRow]
    graphs: list[LabeledGraph] = field(repr=False)
    nll_matrix: list[list[float]] = field(repr=False)
    attempts: int = 0

    def summary(self) -> dict:
        def avg(attr):
            return float(np.mean([getattr(r, attr) for r in self.rows]))
        return {
            "n": len(self.rows),
            "attempts": self.attempts,
            "gen_tokens": avg("gen_tokens"),
            "resamp_tokens": avg("resamp_tokens"),
            "gen_nll": avg("gen_nll"),
            "resamp_nll": avg("resamp_nll"),
            "lu": avg("lu"),
        }


def self_assessment(scorer, strategy: Strategy | str, n_gen: int, k: int, seed: int = 0,
                    max_len: int = 512, temperature: float = 1.0, workers: int = 1,
                    retry_factor: int = 4) -> SelfAssessment:
    """Generation NLL of each decodable generation next to the mean NLL and LU of
    K native re-linearizations of the decoded graph."""
    if k < 2:
        raise ValueError("K must be >= 2 for linearization uncertainty")
    if n_gen < 1:
        raise ValueError("n_gen must be >= 1")
    ctx = {"scorer": scorer, "strategy": Strategy.parse(strategy).value, "k": k, "seed": seed,
           "max_len": max_len, "temperature": temperature}
    rows, graphs, matrix = [], [], []
    start, budget = 0, n_gen * retry_factor
    while len(rows) < n_gen and start < budget:
        batch = list(range(start, min(budget, start + n_gen - len(rows))))
        for out in parallel_map(_self_assess_item, batch, workers, ctx):
            if out is not None:
                rows.append(out[0])
                graphs.append(out[1])
                matrix.append(out[2])
        start = batch[-1] + 1
    if len(rows) < n_gen:
        raise RuntimeError(f"only {len(rows)} of {n_gen} generations were decodable "
                           f"within {budget} attempts")
    return SelfAssessment(rows, graphs, matrix, start)


# ---------------------------------------------------------------------------
# stability predictors
# ---------------------------------------------------------------------------


PREDICTORS = ("gen_nll", "mean_perm_nll", "lu", "ece")


@dataclass
class StabilityPrediction:
    labels: list[bool]
    values: dict[str, list[float]]
    auc: dict[str, float]
    spearman: dict[str, float | None]
    nll_matrix: list[list[float]] = field(repr=False)

    def summary(self) -> dict:
        return {"n": len(self.labels), "n_stable": int(sum(self.labels)),
                "auc": self.auc, "spearman": self.spearman}


def _safe_spearman(xs, ys) -> float | None:
    try:
        return spearman(xs, ys)
    except ValueError:
        return None


def predict_stability(labels: Sequence[bool], gen_nll: Sequence[float],
                      nll_matrix: Sequence[Sequence[float]],
                      ece: Sequence[float] | None = None) -> StabilityPrediction:
    """AUC (metric negated, stable = positive) and Spearman vs stability for each predictor."""
    m = np.asarray(nll_matrix, dtype=float)
    values = {
        "gen_nll": [float(x) for x in gen_nll],
        "mean_perm_nll": [float(x) for x in m.mean(axis=1)],
        "lu": [linearization_uncertainty(row).lu for row in m],
    }
    if ece is not None:
        values["ece"] = [float(x) for x in ece]
    y = [bool(v) for v in labels]
    yf = [float(v) for v in y]
    auc = {name: roc_auc(-np.asarray(v), y) for name, v in values.items()}
    rho = {name: _safe_spearman(v, yf) for name, v in values.items()}
    return StabilityPrediction(y, values, auc, rho, m.tolist())


def _per_graph_ece(scored) -> float:
    return ece_of_scored(scored).ece


def stability_from_generations(scorer, strategy: Strategy | str, n_gen: int, k: int = 32,
                               seed: int = 0, max_len: int = 512, temperature: float = 1.0,
                               workers: int = 1) -> StabilityPrediction:
    """Score the scorer's own decodable generations as stability predictors."""
    sa = self_assessment(scorer, strategy, n_gen, k, seed, max_len, temperature, workers)
    keep = [i for i, r in enumerate(sa.rows) if r.mol_stable is not None]
    if not keep:
        raise RuntimeError("no generation carries chemistry labels")
    return predict_stability([sa.rows[i].mol_stable for i in keep],
                             [sa.rows[i].gen_nll for i in keep],
                             [sa.nll_matrix[i] for i in keep])


# ---------------------------------------------------------------------------
# training-set-size sweep
# ---------------------------------------------------------------------------


def planar_valid(g: LabeledGraph) -> bool:
    return g.n > 0 and len(connected_components(g)) == 1 and is_planar(g)


def molecule_valid(g: LabeledGraph) -> bool:
    return g.n > 0 and len(connected_components(g)) == 1 and bool(_mol_stable(g))


VALIDITY = {"planar": planar_valid, "molecule": molecule_valid, "any": lambda g: g.n > 0}


def _generate_graph(i: int):
    ctx = context()
    gen = generate(ctx["scorer"], ctx["max_len"], ctx["temperature"], (ctx["seed"], STREAM_GENERATE, i))
    try:
        return decode(gen.sequence, ctx["scorer"].vocab), gen
    except GrammarError:
        return None, gen


def generate_graphs(scorer, n_gen: int, seed: int = 0, max_len: int = 512,
                    temperature: float = 1.0, workers: int = 1) -> list:
    ctx = {"scorer": scorer, "seed": seed, "max_len": max_len, "temperature": temperature}
    return parallel_map(_generate_graph, range(n_gen), workers, ctx)


@dataclass
class SweepRow:
    n_train: int
    strategy: str
    validity: float
    uniqueness: float
    novelty: float
    vun: float
    diversity: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def training_size_sweep(pool: Sequence[LabeledGraph], sizes: Sequence[int], vocab: TokenVocab,
                        strategies: Sequence[Strategy] = ALL_STRATEGIES, seed: int = 0,
                        n_gen: int = 64, epochs: int = DEFAULT_EPOCHS,
                        order: int = DEFAULT_ORDER, smoothing: float = DEFAULT_SMOOTHING,
                        validity: str = "planar", max_len: int = 512, temperature: float = 1.0,
                        workers: int = 1, progress: Callable[[str], None] | None = None) -> list[SweepRow]:
    """VUN of generations and training-sequence diversity for each training-set size.

    The first ``n`` graphs of ``pool`` form the size-``n`` training set.
    """
    valid = VALIDITY[validity]
    rows = []
    for n in sizes:
        if n < 1 or n > len(pool):
            raise ValueError(f"training size {n} outside 1..{len(pool)}")
        train = list(pool[:n])
        certs = {canonical_certificate(g) for g in train}
        for st in strategies:
            if progress:
                progress(f"sweep n={n} strategy={st.value}")
            corpus = training_corpus(train, st, seed, epochs, vocab.max_nodes)
            model = train_ngram(corpus, vocab, order=order, smoothing=smoothing, strategy=st.value)
            outs = generate_graphs(model, n_gen, seed, max_len, temperature, workers)
            graphs = [g for g, _ in outs if g is not None]
            res = vun(graphs, certs, valid)
            validity_all = len([g for g in graphs if valid(g)]) / n_gen
            rows.append(SweepRow(n, st.value, validity_all, res.uniqueness, res.novelty,
                                 validity_all * res.uniqueness * res.novelty,
                                 sequence_diversity(corpus)))
    return rows


def k_sweep_from_matrix(nll_matrix: Sequence[Sequence[float]], labels: Sequence[bool],
                        ks: Iterable[int] = K_SWEEP) -> dict[int, float]:
    return k_sweep(nll_matrix, labels, tuple(ks))


@dataclass
class StabilityPool:
    graphs: list[LabeledGraph]
    labels: list[bool]
    names: list[str]


def stability_pool(seed: int = 0, n_pairs: int = 300, strip: int = 2,
                   include_toys: bool = True) -> StabilityPool:
    """Held-out stable molecules paired with hydrogen-stripped (under-valent) copies,
    plus the tagged toy suite."""
    base = generate_dataset(DatasetSpec("toy-molecules", 2 * n_pairs, seed=seed + 1000))
    graphs, labels, names = [], [], []
    for i, g in enumerate(base):
        if len(graphs) >= 2 * n_pairs:
            break
        if sum(g.node_label(v) == "H" for v in range(g.n)) < strip:
            continue
        graphs += [g, strip_hydrogens(g, make_rng(seed, STREAM_PERTURB, i), strip)]
        labels += [True, False]
        names += [f"mol-{i}", f"mol-{i}-minus-{strip}H"]
    if include_toys:
        for t in toy_molecules():
            graphs.append(t.graph)
            labels.append(t.stable)
            names.append(t.name)
    return StabilityPool(graphs, labels, names)


def molecule_training_set(seed: int = 0, n: int = 500) -> list[LabeledGraph]:
    """Random valence-satisfying molecules plus the stable toy molecules."""
    return generate_dataset(DatasetSpec("toy-molecules", n, seed=seed)) + [
        t.graph for t in toy_molecules() if t.stable]


def _trajectory_nll(item: tuple) -> float:
    gi, g = item
    ctx = context()
    s = encode(g, ctx["strategy"], (ctx["seed"], STREAM_GENERATE, gi), max_nodes=ctx["scorer"].vocab.max_nodes)
    return ctx["scorer"].sequence_nll(s)


def pool_stability(scorer, pool: StabilityPool, strategy: Strategy | str, k: int = 32,
                   seed: int = 0, eval_strategy: Strategy | str = Strategy.RANDOM,
                   workers: int = 1) -> StabilityPrediction:
    """Stability predictors on a fixed pool.

    The generation-NLL stand-in is the NLL of one native-strategy trajectory per
    molecule; LU and mean NLL come from K ``eval_strategy`` re-linearizations.
    """
    items = list(enumerate(pool.graphs))
    ctx = {"scorer": scorer, "strategy": Strategy.parse(strategy).value, "seed": seed}
    gen = parallel_map(_trajectory_nll, items, workers, ctx)
    res = score_graphs(scorer, pool.graphs, eval_strategy, k, seed, workers, STREAM_RESAMPLE)
    eces = [_per_graph_ece(r.scored) for r in res] if res and res[0].scored else None
    return predict_stability(pool.labels, gen, [r.nlls for r in res], eces)


@dataclass
class PlanarCrossConfig:
    """Small cross-evaluation setting: Delaunay graphs, one n-gram per strategy."""

    n_train: int = 1000
    n_test: int = 80
    min_nodes: int = 12
    max_nodes: int = 16
    k: int = 16
    order: int = 5
    smoothing: float = DEFAULT_SMOOTHING
    backoff: float = DEFAULT_BACKOFF
    epochs: int = DEFAULT_EPOCHS


def planar_cross_experiment(seed: int, cfg: PlanarCrossConfig = PlanarCrossConfig(),
                            workers: int = 1,
                            progress: Callable[[str], None] | None = None
                            ) -> dict[tuple[Strategy, Strategy], CellResult]:
    graphs = generate_dataset(DatasetSpec("delaunay-planar", cfg.n_train + cfg.n_test, seed=seed,
                                          min_nodes=cfg.min_nodes, max_nodes=cfg.max_nodes))
    train, test = graphs[:cfg.n_train], graphs[cfg.n_train:]
    vocab = TokenVocab.from_graphs(graphs)
    models = {st: train_strategy_model(train, st, vocab, seed, cfg.epochs, cfg.order, cfg.smoothing,
                                       cfg.backoff)
              for st in ALL_STRATEGIES}
    return cross_eval(models, test, cfg.k, seed, workers, progress=progress)


def molecule_stability_experiment(seed: int, order: int = 5, n_train: int = 500, n_pairs: int = 300,
                                  k: int = 32, epochs: int = DEFAULT_EPOCHS,
                                  workers: int = 1) -> dict[Strategy, StabilityPrediction]:
    """Per-strategy stability predictors of n-grams trained on stable molecules only."""
    train = molecule_training_set(seed, n_train)
    pool = stability_pool(seed, n_pairs)
    vocab = TokenVocab.from_graphs(train + pool.graphs)
    out = {}
    for st in ALL_STRATEGIES:
        model = train_strategy_model(train, st, vocab, seed, epochs, order)
        out[st] = pool_stability(model, pool, st, k, seed, Strategy.RANDOM, workers)
    return out
