"""Likelihood-consistency, calibration, ranking, chemistry and generative-quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .codec import Kind, TokenSequence, TokenType, sequence_stats
from .graph import LabeledGraph, canonical_certificate

ECE_BINS = 15


# ---------------------------------------------------------------------------
# linearization uncertainty
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LuResult:
    graph_id: str | int | None
    nlls: tuple[float, ...]
    mean: float
    std: float
    lu: float

    @property
    def k(self) -> int:
        return len(self.nlls)


def linearization_uncertainty(nlls: Sequence[float], graph_id=None) -> LuResult:
    """Coefficient of variation of sequence NLLs over K linearizations of one graph.

    Uses the sample (K - 1) standard deviation.
    """
    x = np.asarray(nlls, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError(f"linearization uncertainty needs K >= 2 NLLs, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ValueError("NLLs must be finite and non-negative")
    mu = float(x.mean())
    if mu == 0:
        raise ValueError("mean NLL is zero; linearization uncertainty is undefined")
    sigma = float(x.std(ddof=1))
    if np.all(x == x[0]):
        sigma = 0.0
    return LuResult(graph_id, tuple(float(v) for v in x), mu, sigma, sigma / mu)


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EceResult:
    n_bins: int
    counts: tuple[int, ...]
    mean_confidence: tuple[float, ...]
    accuracy: tuple[float, ...]
    ece: float
    by_type: Mapping[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return sum(self.counts)


def expected_calibration_error(confidence: Sequence[float], correct: Sequence[bool],
                               n_bins: int = ECE_BINS) -> EceResult:
    """Binned |accuracy - confidence| weighted by bin mass.

    Bins are equal-width and right-closed, ``(k/B, (k+1)/B]``; confidence 0
    falls in the first bin. Empty bins contribute nothing.
    """
    conf = np.asarray(confidence, dtype=float)
    hit = np.asarray(correct, dtype=float)
    if conf.size == 0:
        raise ValueError("ECE of an empty record set")
    if conf.shape != hit.shape:
        raise ValueError("confidence and correctness lengths differ")
    if np.any(conf < 0) or np.any(conf > 1):
        raise ValueError("confidences must lie in [0, 1]")
    bins = np.clip(np.ceil(conf * n_bins).astype(int) - 1, 0, n_bins - 1)
    counts = np.bincount(bins, minlength=n_bins)
    conf_sum = np.bincount(bins, weights=conf, minlength=n_bins)
    hit_sum = np.bincount(bins, weights=hit, minlength=n_bins)
    nz = counts > 0
    mean_conf = np.where(nz, conf_sum / np.maximum(counts, 1), 0.0)
    acc = np.where(nz, hit_sum / np.maximum(counts, 1), 0.0)
    ece = float(np.sum(counts[nz] / conf.size * np.abs(acc[nz] - mean_conf[nz])))
    return EceResult(n_bins, tuple(int(c) for c in counts), tuple(mean_conf.tolist()),
                     tuple(acc.tolist()), ece)


# the two node-index sub-types are also reported as one union group
NODE_INDEX = "node_index"
TOKEN_GROUPS = (NODE_INDEX,) + tuple(t.value for t in TokenType)


def ece_by_token_type(scored: Iterable, n_bins: int = ECE_BINS) -> dict[str, float]:
    """ECE per target-token type; types with no tokens are absent from the result.

    ``scored`` holds objects with ``confidence``, ``correct`` and
    ``token_types`` (e.g. :class:`sentlu.model.ScoredSequence`).
    """
    conf: dict[str, list] = {}
    hit: dict[str, list] = {}
    for s in scored:
        types = np.array([t.value for t in s.token_types])
        for t in np.unique(types):
            m = types == t
            conf.setdefault(t, []).append(s.confidence[m])
            hit.setdefault(t, []).append(s.correct[m])
        m = (types == TokenType.NEW_NODE.value) | (types == TokenType.REVISIT.value)
        if m.any():
            conf.setdefault(NODE_INDEX, []).append(s.confidence[m])
            hit.setdefault(NODE_INDEX, []).append(s.correct[m])
    return {
        t: expected_calibration_error(np.concatenate(conf[t]), np.concatenate(hit[t]), n_bins).ece
        for t in TOKEN_GROUPS if t in conf
    }


def ece_of_scored(scored: Sequence, n_bins: int = ECE_BINS) -> EceResult:
    conf = np.concatenate([s.confidence for s in scored])
    hit = np.concatenate([s.correct for s in scored])
    base = expected_calibration_error(conf, hit, n_bins)
    return EceResult(base.n_bins, base.counts, base.mean_confidence, base.accuracy, base.ece,
                     ece_by_token_type(scored, n_bins))


# ---------------------------------------------------------------------------
# rank statistics
# ---------------------------------------------------------------------------


def roc_auc(scores: Sequence[float], labels: Sequence) -> float:
    """Mann-Whitney AUC with mid-ranks: P(score_pos > score_neg) + 0.5 P(tie).

    Pass already-negated metrics when lower values should indicate the
    positive class.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels lengths differ")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative labels")
    ranks = rankdata(s)
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of mid-ranks."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise ValueError("input lengths differ")
    if len(x) < 3:
        raise ValueError("Spearman correlation needs at least 3 points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("Spearman correlation of a constant vector is undefined")
    rx = rankdata(x) - (len(x) + 1) / 2
    ry = rankdata(y) - (len(y) + 1) / 2
    return float(np.clip(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)), -1, 1))


# ---------------------------------------------------------------------------
# valency stability
# ---------------------------------------------------------------------------

VALENCY_TABLE: Mapping[str, frozenset[int]] = {
    "H": frozenset({1}), "C": frozenset({4}), "N": frozenset({3}), "O": frozenset({2}),
    "F": frozenset({1}), "B": frozenset({3}), "Si": frozenset({4}), "P": frozenset({3, 5}),
    "S": frozenset({4}), "Cl": frozenset({1}), "Br": frozenset({1}), "I": frozenset({1}),
}
BOND_ORDERS = {"single": 1, "double": 2, "triple": 3}


@dataclass(frozen=True)
class StabilityResult:
    atom_stable: tuple[bool, ...]
    atom_stable_fraction: float
    mol_stable: bool


def stability(g: LabeledGraph, table: Mapping[str, frozenset[int]] = VALENCY_TABLE) -> StabilityResult:
    totals = [0] * g.n
    for u, v, lab in g.labeled_edges():
        if lab not in BOND_ORDERS:
            raise ValueError(f"bond label {lab!r} has no bond order (aromatic bonds unsupported)")
        totals[u] += BOND_ORDERS[lab]
        totals[v] += BOND_ORDERS[lab]
    flags = []
    for v in range(g.n):
        label = g.node_label(v)
        if label not in table:
            raise ValueError(f"unknown atom label {label!r}")
        flags.append(totals[v] in table[label])
    frac = sum(flags) / g.n if g.n else 1.0
    return StabilityResult(tuple(flags), frac, all(flags))


# ---------------------------------------------------------------------------
# generative quality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VunResult:
    validity: float
    uniqueness: float
    novelty: float
    vun: float
    n_generated: int


def vun(generated: Sequence[LabeledGraph], training_certs: set[bytes],
        is_valid=lambda g: True) -> VunResult:
    """Validity x Uniqueness x Novelty.

    Uniqueness is the distinct fraction of valid outputs (by canonical
    certificate); novelty the fraction of those distinct outputs absent from
    training.
    """
    n = len(generated)
    valid = [g for g in generated if is_valid(g)]
    certs = [canonical_certificate(g) for g in valid]
    distinct = set(certs)
    validity = len(valid) / n if n else 0.0
    uniqueness = len(distinct) / len(valid) if valid else 0.0
    novelty = len(distinct - training_certs) / len(distinct) if distinct else 0.0
    return VunResult(validity, uniqueness, novelty, validity * uniqueness * novelty, n)


def sequence_diversity(sequences: Sequence[TokenSequence]) -> float:
    """Distinct token sequences over total sequences."""
    if not sequences:
        raise ValueError("diversity of an empty sequence set")
    return len({tuple(s.tokens) for s in sequences}) / len(sequences)


# ---------------------------------------------------------------------------
# stability predictors
# ---------------------------------------------------------------------------

K_SWEEP = (2, 4, 8, 16, 32)


def k_sweep(nll_matrix: Sequence[Sequence[float]], labels: Sequence,
            ks: Sequence[int] = K_SWEEP, n_draws: int = 32) -> dict[int, float]:
    """AUC of negated LU computed from the first K of each graph's shared draws."""
    m = np.asarray(nll_matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] != n_draws:
        raise ValueError(f"need exactly {n_draws} NLLs per graph, got shape {m.shape}")
    out = {}
    for k in ks:
        if not 2 <= k <= n_draws:
            raise ValueError(f"K={k} outside 2..{n_draws}")
        lu = [linearization_uncertainty(row[:k]).lu for row in m]
        out[k] = roc_auc(-np.asarray(lu), labels)
    return out


# ---------------------------------------------------------------------------
# sequence-length analysis
# ---------------------------------------------------------------------------


@dataclass
class LengthAnalysis:
    lengths: list[int]
    chords: list[int]
    segments: list[int]
    length_histogram: dict[int, int]
    chord_histogram: dict[int, int]
    trail_profile: list[float | None]
    identity_violations: int

    def summary(self) -> dict:
        return {
            "n_sequences": len(self.lengths),
            "mean_length": float(np.mean(self.lengths)) if self.lengths else None,
            "mean_chords": float(np.mean(self.chords)) if self.chords else None,
            "mean_segments": float(np.mean(self.segments)) if self.segments else None,
            "length_histogram": {str(k): v for k, v in sorted(self.length_histogram.items())},
            "chord_histogram": {str(k): v for k, v in sorted(self.chord_histogram.items())},
            "trail_profile": self.trail_profile,
            "identity_violations": self.identity_violations,
        }


def trail_segments(s: TokenSequence) -> list[tuple[float, int]]:
    """(relative midpoint position, trail node count) of each segment."""
    out = []
    toks = s.tokens
    L = len(toks)
    bounds = [0] + [i for i, t in enumerate(toks) if t.kind is Kind.SEP] + [L - 1]
    lengths = sequence_stats(s).trail_lengths
    for (a, b), n in zip(zip(bounds[:-1], bounds[1:]), lengths):
        mid = (a + 1 + b - 1) / 2
        out.append((mid / L, n))
    return out


def length_analysis(sequences: Sequence[TokenSequence], n_deciles: int = 10) -> LengthAnalysis:
    lengths, chords, segments = [], [], []
    sums = np.zeros(n_deciles)
    counts = np.zeros(n_deciles, dtype=int)
    violations = 0
    for s in sequences:
        st = sequence_stats(s)
        lengths.append(len(s))
        chords.append(st.n_chords)
        segments.append(st.n_segments)
        if st.expected_length != len(s):
            violations += 1
        for rel, n in trail_segments(s):
            d = min(int(rel * n_deciles), n_deciles - 1)
            sums[d] += n
            counts[d] += 1
    profile = [float(sums[i] / counts[i]) if counts[i] else None for i in range(n_deciles)]
    hist = lambda xs: {k: xs.count(k) for k in sorted(set(xs))}  # noqa: E731
    return LengthAnalysis(lengths, chords, segments, hist(lengths), hist(chords), profile,
                          violations)
