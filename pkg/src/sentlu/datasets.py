"""Desk-scale graph datasets: Erdos-Renyi, Delaunay planar graphs and toy molecules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .graph import DEFAULT_EDGE_LABEL, DEFAULT_NODE_LABEL, LabeledGraph, connected_components
from .strategies import make_rng

BOND_ORDER = {"single": 1, "double": 2, "triple": 3}
MOLECULE_NODE_VOCAB = ("C", "F", "H", "N", "O", "P")
MOLECULE_EDGE_VOCAB = ("double", "single", "triple")

# heavy atoms the random molecule generator draws, with their valence
_HEAVY = {"C": 4, "N": 3, "O": 2, "F": 1}


class DatasetError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n_graphs: int
    min_nodes: int = 12
    max_nodes: int = 24
    edge_prob: float = 0.3
    connected: bool = True
    seed: int = 0
    node_vocab: tuple[str, ...] = (DEFAULT_NODE_LABEL,)
    edge_vocab: tuple[str, ...] = (DEFAULT_EDGE_LABEL,)
    max_tries: int = 10_000
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in GENERATORS:
            raise ValueError(f"unknown dataset kind {self.kind!r}; expected one of {sorted(GENERATORS)}")
        if self.n_graphs < 0:
            raise ValueError("n_graphs must be >= 0")
        if not 1 <= self.min_nodes <= self.max_nodes:
            raise ValueError("need 1 <= min_nodes <= max_nodes")


def _random_labels(rng: np.random.Generator, vocab: Sequence[str], n: int) -> list[str]:
    if len(vocab) == 1:
        return [vocab[0]] * n
    return [vocab[int(i)] for i in rng.integers(len(vocab), size=n)]


def erdos_renyi(n: int, p: float, rng: np.random.Generator, connected: bool = False,
                node_vocab: Sequence[str] = (DEFAULT_NODE_LABEL,),
                edge_vocab: Sequence[str] = (DEFAULT_EDGE_LABEL,),
                max_tries: int = 10_000) -> LabeledGraph:
    for _ in range(max_tries):
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(len(iu)) < p
        pairs = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        labels = _random_labels(rng, node_vocab, n)
        elabs = _random_labels(rng, edge_vocab, len(pairs))
        g = LabeledGraph.build(labels, [(u, v, b) for (u, v), b in zip(pairs, elabs)],
                               node_vocab, edge_vocab)
        if not connected or len(connected_components(g)) == 1:
            return g
    raise DatasetError(f"no connected G({n}, {p}) within {max_tries} draws")


def delaunay_planar(n_points: int, rng: np.random.Generator,
                    node_vocab: Sequence[str] = (DEFAULT_NODE_LABEL,),
                    edge_vocab: Sequence[str] = (DEFAULT_EDGE_LABEL,),
                    max_tries: int = 100) -> LabeledGraph:
    """Delaunay triangulation of uniform points in the unit square."""
    if n_points < 3:
        raise ValueError("Delaunay graphs need at least 3 points")
    for _ in range(max_tries):
        pts = rng.random((n_points, 2))
        try:
            tri = Delaunay(pts)
        except QhullError:
            continue
        if len(tri.coplanar):
            continue
        pairs = set()
        for a, b, c in tri.simplices.tolist():
            for u, v in ((a, b), (b, c), (a, c)):
                pairs.add((min(u, v), max(u, v)))
        pairs = sorted(pairs)
        labels = _random_labels(rng, node_vocab, n_points)
        elabs = _random_labels(rng, edge_vocab, len(pairs))
        return LabeledGraph.build(labels, [(u, v, b) for (u, v), b in zip(pairs, elabs)],
                                  node_vocab, edge_vocab)
    raise DatasetError(f"degenerate point sets in {max_tries} draws")


# ---------------------------------------------------------------------------
# molecules
# ---------------------------------------------------------------------------


class _Mol:
    """Mutable explicit-hydrogen molecule builder."""

    def __init__(self) -> None:
        self.atoms: list[str] = []
        self.bonds: dict[tuple[int, int], str] = {}

    def atom(self, label: str) -> int:
        self.atoms.append(label)
        return len(self.atoms) - 1

    def bond(self, u: int, v: int, kind: str = "single") -> None:
        self.bonds[(min(u, v), max(u, v))] = kind

    def order_sum(self, v: int) -> int:
        return sum(BOND_ORDER[k] for (a, b), k in self.bonds.items() if v in (a, b))

    def saturate(self, valence: dict[str, int] = _HEAVY) -> None:
        for v in range(len(self.atoms)):
            label = self.atoms[v]
            if label == "H":
                continue
            for _ in range(valence[label] - self.order_sum(v)):
                self.bond(v, self.atom("H"))

    def graph(self) -> LabeledGraph:
        return LabeledGraph.build(self.atoms, [(u, v, k) for (u, v), k in self.bonds.items()],
                                  MOLECULE_NODE_VOCAB, MOLECULE_EDGE_VOCAB)


def _chain(*atoms: str, bonds: Sequence[str] | None = None) -> _Mol:
    m = _Mol()
    ids = [m.atom(a) for a in atoms]
    for i in range(len(ids) - 1):
        m.bond(ids[i], ids[i + 1], bonds[i] if bonds else "single")
    return m


@dataclass(frozen=True)
class ToyMolecule:
    name: str
    graph: LabeledGraph
    stable: bool


def toy_molecules() -> list[ToyMolecule]:
    """Hand-built explicit-H molecules, each tagged with its expected stability."""
    out = []

    def add(name: str, m: _Mol, stable: bool, saturate: bool = True) -> None:
        if saturate:
            m.saturate()
        out.append(ToyMolecule(name, m.graph(), stable))

    add("methane", _chain("C"), True)
    add("water", _chain("O"), True)
    add("ammonia", _chain("N"), True)
    add("hydrogen-fluoride", _chain("F"), True)
    add("ethanol", _chain("C", "C", "O"), True)
    add("formaldehyde", _chain("C", "O", bonds=["double"]), True)
    add("ethene", _chain("C", "C", bonds=["double"]), True)
    add("ethyne", _chain("C", "C", bonds=["triple"]), True)
    add("methylamine", _chain("C", "N"), True)
    benzene = _chain(*"CCCCCC", bonds=["double", "single", "double", "single", "double"])
    benzene.bond(0, 5, "single")
    add("benzene-kekule", benzene, True)

    phosphine = _Mol()
    p = phosphine.atom("P")
    for _ in range(3):
        phosphine.bond(p, phosphine.atom("H"))
    add("phosphine", phosphine, True, saturate=False)
    pf5 = _Mol()
    p = pf5.atom("P")
    for _ in range(5):
        pf5.bond(p, pf5.atom("F"))
    add("phosphorus-pentafluoride", pf5, True, saturate=False)

    ch5 = _Mol()
    c = ch5.atom("C")
    for _ in range(5):
        ch5.bond(c, ch5.atom("H"))
    add("pentavalent-carbon", ch5, False, saturate=False)
    h3o = _Mol()
    o = h3o.atom("O")
    for _ in range(3):
        h3o.bond(o, h3o.atom("H"))
    add("trivalent-oxygen", h3o, False, saturate=False)
    ch3 = _Mol()
    c = ch3.atom("C")
    for _ in range(3):
        ch3.bond(c, ch3.atom("H"))
    add("methyl-radical", ch3, False, saturate=False)
    nh4 = _Mol()
    n = nh4.atom("N")
    for _ in range(4):
        nh4.bond(n, nh4.atom("H"))
    add("tetravalent-nitrogen", nh4, False, saturate=False)
    ethane5 = _chain("C", "C")
    ethane5.saturate()
    ethane5.bond(0, ethane5.atom("H"))
    add("ethane-extra-hydrogen", ethane5, False, saturate=False)
    return out


def random_molecule(rng: np.random.Generator, min_heavy: int = 2, max_heavy: int = 6,
                    ring_prob: float = 0.3, multi_bond_prob: float = 0.2) -> LabeledGraph:
    """Random valence-satisfying molecule: heavy-atom tree, optional ring bond, then H."""
    n_heavy = int(rng.integers(min_heavy, max_heavy + 1))
    kinds = list(_HEAVY)
    weights = np.array([0.6, 0.15, 0.2, 0.05])
    m = _Mol()

    def spare(v: int) -> int:
        return _HEAVY[m.atoms[v]] - m.order_sum(v)

    m.atom(kinds[int(rng.choice(4, p=weights))] if n_heavy == 1 else "C")
    for _ in range(n_heavy - 1):
        hosts = [v for v in range(len(m.atoms)) if spare(v) > 0]
        if not hosts:
            break
        host = hosts[int(rng.integers(len(hosts)))]
        label = kinds[int(rng.choice(4, p=weights))]
        if label == "F" and spare(host) == 1 and len(hosts) == 1:
            label = "C"  # keep the skeleton growable
        v = m.atom(label)
        m.bond(host, v)
    heavy = list(range(len(m.atoms)))
    if rng.random() < ring_prob and len(heavy) >= 3:
        pairs = [(u, v) for u in heavy for v in heavy
                 if u < v and (u, v) not in m.bonds and spare(u) > 0 and spare(v) > 0]
        if pairs:
            u, v = pairs[int(rng.integers(len(pairs)))]
            m.bond(u, v)
    for (u, v) in list(m.bonds):
        if rng.random() < multi_bond_prob:
            room = min(spare(u), spare(v))
            if room >= 1:
                m.bond(u, v, "double" if room == 1 or rng.random() < 0.8 else "triple")
    m.saturate()
    return m.graph()


def perturb_molecule(g: LabeledGraph, rng: np.random.Generator) -> LabeledGraph:
    """An unstable variant: drop a hydrogen, add a hydrogen, or raise a bond order."""
    labels = [g.node_label(v) for v in range(g.n)]
    edges = g.labeled_edges()
    heavy = [v for v in range(g.n) if labels[v] != "H"]
    mode = int(rng.integers(3))
    if mode == 0:
        hs = [i for i, (u, v, _) in enumerate(edges) if "H" in (labels[u], labels[v])]
        if hs:
            u, v, _ = edges[hs[int(rng.integers(len(hs)))]]
            gone = u if labels[u] == "H" else v
            keep = [w for w in range(g.n) if w != gone]
            pos = {w: i for i, w in enumerate(keep)}
            return LabeledGraph.build(
                [labels[w] for w in keep],
                [(pos[a], pos[b], k) for a, b, k in edges if gone not in (a, b)],
                g.node_vocab, g.edge_vocab,
            )
    if mode == 1 or len(heavy) < 2:
        v = heavy[int(rng.integers(len(heavy)))]
        return LabeledGraph.build(labels + ["H"], edges + [(v, g.n, "single")],
                                  g.node_vocab, g.edge_vocab)
    bonds = [i for i, (u, v, k) in enumerate(edges)
             if labels[u] != "H" and labels[v] != "H" and k != "triple"]
    if not bonds:
        v = heavy[int(rng.integers(len(heavy)))]
        return LabeledGraph.build(labels + ["H"], edges + [(v, g.n, "single")],
                                  g.node_vocab, g.edge_vocab)
    i = bonds[int(rng.integers(len(bonds)))]
    u, v, k = edges[i]
    edges = list(edges)
    edges[i] = (u, v, "double" if k == "single" else "triple")
    return LabeledGraph.build(labels, edges, g.node_vocab, g.edge_vocab)


# ---------------------------------------------------------------------------
# dataset generation and splits
# ---------------------------------------------------------------------------


def _gen_er(spec: DatasetSpec, i: int) -> LabeledGraph:
    rng = make_rng(spec.seed, i)
    n = int(rng.integers(spec.min_nodes, spec.max_nodes + 1))
    return erdos_renyi(n, spec.edge_prob, rng, spec.connected, spec.node_vocab,
                       spec.edge_vocab, spec.max_tries)


def _gen_delaunay(spec: DatasetSpec, i: int) -> LabeledGraph:
    rng = make_rng(spec.seed, i)
    n = int(rng.integers(max(3, spec.min_nodes), spec.max_nodes + 1))
    return delaunay_planar(n, rng, spec.node_vocab, spec.edge_vocab)


def _gen_molecule(spec: DatasetSpec, i: int) -> LabeledGraph:
    rng = make_rng(spec.seed, i)
    return random_molecule(rng, spec.extra.get("min_heavy", 2), spec.extra.get("max_heavy", 6))


GENERATORS = {
    "erdos-renyi": _gen_er,
    "delaunay-planar": _gen_delaunay,
    "toy-molecules": _gen_molecule,
}


def generate(spec: DatasetSpec) -> list[LabeledGraph]:
    """Graphs for ``spec``; graph ``i`` depends only on ``(spec.seed, i)``."""
    fn = GENERATORS[spec.kind]
    return [fn(spec, i) for i in range(spec.n_graphs)]


def split(graphs: Sequence, train_fraction: float, seed: int = 0) -> tuple[list, list]:
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n_train = int(round(train_fraction * len(graphs)))
    if n_train == 0 or n_train == len(graphs):
        raise ValueError(f"split of {len(graphs)} graphs at {train_fraction} leaves a side empty")
    perm = make_rng(seed).permutation(len(graphs))
    train = [graphs[i] for i in sorted(perm[:n_train].tolist())]
    test = [graphs[i] for i in sorted(perm[n_train:].tolist())]
    return train, test


def strip_hydrogens(g: LabeledGraph, rng: np.random.Generator, k: int = 2) -> LabeledGraph:
    """Under-valent variant: remove ``k`` randomly chosen hydrogen atoms."""
    labels = [g.node_label(v) for v in range(g.n)]
    hs = [v for v in range(g.n) if labels[v] == "H"]
    if len(hs) < k:
        raise DatasetError(f"molecule has {len(hs)} hydrogens, cannot strip {k}")
    gone = set(int(v) for v in rng.choice(hs, size=k, replace=False))
    keep = [v for v in range(g.n) if v not in gone]
    pos = {v: i for i, v in enumerate(keep)}
    return LabeledGraph.build(
        [labels[v] for v in keep],
        [(pos[a], pos[b], lab) for a, b, lab in g.labeled_edges() if a not in gone and b not in gone],
        g.node_vocab, g.edge_vocab,
    )
