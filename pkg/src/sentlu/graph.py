"""Labeled undirected simple graphs, canonical certificates and structural checks."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import networkx as nx

DEFAULT_NODE_LABEL = "X"
DEFAULT_EDGE_LABEL = "e"


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph with categorical node and edge labels.

    ``node_labels[v]`` and the third entry of every edge are indices into
    ``node_vocab`` / ``edge_vocab``. Edges are stored sorted with ``u < v``.
    Equality and hashing compare resolved label strings, so two graphs with
    differently ordered vocabularies but the same labeled structure are equal.
    """

    node_labels: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]
    node_vocab: tuple[str, ...] = (DEFAULT_NODE_LABEL,)
    edge_vocab: tuple[str, ...] = (DEFAULT_EDGE_LABEL,)
    _edge_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_labels", tuple(int(a) for a in self.node_labels))
        object.__setattr__(self, "node_vocab", tuple(self.node_vocab))
        object.__setattr__(self, "edge_vocab", tuple(self.edge_vocab))
        n = len(self.node_labels)
        for a in self.node_labels:
            if not 0 <= a < len(self.node_vocab):
                raise GraphError(f"node label id {a} outside vocab of size {len(self.node_vocab)}")
        index: dict[tuple[int, int], int] = {}
        for u, v, b in self.edges:
            u, v, b = int(u), int(v), int(b)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if u > v:
                u, v = v, u
            if not 0 <= u or v >= n:
                raise GraphError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if not 0 <= b < len(self.edge_vocab):
                raise GraphError(f"edge label id {b} outside vocab of size {len(self.edge_vocab)}")
            if (u, v) in index:
                raise GraphError(f"duplicate edge ({u}, {v})")
            index[(u, v)] = b
        object.__setattr__(self, "edges", tuple((u, v, b) for (u, v), b in sorted(index.items())))
        object.__setattr__(self, "_edge_index", index)

    @classmethod
    def build(
        cls,
        node_labels: Sequence[str],
        edges: Iterable[tuple[int, int, str]],
        node_vocab: Sequence[str] | None = None,
        edge_vocab: Sequence[str] | None = None,
    ) -> "LabeledGraph":
        """Build a graph from string labels; vocabularies default to sorted label sets."""
        edges = list(edges)
        nv = tuple(node_vocab) if node_vocab is not None else tuple(sorted(set(node_labels)))
        ev = (
            tuple(edge_vocab)
            if edge_vocab is not None
            else tuple(sorted({e[2] for e in edges})) or (DEFAULT_EDGE_LABEL,)
        )
        nix = {s: i for i, s in enumerate(nv)}
        eix = {s: i for i, s in enumerate(ev)}
        try:
            return cls(
                tuple(nix[a] for a in node_labels),
                tuple((u, v, eix[b]) for u, v, b in edges),
                nv or (DEFAULT_NODE_LABEL,),
                ev,
            )
        except KeyError as exc:
            raise GraphError(f"label {exc.args[0]!r} missing from vocab") from None

    @classmethod
    def unlabeled(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabeledGraph":
        return cls((0,) * n, tuple((u, v, 0) for u, v in edges))

    @property
    def n(self) -> int:
        return len(self.node_labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def node_label(self, v: int) -> str:
        return self.node_vocab[self.node_labels[v]]

    def edge_label(self, u: int, v: int) -> str:
        return self.edge_vocab[self._edge_index[(u, v) if u < v else (v, u)]]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_index

    @cached_property
    def adjacency(self) -> tuple[dict[int, str], ...]:
        """Neighbor -> edge label string, per node."""
        adj: list[dict[int, str]] = [{} for _ in range(self.n)]
        for u, v, b in self.edges:
            adj[u][v] = adj[v][u] = self.edge_vocab[b]
        return tuple(adj)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def labeled_edges(self) -> list[tuple[int, int, str]]:
        return [(u, v, self.edge_vocab[b]) for u, v, b in self.edges]

    def relabel(self, mapping: Sequence[int]) -> "LabeledGraph":
        """Return the graph with node ``v`` renamed to ``mapping[v]``."""
        if sorted(mapping) != list(range(self.n)):
            raise GraphError("relabel mapping is not a permutation of the node ids")
        labels = [0] * self.n
        for v, a in enumerate(self.node_labels):
            labels[mapping[v]] = a
        edges = tuple((mapping[u], mapping[v], b) for u, v, b in self.edges)
        return LabeledGraph(tuple(labels), edges, self.node_vocab, self.edge_vocab)

    def _key(self) -> tuple:
        return (
            tuple(self.node_vocab[a] for a in self.node_labels),
            tuple(sorted(self.labeled_edges())),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def to_networkx(self) -> nx.Graph:
        h = nx.Graph()
        h.add_nodes_from((v, {"label": self.node_label(v)}) for v in range(self.n))
        h.add_edges_from((u, v, {"label": b}) for u, v, b in self.labeled_edges())
        return h

    def to_json(self) -> dict:
        return {
            "node_labels": [self.node_label(v) for v in range(self.n)],
            "edges": [[u, v, b] for u, v, b in self.labeled_edges()],
        }


def degree(g: LabeledGraph, v: int) -> int:
    if not 0 <= v < g.n:
        raise GraphError(f"node id {v} out of range for a graph with {g.n} nodes")
    return g.degrees[v]


def connected_components(g: LabeledGraph) -> list[list[int]]:
    """Components as sorted node lists, ordered by smallest member."""
    seen = [False] * g.n
    parts = []
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        part = []
        while queue:
            u = queue.popleft()
            part.append(u)
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        parts.append(sorted(part))
    return parts


def is_planar(g: LabeledGraph) -> bool:
    if g.n >= 3 and g.m > 3 * g.n - 6:
        return False
    planar, _ = nx.check_planarity(g.to_networkx())
    return bool(planar)


# ---------------------------------------------------------------------------
# canonical labeling
# ---------------------------------------------------------------------------


def _refine(g: LabeledGraph, colors: list[int]) -> list[int]:
    """Colour refinement to the coarsest equitable partition finer than ``colors``.

    Colour ids stay comparable across branches: new colours are ranks of
    (old colour, sorted neighbour signature), which depends only on the
    isomorphism-invariant structure of the coloured graph.
    """
    adj = g.adjacency
    n_colors = len(set(colors))
    while True:
        sigs = [
            (colors[v], tuple(sorted((lab, colors[w]) for w, lab in adj[v].items())))
            for v in range(g.n)
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        colors = [ranks[s] for s in sigs]
        if len(ranks) == n_colors:
            return colors
        n_colors = len(ranks)


def _individualize(colors: list[int], v: int) -> list[int]:
    # v gets a fresh colour placed just before its old cell; order stays canonical
    return [2 * c + (0 if u == v else 1) for u, c in enumerate(colors)]


def _are_twins(g: LabeledGraph, u: int, v: int) -> bool:
    if g.node_labels[u] != g.node_labels[v]:
        return False
    a = {w: lab for w, lab in g.adjacency[u].items() if w != v}
    b = {w: lab for w, lab in g.adjacency[v].items() if w != u}
    return a == b


def _form(g: LabeledGraph, colors: list[int]) -> tuple:
    # discrete partition: colour rank is the canonical position
    order = sorted(range(g.n), key=lambda v: colors[v])
    pos = {v: i for i, v in enumerate(order)}
    labels = tuple(g.node_label(v) for v in order)
    edges = tuple(
        sorted(
            (min(pos[u], pos[v]), max(pos[u], pos[v]), lab) for u, v, lab in g.labeled_edges()
        )
    )
    return labels, edges


def canonical_form(g: LabeledGraph) -> tuple:
    """Smallest relabeled (labels, edges) form over the individualization-refinement tree."""
    init = _refine(g, [sorted(g.node_vocab).index(g.node_label(v)) for v in range(g.n)])
    best: tuple | None = None
    stack = [init]
    while stack:
        colors = stack.pop()
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = min(
            (cell for cell in cells.values() if len(cell) > 1),
            key=lambda cell: (len(cell), colors[cell[0]]),
            default=None,
        )
        if target is None:
            form = _form(g, colors)
            if best is None or form < best:
                best = form
            continue
        explored: list[int] = []
        for v in target:
            if any(_are_twins(g, v, u) for u in explored):
                continue
            explored.append(v)
            stack.append(_refine(g, _individualize(colors, v)))
    if best is None:
        best = ((), ())
    return best


def canonical_certificate(g: LabeledGraph) -> bytes:
    labels, edges = canonical_form(g)
    return json.dumps([list(labels), [list(e) for e in edges]], separators=(",", ":")).encode()


# ---------------------------------------------------------------------------
# JSONL I/O
# ---------------------------------------------------------------------------


def graph_from_record(rec: dict, node_vocab: Sequence[str] | None = None,
                      edge_vocab: Sequence[str] | None = None) -> LabeledGraph:
    labels = rec["node_labels"]
    edges = []
    seen = set()
    for e in rec["edges"]:
        u, v, lab = int(e[0]), int(e[1]), str(e[2]) if len(e) > 2 else DEFAULT_EDGE_LABEL
        if u == v:
            raise GraphError(f"self-loop on node {u}")
        if u > v:
            raise GraphError(f"edge [{u}, {v}] must list the smaller node id first")
        if (u, v) in seen:
            raise GraphError(f"duplicate edge [{u}, {v}]")
        seen.add((u, v))
        edges.append((u, v, lab))
    return LabeledGraph.build(labels, edges, node_vocab, edge_vocab)


def iter_records(path: str | Path) -> Iterator[tuple[str, LabeledGraph, dict]]:
    """(id, graph, extra fields) per non-blank line; id defaults to the 0-based record index."""
    with open(path, encoding="utf-8") as fh:
        index = 0
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                g = graph_from_record(rec)
            except (GraphError, KeyError, TypeError, ValueError, IndexError) as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
            extra = {k: v for k, v in rec.items() if k not in ("node_labels", "edges", "id")}
            yield str(rec.get("id", index)), g, extra
            index += 1


def iter_graphs(path: str | Path) -> Iterator[LabeledGraph]:
    for _, g, _ in iter_records(path):
        yield g


def load_graphs(path: str | Path) -> list[LabeledGraph]:
    return list(iter_graphs(path))


def dump_graphs(graphs: Iterable[LabeledGraph], path: str | Path,
                extras: Iterable[dict] | None = None) -> None:
    """One JSON object per line; ``extras`` adds fields (e.g. ``id``) to each record."""
    extras = iter(extras) if extras is not None else None
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            rec = dict(next(extras)) if extras is not None else {}
            rec.update(g.to_json())
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
