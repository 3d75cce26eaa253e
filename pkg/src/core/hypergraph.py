from __future__ import annotations
"""Hypergraphs, independence covers and colorings.

Edges are stored as sorted vertex tuples. Insertion uses symmetric
difference (adding an edge twice removes it), matching CZ_e * CZ_e = I.
A cover is proper when no hyperedge holds two vertices of the same class;
that is what allows every g_i of a class to be read off from X outcomes on
the class and Z outcomes on its complement.
"""
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
import json

import networkx as nx
import numpy as np

from .limits import LIMITS
from .models import CoverError, HypergraphError, HypergraphParseError, SizeLimitError

Edge = Tuple[int, ...]


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise HypergraphError("hypergraph needs at least one vertex")
        seen = set()
        for e in self.edges:
            if len(e) < 2 or len(e) > self.n:
                raise HypergraphError(f"edge {e} has invalid size {len(e)}")
            if len(set(e)) != len(e) or list(e) != sorted(e):
                raise HypergraphError(f"edge {e} must be sorted and repetition-free")
            if e[0] < 0 or e[-1] >= self.n:
                raise HypergraphError(f"edge {e} leaves vertex range 0..{self.n - 1}")
            if e in seen:
                raise HypergraphError(f"duplicate edge {e}")
            seen.add(e)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        """Build with symmetric-difference insertion."""
        present: Dict[Edge, None] = {}
        for raw in edges:
            e = tuple(sorted(int(v) for v in raw))
            if e in present:
                del present[e]
            else:
                present[e] = None
        return cls(n=n, edges=tuple(sorted(present, key=lambda t: (len(t), t))))

    def incident(self, vertex: int) -> List[Edge]:
        return [e for e in self.edges if vertex in e]

    def neighbors(self, vertex: int) -> List[int]:
        out = set()
        for e in self.incident(vertex):
            out.update(e)
        out.discard(vertex)
        return sorted(out)

    def is_two_uniform(self) -> bool:
        return all(len(e) == 2 for e in self.edges)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Hypergraph":
        try:
            return cls.from_edges(int(data["n"]), data.get("edges", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise HypergraphError(f"invalid hypergraph document: {exc}") from exc


@dataclass(frozen=True)
class IndependenceCover:
    classes: Tuple[Tuple[int, ...], ...]
    weights: Optional[Tuple[float, ...]] = None

    @property
    def m(self) -> int:
        return len(self.classes)

    def class_of(self, vertex: int) -> int:
        """First class containing the vertex."""
        for idx, cls_ in enumerate(self.classes):
            if vertex in cls_:
                return idx
        raise CoverError(f"vertex {vertex} is not covered")

    def sizes(self) -> List[int]:
        return [len(c) for c in self.classes]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classes": [list(c) for c in self.classes],
            "weights": list(self.weights) if self.weights is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IndependenceCover":
        try:
            classes = tuple(tuple(sorted(int(v) for v in c)) for c in data["classes"])
            raw_w = data.get("weights")
            weights = tuple(float(w) for w in raw_w) if raw_w is not None else None
        except (KeyError, TypeError, ValueError) as exc:
            raise CoverError(f"invalid cover document: {exc}") from exc
        return cls(classes=classes, weights=weights)


@dataclass(frozen=True)
class ColorStats:
    m: int
    gamma: Optional[int]
    class_sizes: Tuple[int, ...]


@dataclass(frozen=True)
class CoverCheck:
    ok: bool
    reason: str = ""
    edge: Optional[Edge] = None
    class_index: Optional[int] = None


# ---- Text format ---- #

def parse_hypergraph(text: str) -> Hypergraph:
    """Parse the edge-list format: first line n, then one edge per line.

    Blank lines and '#' comments are skipped; line numbers in errors are
    physical (1-based).
    """
    n: Optional[int] = None
    raw_edges: List[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            values = [int(t) for t in tokens]
        except ValueError:
            raise HypergraphParseError(lineno, f"malformed integer in {line!r}")
        if n is None:
            if len(values) != 1 or values[0] < 1:
                raise HypergraphParseError(lineno, "first line must be a positive vertex count")
            n = values[0]
            continue
        if len(values) < 2:
            raise HypergraphParseError(lineno, "edge needs at least 2 vertices")
        if len(set(values)) != len(values):
            raise HypergraphParseError(lineno, "edge repeats a vertex")
        for v in values:
            if v < 0 or v >= n:
                raise HypergraphParseError(lineno, f"vertex {v} out of range 0..{n - 1}")
        raw_edges.append(tuple(sorted(values)))
    if n is None:
        raise HypergraphParseError(1, "missing vertex count")
    return Hypergraph.from_edges(n, raw_edges)


def serialize_hypergraph(h: Hypergraph) -> str:
    lines = [str(h.n)] + [" ".join(str(v) for v in e) for e in h.edges]
    return "\n".join(lines) + "\n"


def dumps_document(h: Hypergraph, cover: Optional[IndependenceCover] = None) -> str:
    doc: Dict[str, Any] = h.to_dict()
    if cover is not None:
        doc.update(cover.to_dict())
    return json.dumps(doc, sort_keys=True)


def loads_document(text: str) -> Tuple[Hypergraph, Optional[IndependenceCover]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HypergraphParseError(exc.lineno, exc.msg) from exc
    if not isinstance(doc, dict):
        raise HypergraphError("hypergraph document must be a JSON object")
    h = Hypergraph.from_dict(doc)
    cover = IndependenceCover.from_dict(doc) if doc.get("classes") is not None else None
    return h, cover


# ---- Coloring ---- #

def primal_graph(h: Hypergraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(h.n))
    for e in h.edges:
        for a_pos, a in enumerate(e):
            for b in e[a_pos + 1:]:
                g.add_edge(a, b)
    return g


def _cover_from_colors(n: int, colors: Dict[int, int]) -> IndependenceCover:
    buckets: Dict[int, List[int]] = {}
    for v in range(n):
        buckets.setdefault(colors[v], []).append(v)
    return IndependenceCover(classes=tuple(tuple(buckets[c]) for c in sorted(buckets)))


def greedy_coloring(h: Hypergraph, order: Optional[Sequence[int]] = None) -> IndependenceCover:
    """Smallest-available-color greedy over the given vertex order."""
    seq = list(order) if order is not None else list(range(h.n))
    if sorted(seq) != list(range(h.n)):
        raise HypergraphError("order must be a permutation of the vertices")
    colors = nx.greedy_color(primal_graph(h), strategy=lambda _g, _c: iter(seq))
    return _cover_from_colors(h.n, colors)


def _k_coloring(adj: List[set], order: List[int], k: int) -> Optional[List[int]]:
    colors = [-1] * len(adj)

    def place(pos: int, highest: int) -> bool:
        if pos == len(order):
            return True
        v = order[pos]
        used = {colors[u] for u in adj[v]}
        # colors above highest+1 are symmetric to highest+1
        for c in range(min(k, highest + 2)):
            if c in used:
                continue
            colors[v] = c
            if place(pos + 1, max(highest, c)):
                return True
            colors[v] = -1
        return False

    return colors if place(0, -1) else None


def exact_coloring(h: Hypergraph, vertex_limit: Optional[int] = None) -> IndependenceCover:
    limit = LIMITS.color_vertex_limit if vertex_limit is None else vertex_limit
    if h.n > limit:
        raise SizeLimitError(f"exact coloring limited to {limit} vertices, got {h.n}")
    g = primal_graph(h)
    upper = greedy_coloring(h)
    if g.number_of_edges() == 0:
        return upper
    adj = [set(g.neighbors(v)) for v in range(h.n)]
    order = sorted(range(h.n), key=lambda v: (-len(adj[v]), v))
    for k in range(2, upper.m):
        colors = _k_coloring(adj, order, k)
        if colors is not None:
            return _cover_from_colors(h.n, dict(enumerate(colors)))
    return upper


def exact_chromatic_number(h: Hypergraph, vertex_limit: Optional[int] = None) -> ColorStats:
    return color_stats(exact_coloring(h, vertex_limit), optimal=True)


def color_stats(cover: IndependenceCover, optimal: bool = False) -> ColorStats:
    """gamma is only reported for a cover known to be optimal."""
    return ColorStats(m=cover.m, gamma=cover.m if optimal else None, class_sizes=tuple(cover.sizes()))


def validate_cover(h: Hypergraph, cover: IndependenceCover) -> CoverCheck:
    covered = set()
    for idx, cls_ in enumerate(cover.classes):
        if not cls_:
            return CoverCheck(False, f"class {idx} is empty", class_index=idx)
        for v in cls_:
            if v < 0 or v >= h.n:
                return CoverCheck(False, f"class {idx} holds unknown vertex {v}", class_index=idx)
        covered.update(cls_)
    if covered != set(range(h.n)):
        missing = sorted(set(range(h.n)) - covered)
        return CoverCheck(False, f"vertices {missing} are not covered")
    for e in h.edges:
        for idx, cls_ in enumerate(cover.classes):
            if len(set(e) & set(cls_)) >= 2:
                return CoverCheck(False, "edge holds two vertices of one class", edge=e, class_index=idx)
    if cover.weights is not None:
        if len(cover.weights) != cover.m:
            return CoverCheck(False, "one weight per class required")
        if any(w < 0 for w in cover.weights):
            return CoverCheck(False, "negative weight")
        if abs(sum(cover.weights) - 1.0) > 1e-12:
            return CoverCheck(False, "weights must sum to 1")
    return CoverCheck(True)


def require_proper_class(h: Hypergraph, vertices: Iterable[int]) -> None:
    members = set(vertices)
    for e in h.edges:
        if len(members.intersection(e)) >= 2:
            raise CoverError(f"class {sorted(members)} is improper: edge {e} holds two of its vertices")


def adjacency_matrix(h: Hypergraph) -> np.ndarray:
    """0/1 adjacency matrix; only defined for 2-uniform hypergraphs."""
    if not h.is_two_uniform():
        raise HypergraphError("adjacency export requires every edge to have size 2")
    mat = np.zeros((h.n, h.n), dtype=np.uint8)
    for a, b in h.edges:
        mat[a, b] = mat[b, a] = 1
    return mat


# ---- Generators ---- #

def union_jack(L: int) -> Tuple[Hypergraph, IndependenceCover]:
    """Union Jack lattice with L x L cells.

    Corner (r, c) -> r*(L+1)+c, center of cell (r, c) -> (L+1)**2 + r*L + c.
    Each cell carries the four triangles (adjacent corner pair + center).
    """
    if L < 1:
        raise HypergraphError("lattice size must be >= 1")
    side = L + 1

    def corner(r: int, c: int) -> int:
        return r * side + c

    edges: List[Edge] = []
    for r in range(L):
        for c in range(L):
            center = side * side + r * L + c
            ring = [corner(r, c), corner(r, c + 1), corner(r + 1, c + 1), corner(r + 1, c)]
            for pos in range(4):
                a, b = ring[pos], ring[(pos + 1) % 4]
                edges.append(tuple(sorted((a, b, center))))
    h = Hypergraph.from_edges(side * side + L * L, edges)
    even = tuple(corner(r, c) for r in range(side) for c in range(side) if (r + c) % 2 == 0)
    odd = tuple(corner(r, c) for r in range(side) for c in range(side) if (r + c) % 2 == 1)
    centers = tuple(range(side * side, side * side + L * L))
    return h, IndependenceCover(classes=(even, odd, centers))


def random_hypergraph(n: int, n_edges: int, max_order: int = 3,
                      rng: Optional[np.random.Generator] = None) -> Hypergraph:
    if n < 2:
        raise HypergraphError("random hypergraph needs at least 2 vertices")
    if n_edges < 0:
        raise HypergraphError("edge count must be >= 0")
    rng = rng if rng is not None else np.random.default_rng(0)
    max_order = max(2, min(max_order, n))
    edges = []
    for _ in range(n_edges):
        size = int(rng.integers(2, max_order + 1))
        edges.append([int(v) for v in rng.choice(n, size=size, replace=False)])
    return Hypergraph.from_edges(n, edges)


def cycle_graph(n: int) -> Hypergraph:
    if n < 3:
        raise HypergraphError("cycle needs at least 3 vertices")
    return Hypergraph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def complete_graph(n: int) -> Hypergraph:
    return Hypergraph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def from_generator(spec: str) -> Tuple[Hypergraph, Optional[IndependenceCover]]:
    """Resolve generator specs like 'union-jack:2', 'cycle:4', 'random:8:6:3:1'."""
    name, _, rest = spec.partition(":")
    args = [a for a in rest.split(":") if a] if rest else []
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise HypergraphError(f"generator arguments must be integers: {spec!r}")
    if name == "union-jack" and len(nums) == 1:
        return union_jack(nums[0])
    if name == "triangle" and not nums:
        return Hypergraph.from_edges(3, [(0, 1, 2)]), None
    if name == "cycle" and len(nums) == 1:
        return cycle_graph(nums[0]), None
    if name == "complete" and len(nums) == 1:
        return complete_graph(nums[0]), None
    if name == "empty" and len(nums) == 1:
        return Hypergraph.from_edges(nums[0], []), None
    if name == "random" and 2 <= len(nums) <= 4:
        order = nums[2] if len(nums) > 2 else 3
        seed = nums[3] if len(nums) > 3 else 0
        return random_hypergraph(nums[0], nums[1], order, np.random.default_rng(seed)), None
    raise HypergraphError(f"unknown generator spec {spec!r}")
