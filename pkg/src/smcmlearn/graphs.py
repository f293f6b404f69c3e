"""Mixed graphs over a dense integer vertex set.

A mixed graph carries directed edges (i -> j) and bidirected edges (i <-> j).
Between one pair of vertices a directed and a bidirected edge may coexist,
so each unordered pair is in one of six states (see ``PAIR_STATES``).
Graphs are immutable after construction; every operation here is a pure
function of its inputs.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

VertexId = int

# Canonical per-pair edge states for a pair (i, j) with i < j.
#   0: no edge      1: i -> j       2: j -> i
#   3: i <-> j      4: i -> j and i <-> j      5: j -> i and i <-> j
PAIR_STATES = (0, 1, 2, 3, 4, 5)


class GraphFormatError(ValueError):
    """Raised when graph text input cannot be parsed."""


def _bit(v: int) -> int:
    return 1 << v


def _bits(mask: int) -> Iterable[int]:
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def _mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class MixedGraph:
    """Immutable mixed graph with directed and bidirected edge sets."""

    __slots__ = (
        "n",
        "directed",
        "bidirected",
        "parent_masks",
        "child_masks",
        "spouse_masks",
        "adjacency_masks",
        "_hash",
    )

    def __init__(
        self,
        n: int,
        directed: Iterable[tuple[int, int]] = (),
        bidirected: Iterable[tuple[int, int]] = (),
    ):
        if n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {n}")
        dir_edges = set()
        for tail, head in directed:
            self._check_vertex_static(n, tail)
            self._check_vertex_static(n, head)
            if tail == head:
                raise ValueError(f"self-loop {tail} -> {head} not allowed")
            if (tail, head) in dir_edges:
                raise ValueError(f"duplicate directed edge {tail} -> {head}")
            dir_edges.add((tail, head))
        bi_edges = set()
        for a, b in bidirected:
            self._check_vertex_static(n, a)
            self._check_vertex_static(n, b)
            if a == b:
                raise ValueError(f"self-loop {a} <-> {b} not allowed")
            pair = (min(a, b), max(a, b))
            if pair in bi_edges:
                raise ValueError(f"duplicate bidirected edge {pair[0]} <-> {pair[1]}")
            bi_edges.add(pair)

        object.__setattr__(self, "n", n)
        object.__setattr__(self, "directed", frozenset(dir_edges))
        object.__setattr__(self, "bidirected", frozenset(bi_edges))

        parents = [0] * n
        children = [0] * n
        spouses = [0] * n
        for tail, head in dir_edges:
            children[tail] |= _bit(head)
            parents[head] |= _bit(tail)
        for a, b in bi_edges:
            spouses[a] |= _bit(b)
            spouses[b] |= _bit(a)
        adjacency = [parents[v] | children[v] | spouses[v] for v in range(n)]
        object.__setattr__(self, "parent_masks", tuple(parents))
        object.__setattr__(self, "child_masks", tuple(children))
        object.__setattr__(self, "spouse_masks", tuple(spouses))
        object.__setattr__(self, "adjacency_masks", tuple(adjacency))
        object.__setattr__(
            self, "_hash", hash((n, self.directed, self.bidirected, type(self).__name__))
        )

    def __setattr__(self, name, value):
        raise AttributeError("MixedGraph instances are immutable")

    @staticmethod
    def _check_vertex_static(n: int, v: int) -> None:
        if not isinstance(v, int) or isinstance(v, bool) or not (0 <= v < n):
            raise ValueError(f"vertex id {v!r} out of range [0, {n})")

    def check_vertex(self, v: int) -> None:
        self._check_vertex_static(self.n, v)

    def has_directed(self, tail: int, head: int) -> bool:
        return (tail, head) in self.directed

    def has_bidirected(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.bidirected

    def adjacent(self, a: int, b: int) -> bool:
        self.check_vertex(a)
        self.check_vertex(b)
        return bool(self.adjacency_masks[a] & _bit(b))

    def adjacency_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (a, b) for a, b in combinations(range(self.n), 2) if self.adjacent(a, b)
        )

    def pair_state(self, i: int, j: int) -> int:
        """Canonical edge state of the unordered pair, with i < j enforced."""
        if i >= j:
            raise ValueError(f"pair must satisfy i < j, got ({i}, {j})")
        self.check_vertex(j)
        bi = self.has_bidirected(i, j)
        if self.has_directed(i, j):
            return 4 if bi else 1
        if self.has_directed(j, i):
            return 5 if bi else 2
        return 3 if bi else 0

    @classmethod
    def from_pair_states(cls, n: int, states: Sequence[int]) -> "MixedGraph":
        """Build a graph from per-pair state codes in canonical pair order.

        Canonical order enumerates pairs (0,1), (0,2), ..., (0,n-1), (1,2), ...
        """
        pairs = list(combinations(range(n), 2))
        if len(states) != len(pairs):
            raise ValueError(f"expected {len(pairs)} states, got {len(states)}")
        directed = []
        bidirected = []
        for (i, j), s in zip(pairs, states):
            if s not in PAIR_STATES:
                raise ValueError(f"invalid pair state {s}")
            if s in (1, 4):
                directed.append((i, j))
            elif s in (2, 5):
                directed.append((j, i))
            if s >= 3:
                bidirected.append((i, j))
        return cls(n, directed, bidirected)

    def pair_states(self) -> tuple[int, ...]:
        return tuple(
            self.pair_state(i, j) for i, j in combinations(range(self.n), 2)
        )

    def is_simple(self) -> bool:
        """True when no pair carries both a directed and a bidirected edge."""
        return not any(
            self.has_directed(a, b) or self.has_directed(b, a)
            for a, b in self.bidirected
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.n == other.n
            and self.directed == other.directed
            and self.bidirected == other.bidirected
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        d = sorted(self.directed)
        b = sorted(self.bidirected)
        return f"{type(self).__name__}(n={self.n}, directed={d}, bidirected={b})"


class Smcm(MixedGraph):
    """Semi-Markovian causal model: a mixed graph with no directed cycle."""

    def __init__(self, n, directed=(), bidirected=()):
        super().__init__(n, directed, bidirected)
        if has_directed_cycle(self):
            raise ValueError("directed cycle not allowed in an SMCM")


class Dag(Smcm):
    """Directed acyclic graph: an SMCM with no bidirected edges."""

    def __init__(self, n, directed=(), bidirected=()):
        super().__init__(n, directed, bidirected)
        if self.bidirected:
            raise ValueError("DAG cannot contain bidirected edges")


class Mag(Smcm):
    """Maximal ancestral graph.

    Simple (one edge per pair), ancestral (no edge into a vertex from one of
    its descendants, in particular no almost directed cycle), and maximal
    (every non-adjacent pair admits an m-separating set).
    """

    def __init__(self, n, directed=(), bidirected=()):
        super().__init__(n, directed, bidirected)
        if not is_ancestral(self):
            raise ValueError("graph is not ancestral")
        from .separation import is_maximal  # deferred to avoid import cycle

        if not is_maximal(self):
            raise ValueError("ancestral graph is not maximal")


def ancestor_masks(g: MixedGraph) -> tuple[int, ...]:
    """Per-vertex reflexive ancestor sets as bitmasks.

    ``masks[v]`` holds v plus every vertex with a directed path into v.
    Works on cyclic inputs too (plain reachability closure).
    """
    masks = [_bit(v) | g.parent_masks[v] for v in range(g.n)]
    changed = True
    while changed:
        changed = False
        for v in range(g.n):
            acc = masks[v]
            for p in _bits(g.parent_masks[v]):
                acc |= masks[p]
            if acc != masks[v]:
                masks[v] = acc
                changed = True
    return tuple(masks)


def ancestors(g: MixedGraph, x: VertexId) -> set[VertexId]:
    """Vertices equal to x or with a directed path into x (reflexive)."""
    g.check_vertex(x)
    seen = _bit(x)
    stack = [x]
    while stack:
        v = stack.pop()
        new = g.parent_masks[v] & ~seen
        seen |= new
        stack.extend(_bits(new))
    return set(_bits(seen))


def descendants(g: MixedGraph, x: VertexId) -> set[VertexId]:
    """Vertices equal to x or reachable from x by a directed path."""
    g.check_vertex(x)
    seen = _bit(x)
    stack = [x]
    while stack:
        v = stack.pop()
        new = g.child_masks[v] & ~seen
        seen |= new
        stack.extend(_bits(new))
    return set(_bits(seen))


def has_directed_cycle(g: MixedGraph) -> bool:
    """True when two distinct vertices are ancestors of each other."""
    color = [0] * g.n  # 0 unvisited, 1 on stack, 2 done
    for root in range(g.n):
        if color[root]:
            continue
        stack = [(root, iter(_bits(g.child_masks[root])))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if color[w] == 1:
                    return True
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(_bits(g.child_masks[w]))))
                    advanced = True
                    break
            if not advanced:
                color[v] = 2
                stack.pop()
    return False


def is_ancestral(g: MixedGraph) -> bool:
    """Check the ancestral condition.

    The graph must be simple, acyclic, and must not contain a bidirected
    edge between a vertex and one of its descendants (an almost directed
    cycle).
    """
    if has_directed_cycle(g):
        return False
    for a, b in g.bidirected:
        if g.has_directed(a, b) or g.has_directed(b, a):
            return False  # not simple
    anc = ancestor_masks(g)
    for a, b in g.bidirected:
        if anc[b] & _bit(a) or anc[a] & _bit(b):
            return False
    return True


def graph_to_text(g: MixedGraph, latent: Iterable[int] = ()) -> str:
    """Serialize a graph in the line-based text format.

    Format: a header line ``n <count>``, then ``d <i> <j>`` per directed
    edge i -> j and ``b <i> <j>`` (i < j) per bidirected edge. A ``latent``
    line lists latent vertex ids when present. Lines starting with ``#``
    are comments.
    """
    lines = [f"n {g.n}"]
    latent = sorted(set(latent))
    if latent:
        lines.append("latent " + " ".join(str(v) for v in latent))
    for tail, head in sorted(g.directed):
        lines.append(f"d {tail} {head}")
    for a, b in sorted(g.bidirected):
        lines.append(f"b {a} {b}")
    return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> tuple[int, list, list, list]:
    """Parse graph text into (n, directed, bidirected, latent) components."""
    n = None
    directed: list[tuple[int, int]] = []
    bidirected: list[tuple[int, int]] = []
    latent: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        try:
            if tag == "n":
                if n is not None:
                    raise GraphFormatError(f"line {lineno}: duplicate header")
                n = int(fields[1])
            elif tag == "latent":
                latent.extend(int(f) for f in fields[1:])
            elif tag == "d":
                directed.append((int(fields[1]), int(fields[2])))
            elif tag == "b":
                a, b = int(fields[1]), int(fields[2])
                if a >= b:
                    raise GraphFormatError(
                        f"line {lineno}: bidirected edge must satisfy i < j"
                    )
                bidirected.append((a, b))
            else:
                raise GraphFormatError(f"line {lineno}: unknown tag {tag!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"line {lineno}: cannot parse {line!r}") from exc
    if n is None:
        raise GraphFormatError("missing 'n <count>' header line")
    return n, directed, bidirected, latent


def graph_from_text(text: str, cls: type = MixedGraph):
    """Parse the text format into a graph of the requested class."""
    n, directed, bidirected, latent = parse_graph_text(text)
    if latent:
        raise GraphFormatError(
            "unexpected 'latent' line; use projection.latent_dag_from_text"
        )
    return cls(n, directed, bidirected)
