"""m-separation, inducing paths, and independence models of mixed graphs.

A path m-connects given Z when every non-collider on it avoids Z and every
collider on it has a descendant in Z. The production test here avoids path
enumeration: it restricts the graph to the ancestral closure of the query
vertices, links every collider-connected pair in that subgraph (the mixed
graph generalization of moralization), and then tests undirected
reachability avoiding Z.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .graphs import MixedGraph, VertexId, _bit, _bits, _mask_of, ancestor_masks


@dataclass(frozen=True)
class SeparationStatement:
    """A single m-separation verdict for a pair given a conditioning set."""

    x: VertexId
    y: VertexId
    cond: frozenset[VertexId]
    separated: bool

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("statement endpoints must differ")
        if self.x > self.y:
            x, y = self.y, self.x
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)
        object.__setattr__(self, "cond", frozenset(self.cond))
        if self.cond & {self.x, self.y}:
            raise ValueError("conditioning set overlaps the pair")


@dataclass(frozen=True)
class IndependenceModel:
    """All m-separations of a graph up to a conditioning-set size cap."""

    n: int
    max_cond: int
    statements: frozenset[SeparationStatement]

    def __post_init__(self):
        for s in self.statements:
            if not s.separated:
                raise ValueError("independence models hold separated statements only")
            if len(s.cond) > self.max_cond:
                raise ValueError("statement exceeds max_cond")

    def separates(self, x: int, y: int, cond: Iterable[int]) -> bool:
        x, y = min(x, y), max(x, y)
        return SeparationStatement(x, y, frozenset(cond), True) in self.statements

    def as_triples(self) -> frozenset[tuple[int, int, frozenset]]:
        return frozenset((s.x, s.y, s.cond) for s in self.statements)


def condition_sets(n: int, x: int, y: int, max_cond: int) -> Iterator[tuple[int, ...]]:
    """Enumerate conditioning sets for a pair, by size then lexicographically."""
    rest = [v for v in range(n) if v != x and v != y]
    for k in range(min(max_cond, len(rest)) + 1):
        yield from combinations(rest, k)


def _connected_in_augmented(
    parent_masks, child_masks, spouse_masks, n: int, anc, x: int, y: int, zmask: int
) -> bool:
    """Reachability test in the augmented ancestral subgraph (mask level)."""
    closure = anc[x] | anc[y]
    for v in _bits(zmask):
        closure |= anc[v]
    # arrowhead targets of each vertex inside the closure
    into = [0] * n
    for u in _bits(closure):
        into[u] = (child_masks[u] | spouse_masks[u]) & closure
    aug = [0] * n
    for u in _bits(closure):
        aug[u] = (parent_masks[u] | child_masks[u] | spouse_masks[u]) & closure
    # collider-connected pairs: both point into one bidirected component
    unlabeled = closure
    while unlabeled:
        seed = unlabeled & -unlabeled
        comp = seed
        frontier = seed
        while frontier:
            grown = 0
            for v in _bits(frontier):
                grown |= spouse_masks[v] & closure
            frontier = grown & ~comp
            comp |= frontier
        unlabeled &= ~comp
        reaching = 0
        for u in _bits(closure):
            if into[u] & comp:
                reaching |= _bit(u)
        if reaching and reaching & (reaching - 1):  # at least two members
            for u in _bits(reaching):
                aug[u] |= reaching & ~_bit(u)
    # undirected reachability from x to y avoiding z
    seen = _bit(x)
    frontier = seen
    ybit = _bit(y)
    while frontier:
        grown = 0
        for v in _bits(frontier):
            grown |= aug[v]
        grown &= ~zmask
        frontier = grown & ~seen
        seen |= frontier
        if seen & ybit:
            return True
    return False


def m_separated(g: MixedGraph, x: VertexId, y: VertexId, z: Iterable[VertexId]) -> bool:
    """True when no m-connecting path given z joins x and y in g."""
    g.check_vertex(x)
    g.check_vertex(y)
    zset = set(z)
    for v in zset:
        g.check_vertex(v)
    if x == y or x in zset or y in zset:
        raise ValueError("x, y, and z must be disjoint")
    anc = ancestor_masks(g)
    return not _connected_in_augmented(
        g.parent_masks, g.child_masks, g.spouse_masks, g.n, anc, x, y, _mask_of(zset)
    )


def _inducing_reach(
    parent_masks, child_masks, spouse_masks, anc, x: int, y: int
) -> bool:
    """Inducing-path existence via arrowhead/tail reachability from x.

    Grow the set of vertices reachable from x along a prefix whose interior
    vertices are all colliders and ancestors of x or y, arriving with an
    arrowhead; a final hop against a directed edge out of y, or reaching y
    directly, completes a path.
    """
    allowed = anc[x] | anc[y]
    ybit = _bit(y)
    if child_masks[y] & _bit(x):  # single edge y -> x
        return True
    head = (child_masks[x] | spouse_masks[x]) & allowed
    frontier = head
    while frontier:
        grown = 0
        for v in _bits(frontier):
            grown |= spouse_masks[v] & allowed
        frontier = grown & ~head
        head |= frontier
    if head & ybit:
        return True
    return bool(child_masks[y] & head)


def inducing_path_exists(g: MixedGraph, x: VertexId, y: VertexId) -> bool:
    """True when some path between x and y has only colliders as interior
    vertices, each an ancestor of x or y. Any single edge qualifies."""
    g.check_vertex(x)
    g.check_vertex(y)
    if x == y:
        raise ValueError("endpoints must differ")
    anc = ancestor_masks(g)
    return _inducing_reach(g.parent_masks, g.child_masks, g.spouse_masks, anc, x, y)


def virtual_adjacencies(g: MixedGraph) -> frozenset[tuple[int, int]]:
    """All pairs joined by an inducing path; a superset of the adjacencies."""
    anc = ancestor_masks(g)
    return frozenset(
        (x, y)
        for x, y in combinations(range(g.n), 2)
        if _inducing_reach(g.parent_masks, g.child_masks, g.spouse_masks, anc, x, y)
    )


def independence_model(g: MixedGraph, max_cond: int | None = None) -> IndependenceModel:
    """Collect every entailed m-separation with |cond| <= max_cond.

    max_cond defaults to n - 2, which enumerates all conditioning sets.
    """
    if max_cond is None:
        max_cond = max(g.n - 2, 0)
    if max_cond > max(g.n - 2, 0):
        raise ValueError(f"max_cond {max_cond} exceeds n - 2 = {g.n - 2}")
    anc = ancestor_masks(g)
    found = []
    for x, y in combinations(range(g.n), 2):
        for cond in condition_sets(g.n, x, y, max_cond):
            if not _connected_in_augmented(
                g.parent_masks, g.child_masks, g.spouse_masks, g.n, anc,
                x, y, _mask_of(cond),
            ):
                found.append(SeparationStatement(x, y, frozenset(cond), True))
    return IndependenceModel(g.n, max_cond, frozenset(found))


def is_maximal(g: MixedGraph) -> bool:
    """True when every non-adjacent pair of an ancestral graph is separable.

    A pair with no separating set is exactly a pair joined by an inducing
    path, so maximality reduces to checking non-adjacent pairs for inducing
    paths.
    """
    from .graphs import is_ancestral

    if not is_ancestral(g):
        raise ValueError("maximality is defined for ancestral graphs only")
    anc = ancestor_masks(g)
    for x, y in combinations(range(g.n), 2):
        if g.adjacent(x, y):
            continue
        if _inducing_reach(g.parent_masks, g.child_masks, g.spouse_masks, anc, x, y):
            return False
    return True


def cond_to_field(cond: Iterable[int]) -> str:
    return ";".join(str(v) for v in sorted(cond))


def cond_from_field(field: str) -> frozenset[int]:
    field = field.strip()
    if not field:
        return frozenset()
    return frozenset(int(tok) for tok in field.split(";"))


def write_independence_csv(g: MixedGraph, max_cond: int | None = None) -> str:
    """Render the full separation table as CSV rows x,y,cond,separated."""
    if max_cond is None:
        max_cond = max(g.n - 2, 0)
    model = independence_model(g, max_cond)
    lines = ["x,y,cond,separated"]
    for x, y in combinations(range(g.n), 2):
        for cond in condition_sets(g.n, x, y, max_cond):
            sep = model.separates(x, y, cond)
            lines.append(f"{x},{y},{cond_to_field(cond)},{int(sep)}")
    return "\n".join(lines) + "\n"
