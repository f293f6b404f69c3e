"""Markov equivalence of MAGs via adjacencies and colliders with order.

Two MAGs entail the same separation model exactly when they share their
adjacencies and their colliders with order. Orders are assigned
recursively: unshielded triples get order 0, and a shielded triple gets
order i when some discriminating path witnesses it whose interior collider
triples already carry orders below i, at least one equal to i - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graphs import Mag, MixedGraph, Smcm, _bit


@dataclass(frozen=True)
class Triple:
    """An ordered vertex triple with both outer vertices adjacent to the
    middle one in the host graph."""

    x: int
    z: int
    y: int

    def __post_init__(self):
        if len({self.x, self.z, self.y}) != 3:
            raise ValueError("triple vertices must be distinct")

    def canonical(self) -> "Triple":
        if self.x <= self.y:
            return self
        return Triple(self.y, self.z, self.x)


class TripleOrderMap:
    """Orders and collider status for the triples of one MAG."""

    def __init__(self, orders: dict[Triple, int], colliders: frozenset[Triple]):
        self._orders = {t.canonical(): o for t, o in orders.items()}
        self._colliders = frozenset(t.canonical() for t in colliders)

    def order_of(self, t: Triple) -> int | None:
        return self._orders.get(t.canonical())

    def is_collider(self, t: Triple) -> bool:
        return t.canonical() in self._colliders

    def ordered_triples(self) -> frozenset[Triple]:
        return frozenset(self._orders)

    def ordered_colliders(self) -> frozenset[Triple]:
        """Triples that are colliders and carry an order: the equivalence
        fingerprint alongside the adjacency set."""
        return frozenset(t for t in self._orders if t in self._colliders)

    def __len__(self) -> int:
        return len(self._orders)


def _arrowhead_at(g: MixedGraph, a: int, b: int) -> bool:
    """Whether the (unique, simple-graph) edge between a and b points into b."""
    return g.has_directed(a, b) or g.has_bidirected(a, b)


def _is_collider(g: MixedGraph, t: Triple) -> bool:
    return _arrowhead_at(g, t.x, t.z) and _arrowhead_at(g, t.y, t.z)


def _check_triple(g: MixedGraph, t: Triple) -> None:
    for v in (t.x, t.z, t.y):
        g.check_vertex(v)
    if not (g.adjacent(t.x, t.z) and g.adjacent(t.z, t.y)):
        raise ValueError(f"{t} is not a triple of the graph")


def find_discriminating_paths(m: Mag, t: Triple) -> list[tuple[int, ...]]:
    """All discriminating paths (V0, ..., Vm = t.x, t.z, t.y) for the triple.

    Interior vertices after V0 are colliders on the path and parents of
    t.y; V0 is not adjacent to t.y. The list is sorted for determinism.
    """
    _check_triple(m, t)
    x, z, y = t.x, t.z, t.y
    paths: list[tuple[int, ...]] = []
    if not _arrowhead_at(m, z, x) or not m.has_directed(x, y):
        return paths
    ybit = _bit(y)

    def extend(chain: list[int], used: int) -> None:
        head = chain[-1]
        for w in range(m.n):
            wbit = _bit(w)
            if used & wbit or w == z or w == y:
                continue
            if not m.adjacent(w, head) or not _arrowhead_at(m, w, head):
                continue
            if not m.adjacency_masks[w] & ybit:
                # w closes the path as V0
                paths.append(tuple(reversed(chain + [w])) + (z, y))
            elif m.has_bidirected(w, head) and m.has_directed(w, y):
                extend(chain + [w], used | wbit)

    extend([x], _bit(x))
    return sorted(paths)


def _all_triples(g: MixedGraph) -> list[Triple]:
    triples = []
    for z in range(g.n):
        nbrs = [v for v in range(g.n) if v != z and g.adjacent(v, z)]
        for a, b in combinations(nbrs, 2):
            triples.append(Triple(a, z, b))
    return triples


def colliders_with_order(m: Mag) -> TripleOrderMap:
    """Assign orders to triples by rounds over discriminating paths.

    Each round finalizes triples whose witnessing path has all interior
    collider triples already ordered below the round index, at least one at
    exactly the previous round; this realizes the minimum over witnessing
    paths.
    """
    triples = _all_triples(m)
    colliders = frozenset(t for t in triples if _is_collider(m, t))
    orders: dict[Triple, int] = {}
    pending: list[Triple] = []
    for t in triples:
        if not m.adjacent(t.x, t.y):
            orders[t] = 0
        else:
            pending.append(t)

    # Discriminating paths do not depend on the round, so enumerate once.
    witnesses: dict[Triple, list[tuple[Triple, ...]]] = {}
    for t in pending:
        interiors: list[tuple[Triple, ...]] = []
        for x_end, y_end in ((t.x, t.y), (t.y, t.x)):
            for path in find_discriminating_paths(m, Triple(x_end, t.z, y_end)):
                verts = path  # (V0, ..., Vm, z, y)
                inner = tuple(
                    Triple(verts[j - 1], verts[j], verts[j + 1]).canonical()
                    for j in range(1, len(verts) - 2)
                )
                interiors.append(inner)
        witnesses[t] = interiors

    round_no = 0
    changed = True
    while changed:
        round_no += 1
        changed = False
        for t in list(pending):
            for inner in witnesses[t]:
                inner_orders = [orders.get(tau) for tau in inner]
                if any(o is None or o >= round_no for o in inner_orders):
                    continue
                if max(inner_orders) == round_no - 1:
                    orders[t] = round_no
                    pending.remove(t)
                    changed = True
                    break
    return TripleOrderMap(orders, colliders)


def markov_equivalent(m1: Mag, m2: Mag) -> bool:
    """Same adjacencies and same colliders with order."""
    if m1.n != m2.n:
        raise ValueError("vertex counts differ")
    if m1.adjacency_pairs() != m2.adjacency_pairs():
        return False
    return (
        colliders_with_order(m1).ordered_colliders()
        == colliders_with_order(m2).ordered_colliders()
    )


def markov_equivalent_smcms(s1: Smcm, s2: Smcm) -> bool:
    """Markov equivalence of SMCMs, decided on their corresponding MAGs."""
    from .projection import smcm_to_mag

    return markov_equivalent(smcm_to_mag(s1), smcm_to_mag(s2))
