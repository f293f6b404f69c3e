"""Independent reference implementations used only as test oracles.

Everything here follows the definitions literally (explicit path
enumeration, exhaustive subset search) with no shared machinery beyond the
graph containers, so production algorithms are checked against a separate
route.
"""

from __future__ import annotations

from itertools import combinations, product

from smcmlearn.graphs import MixedGraph, Smcm, descendants

# Edges are ("d", tail, head) or ("b", a, b) with a < b.


def edge_list(g: MixedGraph):
    edges = [("d", t, h) for t, h in sorted(g.directed)]
    edges += [("b", a, b) for a, b in sorted(g.bidirected)]
    return edges


def edges_at(g: MixedGraph, v: int):
    out = []
    for e in edge_list(g):
        _, a, b = e
        if a == v or b == v:
            out.append(e)
    return out


def other_end(e, v):
    _, a, b = e
    return b if a == v else a


def has_arrowhead_at(e, v) -> bool:
    kind, a, b = e
    if kind == "b":
        return True
    return v == b  # directed a -> b points into b


def all_paths(g: MixedGraph, x: int, y: int):
    """Yield every simple path from x to y as (vertices, edges) pairs.

    Paths are edge sequences; parallel directed and bidirected edges on the
    same pair count as distinct paths.
    """
    stack = [(x, [x], [])]
    while stack:
        v, verts, eds = stack.pop()
        for e in edges_at(g, v):
            w = other_end(e, v)
            if w in verts:
                continue
            if w == y:
                yield verts + [w], eds + [e]
            else:
                stack.append((w, verts + [w], eds + [e]))


def is_collider_on(edges, verts, i) -> bool:
    """Whether the interior vertex verts[i] is a collider on the path."""
    v = verts[i]
    return has_arrowhead_at(edges[i - 1], v) and has_arrowhead_at(edges[i], v)


def path_m_connecting(g: MixedGraph, verts, edges, z: set) -> bool:
    for i in range(1, len(verts) - 1):
        v = verts[i]
        if is_collider_on(edges, verts, i):
            if not (descendants(g, v) & z):
                return False
        else:
            if v in z:
                return False
    return True


def m_separated_oracle(g: MixedGraph, x: int, y: int, z) -> bool:
    z = set(z)
    for verts, edges in all_paths(g, x, y):
        if path_m_connecting(g, verts, edges, z):
            return False
    return True


def inducing_path_oracle(g: MixedGraph, x: int, y: int) -> bool:
    anc_xy = set()
    from smcmlearn.graphs import ancestors

    anc_xy = ancestors(g, x) | ancestors(g, y)
    for verts, edges in all_paths(g, x, y):
        ok = True
        for i in range(1, len(verts) - 1):
            v = verts[i]
            if not is_collider_on(edges, verts, i) or v not in anc_xy:
                ok = False
                break
        if ok:
            return True
    return False


def separable_by_some_subset(g: MixedGraph, x: int, y: int) -> bool:
    rest = [v for v in range(g.n) if v not in (x, y)]
    for k in range(len(rest) + 1):
        for cond in combinations(rest, k):
            if m_separated_oracle(g, x, y, cond):
                return True
    return False


def d_separated_moral_oracle(g, x: int, y: int, z) -> bool:
    """Classic moralization d-separation for DAGs (no bidirected edges)."""
    assert not g.bidirected
    z = set(z)
    relevant = set()
    stack = [x, y, *z]
    while stack:
        v = stack.pop()
        if v in relevant:
            continue
        relevant.add(v)
        stack.extend(t for t, h in g.directed if h == v)
    undirected = set()
    for t, h in g.directed:
        if t in relevant and h in relevant:
            undirected.add(frozenset((t, h)))
    for h in relevant:
        parents = [t for t, hh in g.directed if hh == h and t in relevant]
        for a, b in combinations(parents, 2):
            undirected.add(frozenset((a, b)))
    seen = {x}
    frontier = [x]
    while frontier:
        v = frontier.pop()
        for e in undirected:
            if v in e:
                (w,) = e - {v}
                if w not in seen and w not in z:
                    seen.add(w)
                    frontier.append(w)
    return y not in seen


def all_mixed_graphs(n: int):
    """Every mixed graph over n vertices in the six-state pair alphabet."""
    pair_count = n * (n - 1) // 2
    for states in product(range(6), repeat=pair_count):
        yield MixedGraph.from_pair_states(n, states)


def all_smcms(n: int):
    from smcmlearn.graphs import has_directed_cycle

    for g in all_mixed_graphs(n):
        if not has_directed_cycle(g):
            yield Smcm(n, g.directed, g.bidirected)


def random_mixed_graph(rng, n: int, p_edge: float = 0.35) -> MixedGraph:
    """Sample pair states; edges appear with roughly p_edge per pair."""
    states = []
    for _ in range(n * (n - 1) // 2):
        if rng.random() < p_edge:
            states.append(int(rng.integers(1, 6)))
        else:
            states.append(0)
    return MixedGraph.from_pair_states(n, states)


def random_smcm(rng, n: int, p_dir: float = 0.25, p_bi: float = 0.25) -> Smcm:
    """Random SMCM: directed part oriented along a random vertex order."""
    order = list(rng.permutation(n))
    position = {v: i for i, v in enumerate(order)}
    directed = []
    bidirected = []
    for a, b in combinations(range(n), 2):
        if rng.random() < p_dir:
            if position[a] < position[b]:
                directed.append((a, b))
            else:
                directed.append((b, a))
        if rng.random() < p_bi:
            bidirected.append((a, b))
    return Smcm(n, directed, bidirected)
