"""Latent projection of DAGs and conversion of SMCMs to their MAGs."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graphs import (
    Dag,
    Mag,
    MixedGraph,
    Smcm,
    _bit,
    _bits,
    ancestor_masks,
    graph_to_text,
    parse_graph_text,
)
from .separation import _inducing_reach


@dataclass(frozen=True)
class LatentDag:
    """A DAG over observed plus latent vertices, with the latents marked."""

    dag: Dag
    latent: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "latent", frozenset(self.latent))
        for v in self.latent:
            self.dag.check_vertex(v)
        if len(self.latent) >= self.dag.n:
            raise ValueError("at least one vertex must be observed")

    @property
    def observed(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.dag.n) if v not in self.latent)


def latent_dag_to_text(g: LatentDag) -> str:
    return graph_to_text(g.dag, latent=g.latent)


def latent_dag_from_text(text: str) -> LatentDag:
    n, directed, bidirected, latent = parse_graph_text(text)
    if bidirected:
        raise ValueError("a latent DAG cannot contain bidirected edges")
    return LatentDag(Dag(n, directed), frozenset(latent))


def _latent_reachable(g: Dag, source: int, latent: frozenset[int]) -> set[int]:
    """Observed vertices reachable from source via latent-only interiors."""
    reached: set[int] = set()
    seen_latent = set()
    stack = list(_bits(g.child_masks[source]))
    while stack:
        v = stack.pop()
        if v in latent:
            if v not in seen_latent:
                seen_latent.add(v)
                stack.extend(_bits(g.child_masks[v]))
        else:
            reached.add(v)
    return reached


def latent_project(g: LatentDag) -> Smcm:
    """Project a DAG with latent vertices onto its unique SMCM.

    Observed vertices keep their relative order and are reindexed densely.
    Directed edges join observed pairs linked by a directed path through
    latent interiors; bidirected edges join observed pairs that share a
    latent ancestor reached through latent-only directed paths.
    """
    observed = g.observed
    index = {v: i for i, v in enumerate(observed)}
    directed = set()
    bidirected = set()
    for v in observed:
        for w in _latent_reachable(g.dag, v, g.latent):
            directed.add((index[v], index[w]))
    for lat in sorted(g.latent):
        confounded = sorted(_latent_reachable(g.dag, lat, g.latent))
        for a, b in combinations(confounded, 2):
            bidirected.add((index[a], index[b]))
    return Smcm(len(observed), directed, bidirected)


def smcm_to_mag(s: Smcm) -> Mag:
    """Convert an SMCM to the unique MAG entailing the same separations.

    Pairs joined by an inducing path become adjacent; each adjacency is
    oriented by ancestry in the input, bidirected when neither endpoint is
    an ancestor of the other.
    """
    anc = ancestor_masks(s)
    directed = []
    bidirected = []
    for x, y in combinations(range(s.n), 2):
        if not _inducing_reach(s.parent_masks, s.child_masks, s.spouse_masks, anc, x, y):
            continue
        if anc[y] & _bit(x):
            directed.append((x, y))
        elif anc[x] & _bit(y):
            directed.append((y, x))
        else:
            bidirected.append((x, y))
    return Mag(s.n, directed, bidirected)
