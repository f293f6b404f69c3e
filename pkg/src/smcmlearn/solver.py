"""Exact search for SMCMs minimizing weighted constraint violations.

The search branches over the six edge states of each vertex pair in
canonical order. Bounds come from two sentinel graphs per node: the
assigned edges alone (the sparsest completion) and the assigned edges plus
every edge on the unassigned pairs (a supergraph of all completions).
m-connection and inducing-path existence are monotone under edge addition,
so a statement violated in the appropriate sentinel is violated in every
completion of the branch; those weights form a sound lower bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product

import numpy as np

from .constraints import ConstraintSet, Verdict
from .graphs import Smcm, _bit, _bits, _mask_of, ancestor_masks
from .separation import _connected_in_augmented, _inducing_reach, virtual_adjacencies

INF = math.inf


class AssumptionMode(str, Enum):
    """Background assumption governing how statements constrain a graph."""

    FAITHFULNESS = "faithfulness"
    VADJ_FAITHFULNESS = "vadjf"
    VADJ_MINIMALITY = "vadjm"
    NOI_MINIMALITY = "noim"


@dataclass
class SolverConfig:
    mode: AssumptionMode
    enumerate_all: bool = True
    max_solutions: int = 100_000
    time_budget: float = 3600.0
    seed: int = 0
    vadjm_lexicographic: bool = False

    def __post_init__(self):
        self.mode = AssumptionMode(self.mode)
        if self.max_solutions < 1:
            raise ValueError("max_solutions must be at least 1")
        if not (self.time_budget > 0):
            raise ValueError("time_budget must be positive")


@dataclass
class SolverStats:
    nodes_explored: int = 0
    bound_prunes: int = 0
    elapsed: float = 0.0
    timed_out: bool = False


@dataclass
class SolverResult:
    """Global optima (up to max_solutions), their shared objective, and
    search statistics. An infinite objective means no graph satisfies the
    hard constraints; the graph list is then empty."""

    graphs: list[Smcm]
    objective: float
    zero_violation: bool
    stats: SolverStats


def _mode_uses_vadj(mode: AssumptionMode) -> bool:
    return mode in (AssumptionMode.VADJ_FAITHFULNESS, AssumptionMode.VADJ_MINIMALITY)


def _effective_weight(weight: float, is_dep: bool, mode: AssumptionMode) -> float:
    # NOI minimality treats every observed dependence as inviolable.
    if is_dep and mode is AssumptionMode.NOI_MINIMALITY:
        return INF
    return weight


def objective(g: Smcm, cs: ConstraintSet, mode: AssumptionMode) -> float:
    """Weighted sum of the statements g violates under the given mode.

    Faithfulness scores a dependent statement when separated and an
    independent one when connected. The virtual-adjacency modes replace the
    independent side: under vadjf an independent statement is violated when
    its pair is virtually adjacent; under vadjm independent statements are
    never violated and each virtual adjacency costs 1 instead.
    """
    viol, vadj_count = _objective_components(g, cs, mode)
    if mode is AssumptionMode.VADJ_MINIMALITY:
        return viol + vadj_count
    return viol


def _objective_components(
    g: Smcm, cs: ConstraintSet, mode: AssumptionMode
) -> tuple[float, int]:
    mode = AssumptionMode(mode)
    if g.n != cs.n:
        raise ValueError(f"graph has {g.n} vertices, constraints expect {cs.n}")
    anc = ancestor_masks(g)
    vadj = (
        virtual_adjacencies(g)
        if mode in (AssumptionMode.VADJ_FAITHFULNESS, AssumptionMode.VADJ_MINIMALITY)
        else frozenset()
    )
    total = 0.0
    for s in cs.statements:
        connected = _connected_in_augmented(
            g.parent_masks, g.child_masks, g.spouse_masks, g.n, anc,
            s.x, s.y, _mask_of(s.cond),
        )
        if s.verdict is Verdict.DEPENDENT:
            violated = not connected
        elif mode in (AssumptionMode.FAITHFULNESS, AssumptionMode.NOI_MINIMALITY):
            violated = connected
        elif mode is AssumptionMode.VADJ_FAITHFULNESS:
            violated = (s.x, s.y) in vadj
        else:  # vadjm: independent statements never violated
            violated = False
        if violated:
            w = _effective_weight(s.weight, s.verdict is Verdict.DEPENDENT, mode)
            total += w
            if total == INF:
                return INF, len(vadj)
    return total, len(vadj)


def _walk_connected(parents, children, spouses, x: int, y: int, zmask: int, dmask: int) -> bool:
    """m-connection via walk reachability on mask arrays.

    dmask holds every vertex with a descendant in the conditioning set.
    Sound on arbitrary mixed graphs (a connecting path in any edge subset
    is a connecting walk here), exact on acyclic ones.
    """
    ybit = _bit(y)
    heads = children[x] | spouses[x]
    tails = parents[x]
    if (heads | tails) & ybit:
        return True
    seen_h = heads
    seen_t = tails
    while heads or tails:
        new_h = 0
        new_t = 0
        for v in _bits(tails):
            if not zmask & _bit(v):
                new_h |= children[v] | spouses[v]
                new_t |= parents[v]
        for v in _bits(heads):
            vbit = _bit(v)
            if not zmask & vbit:
                new_h |= children[v]
            if dmask & vbit:
                new_h |= spouses[v]
                new_t |= parents[v]
        heads = new_h & ~seen_h
        tails = new_t & ~seen_t
        seen_h |= heads
        seen_t |= tails
        if (seen_h | seen_t) & ybit:
            return True
    return False


def _anc_masks_from_parents(parents, n: int) -> list[int]:
    masks = [_bit(v) | parents[v] for v in range(n)]
    changed = True
    while changed:
        changed = False
        for v in range(n):
            acc = masks[v]
            for p in _bits(parents[v]):
                acc |= masks[p]
            if acc != masks[v]:
                masks[v] = acc
                changed = True
    return masks


@dataclass
class _Stmt:
    x: int
    y: int
    zmask: int
    zlist: tuple[int, ...]
    weight: float
    is_dep: bool
    pair_index: int


def _pair_edges(i: int, j: int, code: int):
    directed = ()
    if code in (1, 4):
        directed = ((i, j),)
    elif code in (2, 5):
        directed = ((j, i),)
    bidirected = ((i, j),) if code >= 3 else ()
    return directed, bidirected


def solve(cs: ConstraintSet, config: SolverConfig) -> SolverResult:
    """Find the SMCMs minimizing the weighted violation objective.

    Returns every optimum (up to max_solutions) when enumerate_all is set,
    otherwise a single optimal graph. Respects the time budget; a timed-out
    search returns the incumbents found so far flagged as incomplete.
    """
    if not cs.statements:
        raise ValueError("constraint set is empty")
    mode = AssumptionMode(config.mode)
    n = cs.n
    pairs = list(combinations(range(n), 2))
    pair_index = {p: k for k, p in enumerate(pairs)}
    n_pairs = len(pairs)
    lexicographic = config.vadjm_lexicographic and mode is AssumptionMode.VADJ_MINIMALITY

    stmts: list[_Stmt] = []
    for s in cs.statements:
        is_dep = s.verdict is Verdict.DEPENDENT
        if mode is AssumptionMode.VADJ_MINIMALITY and not is_dep:
            continue  # independents carry no violation under vadj minimality
        stmts.append(
            _Stmt(
                s.x,
                s.y,
                _mask_of(s.cond),
                tuple(sorted(s.cond)),
                _effective_weight(s.weight, is_dep, mode),
                is_dep,
                pair_index[(s.x, s.y)],
            )
        )

    track_pairs = mode is AssumptionMode.VADJ_MINIMALITY

    # Partner masks over the pairs with index >= d, for the full sentinel.
    suffix = [[0] * n for _ in range(n_pairs + 1)]
    for d in range(n_pairs - 1, -1, -1):
        i, j = pairs[d]
        for v in range(n):
            suffix[d][v] = suffix[d + 1][v]
        suffix[d][i] |= _bit(j)
        suffix[d][j] |= _bit(i)

    a_children = [0] * n
    a_parents = [0] * n
    a_spouses = [0] * n

    stats = SolverStats()
    start = time.monotonic()
    deadline = start + config.time_budget

    def seed_candidates() -> list[Smcm]:
        empty = Smcm(n)
        complete_bi = Smcm(n, (), tuple(pairs))
        indep_pairs = {
            (s.x, s.y) for s in cs.statements if s.verdict is Verdict.INDEPENDENT
        }
        skeleton = Smcm(n, (), tuple(p for p in pairs if p not in indep_pairs))
        return [empty, complete_bi, skeleton]

    def score(g: Smcm) -> tuple[float, float]:
        viol, vadj_count = _objective_components(g, cs, mode)
        if mode is not AssumptionMode.VADJ_MINIMALITY:
            return (viol, 0.0)
        if lexicographic:
            return (viol, float(vadj_count))
        return (viol + vadj_count, 0.0)

    best: tuple[float, float] = (INF, INF)
    seed_graph: Smcm | None = None
    for cand in seed_candidates():
        sc = score(cand)
        if sc < best:
            best = sc
            seed_graph = cand

    solutions: list[tuple[int, ...]] = []
    codes: list[int] = [0] * n_pairs
    timed_out = False

    # Running bound components and per-statement liveness.
    settled = [0.0, 0.0]  # violation weight, vadj count

    def evaluate(depth: int, active: list[int], active_pairs: list[int]):
        """Settle statements decided by the two sentinels at this node.

        Returns (new_active, new_active_pairs, violation_delta, vadj_delta,
        infeasible).
        """
        f_children = [a_children[v] | suffix[depth][v] for v in range(n)]
        f_parents = [a_parents[v] | suffix[depth][v] for v in range(n)]
        f_spouses = [a_spouses[v] | suffix[depth][v] for v in range(n)]
        anc_e = _anc_masks_from_parents(a_parents, n)
        anc_f = _anc_masks_from_parents(f_parents, n)
        vadj_cache: dict[tuple[int, int], tuple[bool, bool]] = {}

        def vadj_status(i: int, j: int) -> tuple[bool, bool]:
            got = vadj_cache.get((i, j))
            if got is None:
                in_e = _inducing_reach(a_parents, a_children, a_spouses, anc_e, i, j)
                in_f = True
                if not in_e:
                    in_f = _inducing_reach(f_parents, f_children, f_spouses, anc_f, i, j)
                got = (in_e, in_f)
                vadj_cache[(i, j)] = got
            return got

        viol_delta = 0.0
        vadj_delta = 0.0
        keep: list[int] = []
        for idx in active:
            s = stmts[idx]
            if s.is_dep or mode in (AssumptionMode.FAITHFULNESS, AssumptionMode.NOI_MINIMALITY):
                dmask_e = 0
                dmask_f = 0
                for u in s.zlist:
                    dmask_e |= anc_e[u]
                    dmask_f |= anc_f[u]
                conn_e = _walk_connected(
                    a_parents, a_children, a_spouses, s.x, s.y, s.zmask, dmask_e
                )
                if s.is_dep:
                    if conn_e:
                        continue  # satisfied in every completion
                    conn_f = _walk_connected(
                        f_parents, f_children, f_spouses, s.x, s.y, s.zmask, dmask_f
                    )
                    if not conn_f:
                        viol_delta += s.weight  # separated in every completion
                    else:
                        keep.append(idx)
                else:
                    if conn_e:
                        viol_delta += s.weight  # connected in every completion
                        continue
                    conn_f = _walk_connected(
                        f_parents, f_children, f_spouses, s.x, s.y, s.zmask, dmask_f
                    )
                    if conn_f:
                        keep.append(idx)
                    # else separated everywhere: satisfied
            else:  # vadjf independent statement
                in_e, in_f = vadj_status(s.x, s.y)
                if in_e:
                    viol_delta += s.weight
                elif in_f:
                    keep.append(idx)
        keep_pairs: list[int] = []
        if track_pairs:
            for k in active_pairs:
                i, j = pairs[k]
                in_e, in_f = vadj_status(i, j)
                if in_e:
                    vadj_delta += 1.0
                elif in_f:
                    keep_pairs.append(k)
        return keep, keep_pairs, viol_delta, vadj_delta, viol_delta == INF

    def creates_cycle(tail: int, head: int) -> bool:
        # would tail -> head close a directed cycle among assigned edges?
        seen = _bit(head)
        frontier = seen
        tbit = _bit(tail)
        while frontier:
            grown = 0
            for v in _bits(frontier):
                grown |= a_children[v]
            frontier = grown & ~seen
            seen |= frontier
            if seen & tbit:
                return True
        return False

    max_solutions = config.max_solutions
    enumerate_all = config.enumerate_all
    node_counter = 0

    def descend(depth: int, active: list[int], active_pairs: list[int]) -> None:
        nonlocal best, timed_out, node_counter
        if timed_out:
            return
        node_counter += 1
        if node_counter % 512 == 0 and time.monotonic() > deadline:
            timed_out = True
            return
        stats.nodes_explored += 1
        active, active_pairs, viol_d, vadj_d, infeasible = evaluate(
            depth, active, active_pairs
        )
        if infeasible:
            stats.bound_prunes += 1
            return
        settled[0] += viol_d
        settled[1] += vadj_d
        try:
            if lexicographic:
                bound = (settled[0], settled[1])
            elif mode is AssumptionMode.VADJ_MINIMALITY:
                bound = (settled[0] + settled[1], 0.0)
            else:
                bound = (settled[0], 0.0)
            if enumerate_all:
                if bound > best:
                    stats.bound_prunes += 1
                    return
            else:
                if solutions and bound >= best:
                    stats.bound_prunes += 1
                    return
                if not solutions and bound > best:
                    stats.bound_prunes += 1
                    return
            if depth == n_pairs:
                # sentinels coincide with the assignment: bound is exact
                if bound < best:
                    best = bound
                    solutions.clear()
                    solutions.append(tuple(codes))
                elif bound == best and (enumerate_all or not solutions):
                    if len(solutions) < max_solutions:
                        solutions.append(tuple(codes))
                return
            i, j = pairs[depth]
            ibit, jbit = _bit(i), _bit(j)
            for code in range(6):
                if code in (1, 4) and creates_cycle(i, j):
                    continue
                if code in (2, 5) and creates_cycle(j, i):
                    continue
                codes[depth] = code
                if code in (1, 4):
                    a_children[i] |= jbit
                    a_parents[j] |= ibit
                elif code in (2, 5):
                    a_children[j] |= ibit
                    a_parents[i] |= jbit
                if code >= 3:
                    a_spouses[i] |= jbit
                    a_spouses[j] |= ibit
                descend(depth + 1, active, active_pairs)
                if code in (1, 4):
                    a_children[i] &= ~jbit
                    a_parents[j] &= ~ibit
                elif code in (2, 5):
                    a_children[j] &= ~ibit
                    a_parents[i] &= ~jbit
                if code >= 3:
                    a_spouses[i] &= ~jbit
                    a_spouses[j] &= ~ibit
                codes[depth] = 0
                if timed_out:
                    return
                if not enumerate_all and solutions and best == (0.0, 0.0):
                    return  # nothing can improve on a perfect fit
        finally:
            settled[0] -= viol_d
            settled[1] -= vadj_d

    descend(0, list(range(len(stmts))), list(range(n_pairs)) if track_pairs else [])

    stats.elapsed = time.monotonic() - start
    stats.timed_out = timed_out

    graphs = [Smcm.from_pair_states(n, c) for c in solutions]
    if not graphs and seed_graph is not None and best == score(seed_graph):
        if best[0] + best[1] < INF:
            graphs = [seed_graph]
    if lexicographic:
        obj = best[0] + best[1] if best[0] < INF else INF
    else:
        obj = best[0]
    if graphs:
        check = objective(graphs[0], cs, mode)
        if not math.isclose(check, obj, rel_tol=1e-9, abs_tol=1e-9):
            raise RuntimeError(
                f"internal bound error: reported {obj}, recomputed {check}"
            )
    elif obj < INF and not timed_out:
        raise RuntimeError("search ended with a finite objective but no graph")
    if obj == INF:
        graphs = []
    return SolverResult(
        graphs=graphs,
        objective=obj,
        zero_violation=(obj == 0),
        stats=stats,
    )


# --- exhaustive reference solver ------------------------------------------

_BRUTE_FORCE_LIMIT = 4
_enum_cache: dict[int, dict] = {}


def _enumeration_tables(n: int) -> dict:
    """Precompute separation and virtual-adjacency tables over every SMCM.

    Rows enumerate all acyclic six-state pair assignments in canonical
    order; columns enumerate statement slots (x, y, zmask) and pairs.
    """
    cached = _enum_cache.get(n)
    if cached is not None:
        return cached
    pairs = list(combinations(range(n), 2))
    n_pairs = len(pairs)
    slots: list[tuple[int, int, int, tuple[int, ...]]] = []
    slot_index: dict[tuple[int, int, int], int] = {}
    for x, y in pairs:
        rest = [v for v in range(n) if v != x and v != y]
        for k in range(len(rest) + 1):
            for cond in combinations(rest, k):
                slot_index[(x, y, _mask_of(cond))] = len(slots)
                slots.append((x, y, _mask_of(cond), cond))

    all_codes = []
    sep_rows = []
    vadj_rows = []
    for assignment in product(range(6), repeat=n_pairs):
        children = [0] * n
        parents = [0] * n
        spouses = [0] * n
        for (i, j), code in zip(pairs, assignment):
            if code in (1, 4):
                children[i] |= _bit(j)
                parents[j] |= _bit(i)
            elif code in (2, 5):
                children[j] |= _bit(i)
                parents[i] |= _bit(j)
            if code >= 3:
                spouses[i] |= _bit(j)
                spouses[j] |= _bit(i)
        anc = _anc_masks_from_parents(parents, n)
        cyclic = any(
            anc[w] & _bit(v)
            for v in range(n)
            for w in _bits(anc[v] & ~_bit(v))
        )
        if cyclic:
            continue
        sep_row = np.empty(len(slots), dtype=bool)
        for col, (x, y, zmask, zlist) in enumerate(slots):
            dmask = 0
            for u in zlist:
                dmask |= anc[u]
            sep_row[col] = not _walk_connected(parents, children, spouses, x, y, zmask, dmask)
        vadj_row = np.empty(n_pairs, dtype=bool)
        for k, (i, j) in enumerate(pairs):
            vadj_row[k] = _inducing_reach(parents, children, spouses, anc, i, j)
        all_codes.append(assignment)
        sep_rows.append(sep_row)
        vadj_rows.append(vadj_row)

    tables = {
        "pairs": pairs,
        "slots": slots,
        "slot_index": slot_index,
        "codes": all_codes,
        "sep": np.array(sep_rows, dtype=bool),
        "vadj": np.array(vadj_rows, dtype=bool),
    }
    _enum_cache[n] = tables
    return tables


def brute_force_solve(
    cs: ConstraintSet, mode: AssumptionMode, lexicographic: bool = False
) -> SolverResult:
    """Score every SMCM on n vertices and return all global optima.

    Guarded to n <= 4; intended as the reference optimum for solver tests.
    """
    mode = AssumptionMode(mode)
    if cs.n > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to n <= {_BRUTE_FORCE_LIMIT}")
    start = time.monotonic()
    tables = _enumeration_tables(cs.n)
    sep = tables["sep"]
    vadj = tables["vadj"]
    n_graphs, n_slots = sep.shape
    pair_pos = {p: k for k, p in enumerate(tables["pairs"])}

    w_dep = np.zeros(n_slots)
    w_indep = np.zeros(n_slots)
    hard_dep = np.zeros(n_slots, dtype=bool)
    hard_indep = np.zeros(n_slots, dtype=bool)
    pair_indep_w = np.zeros(len(tables["pairs"]))
    pair_indep_hard = np.zeros(len(tables["pairs"]), dtype=bool)
    for s in cs.statements:
        col = tables["slot_index"][(s.x, s.y, _mask_of(s.cond))]
        is_dep = s.verdict is Verdict.DEPENDENT
        w = _effective_weight(s.weight, is_dep, mode)
        if is_dep:
            if w == INF:
                hard_dep[col] = True
            else:
                w_dep[col] = w
        else:
            if w == INF:
                hard_indep[col] = True
                pair_indep_hard[pair_pos[(s.x, s.y)]] = True
            else:
                w_indep[col] = w
                pair_indep_w[pair_pos[(s.x, s.y)]] += w

    sep_f = sep.astype(float)
    conn_f = 1.0 - sep_f
    primary = sep_f @ w_dep
    infeasible = (sep & hard_dep).any(axis=1)
    secondary = np.zeros(n_graphs)
    if mode in (AssumptionMode.FAITHFULNESS, AssumptionMode.NOI_MINIMALITY):
        primary += conn_f @ w_indep
        infeasible |= (~sep & hard_indep).any(axis=1)
    elif mode is AssumptionMode.VADJ_FAITHFULNESS:
        primary += vadj.astype(float) @ pair_indep_w
        infeasible |= (vadj & pair_indep_hard).any(axis=1)
    else:  # vadj minimality
        counts = vadj.sum(axis=1).astype(float)
        if lexicographic:
            secondary = counts
        else:
            primary += counts

    primary = np.where(infeasible, INF, primary)
    order = np.lexsort((secondary, primary))
    best_primary = primary[order[0]]
    best_secondary = secondary[order[0]]
    stats = SolverStats(nodes_explored=n_graphs, bound_prunes=0,
                        elapsed=time.monotonic() - start, timed_out=False)
    if best_primary == INF:
        return SolverResult([], INF, False, stats)
    tol = 1e-9
    mask = (np.abs(primary - best_primary) <= tol) & (
        np.abs(secondary - best_secondary) <= tol
    )
    graphs = [
        Smcm.from_pair_states(cs.n, tables["codes"][idx])
        for idx in np.flatnonzero(mask)
    ]
    obj = float(best_primary + best_secondary)
    return SolverResult(graphs, obj, obj == 0, stats)
