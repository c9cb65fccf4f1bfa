"""The boosting engine: oracle-driven phase simulation.

One *phase* walks pass bundles over the current matching: each bundle
extends structures along matched arcs whose labels still allow it
(stage by stage, lowest working-vertex label first), then contracts
odd cycles and augments across structure pairs, then backtracks every
structure that failed to make progress.  Phases are grouped into
geometric scales; each scale bounds structure sizes through the on-hold
limit.

The matching oracle only ever sees small auxiliary graphs: the
structure-pair graph (for augmenting) and one bipartite layer graph per
stage (for extending).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InternalConsistencyError
from .graph import Arc, AltPath, Graph, Matching, augment_all, edge_key
from .oracles import CountedOracle, OracleStats
from .params import Constants, PhaseParams, normalize_epsilon, scale_sequence
from .structures import PhaseState, Structure


class TraceHooks:
    """Callback surface for instrumentation; defaults do nothing."""

    def on_phase_start(self, params: PhaseParams, scale: float, phase: int) -> None: ...

    def on_bundle_start(self, state: PhaseState, tau: int) -> None: ...

    def on_after_simulations(self, state: PhaseState, tau: int) -> None: ...

    def on_bundle_end(self, state: PhaseState, tau: int) -> None: ...

    def on_phase_end(self, state: PhaseState) -> None: ...

    def on_oracle_graph(self, aux: Graph) -> None: ...


# -- auxiliary graph construction ----------------------------------------------


def _outer_member_arcs(state: PhaseState, s: Structure):
    """Arcs (x, y) leaving outer vertices of ``s``, x ascending."""
    view = state.tree(s)
    for x in sorted(s.vertices):
        if not view.is_outer(state.root(x)):
            continue
        for y in state.adj_sorted[x]:
            if not state.g.removed[y] and state.mate[x] != y:
                yield Arc(x, y)


def find_type1_arc(state: PhaseState, s: Structure) -> Arc | None:
    """A same-structure outer-outer arc out of the working vertex, if any."""
    if s.working is None:
        return None
    view = state.tree(s)
    for x in sorted(state.omega.members_of(s.working)):
        for y in state.adj_sorted[x]:
            if state.g.removed[y] or state.mate[x] == y:
                continue
            if state.structure_of.get(y) != s.owner:
                continue
            by = state.root(y)
            if by != s.working and view.is_outer(by):
                return Arc(x, y)
    return None


def build_h_prime(state: PhaseState):
    """Structure-pair graph: one edge per pair joined by an outer-outer arc.

    Returns ``(owners, pairs)`` where ``owners`` lists all live
    structures and ``pairs`` maps each joined ``(owner_a, owner_b)``
    (a < b) to its lexicographically smallest witness arc.
    """
    owners = sorted(state.structures)
    pairs: dict[tuple[int, int], Arc] = {}
    for s in state.live_structures():
        for arc in _outer_member_arcs(state, s):
            other = state.structure_of.get(arc.head)
            if other is None or other == s.owner:
                continue
            so = state.structures[other]
            if not state.tree(so).is_outer(state.root(arc.head)):
                continue
            key = (s.owner, other) if s.owner < other else (other, s.owner)
            cand = arc if s.owner < other else arc.reverse()
            cur = pairs.get(key)
            if cur is None or tuple(cand) < tuple(cur):
                pairs[key] = cand
    return owners, pairs


def _eligible_left(state: PhaseState, stage: int) -> list[Structure]:
    out = []
    for s in state.live_structures():
        if s.on_hold or s.extended or s.working is None:
            continue
        if state.entry_label(s, s.working) == stage:
            out.append(s)
    return out


def _head_eligible(state: PhaseState, y: int, stage: int) -> bool:
    """Head test: inner or unvisited-and-matched, with label headroom."""
    sv = state.structure_at(y)
    if sv is None:
        if state.mate[y] is None:
            return False
    else:
        if not state.tree(sv).is_inner(state.root(y)):
            return False
    return state.head_label(y) > stage + 1


def build_h_prime_s(state: PhaseState, stage: int):
    """Bipartite layer graph for one stage.

    Left: working vertices with entry label ``stage`` of structures that
    are neither on hold nor already extended.  Right: inner or
    unvisited matched vertices whose downward label exceeds
    ``stage + 1``.  Returns ``(left_owners, right_heads, pairs, arcs)``
    with one witness arc per (owner, head) pair and the full candidate
    arc list (used for contamination marking).
    """
    left = _eligible_left(state, stage)
    if not left:
        # No tails means no pairs and no candidate arcs; skip the head scan.
        return [], [], {}, []
    right: list[int] = [
        y
        for y in range(state.g.n)
        if not state.g.removed[y]
        and state.mate[y] is not None
        and _head_eligible(state, y, stage)
    ]
    right_set = set(right)
    pairs: dict[tuple[int, int], Arc] = {}
    arcs: list[Arc] = []
    for s in left:
        for x in sorted(state.omega.members_of(s.working)):
            for y in state.adj_sorted[x]:
                if y not in right_set or state.mate[x] == y:
                    continue
                arcs.append(Arc(x, y))
                key = (s.owner, y)
                if key not in pairs or (x, y) < tuple(pairs[key]):
                    pairs[key] = Arc(x, y)
    return [s.owner for s in left], right, pairs, arcs


def _aux_graph_pairs(owners: list[int], pairs) -> tuple[Graph, list[int]]:
    idx = {o: i for i, o in enumerate(owners)}
    aux = Graph(len(owners))
    for a, b in sorted(pairs):
        aux.add_edge(idx[a], idx[b])
    return aux, owners


def _aux_graph_bipartite(
    left: list[int], right: list[int], pairs
) -> tuple[Graph, list[tuple[str, int]]]:
    nodes = [("L", o) for o in left] + [("R", y) for y in right]
    idx = {node: i for i, node in enumerate(nodes)}
    aux = Graph(len(nodes))
    for o, y in sorted(pairs):
        aux.add_edge(idx[("L", o)], idx[("R", y)])
    return aux, nodes


# -- simulations ----------------------------------------------------------------


def exhaust_type1(state: PhaseState, stats: OracleStats) -> bool:
    """Contract until no structure has an outer-outer arc at its working vertex."""
    changed = False
    for owner in sorted(state.structures):
        s = state.structures.get(owner)
        if s is None:
            continue
        contracted = False
        while True:
            arc = find_type1_arc(state, s)
            if arc is None:
                break
            state.op_contract(arc)
            changed = contracted = True
        if contracted:
            stats.note_step(len(s.vertices))
    return changed


def simulate_contract_and_augment(
    state: PhaseState,
    oracle: CountedOracle,
    params: PhaseParams,
    stats: OracleStats,
    hooks: TraceHooks | None = None,
) -> bool:
    """Exhaust contractions, then repeatedly augment across oracle matchings."""
    changed = exhaust_type1(state, stats)
    for _ in range(params.sim_iterations(oracle.c)):
        owners, pairs = build_h_prime(state)
        if not pairs:
            break
        aux, owners = _aux_graph_pairs(owners, pairs)
        if hooks:
            hooks.on_oracle_graph(aux)
        matched = oracle.find(aux)
        if not matched:
            break
        batch = sorted(
            (owners[min(a, b)], owners[max(a, b)]) for a, b in matched.edges
        )
        step_size = 1
        for key in batch:
            arc = pairs[key]
            sa, sb = state.structure_at(arc.tail), state.structure_at(arc.head)
            if sa is None or sb is None or sa is sb:
                raise InternalConsistencyError(
                    f"aux matching paired dead or merged structures at {arc}"
                )
            step_size = max(step_size, len(sa.vertices), len(sb.vertices))
            state.op_augment(arc)
            changed = True
        stats.note_step(step_size)
    if state.contaminated is not None:
        fresh = []
        for u, v in sorted(state.g.edges):
            if state.classify(u, v) == 2:
                fresh += [(u, v), (v, u)]
        state.contaminate(fresh)
    return changed


def simulate_extend_active_path(
    state: PhaseState,
    oracle: CountedOracle,
    params: PhaseParams,
    stats: OracleStats,
    hooks: TraceHooks | None = None,
) -> bool:
    """Stage-by-stage extension, then a contract-and-augment round.

    Stage ``s`` lets every structure whose working vertex sits at entry
    label ``s`` overtake one matched arc with label above ``s + 1``; the
    oracle picks a large set of disjoint extensions at once.  Matched
    pairs are applied in witness order and re-validated: a pair whose
    head was consumed by a sibling overtake of the same matched edge in
    the same batch is skipped, anything else failing validation is a
    broken invariant.
    """
    changed = False
    for stage in range(0, params.ell_max + 1):
        for _ in range(params.sim_iterations(oracle.c)):
            left, right, pairs, _ = build_h_prime_s(state, stage)
            if not pairs:
                break
            aux, nodes = _aux_graph_bipartite(left, right, pairs)
            if hooks:
                hooks.on_oracle_graph(aux)
            matched = oracle.find(aux)
            if not matched:
                break
            keyed = []
            for a, b in matched.edges:
                na, nb = nodes[a], nodes[b]
                owner, y = (na[1], nb[1]) if na[0] == "L" else (nb[1], na[1])
                keyed.append((tuple(pairs[(owner, y)]), owner, y))
            batch_taken: set[tuple[int, int]] = set()
            step_size = 1
            for witness, owner, y in sorted(keyed):
                x = witness[0]
                ok, benign = _revalidate_extension(state, owner, x, y, stage, batch_taken)
                if not ok:
                    if benign:
                        continue
                    raise InternalConsistencyError(
                        f"stage {stage}: pair ({owner}, {y}) stopped being feasible"
                    )
                state.op_overtake(Arc(x, y), Arc(y, state.mate[y]), stage + 1)
                batch_taken.add(edge_key(y, state.mate[y]))
                s = state.structures[owner]
                step_size = max(step_size, len(s.vertices))
                changed = True
            stats.note_step(step_size)
        if state.contaminated is not None:
            _, _, _, leftover = build_h_prime_s(state, stage)
            state.contaminate(leftover)
    changed |= simulate_contract_and_augment(state, oracle, params, stats, hooks)
    return changed


def _revalidate_extension(
    state: PhaseState,
    owner: int,
    x: int,
    y: int,
    stage: int,
    batch_taken: set[tuple[int, int]],
) -> tuple[bool, bool]:
    """(still feasible, benign-if-not) for an oracle-matched extension.

    A pair can stop being feasible mid-batch for one harmless reason:
    an earlier overtake of the same batch consumed the head's matched
    edge (both copies of one matched edge were handed out).  Everything
    else is a broken promise and the caller raises.
    """
    mate_y = state.mate[y]
    benign = mate_y is not None and edge_key(y, mate_y) in batch_taken
    s = state.structures.get(owner)
    if s is None or s.on_hold or s.extended or s.working is None:
        return False, benign
    if state.root(x) != s.working:
        return False, benign
    if state.entry_label(s, s.working) != stage:
        return False, benign
    if state.g.removed[y] or not _head_eligible(state, y, stage):
        return False, benign
    return True, False


def backtrack_pass(state: PhaseState, stats: OracleStats) -> bool:
    sizes = [
        len(s.vertices)
        for s in state.live_structures()
        if not (s.on_hold or s.modified or s.working is None)
    ]
    moved = state.backtrack_stuck()
    if moved:
        stats.note_step(max(sizes, default=1))
    return moved


# -- phase and scale drivers ------------------------------------------------------


def run_phase(
    g: Graph,
    m: Matching,
    params: PhaseParams,
    oracle: CountedOracle,
    stats: OracleStats | None = None,
    hooks: TraceHooks | None = None,
    track_contamination: bool = False,
) -> tuple[list[AltPath], PhaseState]:
    """One phase: returns vertex-disjoint augmenting paths for ``m``.

    The graph's removal flags are left set on return; the caller clears
    them after applying the paths.  A pass bundle that changes nothing
    is a fixpoint, so the bundle loop stops there early; the outcome is
    the same as running all ``tau_max`` bundles.
    """
    stats = stats if stats is not None else OracleStats()
    state = PhaseState(g, m, params, track_contamination)
    for tau in range(1, params.tau_max + 1):
        state.mark_for_pass_bundle()
        if hooks:
            hooks.on_bundle_start(state, tau)
        changed = simulate_extend_active_path(state, oracle, params, stats, hooks)
        changed |= simulate_contract_and_augment(state, oracle, params, stats, hooks)
        if hooks:
            hooks.on_after_simulations(state, tau)
        moved = backtrack_pass(state, stats)
        if hooks:
            hooks.on_bundle_end(state, tau)
        if not changed and not moved:
            break
    if hooks:
        hooks.on_phase_end(state)
    return state.found_paths, state


def initial_matching(g: Graph, oracle: CountedOracle) -> Matching:
    """Seed matching: 2c rounds of the oracle on the unmatched-induced subgraph.

    Always performs exactly ``2c`` oracle calls (even on edgeless
    leftovers); the result is at least a quarter of the maximum
    matching.
    """
    m = Matching(g.n)
    for _ in range(2 * math.ceil(oracle.c)):
        free = [v for v in range(g.n) if not g.removed[v] and m.mate[v] is None]
        sub, back = g.induced(free)
        found = oracle.find(sub)
        for a, b in sorted(found.edges):
            m.add(back[a], back[b])
    return m


@dataclass
class ScaleStats:
    h: float
    phases_run: int = 0
    paths_found: int = 0
    oracle_calls: int = 0


@dataclass
class BoostResult:
    matching: Matching
    epsilon: float
    stats: OracleStats
    per_scale: list[ScaleStats] = field(default_factory=list)

    @property
    def oracle_calls(self) -> int:
        return self.stats.calls


def boost(
    g: Graph,
    epsilon: float,
    oracle,
    constants: Constants | None = None,
    hooks: TraceHooks | None = None,
    track_contamination: bool = False,
) -> BoostResult:
    """Boost the oracle's approximation to ``1 + epsilon`` on ``g``.

    Runs the seed matching, then every scale from 1/2 down to the
    epsilon-dependent floor; each scale runs phases until one finds no
    augmenting path (with a deterministic oracle, a phase on unchanged
    input repeats verbatim, so further phases of the scale are skipped).
    """
    eps = normalize_epsilon(epsilon)
    consts = constants or Constants()
    counted = oracle if isinstance(oracle, CountedOracle) else CountedOracle(oracle)
    g.clear_removed()
    m = initial_matching(g, counted)
    result = BoostResult(matching=m, epsilon=eps, stats=counted.stats)
    for h in scale_sequence(eps, consts):
        params = PhaseParams.for_scale(eps, h, consts)
        sc = ScaleStats(h=h)
        calls_before = counted.stats.calls
        for phase in range(1, params.phases + 1):
            if hooks:
                hooks.on_phase_start(params, h, phase)
            paths, _ = run_phase(
                g, m, params, counted, counted.stats, hooks, track_contamination
            )
            g.clear_removed()
            m = augment_all(m, paths)
            sc.phases_run += 1
            sc.paths_found += len(paths)
            if not paths:
                break
        sc.oracle_calls = counted.stats.calls - calls_before
        result.per_scale.append(sc)
    result.matching = m
    return result
