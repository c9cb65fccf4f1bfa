"""Laminar blossom families, contracted views, and path lifting.

A blossom is either trivial (a single vertex; represented implicitly)
or an odd cycle of child blossoms.  Non-trivial blossoms carry their
cycle order and the exact graph endpoints of each cycle edge, which is
what makes lifting contracted paths back to graph paths deterministic.

Blossom ids: trivial blossoms reuse the vertex id; non-trivial ones are
assigned ids starting at ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InternalConsistencyError, PreconditionError, UnknownVertexError
from .graph import Arc

MateArray = list  # list[int | None], indexed by vertex


@dataclass
class Blossom:
    id: int
    members: set[int]
    base: int
    children: list[int]            # child blossom ids, cycle order; children[0] holds base
    cycle_arcs: list[Arc]          # cycle_arcs[i] joins children[i] -> children[i+1 mod k]
    parent: int | None = None      # enclosing blossom id in the laminar forest

    def to_debug_json(self) -> dict:
        return {
            "id": self.id,
            "base": self.base,
            "members": sorted(self.members),
            "children": list(self.children),
            "cycle_arcs": [list(a) for a in self.cycle_arcs],
            "parent": self.parent,
        }


class LaminarBlossomSet:
    """All blossoms over a fixed vertex range, trivial ones implicit.

    ``root_of[v]`` is the id of the maximal (root) blossom containing
    ``v``; it is updated eagerly on contraction, which doubles as a
    fully-compressed union-find.  The explicit parent links form the
    laminar forest used for dissolution and lifting.
    """

    def __init__(self, n: int):
        self.n = n
        self.blossoms: dict[int, Blossom] = {}
        self.root_of: list[int] = list(range(n))
        self._next_id = n

    def is_trivial(self, bid: int) -> bool:
        return bid < self.n

    def members_of(self, bid: int) -> set[int]:
        if bid < self.n:
            return {bid}
        return self.blossoms[bid].members

    def base_of(self, bid: int) -> int:
        if bid < self.n:
            return bid
        return self.blossoms[bid].base

    def root(self, v: int) -> int:
        """Root blossom id of vertex ``v``."""
        if not (0 <= v < self.n):
            raise UnknownVertexError(f"vertex {v} outside [0, {self.n})")
        return self.root_of[v]

    def contract(self, children: list[int], cycle_arcs: list[Arc]) -> Blossom:
        """Register the odd cycle of root blossoms as a new blossom."""
        if len(children) < 3 or len(children) % 2 == 0:
            raise PreconditionError(
                f"blossom needs an odd cycle of >= 3 children, got {len(children)}",
                code="odd-cycle",
            )
        if len(cycle_arcs) != len(children):
            raise PreconditionError(
                f"{len(children)} children need {len(children)} cycle arcs",
                code="odd-cycle",
            )
        members: set[int] = set()
        for cid in children:
            if not self.is_trivial(cid) and self.blossoms[cid].parent is not None:
                raise PreconditionError(f"child {cid} is not a root blossom", code="not-root")
            got = self.members_of(cid)
            if members & got:
                raise PreconditionError("children overlap", code="laminarity")
            members |= got
        for i, arc in enumerate(cycle_arcs):
            nxt = children[(i + 1) % len(children)]
            if arc.tail not in self.members_of(children[i]) or arc.head not in self.members_of(nxt):
                raise PreconditionError(
                    f"cycle arc {arc} does not join children {children[i]} -> {nxt}",
                    code="odd-cycle",
                )
        b = Blossom(
            id=self._next_id,
            members=members,
            base=self.base_of(children[0]),
            children=list(children),
            cycle_arcs=list(cycle_arcs),
        )
        self._next_id += 1
        self.blossoms[b.id] = b
        for cid in children:
            if not self.is_trivial(cid):
                self.blossoms[cid].parent = b.id
        for v in members:
            self.root_of[v] = b.id
        return b

    def dissolve(self, bids: set[int]) -> None:
        """Drop the given non-trivial blossoms; their vertices go trivial."""
        touched: set[int] = set()
        for bid in bids:
            if bid in self.blossoms:
                touched |= self.blossoms[bid].members
                del self.blossoms[bid]
        for v in touched:
            self.root_of[v] = v

    def descendants(self, bid: int) -> set[int]:
        """The blossom id itself plus all nested non-trivial blossom ids."""
        if self.is_trivial(bid):
            return {bid}
        out = {bid}
        stack = [bid]
        while stack:
            cur = stack.pop()
            for cid in self.blossoms[cur].children:
                if not self.is_trivial(cid):
                    out.add(cid)
                    stack.append(cid)
        return out

    def defining_edges(self, bid: int) -> list[Arc]:
        """Cycle arcs of the blossom and of every nested child."""
        out: list[Arc] = []
        for d in self.descendants(bid):
            if not self.is_trivial(d):
                out.extend(self.blossoms[d].cycle_arcs)
        return out

    def to_debug_json(self) -> dict:
        return {
            "n": self.n,
            "blossoms": [
                self.blossoms[k].to_debug_json() for k in sorted(self.blossoms)
            ],
            "root_of": list(self.root_of),
        }


def validate_blossom(omega: LaminarBlossomSet, bid: int, mate: MateArray) -> None:
    """Debug check of the regular-set properties of one blossom."""
    if omega.is_trivial(bid):
        return
    b = omega.blossoms[bid]
    if len(b.children) % 2 == 0 or len(b.children) < 3:
        raise InternalConsistencyError(f"blossom {bid} has {len(b.children)} children")
    union: set[int] = set()
    for cid in b.children:
        got = omega.members_of(cid)
        if union & got:
            raise InternalConsistencyError(f"blossom {bid} children overlap")
        union |= got
    if union != b.members:
        raise InternalConsistencyError(f"blossom {bid} member set mismatch")
    if b.base not in omega.members_of(b.children[0]):
        raise InternalConsistencyError(f"blossom {bid} base not in first child")
    for i, arc in enumerate(b.cycle_arcs):
        want_matched = i % 2 == 1
        if (mate[arc.tail] == arc.head) != want_matched:
            raise InternalConsistencyError(
                f"blossom {bid} cycle arc {i} has wrong matched parity"
            )
    for v in b.members:
        if v == b.base:
            if mate[v] is not None and mate[v] in b.members:
                raise InternalConsistencyError(f"blossom {bid} base matched inside")
        elif mate[v] is None or mate[v] not in b.members:
            raise InternalConsistencyError(
                f"blossom {bid} member {v} not matched inside"
            )
    for cid in b.children:
        validate_blossom(omega, cid, mate)


def check_laminarity(omega: LaminarBlossomSet) -> None:
    """Every pair of blossoms must nest or be disjoint."""
    blos = list(omega.blossoms.values())
    for i, a in enumerate(blos):
        for b in blos[i + 1 :]:
            inter = a.members & b.members
            if inter and not (a.members <= b.members or b.members <= a.members):
                raise InternalConsistencyError(
                    f"blossoms {a.id} and {b.id} cross: share {sorted(inter)[:4]}"
                )


# -- alternating tree view ----------------------------------------------------


@dataclass
class TreeView:
    """A rooted alternating tree over root blossom ids."""

    root: int
    parent: dict[int, int] = field(default_factory=dict)
    parent_arc: dict[int, Arc] = field(default_factory=dict)
    children: dict[int, list[int]] = field(default_factory=dict)
    depth: dict[int, int] = field(default_factory=dict)

    def contains(self, bid: int) -> bool:
        return bid in self.depth

    def is_outer(self, bid: int) -> bool:
        return self.depth.get(bid, 1) % 2 == 0

    def is_inner(self, bid: int) -> bool:
        return self.depth.get(bid, 0) % 2 == 1

    def path_to_root(self, bid: int) -> list[int]:
        out = [bid]
        while out[-1] != self.root:
            out.append(self.parent[out[-1]])
        return out

    def lca(self, a: int, b: int) -> int:
        seen = set(self.path_to_root(a))
        cur = b
        while cur not in seen:
            cur = self.parent[cur]
        return cur

    def subtree(self, bid: int) -> set[int]:
        out = {bid}
        stack = [bid]
        while stack:
            for c in self.children.get(stack.pop(), []):
                out.add(c)
                stack.append(c)
        return out


def find_cycle_blossom(
    view: TreeView, omega: LaminarBlossomSet, g_arc: Arc
) -> tuple[list[int], list[Arc]]:
    """Cycle data for contracting the tree arc ``g_arc`` joins.

    ``g_arc`` must connect two distinct outer vertices of the tree.  The
    result is the unique odd cycle through their tree paths to the
    lowest common ancestor: a child list in cycle order (the ancestor
    first) and the cycle arcs, ready for ``LaminarBlossomSet.contract``.
    """
    bu, bv = omega.root(g_arc.tail), omega.root(g_arc.head)
    for b in (bu, bv):
        if not view.contains(b):
            raise PreconditionError(f"blossom {b} not in this tree", code="different-trees")
        if not view.is_outer(b):
            raise PreconditionError(f"blossom {b} is not outer", code="endpoints-not-outer")
    if bu == bv:
        raise PreconditionError("arc lies inside one blossom", code="endpoints-not-outer")
    top = view.lca(bu, bv)
    up_u = view.path_to_root(bu)
    up_v = view.path_to_root(bv)
    path_u = up_u[: up_u.index(top) + 1]  # bu .. top
    path_v = up_v[: up_v.index(top) + 1]  # bv .. top
    # Cycle order: top, down to bu, across g_arc, back up from bv.
    children = list(reversed(path_u)) + path_v[:-1]
    arcs: list[Arc] = []
    for node in reversed(path_u[:-1]):  # downward: parent's arc into node
        arcs.append(view.parent_arc[node])
    arcs.append(g_arc)
    for node in path_v[:-1]:  # upward: reverse of node's parent arc
        arcs.append(view.parent_arc[node].reverse())
    return children, arcs


# -- lifting ------------------------------------------------------------------


def lift_even_path(
    omega: LaminarBlossomSet, mate: MateArray, bid: int, target: int
) -> list[int]:
    """Even alternating path from ``base(bid)`` to ``target`` inside the blossom.

    The path starts with an unmatched edge at the base (or is a single
    vertex), alternates, and ends with a matched edge at ``target``.
    """
    if omega.is_trivial(bid):
        if target != bid:
            raise PreconditionError(
                f"vertex {target} not in trivial blossom {bid}", code="not-in-blossom"
            )
        return [target]
    b = omega.blossoms[bid]
    if target not in b.members:
        raise PreconditionError(
            f"vertex {target} not in blossom {bid}", code="not-in-blossom"
        )
    idx = next(i for i, c in enumerate(b.children) if target in omega.members_of(c))
    if idx == 0:
        return lift_even_path(omega, mate, b.children[0], target)
    k = len(b.children)
    if idx % 2 == 0:
        # Forward around the cycle: arrive at children[idx] on a matched arc.
        seq = list(range(0, idx + 1))
        conns = [b.cycle_arcs[j] for j in range(0, idx)]
    else:
        # Backward: traverse cycle arcs reversed, arrive on a matched arc.
        seq = [0] + list(range(k - 1, idx - 1, -1))
        conns = [b.cycle_arcs[j].reverse() for j in range(k - 1, idx - 1, -1)]
    ids = [b.children[j] for j in seq]
    return _stitch_segments(omega, mate, ids, conns, end_target=target)


def _stitch_segments(
    omega: LaminarBlossomSet,
    mate: MateArray,
    ids: list[int],
    conns: list[Arc],
    end_target: int | None = None,
) -> list[int]:
    """Concatenate within-blossom segments along connector arcs.

    ``conns[j]`` joins ``ids[j]`` to ``ids[j+1]`` with exact endpoints.
    The walk starts at ``base(ids[0])``; it ends at ``end_target`` when
    given, else at the natural anchor of the last blossom (its base, or
    the entry vertex if the entry arc is unmatched).
    """
    if len(conns) != len(ids) - 1:
        raise InternalConsistencyError("connector count must be len(ids) - 1")
    out: list[int] = []

    def matched(a: Arc) -> bool:
        return mate[a.tail] == a.head

    for j, bid in enumerate(ids):
        entry = conns[j - 1] if j > 0 else None
        exit_ = conns[j] if j < len(conns) else None
        if entry is None:
            if exit_ is not None and matched(exit_):
                seg = [omega.base_of(bid)]
                if exit_.tail != seg[0]:
                    raise InternalConsistencyError("matched exit arc must leave the base")
            elif exit_ is not None:
                seg = lift_even_path(omega, mate, bid, exit_.tail)
            else:
                seg = [end_target if end_target is not None else omega.base_of(bid)]
        elif exit_ is None:
            if matched(entry):
                if entry.head != omega.base_of(bid):
                    raise InternalConsistencyError("matched entry arc must hit the base")
                seg = (
                    lift_even_path(omega, mate, bid, end_target)
                    if end_target is not None
                    else [omega.base_of(bid)]
                )
            else:
                # Unmatched entry: walk back to the base, the only even exit.
                seg = list(reversed(lift_even_path(omega, mate, bid, entry.head)))
                if end_target is not None and seg[-1] != end_target:
                    raise InternalConsistencyError(
                        "unmatched entry cannot reach a non-base target"
                    )
        else:
            em, xm = matched(entry), matched(exit_)
            if em == xm and not omega.is_trivial(bid):
                raise InternalConsistencyError(
                    f"blossom {bid} entered and left with equal matched parity"
                )
            if omega.is_trivial(bid):
                seg = [bid]
            elif em:
                if entry.head != omega.base_of(bid):
                    raise InternalConsistencyError("matched entry arc must hit the base")
                seg = lift_even_path(omega, mate, bid, exit_.tail)
            else:
                if exit_.tail != omega.base_of(bid):
                    raise InternalConsistencyError("matched exit arc must leave the base")
                seg = list(reversed(lift_even_path(omega, mate, bid, entry.head)))
        out.extend(seg)
    return out


def lift_full_path(
    omega: LaminarBlossomSet,
    mate: MateArray,
    blossom_ids: list[int],
    connectors: list[Arc],
    end_target: int | None = None,
) -> list[int]:
    """Lift a contracted path to a full graph path.

    ``blossom_ids`` is the path in the contracted graph; ``connectors``
    give the exact graph arcs realizing each contracted arc.  Endpoints
    of the lifted path are the bases of the terminal blossoms (for an
    augmenting path: the free vertices), unless ``end_target`` pins the
    final vertex.
    """
    return _stitch_segments(omega, mate, blossom_ids, connectors, end_target=end_target)


# -- contracted view ----------------------------------------------------------


class ContractedView:
    """The quotient graph G/Omega restricted to live vertices.

    Stores one lexicographically-smallest witness arc per contracted
    edge, so lifting is reproducible.
    """

    def __init__(self, g, omega: LaminarBlossomSet, mate: MateArray | None = None):
        self.omega = omega
        self.vertices: set[int] = {
            omega.root(v) for v in range(g.n) if not g.removed[v]
        }
        self.witness: dict[tuple[int, int], Arc] = {}
        self.matched_pairs: set[tuple[int, int]] = set()
        for u, v in sorted(g.edges):
            if g.removed[u] or g.removed[v]:
                continue
            bu, bv = omega.root(u), omega.root(v)
            if bu == bv:
                continue
            key = (bu, bv) if bu < bv else (bv, bu)
            arc = Arc(u, v) if bu < bv else Arc(v, u)
            cur = self.witness.get(key)
            if cur is None or tuple(arc) < tuple(cur):
                self.witness[key] = arc
            if mate is not None and mate[u] == v:
                self.matched_pairs.add(key)
        if mate is not None:
            seen: set[int] = set()
            for a, b in self.matched_pairs:
                if a in seen or b in seen:
                    raise InternalConsistencyError(
                        "contracted matching covers a blossom twice"
                    )
                seen.add(a)
                seen.add(b)

    def arc_between(self, b1: int, b2: int) -> Arc | None:
        key = (b1, b2) if b1 < b2 else (b2, b1)
        arc = self.witness.get(key)
        if arc is None:
            return None
        return arc if self.omega.root(arc.tail) == b1 else arc.reverse()
