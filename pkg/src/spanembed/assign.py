"""Semi-random assignment of tree vertices to clusters of a reduced model,
with skewed-traverse rerouting, incorporation of exceptional vertices, and
perfect balancing.

The reduced model is synthetic: a cluster digraph with a planted directed
Hamilton cycle and a regular walk subgraph with the cherry property.  An
assignment maps each tree vertex to a cluster index, or to an exceptional
token which stands for a single extra host vertex; token targets are encoded
as negative integers -(token_index + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .digraph import OrientedDigraph, random_subgraph
from .expansion import has_cherry_property
from .trees import Member, RootedOrientedTree
from .walks import regular_degree


class SupplyError(RuntimeError):
    """A needed collection member (rooted in a specific cluster) ran out."""


class TraverseError(RuntimeError):
    """No skewed traverse connects the requested clusters, or a member path
    is too short to host the rerouted windings."""


class ModelError(ValueError):
    """The reduced model violates one of its structural invariants."""


# -- reduced model -----------------------------------------------------------

@dataclass
class ReducedModel:
    """Cluster digraph with a planted Hamilton cycle, per-cluster capacities,
    and the regular cherry subgraph used for random walk steps."""
    graph: OrientedDigraph
    ham_cycle: tuple[int, ...]
    capacity: np.ndarray
    walk_graph: OrientedDigraph

    def __post_init__(self):
        k = self.graph.n
        if k < 3:
            raise ModelError("model needs at least 3 clusters")
        if sorted(self.ham_cycle) != list(range(k)):
            raise ModelError("ham_cycle must be a permutation of the clusters")
        if self.walk_graph.n != k:
            raise ModelError("walk graph must live on the clusters")
        self.capacity = np.asarray(self.capacity, dtype=np.int64)
        if self.capacity.shape != (k,):
            raise ModelError("capacity must list one target per cluster")
        pos = [0] * k
        for i, c in enumerate(self.ham_cycle):
            pos[c] = i
        self._pos = pos
        for c in range(k):
            if (c, self.succ(c)) not in self.graph.arcs:
                raise ModelError("ham_cycle arcs must belong to the model digraph")
        if not set(self.walk_graph.arcs) <= set(self.graph.arcs):
            raise ModelError("walk graph must be a subgraph of the model digraph")

    @property
    def k(self) -> int:
        return self.graph.n

    def succ(self, c: int, steps: int = 1) -> int:
        return self.ham_cycle[(self._pos[c] + steps) % self.k]

    def pred(self, c: int, steps: int = 1) -> int:
        return self.ham_cycle[(self._pos[c] - steps) % self.k]

    def audit(self) -> list[str]:
        """Full invariant audit: cycle arcs in the walk graph, walk graph
        regular with the cherry property."""
        problems = []
        for c in range(self.k):
            if (c, self.succ(c)) not in self.walk_graph.arcs:
                problems.append(f"cycle arc ({c},{self.succ(c)}) missing from walk graph")
        if regular_degree(self.walk_graph) is None:
            problems.append("walk graph is not regular")
        if not has_cherry_property(self.walk_graph).has_both:
            problems.append("walk graph lacks the cherry property")
        return problems


def circulant_jumps(k: int) -> list[int]:
    """Largest rotation-jump set {1, ...} giving an oriented circulant on k
    vertices (no jump paired with its complement)."""
    jumps = [1]
    for s in range(2, k):
        if s != k - s and (k - s) not in jumps and s not in jumps:
            jumps.append(s)
    return jumps


def circulant_digraph(k: int, jumps: Sequence[int]) -> OrientedDigraph:
    return OrientedDigraph(
        k, ((v, (v + s) % k) for v in range(k) for s in jumps))


def build_reduced_model(k: int, capacity: Optional[np.ndarray] = None,
                        seed=0, extra_density: float = 0.4,
                        sampled_walk: bool = True) -> ReducedModel:
    """Synthetic reduced model: identity Hamilton cycle, an oriented cluster
    digraph of cycle + random extra arcs, and a regular cherry walk subgraph.

    The walk subgraph is preferably built by completing a sparse random
    sample into a regular cover (cycle arcs excluded, then re-added, which
    keeps regularity and the monotone cherry property); if sampling fails at
    this scale, a deterministic circulant subgraph is used instead.
    """
    from .cover import RetryBudgetError, regular_cherry_subgraph

    rng = np.random.default_rng(seed)
    cycle = tuple(range(k))
    jumps = circulant_jumps(k)
    base = set(circulant_digraph(k, jumps).arcs)
    arcs = set(base)
    for u in range(k):
        for v in range(u + 1, k):
            if (u, v) in arcs or (v, u) in arcs:
                continue
            if rng.random() < extra_density:
                arcs.add((u, v) if rng.random() < 0.5 else (v, u))
    graph = OrientedDigraph(k, arcs)
    walk = None
    if sampled_walk:
        cycle_arcs = {(c, (c + 1) % k) for c in range(k)}
        rest = OrientedDigraph(k, set(graph.arcs) - cycle_arcs)
        try:
            cover = regular_cherry_subgraph(rest, xi=0.6,
                                            seed=rng.integers(2 ** 63),
                                            max_retries=24)
            walk = OrientedDigraph(k, set(cover.graph.arcs) | cycle_arcs)
            if regular_degree(walk) is None or not has_cherry_property(walk).has_both:
                walk = None
        except RetryBudgetError:
            walk = None
    if walk is None:
        walk = circulant_digraph(k, jumps)
    if capacity is None:
        capacity = np.zeros(k, dtype=np.int64)
    model = ReducedModel(graph, cycle, capacity, walk)
    problems = model.audit()
    if problems:
        raise ModelError("; ".join(problems))
    return model


def split_capacity(total: int, k: int) -> np.ndarray:
    """Near-equal capacities summing to `total`."""
    base = total // k
    cap = np.full(k, base, dtype=np.int64)
    cap[: total - base * k] += 1
    return cap


# -- assignments -------------------------------------------------------------

@dataclass(frozen=True)
class ExceptionalVertex:
    """Synthetic exceptional host vertex with declared cluster attachments:
    it sends many arcs into cluster i_plus and receives many from i_minus."""
    token: int
    i_plus: int
    i_minus: int


@dataclass
class Assignment:
    """Per tree vertex: a cluster index, or -(t+1) for exceptional token t."""
    targets: np.ndarray
    tokens: list[ExceptionalVertex] = field(default_factory=list)

    def copy(self) -> "Assignment":
        return Assignment(self.targets.copy(), list(self.tokens))

    def cluster_counts(self, k: int) -> np.ndarray:
        cl = self.targets[self.targets >= 0]
        return np.bincount(cl, minlength=k)[:k]

    def token_of(self, vertex: int) -> Optional[int]:
        t = int(self.targets[vertex])
        return -t - 1 if t < 0 else None


def member_index(n: int, members: Iterable[Member]) -> np.ndarray:
    """Vertex -> member id (-1 outside all members); members must be disjoint."""
    idx = np.full(n, -1, dtype=np.int64)
    for i, m in enumerate(members):
        for v in m.vertices:
            if idx[v] != -1:
                raise ValueError(f"member vertex {v} reused across members")
            idx[v] = i
    return idx


def semi_random_assignment(model: ReducedModel, t: RootedOrientedTree,
                           members: Sequence[Member], seed,
                           order: Optional[Sequence[int]] = None,
                           root_cluster: Optional[int] = None) -> Assignment:
    """Assign tree vertices to clusters: the root uniformly at random, then
    in top-down order a deterministic Hamilton-cycle step whenever the
    parent arc lies inside a collection member, else a uniform step in the
    walk subgraph.  Arc-preserving by construction.
    """
    rng = np.random.default_rng(seed)
    k = model.k
    idx = member_index(t.n, members)
    for m in members:
        if t.root in m.vertices:
            raise ValueError("collection members must not contain the root")
    order = list(order) if order is not None else list(t.topdown_order())
    if order[0] != t.root:
        raise ValueError("ordering must start at the root")
    targets = np.full(t.n, -1, dtype=np.int64)
    targets[t.root] = (int(rng.integers(k)) if root_cluster is None
                       else int(root_cluster))
    out_nbrs = [model.walk_graph.out(v) for v in range(k)]
    in_nbrs = [model.walk_graph.inn(v) for v in range(k)]
    for v in order[1:]:
        w = t.parent[v]
        base = int(targets[w])
        forward = t.arc_dir[v] == "+"
        if idx[v] != -1 and idx[v] == idx[w]:
            targets[v] = model.succ(base) if forward else model.pred(base)
        else:
            nbrs = out_nbrs[base] if forward else in_nbrs[base]
            if not nbrs:
                raise ModelError(f"walk graph has no "
                                 f"{'out' if forward else 'in'}-neighbour at {base}")
            targets[v] = nbrs[int(rng.integers(len(nbrs)))]
    return Assignment(targets)


# -- statistics --------------------------------------------------------------

@dataclass
class AssignmentStats:
    k: int
    root_p: np.ndarray          # per-cluster counts over Root(P)
    root_r: np.ndarray
    vert_p: np.ndarray          # per-cluster counts over V(P)
    vert_r: np.ndarray
    vert_all: np.ndarray        # per-cluster counts over V(T)
    members_on_cycle: bool      # every member arc maps to a Hamilton-cycle arc

    def max_deviation(self) -> float:
        n = int(self.vert_all.sum())
        return float(np.abs(self.vert_all - n / self.k).max())


def members_on_cycle(model: ReducedModel, t: RootedOrientedTree,
                     asg: Assignment, members: Iterable[Member]) -> bool:
    for m in members:
        mv = set(m.vertices)
        for v in m.vertices:
            p = t.parent[v]
            if p == -1 or p not in mv:
                continue
            tail, head = t.arc_between(p, v)
            ct, ch = int(asg.targets[tail]), int(asg.targets[head])
            if ct < 0 or ch < 0 or model.succ(ct) != ch:
                return False
    return True


def assignment_stats(model: ReducedModel, t: RootedOrientedTree,
                     asg: Assignment, p_members: Sequence[Member],
                     r_members: Sequence[Member]) -> AssignmentStats:
    k = model.k

    def counts_over(vertices: Iterable[int]) -> np.ndarray:
        out = np.zeros(k, dtype=np.int64)
        for v in vertices:
            c = int(asg.targets[v])
            if c >= 0:
                out[c] += 1
        return out

    return AssignmentStats(
        k,
        counts_over(m.root for m in p_members),
        counts_over(m.root for m in r_members),
        counts_over(v for m in p_members for v in m.vertices),
        counts_over(v for m in r_members for v in m.vertices),
        asg.cluster_counts(k),
        members_on_cycle(model, t, asg, list(p_members) + list(r_members)),
    )


def prop72_constants(k: int, delta: int) -> tuple[float, float, float]:
    """(gamma, delta, epsilon) of the balance-concentration bound: gamma =
    1/(1 + 9 k^5 log delta) with natural log, delta = gamma/10, epsilon =
    min{1/(4 + 12 k^5 log delta), delta/4}."""
    if k < 2 or delta < 2:
        raise ValueError("need k >= 2 and delta >= 2")
    logd = math.log(delta)
    gamma = 1.0 / (1.0 + 9.0 * k ** 5 * logd)
    delta_c = gamma / 10.0
    eps = min(1.0 / (4.0 + 12.0 * k ** 5 * logd), delta_c / 4.0)
    return gamma, delta_c, eps


def prop72_epsilon(k: int, delta: int) -> float:
    return prop72_constants(k, delta)[2]


def prune_collection(t: RootedOrientedTree, members: Sequence[Member],
                     model: ReducedModel, delta: int, roots: Iterable[int]
                     ) -> tuple[list[Member], list[Member]]:
    """Drop members within tree distance m of any given subtree root, where
    m = ceil(log(n^(1-gamma)) / (2 log delta)) - 2 and gamma is the
    concentration constant for this model's cluster count.

    Returns (kept, removed).
    """
    gamma, _, _ = prop72_constants(model.k, max(delta, 2))
    n = t.n
    m = math.ceil(math.log(max(n, 2) ** (1.0 - gamma)) / (2.0 * math.log(max(delta, 2)))) - 2
    if m < 0:
        return list(members), []
    ball = set(roots)
    frontier = set(roots)
    for _ in range(m):
        frontier = {w for v in frontier for w in t.neighbours(v)} - ball
        ball |= frontier
    kept, removed = [], []
    for member in members:
        (removed if any(v in ball for v in member.vertices) else kept).append(member)
    return kept, removed


# -- skewed traverses --------------------------------------------------------

@dataclass
class SkewedTraverse:
    """Arc chain ((u,w1),(pred(w1),w2),...,(pred(w_{t-1}),v)); each next source
    is the cycle predecessor of the previous head."""
    arcs: list[tuple[int, int]]

    @property
    def length(self) -> int:
        return len(self.arcs)

    @property
    def heads(self) -> list[int]:
        return [h for _, h in self.arcs]


def skewed_traverse(model: ReducedModel, src: int, dst: int) -> SkewedTraverse:
    """Shortest skewed traverse from src to dst by BFS over source clusters,
    ties broken toward smaller cluster indices.  Raises TraverseError when
    unreachable."""
    if src == dst:
        raise ValueError("traverse endpoints must differ")
    return _traverse(model, src, dst)


def _traverse(model: ReducedModel, src: int, dst: int) -> SkewedTraverse:
    """BFS over source clusters; also usable with src == dst, in which case a
    nontrivial chain back to the start is produced."""
    from collections import deque

    prev: dict[int, tuple[int, tuple[int, int]]] = {}
    queue = deque([src])
    seen = {src}
    while queue:
        cur = queue.popleft()
        for head in model.graph.out(cur):
            if head == dst:
                arcs = [(cur, head)]
                s = cur
                while s != src:
                    p, arc = prev[s]
                    arcs.append(arc)
                    s = p
                arcs.reverse()
                return SkewedTraverse(arcs)
            nxt = model.pred(head)
            if nxt not in seen:
                seen.add(nxt)
                prev[nxt] = (cur, (cur, head))
                queue.append(nxt)
    raise TraverseError(f"no skewed traverse from {src} to {dst}")


# -- incorporation of exceptional vertices -----------------------------------

def _member_root_is_in_vertex(t: RootedOrientedTree, member: Member) -> bool:
    """True when the member arc at the root points into the root (out-leaf /
    source-switch members), false for the mirror orientation."""
    root, child = member.vertices[0], member.vertices[1]
    tail, _ = t.arc_between(root, child)
    return tail == child


def _take_member(r_members: list[Member], asg: Assignment, cluster: int,
                 by_start: bool = False) -> Member:
    """Pop the member whose root (or path start) sits in `cluster`, lowest
    tree-vertex index first."""
    best = None
    for m in r_members:
        anchor = m.start if by_start else m.root
        if int(asg.targets[anchor]) == cluster:
            if best is None or anchor < (best.start if by_start else best.root):
                best = m
    if best is None:
        raise SupplyError(f"no collection member available in cluster {cluster}")
    r_members.remove(best)
    return best


def _reversed_model(model: ReducedModel) -> ReducedModel:
    return ReducedModel(model.graph.reverse(), tuple(reversed(model.ham_cycle)),
                        model.capacity, model.walk_graph.reverse())


def _wind_segment(model: ReducedModel, asg: Assignment, seg: Sequence[int],
                  start_cluster: int) -> None:
    c = start_cluster
    for v in seg:
        asg.targets[v] = c
        c = model.succ(c)


def incorporate_exceptional(model: ReducedModel, t: RootedOrientedTree,
                            asg: Assignment, exceptionals: Sequence[ExceptionalVertex],
                            r_members: Sequence[Member], kind: str
                            ) -> tuple[Assignment, list[Member]]:
    """Absorb each exceptional vertex into the assignment by reassigning one
    collection member, consuming that member.

    leafy/switchy: the member's leaf or switch moves to the token; the member
    is selected by its root cluster (the token's in-cluster for in-vertex
    roots, out-cluster otherwise).  bare: the path's second vertex moves to
    the token, the third to the token's out-cluster, and one skewed-traverse
    worth of windings reroutes the next segments.  Per-cluster counts change
    by at most one per exceptional (asserted).
    """
    out = asg.copy()
    remaining = list(r_members)
    for exc in exceptionals:
        if any(e.token == exc.token for e in out.tokens):
            raise ValueError(f"token {exc.token} already incorporated")
        before = out.cluster_counts(model.k)
        if kind in ("leafy", "switchy"):
            _incorporate_leaf_or_switch(model, t, out, exc, remaining)
        elif kind == "bare":
            _incorporate_bare(model, t, out, exc, remaining)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        out.tokens.append(exc)
        after = out.cluster_counts(model.k)
        delta = after - before
        assert delta.sum() == -1 and (delta >= -1).all() and (delta <= 1).all(), \
            "incorporation disturbed cluster counts beyond the documented bounds"
    return out, remaining


def _incorporate_leaf_or_switch(model: ReducedModel, t: RootedOrientedTree,
                                asg: Assignment, exc: ExceptionalVertex,
                                remaining: list[Member]) -> None:
    probe = remaining[0] if remaining else None
    if probe is None:
        raise SupplyError("no collection members left")
    in_root = _member_root_is_in_vertex(t, probe)
    needed = exc.i_plus if in_root else exc.i_minus
    member = _take_member(remaining, asg, needed)
    child = member.vertices[1]
    expected = model.pred(needed) if in_root else model.succ(needed)
    assert int(asg.targets[child]) == expected, \
        "member child is not on the Hamilton step of its root"
    asg.targets[child] = -(exc.token + 1)


def _incorporate_bare(model: ReducedModel, t: RootedOrientedTree,
                      asg: Assignment, exc: ExceptionalVertex,
                      remaining: list[Member]) -> None:
    k = model.k
    member = _take_member(remaining, asg, exc.i_minus, by_start=True)
    path = member.vertices
    p = len(path)
    if p % k != 0:
        raise ValueError("bare members must have length divisible by the "
                         "cluster count")
    c0 = int(asg.targets[path[0]])
    for j, v in enumerate(path):
        assert int(asg.targets[v]) == model.succ(c0, j), \
            "bare member does not wind around the Hamilton cycle"
    tr = _traverse(model, exc.i_plus, model.succ(exc.i_minus, 3))
    if 3 + tr.length * k > p - 1:
        raise TraverseError(
            f"member of {p} vertices cannot host a traverse of length {tr.length}")
    asg.targets[path[1]] = -(exc.token + 1)
    asg.targets[path[2]] = exc.i_plus
    for j, (_, head) in enumerate(tr.arcs):
        seg = path[3 + j * k: 3 + (j + 1) * k]
        _wind_segment(model, asg, seg, head)


# -- balancing ----------------------------------------------------------------

class BalanceError(RuntimeError):
    """Imbalance remains but no over/under cluster pair can be fixed."""


def balance_assignment(model: ReducedModel, t: RootedOrientedTree,
                       asg: Assignment, r_members: Sequence[Member], kind: str,
                       capacity: Optional[np.ndarray] = None
                       ) -> tuple[Assignment, list[Member], int]:
    """Reassign collection members until every cluster holds exactly its
    capacity.  Each round moves one unit from the smallest over-full cluster
    to the smallest under-full one via a skewed-traverse chain, consuming one
    member per chain arc (leafy/switchy) or one member path (bare).

    Returns (assignment, unused members, rounds).  Total imbalance drops by
    exactly 2 per round (asserted), so termination is guaranteed.
    """
    cap = np.asarray(model.capacity if capacity is None else capacity,
                     dtype=np.int64)
    out = asg.copy()
    remaining = list(r_members)
    assigned = int((out.targets >= 0).sum())
    if cap.sum() != assigned:
        raise ValueError(f"capacities sum to {cap.sum()} but {assigned} tree "
                         f"vertices are cluster-assigned")
    rounds = 0
    while True:
        counts = out.cluster_counts(model.k)
        diff = counts - cap
        imbalance = int(np.abs(diff).sum())
        if imbalance == 0:
            return out, remaining, rounds
        over = np.flatnonzero(diff > 0)
        under = np.flatnonzero(diff < 0)
        if not len(over) or not len(under):
            raise BalanceError("imbalance remains but no over/under pair exists")
        i_over, i_under = int(over[0]), int(under[0])
        if kind in ("leafy", "switchy"):
            _balance_leaf_or_switch(model, t, out, remaining, i_over, i_under)
        elif kind == "bare":
            _balance_bare(model, out, remaining, i_over, i_under)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        rounds += 1
        new_imbalance = int(np.abs(out.cluster_counts(model.k) - cap).sum())
        assert new_imbalance == imbalance - 2, \
            "balancing round did not reduce the imbalance by exactly 2"


def _balance_leaf_or_switch(model: ReducedModel, t: RootedOrientedTree,
                            asg: Assignment, remaining: list[Member],
                            i_over: int, i_under: int) -> None:
    if not remaining:
        raise SupplyError("no collection members left to balance with")
    # In-vertex-rooted members are the mirror image; run the same chain on
    # the reversed model (cluster ids are unchanged by reversal).
    mdl = model if not _member_root_is_in_vertex(t, remaining[0]) \
        else _reversed_model(model)
    tr = _traverse(mdl, mdl.pred(i_over), i_under)
    for src, head in tr.arcs:
        member = _take_member(remaining, asg, src)
        child = member.vertices[1]
        assert int(asg.targets[child]) == mdl.succ(src), \
            "member child strayed from the Hamilton step of its root"
        asg.targets[child] = head


def _balance_bare(model: ReducedModel, asg: Assignment,
                  remaining: list[Member], i_over: int, i_under: int) -> None:
    k = model.k
    if not remaining:
        raise SupplyError("no collection members left to balance with")
    member = _take_member(remaining, asg, model.pred(i_over), by_start=True)
    path = member.vertices
    p = len(path)
    w1 = _traverse(model, model.pred(i_over), i_under)
    w2 = _traverse(model, i_under, model.succ(i_over))
    if (w1.length + w2.length) * k + 1 > p - 2:
        raise TraverseError(
            f"member of {p} vertices cannot host traverses of lengths "
            f"{w1.length} and {w2.length}")
    for j, (_, head) in enumerate(w1.arcs):
        _wind_segment(model, asg, path[1 + j * k: 1 + (j + 1) * k], head)
    asg.targets[path[1 + w1.length * k]] = i_under
    base = 2 + w1.length * k
    for j, (_, head) in enumerate(w2.arcs):
        _wind_segment(model, asg, path[base + j * k: base + (j + 1) * k], head)


# -- validation ----------------------------------------------------------------

@dataclass
class AssignmentVerdict:
    ok: bool
    violations: list[str]
    counts: np.ndarray
    capacity: Optional[np.ndarray]
    token_usage: dict[int, int]


def validate_assignment(model: ReducedModel, t: RootedOrientedTree,
                        asg: Assignment, capacity: Optional[np.ndarray] = None,
                        p_members: Sequence[Member] = ()) -> AssignmentVerdict:
    """Structured audit: every tree arc maps to a model arc with the right
    direction (token arcs against the token's declared clusters), each token
    is used exactly once, per-cluster counts against capacities when given,
    and the Hamilton-cycle flag for the protected collection."""
    violations = []
    tokens = {-(e.token + 1): e for e in asg.tokens}
    for v in range(t.n):
        tv = int(asg.targets[v])
        if tv >= model.k or (tv < 0 and tv not in tokens):
            violations.append(f"vertex {v} has invalid target {tv}")
    for tail, head in t.arcs():
        ct, ch = int(asg.targets[tail]), int(asg.targets[head])
        if ct < 0 and ch < 0:
            violations.append(f"arc ({tail},{head}) joins two tokens")
        elif ct < 0:
            exc = tokens.get(ct)
            if exc is not None and ch != exc.i_plus:
                violations.append(
                    f"arc ({tail},{head}): token {exc.token} must send into "
                    f"cluster {exc.i_plus}, not {ch}")
        elif ch < 0:
            exc = tokens.get(ch)
            if exc is not None and ct != exc.i_minus:
                violations.append(
                    f"arc ({tail},{head}): token {exc.token} must receive from "
                    f"cluster {exc.i_minus}, not {ct}")
        elif (ct, ch) not in model.graph.arcs:
            violations.append(
                f"arc ({tail},{head}) maps to missing cluster arc ({ct},{ch})")
    usage: dict[int, int] = {e.token: 0 for e in asg.tokens}
    for v in range(t.n):
        tok = asg.token_of(v)
        if tok is not None and tok in usage:
            usage[tok] += 1
    for tok, cnt in usage.items():
        if cnt != 1:
            violations.append(f"token {tok} used by {cnt} vertices (want 1)")
    counts = asg.cluster_counts(model.k)
    cap = None
    if capacity is not None:
        cap = np.asarray(capacity, dtype=np.int64)
        if not (counts == cap).all():
            violations.append("per-cluster counts differ from capacities")
    if p_members and not members_on_cycle(model, t, asg, p_members):
        violations.append("a protected member arc left the Hamilton cycle")
    return AssignmentVerdict(not violations, violations, counts, cap, usage)


def dump_assignment(model: ReducedModel, t: RootedOrientedTree,
                    asg: Assignment, stats: Optional[dict] = None) -> dict:
    """JSON-ready dump: tree vertex -> cluster index or "u<token>", plus a
    stats block; key order is stable (vertex order)."""
    mapping = {}
    for v in range(t.n):
        tok = asg.token_of(v)
        mapping[str(v)] = f"u{tok}" if tok is not None else int(asg.targets[v])
    block = {"k": model.k, "counts": asg.cluster_counts(model.k).tolist(),
             "capacity": model.capacity.tolist(), "tokens": len(asg.tokens)}
    if stats:
        block.update(stats)
    return {"assignment": mapping, "stats": block}


# -- batched statistics (vectorised across seeds) ------------------------------

def batched_cluster_counts(model: ReducedModel, t: RootedOrientedTree,
                           n_walks: int, seed) -> np.ndarray:
    """Per-cluster visit counts of `n_walks` independent semi-random
    assignments with an empty collection, run level-by-level with shared
    vectorised draws.  Returns an (n_walks, k) matrix.

    Statistically identical to repeated semi_random_assignment with an empty
    collection; draws are vectorised so large trees and many repetitions stay
    cheap.
    """
    rng = np.random.default_rng(seed)
    k = model.k
    deg = regular_degree(model.walk_graph)
    if deg is None or deg == 0:
        raise ModelError("batched statistics need a regular walk graph")
    out_nbrs = np.array([model.walk_graph.out(v) for v in range(k)],
                        dtype=np.int64)
    in_nbrs = np.array([model.walk_graph.inn(v) for v in range(k)],
                       dtype=np.int64)
    levels: dict[int, list[int]] = {}
    for v in t.topdown_order():
        levels.setdefault(t.depth(v), []).append(v)
    counts = np.zeros((n_walks, k), dtype=np.int64)
    walk_rows = np.arange(n_walks)
    cur = {t.root: rng.integers(k, size=n_walks)}
    counts[walk_rows, cur[t.root]] += 1
    for depth in range(1, max(levels) + 1 if levels else 1):
        nxt: dict[int, np.ndarray] = {}
        for v in levels.get(depth, []):
            parent_t = cur[t.parent[v]]
            draws = rng.integers(deg, size=n_walks)
            table = out_nbrs if t.arc_dir[v] == "+" else in_nbrs
            tv = table[parent_t, draws]
            nxt[v] = tv
            counts[walk_rows, tv] += 1
        cur = nxt
    return counts
