"""Embedding oracles: exact backtracking on small hosts, synthetic blow-up
hosts, and a best-effort greedy embedder guided by a balanced assignment.

An embedding is an injective map from tree vertices to host vertices sending
every tree arc to a host arc of the same direction.  Every produced embedding
is re-verified by an independent pass (verify_embedding) that shares no code
with the searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assign import Assignment, ExceptionalVertex, ReducedModel
from .digraph import OrientedDigraph
from .trees import RootedOrientedTree


@dataclass
class EmbedResult:
    status: str                      # 'found' | 'none' | 'budget'
    mapping: Optional[dict[int, int]]
    nodes: int                       # backtracking nodes expanded

    @property
    def found(self) -> bool:
        return self.status == "found"


def verify_embedding(t: RootedOrientedTree, g: OrientedDigraph,
                     mapping: dict[int, int]) -> bool:
    """Independent re-verification: injectivity plus arc preservation."""
    if len(mapping) != t.n:
        return False
    images = set(mapping.values())
    if len(images) != t.n or not all(0 <= x < g.n for x in images):
        return False
    return all((mapping[u], mapping[v]) in g.arcs for u, v in t.arcs())


def brute_force_embed(t: RootedOrientedTree, g: OrientedDigraph,
                      budget: int = 10_000_000) -> EmbedResult:
    """Exact backtracking search for a copy of the tree in the host.

    Tree vertices are processed top-down; host candidates are scanned in
    ascending static-degree order.  Pruning: a candidate must keep enough
    unused out/in-neighbours for the vertex's remaining children.  The result
    is exact whenever the budget is not exhausted (three-valued honesty).
    """
    if t.n > g.n:
        return EmbedResult("none", None, 0)
    order = t.topdown_order()
    out_masks = g.out_masks()
    in_masks = g.in_masks()
    full = (1 << g.n) - 1
    need_out = [0] * t.n
    need_in = [0] * t.n
    for v in range(t.n):
        for c in t.children(v):
            if t.arc_dir[c] == "+":
                need_out[v] += 1
            else:
                need_in[v] += 1
    degree_rank = sorted(range(g.n),
                         key=lambda x: (len(g.out(x)) + len(g.inn(x)), x))
    image = [-1] * t.n
    nodes = 0

    def feasible(x: int, tv: int, used: int) -> bool:
        free = ~(used | (1 << x))
        return ((out_masks[x] & free).bit_count() >= need_out[tv]
                and (in_masks[x] & free).bit_count() >= need_in[tv])

    def candidates(i: int, used: int):
        tv = order[i]
        if i == 0:
            for x in degree_rank:
                yield x
            return
        p = t.parent[tv]
        mask = out_masks[image[p]] if t.arc_dir[tv] == "+" else in_masks[image[p]]
        mask &= full & ~used
        for x in degree_rank:
            if mask >> x & 1:
                yield x

    def search(i: int, used: int) -> Optional[str]:
        nonlocal nodes
        if i == t.n:
            return "found"
        tv = order[i]
        for x in candidates(i, used):
            nodes += 1
            if nodes > budget:
                return "budget"
            if not feasible(x, tv, used):
                continue
            image[tv] = x
            res = search(i + 1, used | (1 << x))
            if res is not None:
                if res == "found":
                    return res
                image[tv] = -1
                return res
            image[tv] = -1
        return None

    res = search(0, 0)
    if res == "found":
        mapping = {v: image[v] for v in range(t.n)}
        assert verify_embedding(t, g, mapping)
        return EmbedResult("found", mapping, nodes)
    if res == "budget":
        return EmbedResult("budget", None, nodes)
    return EmbedResult("none", None, nodes)


# -- synthetic blow-up hosts ---------------------------------------------------

@dataclass
class BlowUpHost:
    graph: OrientedDigraph
    clusters: list[list[int]]               # host vertices per cluster
    token_hosts: dict[int, int]             # exceptional token -> host vertex
    floor_resamples: int                    # extra arcs added to meet degree floors


def blow_up(model: ReducedModel, cluster_sizes: Sequence[int], density: float,
            seed, exceptionals: Sequence[ExceptionalVertex] = (),
            max_floor_rounds: int = 64) -> BlowUpHost:
    """Random host realising every model arc as a bipartite arc block of the
    given density between the corresponding clusters.

    Hamilton-cycle blocks get a minimum-degree floor: every vertex keeps at
    least (density/2) * cluster_size arcs into the next cluster and from the
    previous one, topped up by resampling when the random block falls short.
    Exceptional vertices become dedicated host vertices wired densely to
    their declared clusters.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    k = model.k
    if len(cluster_sizes) != k:
        raise ValueError("one cluster size per cluster required")
    clusters: list[list[int]] = []
    base = 0
    for size in cluster_sizes:
        clusters.append(list(range(base, base + int(size))))
        base += int(size)
    token_hosts = {e.token: base + i for i, e in enumerate(exceptionals)}
    n_host = base + len(exceptionals)
    arcs: set[tuple[int, int]] = set()
    cycle_pairs = {(c, model.succ(c)) for c in range(k)}
    for (ci, cj) in model.graph.arcs:
        a, b = clusters[ci], clusters[cj]
        block = rng.random((len(a), len(b))) < density
        for i in np.flatnonzero(block.any(axis=1)):
            for j in np.flatnonzero(block[i]):
                arcs.add((a[int(i)], b[int(j)]))
    # Degree floors on cycle blocks.
    resamples = 0
    for (ci, cj) in cycle_pairs:
        a, b = clusters[ci], clusters[cj]
        floor = max(1, math.ceil(density / 2 * min(len(a), len(b))))
        for _ in range(max_floor_rounds):
            short_out = [u for u in a
                         if sum(1 for v in b if (u, v) in arcs) < floor]
            short_in = [v for v in b
                        if sum(1 for u in a if (u, v) in arcs) < floor]
            if not short_out and not short_in:
                break
            for u in short_out:
                for v in rng.permutation(b):
                    if (u, int(v)) not in arcs:
                        arcs.add((u, int(v)))
                        resamples += 1
                        break
            for v in short_in:
                for u in rng.permutation(a):
                    if (int(u), v) not in arcs:
                        arcs.add((int(u), v))
                        resamples += 1
                        break
    # Exceptional vertices: dense attachment to their declared clusters.
    for e in exceptionals:
        host = token_hosts[e.token]
        for v in clusters[e.i_plus]:
            if rng.random() < max(density, 0.5):
                arcs.add((host, v))
        for v in clusters[e.i_minus]:
            if rng.random() < max(density, 0.5):
                arcs.add((v, host))
        if not any((host, v) in arcs for v in clusters[e.i_plus]):
            arcs.add((host, clusters[e.i_plus][0]))
        if not any((v, host) in arcs for v in clusters[e.i_minus]):
            arcs.add((clusters[e.i_minus][0], host))
    return BlowUpHost(OrientedDigraph(n_host, arcs), clusters, token_hosts,
                      resamples)


@dataclass
class GreedyReport:
    status: str                       # 'found' | 'failed'
    mapping: Optional[dict[int, int]]
    embedded: int                     # vertices placed before success/failure
    failed_vertex: Optional[int]
    retries: int


def greedy_blowup_embed(host: BlowUpHost, model: ReducedModel,
                        t: RootedOrientedTree, asg: Assignment, seed
                        ) -> GreedyReport:
    """Best-effort greedy embedding following the assignment.

    Vertices are embedded top-down into any unused host vertex of their
    assigned cluster adjacent (in the right direction) to the parent's
    image; token vertices go to their dedicated host vertex.  On a dead end
    the parent is re-embedded once among its remaining candidates (depth-1
    local retry); otherwise a failure report with progress statistics is
    returned.  No spanning guarantee is claimed.
    """
    rng = np.random.default_rng(seed)
    g = host.graph
    order = t.topdown_order()
    image: dict[int, int] = {}
    used: set[int] = set()
    retries = 0

    def pool(tv: int) -> list[int]:
        tok = asg.token_of(tv)
        if tok is not None:
            hv = host.token_hosts[tok]
            return [hv] if hv not in used else []
        cluster = int(asg.targets[tv])
        if tv == t.root:
            cand = [x for x in host.clusters[cluster] if x not in used]
        else:
            p_img = image[t.parent[tv]]
            nbrs = g.out(p_img) if t.arc_dir[tv] == "+" else g.inn(p_img)
            cset = set(host.clusters[cluster])
            cand = [x for x in nbrs if x in cset and x not in used]
        return cand

    def place(tv: int) -> bool:
        cand = pool(tv)
        if not cand:
            return False
        image[tv] = int(cand[rng.integers(len(cand))])
        used.add(image[tv])
        return True

    def unplace(tv: int) -> None:
        used.discard(image.pop(tv))

    def retry_parent(tv: int) -> bool:
        # Depth-1 local retry: re-pick the parent's image and re-place the
        # parent's already-embedded children (their arcs depend on it) plus tv.
        nonlocal retries
        p = t.parent[tv]
        if p == -1:
            return False
        group = [c for c in t.children(p) if c in image] + [tv]
        saved = {p: image[p], **{c: image[c] for c in group if c in image}}
        for c in group:
            if c in image:
                unplace(c)
        unplace(p)
        for cand in rng.permutation(pool(p)):
            retries += 1
            image[p] = int(cand)
            used.add(image[p])
            placed = []
            ok = True
            for c in group:
                if place(c):
                    placed.append(c)
                else:
                    ok = False
                    break
            if ok:
                return True
            for c in placed:
                unplace(c)
            unplace(p)
        # Restore the original partial embedding before reporting failure.
        image[p] = saved[p]
        used.add(saved[p])
        for c, x in saved.items():
            if c != p and c != tv:
                image[c] = x
                used.add(x)
        return False

    for tv in order:
        if place(tv):
            continue
        if not retry_parent(tv):
            return GreedyReport("failed", None, len(image), tv, retries)
    mapping = dict(image)
    assert verify_embedding(t, g, mapping)
    return GreedyReport("found", mapping, len(mapping), None, retries)
