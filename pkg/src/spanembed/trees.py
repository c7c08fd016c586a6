"""Rooted oriented trees: structure analysis, splitting, and the collections
that drive the assignment stage.

Path lengths in this module count vertices: a bare path "of length k" has k
vertices and k-1 arcs, and its inner vertices all have underlying degree 2.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class TreeFormatError(ValueError):
    """A tree string violates the `t n root` / edge-lines text format."""


class CollectionsError(RuntimeError):
    """Collection selection could not produce a nonempty pair (P, R)."""


class RootedOrientedTree:
    """Immutable rooted tree with a per-arc direction flag.

    parent[v] is -1 for the root; arc_dir[v] is '+' when the arc runs
    parent->v and '-' when it runs v->parent (empty string at the root).
    """

    __slots__ = ("n", "root", "parent", "arc_dir", "_children", "_order",
                 "_degree", "_depth")

    def __init__(self, parent: Sequence[int], arc_dir: Sequence[str], root: int):
        n = len(parent)
        if not 0 <= root < n:
            raise ValueError("root out of range")
        if parent[root] != -1:
            raise ValueError("root must have parent -1")
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            p = parent[v]
            if v == root:
                continue
            if not 0 <= p < n:
                raise ValueError(f"vertex {v} has invalid parent {p}")
            if arc_dir[v] not in "+-":
                raise ValueError(f"vertex {v} must carry direction '+' or '-'")
            children[p].append(v)
        self.n = n
        self.root = root
        self.parent = tuple(int(p) for p in parent)
        self.arc_dir = tuple(arc_dir[v] if v != root else "" for v in range(n))
        self._children = tuple(tuple(sorted(c)) for c in children)
        # BFS from the root doubles as a connectivity/acyclicity audit.
        order = [root]
        depth = [-1] * n
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for c in self._children[u]:
                depth[c] = depth[u] + 1
                order.append(c)
                queue.append(c)
        if len(order) != n:
            raise ValueError("parent links do not form a tree rooted as stated")
        self._order = tuple(order)
        self._depth = tuple(depth)
        deg = [len(c) for c in self._children]
        for v in range(n):
            if v != root:
                deg[v] += 1
        self._degree = tuple(deg)

    # -- views -----------------------------------------------------------

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def topdown_order(self) -> tuple[int, ...]:
        """BFS order from the root: every vertex is preceded by its parent."""
        return self._order

    def depth(self, v: int) -> int:
        return self._depth[v]

    def degree(self, v: int) -> int:
        """Underlying (undirected) degree."""
        return self._degree[v]

    @property
    def max_degree(self) -> int:
        return max(self._degree) if self.n else 0

    def arcs(self):
        """Directed arcs (u, v) of the tree."""
        for v in range(self.n):
            if v == self.root:
                continue
            p = self.parent[v]
            yield (p, v) if self.arc_dir[v] == "+" else (v, p)

    def neighbours(self, v: int) -> tuple[int, ...]:
        if v == self.root:
            return self._children[v]
        return self._children[v] + (self.parent[v],)

    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if self._degree[v] == 1)

    def arc_between(self, u: int, v: int) -> tuple[int, int]:
        """The directed arc on the tree edge {u, v}; v must be u's child or
        vice versa."""
        if self.parent[v] == u:
            return (u, v) if self.arc_dir[v] == "+" else (v, u)
        if self.parent[u] == v:
            return (v, u) if self.arc_dir[u] == "+" else (u, v)
        raise ValueError(f"{u} and {v} are not adjacent in the tree")

    def __repr__(self):
        return f"RootedOrientedTree(n={self.n}, root={self.root}, Δ={self.max_degree})"


# -- text format ---------------------------------------------------------
#
# Line 1: "t n root"; then n-1 lines "parent child d" with d in {+,-}:
# '+' means the arc runs parent->child, '-' the reverse.

def parse_tree(text: str) -> RootedOrientedTree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TreeFormatError("empty input")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "t":
        raise TreeFormatError(f"malformed header {lines[0]!r}")
    try:
        n, root = int(head[1]), int(head[2])
    except ValueError:
        raise TreeFormatError(f"malformed header {lines[0]!r}") from None
    if len(lines) - 1 != max(n - 1, 0):
        raise TreeFormatError(f"expected {n - 1} edge lines, found {len(lines) - 1}")
    parent = [-1] * n
    arc_dir = [""] * n
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3 or parts[2] not in "+-":
            raise TreeFormatError(f"malformed edge line {ln!r}")
        try:
            p, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise TreeFormatError(f"malformed edge line {ln!r}") from None
        if not (0 <= p < n and 0 <= c < n) or c == root or c in seen:
            raise TreeFormatError(f"bad edge line {ln!r}")
        seen.add(c)
        parent[c] = p
        arc_dir[c] = parts[2]
    try:
        return RootedOrientedTree(parent, arc_dir, root)
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None


def serialize_tree(t: RootedOrientedTree) -> str:
    lines = [f"t {t.n} {t.root}\n"]
    for v in t.topdown_order():
        if v != t.root:
            lines.append(f"{t.parent[v]} {v} {t.arc_dir[v]}\n")
    return "".join(lines)


# -- generators ------------------------------------------------------------

def from_edges(n: int, edges: Iterable[tuple[int, int]], root: int = 0
               ) -> RootedOrientedTree:
    """Build a tree from directed arcs (u, v); the underlying edges must form
    a tree containing the root."""
    adj: list[list[tuple[int, str]]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append((v, "+"))
        adj[v].append((u, "-"))
    parent = [-1] * n
    arc_dir = [""] * n
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y, d in adj[x]:
            if y not in seen:
                seen.add(y)
                parent[y] = x
                arc_dir[y] = d
                queue.append(y)
    if len(seen) != n:
        raise ValueError("edges do not span a tree on n vertices")
    return RootedOrientedTree(parent, arc_dir, root)


def directed_path(n: int, root: int = 0) -> RootedOrientedTree:
    return from_edges(n, ((i, i + 1) for i in range(n - 1)), root)


def antidirected_path(n: int, root: int = 0) -> RootedOrientedTree:
    edges = [(i, i + 1) if i % 2 == 0 else (i + 1, i) for i in range(n - 1)]
    return from_edges(n, edges, root)


def oriented_path(pattern: str, root: int = 0) -> RootedOrientedTree:
    """Path whose i-th arc follows pattern[i] ('+' forward, '-' backward)."""
    edges = [(i, i + 1) if c == "+" else (i + 1, i)
             for i, c in enumerate(pattern)]
    return from_edges(len(pattern) + 1, edges, root)


def star(n: int, direction: str = "+") -> RootedOrientedTree:
    """Star with centre 0; '+' sends all arcs outward (an out-star)."""
    if direction == "+":
        return from_edges(n, ((0, i) for i in range(1, n)))
    return from_edges(n, ((i, 0) for i in range(1, n)))


def star_of_stars(branches: int, leaves_per: int, direction: str = "+"
                  ) -> RootedOrientedTree:
    """Centre -> branch vertices -> leaves, all arcs pointing the same way."""
    n = 1 + branches + branches * leaves_per
    edges = []
    for b in range(branches):
        mid = 1 + b
        edges.append((0, mid) if direction == "+" else (mid, 0))
        for j in range(leaves_per):
            leaf = 1 + branches + b * leaves_per + j
            edges.append((mid, leaf) if direction == "+" else (leaf, mid))
    return from_edges(n, edges)


def spider(legs: int, leg_len: int, pattern: Optional[str] = None
           ) -> RootedOrientedTree:
    """Spider with the given number of legs of `leg_len` vertices each (plus
    the centre).  Arcs point outward unless a per-step pattern is given."""
    n = 1 + legs * leg_len
    edges = []
    for leg in range(legs):
        prev = 0
        for j in range(leg_len):
            v = 1 + leg * leg_len + j
            step = pattern[j % len(pattern)] if pattern else "+"
            edges.append((prev, v) if step == "+" else (v, prev))
            prev = v
    return from_edges(n, edges)


def balanced_binary_tree(depth: int, seed=None) -> RootedOrientedTree:
    """Complete binary tree of the given depth; arc directions are random
    when a seed is given, else all point away from the root."""
    n = 2 ** (depth + 1) - 1
    rng = np.random.default_rng(seed) if seed is not None else None
    edges = []
    for v in range(1, n):
        p = (v - 1) // 2
        if rng is not None and rng.random() < 0.5:
            edges.append((v, p))
        else:
            edges.append((p, v))
    return from_edges(n, edges)


def random_tree(n: int, delta: int, seed) -> RootedOrientedTree:
    """Random attachment tree truncated at underlying degree `delta`, with a
    fair coin per arc direction."""
    if delta < 2:
        raise ValueError("delta must be at least 2")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    degree = np.zeros(n, dtype=np.int64)
    parent = [-1] * n
    arc_dir = [""] * n
    available = [0]
    for v in range(1, n):
        idx = int(rng.integers(len(available)))
        p = available[idx]
        parent[v] = p
        arc_dir[v] = "+" if rng.random() < 0.5 else "-"
        degree[p] += 1
        degree[v] += 1
        if degree[p] >= delta:
            available[idx] = available[-1]
            available.pop()
        if degree[v] < delta:
            available.append(v)
        if not available and v < n - 1:
            raise ValueError(f"(n={n}, delta={delta}) infeasible")
    return RootedOrientedTree(parent, arc_dir, 0)


# -- leaves, bare paths, switches -----------------------------------------

def leaves_by_direction(t: RootedOrientedTree) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(out-leaves, in-leaves): leaves whose single arc leaves resp. enters
    them.  Disjoint, and together they are exactly the leaf set."""
    out_leaves, in_leaves = [], []
    for v in t.leaves():
        if v == t.root:
            child = t.children(v)[0]
            outgoing = t.arc_dir[child] == "+"
        else:
            outgoing = t.arc_dir[v] == "-"
        (out_leaves if outgoing else in_leaves).append(v)
    return tuple(out_leaves), tuple(in_leaves)


def _degree2_chains(t: RootedOrientedTree) -> list[list[int]]:
    """Maximal chains usable for bare-path harvesting.

    Each chain is a maximal run of degree-2 vertices, extended by an adjacent
    endpoint when that endpoint is a leaf (a leaf belongs to exactly one
    chain, so including it keeps chains vertex-disjoint; branch vertices are
    never included).
    """
    n = t.n
    deg = [t.degree(v) for v in range(n)]
    chains = []
    visited = [False] * n
    for s in range(n):
        if visited[s] or deg[s] != 2:
            continue
        # Walk to one end of the run of degree-2 vertices.
        chain = [s]
        visited[s] = True
        for first_nbr in t.neighbours(s):
            cur, prev = first_nbr, s
            while deg[cur] == 2 and not visited[cur]:
                visited[cur] = True
                chain.append(cur)
                nxt = [w for w in t.neighbours(cur) if w != prev]
                prev, cur = cur, nxt[0]
            if deg[cur] == 1 and not visited[cur]:
                visited[cur] = True
                chain.append(cur)
            chain.reverse()
        chains.append(chain)
    # Isolated edges between two leaves (n = 2) have no degree-2 vertices.
    if n == 2:
        chains.append([0, 1])
    return chains


def bare_paths(t: RootedOrientedTree, k: int) -> list[tuple[int, ...]]:
    """Greedy maximal collection of vertex-disjoint bare paths on k vertices.

    Whenever the tree has fewer than n/4k leaves, the returned collection has
    at least n/4k members (the leafy/bare dichotomy, asserted here).
    """
    if k <= 2 or t.n <= 2:
        raise ValueError("need k > 2 and n > 2")
    paths = []
    for chain in _degree2_chains(t):
        for start in range(0, len(chain) - k + 1, k):
            paths.append(tuple(chain[start:start + k]))
    if len(t.leaves()) < t.n / (4 * k):
        assert len(paths) >= t.n / (4 * k), \
            "bare-path harvest fell short of the guaranteed n/4k"
    return paths


def path_pattern(t: RootedOrientedTree, path: Sequence[int]) -> str:
    """Arc-direction pattern along a vertex sequence of tree-adjacent vertices."""
    out = []
    for u, v in zip(path, path[1:]):
        a, b = t.arc_between(u, v)
        out.append("+" if (a, b) == (u, v) else "-")
    return "".join(out)


def orientation_class(pattern: str) -> str:
    """Canonical representative of a pattern up to traversal reversal."""
    flipped = "".join("+" if c == "-" else "-" for c in reversed(pattern))
    return min(pattern, flipped)


def switches(t: RootedOrientedTree) -> list[tuple[int, str]]:
    """Inner degree-2 vertices that are sources or sinks of the orientation."""
    out = []
    for v in range(t.n):
        if t.degree(v) != 2:
            continue
        arcs_out = arcs_in = 0
        for w in t.neighbours(v):
            a, _ = t.arc_between(v, w)
            if a == v:
                arcs_out += 1
            else:
                arcs_in += 1
        if arcs_out == 2:
            out.append((v, "source"))
        elif arcs_in == 2:
            out.append((v, "sink"))
    return out


# -- tree splitting --------------------------------------------------------

def _subtree_sizes(t: RootedOrientedTree) -> list[int]:
    size = [1] * t.n
    for v in reversed(t.topdown_order()):
        if v != t.root:
            size[t.parent[v]] += size[v]
    return size


def split_edge(t: RootedOrientedTree, m: float, delta: int) -> tuple[int, int]:
    """A tree edge whose deletion leaves a component with m..delta*m vertices.

    Returns the edge as (parent, child).  Scans every edge, so the
    postcondition is met exactly whenever the guarantee applies
    (n >= m+1 and max degree <= delta).
    """
    if t.n < m + 1:
        raise ValueError("tree too small for the requested component size")
    if t.max_degree > delta:
        raise ValueError(f"tree has degree {t.max_degree} > delta={delta}")
    size = _subtree_sizes(t)
    for v in t.topdown_order():
        if v == t.root:
            continue
        for comp in (size[v], t.n - size[v]):
            if m - 1e-9 <= comp <= delta * m + 1e-9:
                return (t.parent[v], v)
    raise RuntimeError("no admissible split edge found")  # unreachable under pre


@dataclass
class SideCensus:
    """Counts of witness structures inside one side of a split."""
    vertices: frozenset
    leaves: list[int]
    directed: list[tuple[int, ...]]            # directed bare paths, arc order
    switch_paths: dict[str, list[tuple[int, ...]]]  # per type, paths holding one
    switch_of: dict[tuple[int, ...], int]      # chosen switch per switch path
    oriented4: dict[str, list[tuple[int, ...]]]  # 4-vertex paths by orientation class


@dataclass
class SplitResult:
    edge: tuple[int, int]      # (parent, child) in the original tree
    side_a: frozenset          # component of the parent endpoint
    side_b: frozenset          # component of the child endpoint
    case: str                  # 'a' (leafy), 'b' (bare) or 'c' (switchy)
    t_bound: float             # n / (delta+1)^2
    census_a: SideCensus
    census_b: SideCensus

    @property
    def root_a(self) -> int:
        return self.edge[0]

    @property
    def root_b(self) -> int:
        return self.edge[1]


def _side_census(t: RootedOrientedTree, side: frozenset, k: int) -> SideCensus:
    leaves = [v for v in t.leaves() if v in side]
    directed = []
    switch_paths: dict[str, list[tuple[int, ...]]] = {"source": [], "sink": []}
    switch_of: dict[tuple[int, ...], int] = {}
    plain: list[tuple[int, ...]] = []
    switch_lookup = dict(switches(t))
    for path in bare_paths(t, k) if t.n > 2 and k > 2 else []:
        if not all(v in side for v in path):
            continue
        pattern = path_pattern(t, path)
        if len(set(pattern)) == 1:
            directed.append(path if pattern[0] == "+" else tuple(reversed(path)))
            continue
        inner_types = [(v, switch_lookup[v]) for v in path[1:-1]
                       if v in switch_lookup]
        if inner_types:
            v, typ = inner_types[0]
            switch_paths[typ].append(path)
            switch_of[path] = v
        else:
            plain.append(path)
    # 4-vertex subpaths for the switchy witness come from paths not selected
    # as switch carriers; grouping is by orientation class.
    oriented4: dict[str, list[tuple[int, ...]]] = {}
    for path in plain:
        for start in range(0, len(path) - 3, 4):
            sub = path[start:start + 4]
            oriented4.setdefault(orientation_class(path_pattern(t, sub)), []).append(sub)
    return SideCensus(side, leaves, directed, switch_paths, switch_of, oriented4)


def _census_case(census: SideCensus, t_bound: float, k: int) -> dict[str, bool]:
    leafy = len(census.leaves) >= t_bound / (4 * k)
    bare = len(census.directed) >= t_bound / (8 * k)
    n_switch = max(len(census.switch_paths["source"]),
                   len(census.switch_paths["sink"]))
    n_paths4 = max((len(v) for v in census.oriented4.values()), default=0)
    switchy = (n_switch >= t_bound / (16 * k)
               and n_paths4 >= 3 * t_bound / 512)
    return {"a": leafy, "b": bare, "c": switchy}


def split_tree(t: RootedOrientedTree, k: int, delta: Optional[int] = None
               ) -> SplitResult:
    """Split the tree at one edge so both components hold >= n/(delta+1)^2
    vertices and share a quantitative witness type: many leaves, many
    directed bare paths of length k, or many same-type switches plus
    same-orientation 4-vertex bare paths.

    The candidate edges come from two nested balanced splits (four subtrees,
    pigeonhole over witness types); if none of those three edges verifies,
    every edge is scanned.  The returned censuses are re-verified against
    the stated counts.
    """
    if k < 4:
        raise ValueError("k must be at least 4")
    if t.n < 2:
        raise ValueError("tree must have at least 2 vertices")
    delta = delta if delta is not None else max(t.max_degree, 2)
    if t.max_degree > delta:
        raise ValueError("tree exceeds the stated maximum degree")
    t_bound = t.n / (delta + 1) ** 2

    size = _subtree_sizes(t)

    def sides_of(child: int) -> tuple[frozenset, frozenset]:
        below = set()
        stack = [child]
        while stack:
            x = stack.pop()
            below.add(x)
            stack.extend(t.children(x))
        above = frozenset(range(t.n)) - below
        return frozenset(above), frozenset(below)

    def component_size_within(v: int, part: frozenset) -> int:
        cnt = 0
        stack = [v]
        while stack:
            x = stack.pop()
            if x in part:
                cnt += 1
                stack.extend(c for c in t.children(x) if c in part)
        return cnt

    def candidates() -> list[int]:
        # Two nested balanced splits give four subtrees separated by three
        # edges; by pigeonhole two subtrees share a witness type, so one of
        # those edges is the split we want.  Edges are child endpoints.
        out = []
        try:
            e1 = split_edge(t, t.n / (delta + 1), delta)
        except (ValueError, RuntimeError):
            return out
        out.append(e1[1])
        above, below = sides_of(e1[1])
        for part in (above, below):
            target = len(part) / (delta + 1)
            for v in part:
                if v == t.root or t.parent[v] not in part:
                    continue
                sub = component_size_within(v, part)
                if (target - 1e-9 <= sub <= delta * target + 1e-9
                        or target - 1e-9 <= len(part) - sub <= delta * target + 1e-9):
                    out.append(v)
                    break
        return out

    # Fallback: scan further edges, best-balanced first, with a work cap.
    fallback = sorted((v for v in range(t.n) if v != t.root),
                      key=lambda v: abs(size[v] - t.n / 2))
    cap = 50 if t.n > 2000 else len(fallback)
    tried = set()
    for child in candidates() + fallback[:cap]:
        if child in tried:
            continue
        tried.add(child)
        above, below = sides_of(child)
        if len(above) < t_bound - 1e-9 or len(below) < t_bound - 1e-9:
            continue
        ca = _side_census(t, above, k)
        cb = _side_census(t, below, k)
        cases_a = _census_case(ca, t_bound, k)
        cases_b = _census_case(cb, t_bound, k)
        for case in "abc":
            if cases_a[case] and cases_b[case]:
                return SplitResult((t.parent[child], child), above, below,
                                   case, t_bound, ca, cb)
    raise RuntimeError("no edge admits a common witness type at this scale")


def extract_subtree(t: RootedOrientedTree, vertices: Iterable[int], root: int
                    ) -> tuple[RootedOrientedTree, dict[int, int]]:
    """Standalone copy of the induced subtree, rooted at `root`.

    Returns the new tree and the old->new vertex map.
    """
    verts = set(vertices)
    if root not in verts:
        raise ValueError("root must lie in the vertex set")
    mapping = {}
    order = []
    queue = deque([root])
    seen = {root}
    while queue:
        x = queue.popleft()
        mapping[x] = len(order)
        order.append(x)
        for y in t.neighbours(x):
            if y in verts and y not in seen:
                seen.add(y)
                queue.append(y)
    if len(order) != len(verts):
        raise ValueError("vertex set is not connected")
    parent = [-1] * len(order)
    arc_dir = [""] * len(order)
    queue = deque([root])
    seen = {root}
    while queue:
        x = queue.popleft()
        for y in t.neighbours(x):
            if y in verts and y not in seen:
                seen.add(y)
                a, b = t.arc_between(x, y)
                parent[mapping[y]] = mapping[x]
                arc_dir[mapping[y]] = "+" if (a, b) == (x, y) else "-"
                queue.append(y)
    return RootedOrientedTree(parent, arc_dir, 0), mapping


# -- admissible partitions ---------------------------------------------------

@dataclass
class AdmissibleFamily:
    """Ordered family of disjoint rooted subtrees partitioning V(T); the
    zeroth piece contains the tree root."""
    pieces: list[tuple[tuple[int, ...], int]]   # (vertices, piece root)

    @property
    def roots(self) -> list[int]:
        return [r for _, r in self.pieces]

    def piece_of(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int64)
        for i, (verts, _) in enumerate(self.pieces):
            for v in verts:
                out[v] = i
        return out


def admissible_partition(t: RootedOrientedTree, K: int) -> AdmissibleFamily:
    """Carve off deepest subtrees of size >= K until only the root piece is
    left.  Every carved piece has K..delta*K vertices; the root piece has at
    most K except in the edge case where the root itself qualified, which is
    reported as-is (it is then at most delta*K).
    """
    if K < 1:
        raise ValueError("K must be positive")
    size = _subtree_sizes(t)
    removed = [False] * t.n
    pieces: list[tuple[tuple[int, ...], int]] = []
    by_depth = sorted((v for v in range(t.n) if v != t.root),
                      key=lambda v: (-t.depth(v), v))
    for v in by_depth:
        if removed[v] or size[v] < K:
            continue
        verts = []
        stack = [v]
        while stack:
            x = stack.pop()
            if removed[x]:
                continue
            removed[x] = True
            verts.append(x)
            stack.extend(c for c in t.children(x) if not removed[c])
        pieces.append((tuple(sorted(verts)), v))
        # Deduct the carved size along the path to the root.
        p = t.parent[v]
        while p != -1:
            size[p] -= len(verts)
            p = t.parent[p]
    remainder = tuple(sorted(v for v in range(t.n) if not removed[v]))
    family = [(remainder, t.root)] + pieces[::-1]
    return AdmissibleFamily(family)


def validate_admissible(t: RootedOrientedTree, fam: AdmissibleFamily
                        ) -> list[str]:
    """Structural audit of conditions: root piece holds the root, pieces
    partition V(T), every crossing edge meets a piece root, and crossing
    pairs are ordered by root depth."""
    problems = []
    piece = fam.piece_of(t.n)
    if (piece < 0).any():
        problems.append("pieces do not cover V(T)")
    total = sum(len(verts) for verts, _ in fam.pieces)
    if total != t.n:
        problems.append("pieces overlap or misscount")
    if fam.pieces and fam.pieces[0][1] != t.root:
        problems.append("piece 0 is not rooted at the tree root")
    for i, (verts, r) in enumerate(fam.pieces):
        if r not in verts and verts:
            problems.append(f"piece {i} does not contain its root")
    for v in range(t.n):
        if v == t.root:
            continue
        i, j = int(piece[t.parent[v]]), int(piece[v])
        if i == j:
            continue
        _, ri = fam.pieces[i][0], fam.pieces[i][1]
        rj = fam.pieces[j][1]
        if v != rj and t.parent[v] != ri:
            problems.append(f"crossing edge ({t.parent[v]},{v}) misses both roots")
        closer, farther = (i, j) if t.depth(fam.pieces[i][1]) <= t.depth(rj) else (j, i)
        if closer > farther:
            problems.append(f"crossing pair ({i},{j}) violates root-distance order")
    return problems


def family_topdown_order(t: RootedOrientedTree, fam: AdmissibleFamily
                         ) -> list[int]:
    """Concatenated per-piece top-down orders; globally top-down because
    crossing edges always enter a piece at its root and pieces are ordered
    by distance to the tree root."""
    order = []
    for verts, r in fam.pieces:
        verts = set(verts)
        queue = deque([r] if verts else [])
        seen = {r} if verts else set()
        while queue:
            x = queue.popleft()
            order.append(x)
            for y in t.children(x):
                if y in verts and y not in seen:
                    seen.add(y)
                    queue.append(y)
    return order


def is_topdown(t: RootedOrientedTree, order: Sequence[int]) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    return len(pos) == t.n and all(
        pos[t.parent[v]] < pos[v] for v in range(t.n) if v != t.root)


# -- collection selection ----------------------------------------------------

@dataclass(frozen=True)
class Member:
    """One subtree of a collection.

    `vertices` are ordered: leafy members are (parent, leaf); switchy members
    (parent-of-switch, switch, child-of-switch); bare members list the path
    in arc order, starting with its out-vertex.  `root` is the member vertex
    closest to the tree root.
    """
    vertices: tuple[int, ...]
    root: int

    @property
    def start(self) -> int:
        return self.vertices[0]


@dataclass
class TreeCollections:
    kind: str
    p_members: list[Member]
    r_members: list[Member]
    report: dict = field(default_factory=dict)

    def all_members(self) -> list[Member]:
        return self.p_members + self.r_members


def default_lambda(delta: int) -> float:
    return 1.0 / (4 * (delta + 1) ** 2)


def bare_segment_length(gamma: float, k_b: int) -> int:
    """Member length for the bare case; a positive multiple of k_b by
    construction."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    return 3 * math.ceil(8.0 / gamma) * k_b


def _thin_by_distance(t: RootedOrientedTree, cands: list[tuple[int, ...]],
                      radius: int, blocked0: set[int]) -> list[tuple[int, ...]]:
    """Greedy selection keeping selected vertex sets pairwise further apart
    than `radius` and clear of an initial blocked set."""
    blocked = set(blocked0)
    picked = []
    for cand in cands:
        if any(v in blocked for v in cand):
            continue
        picked.append(cand)
        ball = set(cand)
        frontier = set(cand)
        for _ in range(radius):
            frontier = {w for v in frontier for w in t.neighbours(v)} - ball
            ball |= frontier
        blocked |= ball
    return picked


def select_collections(t: RootedOrientedTree, case: str, *, ell: int = 0,
                       gamma: float = 0.5, k_b: int = 1,
                       lam: Optional[float] = None) -> TreeCollections:
    """Build the two collections (P, R) of vertex-disjoint root-free subtrees
    used by the assignment stage, per the witness type of the tree.

    leafy: 2-vertex subtrees of majority-direction leaves with their parents,
    parents independent so leaves sit pairwise at distance >= 4; split evenly
    with |P| >= |R|.  bare: directed bare paths on `ell` vertices are cut
    into segments of p = 3*ceil(8/gamma)*k_b vertices at mutual distance
    >= p, all starting with an out-vertex; split evenly.  switchy: P holds
    same-orientation 4-vertex paths thinned to mutual distance >= 4 and
    clear of all selected switches and their neighbours; R holds same-type
    switches with both neighbours.

    Achieved counts are reported against the requested scale bounds; an
    empty side raises CollectionsError.
    """
    lam = lam if lam is not None else default_lambda(max(t.max_degree, 2))
    if case == "a" or case == "leafy":
        coll = _select_leafy(t)
        target = lam * t.n / (16 * max(ell, 1) * max(t.max_degree, 1))
    elif case == "b" or case == "bare":
        coll = _select_bare(t, ell, gamma, k_b)
        p_len = bare_segment_length(gamma, k_b)
        target = (lam * t.n / (4 * ell)) * max(ell // p_len - 1, 0) - 1
    elif case == "c" or case == "switchy":
        coll = _select_switchy(t)
        target = 3 * lam * t.n / (512 * max(t.max_degree, 1) ** 4)
    else:
        raise ValueError(f"unknown case {case!r}")
    coll.report["target"] = max(target, 0.0)
    coll.report["achieved_p"] = len(coll.p_members)
    coll.report["achieved_r"] = len(coll.r_members)
    if not coll.p_members or not coll.r_members:
        raise CollectionsError(
            f"{coll.kind}: empty collection side (P={len(coll.p_members)}, "
            f"R={len(coll.r_members)})")
    return coll


def _select_leafy(t: RootedOrientedTree) -> TreeCollections:
    out_leaves, in_leaves = leaves_by_direction(t)
    majority = out_leaves if len(out_leaves) >= len(in_leaves) else in_leaves
    by_parent: dict[int, int] = {}
    for leaf in majority:
        if leaf == t.root:
            continue
        p = t.parent[leaf]
        if p not in by_parent or leaf < by_parent[p]:
            by_parent[p] = leaf
    by_parent.pop(t.root, None)
    # A tree is bipartite by depth parity; parents in one class are pairwise
    # non-adjacent, which puts their leaves pairwise at distance >= 4.
    classes = {0: [], 1: []}
    for p in sorted(by_parent):
        classes[t.depth(p) % 2].append(p)
    chosen = classes[0] if len(classes[0]) >= len(classes[1]) else classes[1]
    members = [Member((p, by_parent[p]), p) for p in chosen]
    half = math.ceil(len(members) / 2)
    return TreeCollections("leafy", members[:half], members[half:])


def _select_bare(t: RootedOrientedTree, ell: int, gamma: float, k_b: int
                 ) -> TreeCollections:
    p_len = bare_segment_length(gamma, k_b)
    if ell < 2 * p_len:
        raise ValueError(f"ell must be at least twice the segment length {p_len}")
    depth = t.depth
    members = []
    for path in bare_paths(t, ell):
        pattern = path_pattern(t, path)
        if len(set(pattern)) != 1:
            continue
        if pattern[0] == "-":
            path = tuple(reversed(path))   # normalise to arc order (out-start)
        # Segments at offsets p, 3p, 5p, ... stay pairwise at distance >= p_len.
        start = p_len
        while start + p_len <= ell:
            seg = path[start:start + p_len]
            if t.root not in seg:
                root = seg[0] if depth(seg[0]) <= depth(seg[-1]) else seg[-1]
                members.append(Member(seg, root))
            start += 2 * p_len
    members.sort(key=lambda m: m.vertices[0])
    if len(members) % 2:
        members.pop()
    return TreeCollections("bare", members[0::2], members[1::2])


def _select_switchy(t: RootedOrientedTree) -> TreeCollections:
    sw = switches(t)
    by_type: dict[str, list[Member]] = {"source": [], "sink": []}
    used: set[int] = set()
    for v, typ in sorted(sw):
        if v == t.root or t.parent[v] == -1:
            continue
        kids = t.children(v)
        if len(kids) != 1:
            continue
        triple = (t.parent[v], v, kids[0])
        if t.root in triple or any(x in used for x in triple):
            continue
        by_type[typ].append(Member(triple, t.parent[v]))
        used.update(triple)
    r_members = max(by_type.values(), key=len)
    blocked = {x for m in r_members for x in m.vertices}
    # 4-vertex oriented bare paths, majority orientation class, clear of the
    # selected switches and their neighbours, mutually at distance >= 4.
    by_class: dict[str, list[tuple[int, ...]]] = {}
    for path in bare_paths(t, 4):
        if t.root in path or any(v in blocked for v in path):
            continue
        by_class.setdefault(orientation_class(path_pattern(t, path)), []).append(path)
    if not by_class:
        return TreeCollections("switchy", [], r_members)
    best = max(by_class.values(), key=len)
    thinned = _thin_by_distance(t, best, 3, blocked)
    p_members = []
    for seg in thinned:
        root = seg[0] if t.depth(seg[0]) <= t.depth(seg[-1]) else seg[-1]
        pattern = path_pattern(t, seg)
        if pattern[0] == "-" and len(set(pattern)) == 1:
            seg = tuple(reversed(seg))
        p_members.append(Member(seg, root))
    return TreeCollections("switchy", p_members, r_members)
