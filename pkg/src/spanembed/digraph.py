"""Digraph core: representation, text format, generators and exact searches.

Vertices are the integers 0..n-1 everywhere, including the file format.
Arcs are ordered pairs (u, v) with u != v.  A digraph is *oriented* when no
pair of vertices carries arcs in both directions; the container accepts
general digraphs (2-cycles allowed) and merely records orientedness, unless
asked to enforce it at construction time.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

#: Exact antidirected-path search is a subset DP; beyond this it is refused.
ANTIDIRECTED_MAX_N = 24


class GraphFormatError(ValueError):
    """A graph string violates the `n m` / arc-lines text format."""


class SizeCapError(ValueError):
    """An exact routine was asked to run beyond its documented size cap."""


class OrientedDigraph:
    """Immutable digraph on 0..n-1 with sorted adjacency views.

    All operations in this package treat instances as read-only values, so
    they are safe to share across threads.
    """

    __slots__ = ("n", "arcs", "_out", "_in", "_out_masks", "_in_masks",
                 "is_oriented")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]],
                 require_oriented: bool = False):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        arc_set = frozenset((int(u), int(v)) for u, v in arcs)
        out = [[] for _ in range(n)]
        inn = [[] for _ in range(n)]
        for u, v in arc_set:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc ({u},{v}) out of range for n={n}")
            out[u].append(v)
            inn[v].append(u)
        self.n = n
        self.arcs = arc_set
        self._out = tuple(tuple(sorted(a)) for a in out)
        self._in = tuple(tuple(sorted(a)) for a in inn)
        self.is_oriented = all((v, u) not in arc_set for u, v in arc_set)
        if require_oriented and not self.is_oriented:
            raise ValueError("digraph has a 2-cycle but orientation is required")
        self._out_masks = None
        self._in_masks = None

    # -- basic views ---------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.arcs)

    def out(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def inn(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def out_degree(self, v: int) -> int:
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        return len(self._in[v])

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs

    def out_masks(self) -> list[int]:
        """Per-vertex out-neighbourhoods as bitmasks (cached)."""
        if self._out_masks is None:
            masks = [0] * self.n
            for u, v in self.arcs:
                masks[u] |= 1 << v
            self._out_masks = masks
        return self._out_masks

    def in_masks(self) -> list[int]:
        if self._in_masks is None:
            masks = [0] * self.n
            for u, v in self.arcs:
                masks[v] |= 1 << u
            self._in_masks = masks
        return self._in_masks

    def reverse(self) -> "OrientedDigraph":
        return OrientedDigraph(self.n, ((v, u) for u, v in self.arcs))

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.arcs:
            a[u, v] = True
        return a

    def __eq__(self, other):
        return (isinstance(other, OrientedDigraph)
                and self.n == other.n and self.arcs == other.arcs)

    def __hash__(self):
        return hash((self.n, self.arcs))

    def __repr__(self):
        return f"OrientedDigraph(n={self.n}, m={self.m}, oriented={self.is_oriented})"


def min_semidegree(d: OrientedDigraph) -> int:
    """Minimum over all vertices of both in- and out-degree."""
    if d.n < 1:
        raise ValueError("empty digraph has no semidegree")
    return min(min(d.out_degree(v), d.in_degree(v)) for v in range(d.n))


def max_underlying_degree(d: OrientedDigraph) -> int:
    """Maximum degree of the underlying multigraph (2-cycles count twice)."""
    if d.n == 0:
        return 0
    return max(d.out_degree(v) + d.in_degree(v) for v in range(d.n))


# -- text format -------------------------------------------------------
#
# Line 1: "n m".  Then m lines "u v", one arc u->v each, ASCII decimal.
# serialize_digraph emits arcs sorted lexicographically and ends every line
# with a newline; parse/serialize round-trip on the arc set.

def parse_digraph(text: str) -> OrientedDigraph:
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("empty input")
    head = lines[0].split()
    if len(head) != 2:
        raise GraphFormatError(f"malformed header {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(f"malformed header {lines[0]!r}") from None
    if n < 0 or m < 0:
        raise GraphFormatError("negative counts in header")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != m:
        raise GraphFormatError(f"expected {m} arc lines, found {len(body)}")
    arcs = set()
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"malformed arc line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"malformed arc line {ln!r}") from None
        if u == v:
            raise GraphFormatError(f"loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex index out of range in {ln!r}")
        if (u, v) in arcs:
            raise GraphFormatError(f"duplicate arc ({u},{v})")
        arcs.add((u, v))
    return OrientedDigraph(n, arcs)


def serialize_digraph(d: OrientedDigraph) -> str:
    lines = [f"{d.n} {d.m}\n"]
    for u, v in sorted(d.arcs):
        lines.append(f"{u} {v}\n")
    return "".join(lines)


# -- generators --------------------------------------------------------

def complete_digraph(n: int) -> OrientedDigraph:
    """All ordered pairs; not oriented for n >= 2."""
    return OrientedDigraph(n, ((u, v) for u in range(n) for v in range(n) if u != v))


def directed_cycle(n: int) -> OrientedDigraph:
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    return OrientedDigraph(n, ((i, (i + 1) % n) for i in range(n)))


def regular_tournament(n: int) -> OrientedDigraph:
    """Rotational tournament: i beats i+1, ..., i+(n-1)/2 (mod n).  Odd n only."""
    if n % 2 == 0:
        raise ValueError("regular tournaments exist only for odd n")
    half = (n - 1) // 2
    return OrientedDigraph(
        n, ((i, (i + s) % n) for i in range(n) for s in range(1, half + 1)))


def random_tournament(n: int, seed) -> OrientedDigraph:
    """One arc per unordered pair, direction by fair coin."""
    rng = np.random.default_rng(seed)
    arcs = []
    for u in range(n):
        for v in range(u + 1, n):
            arcs.append((u, v) if rng.random() < 0.5 else (v, u))
    return OrientedDigraph(n, arcs)


def random_digraph(n: int, p: float, seed) -> OrientedDigraph:
    """Each ordered pair becomes an arc independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    rng = np.random.default_rng(seed)
    arcs = [(u, v) for u in range(n) for v in range(n)
            if u != v and rng.random() < p]
    return OrientedDigraph(n, arcs)


def random_oriented_digraph(n: int, p: float, seed) -> OrientedDigraph:
    """Each unordered pair independently gets one arc with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    rng = np.random.default_rng(seed)
    arcs = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                arcs.append((u, v) if rng.random() < 0.5 else (v, u))
    return OrientedDigraph(n, arcs)


def near_regular_bipartite_tournament(m: int) -> OrientedDigraph:
    """Rotational near-regular orientation between two odd parts of size m.

    Vertices 0..m-1 form the part Y, vertices m..2m-1 the part W.  With
    m = 2k+1, vertex y_i sends arcs to w_{(i+s) mod m} for s = 0..k-1 and
    receives from the other k+1 cross vertices.  Exact regularity between
    odd parts is impossible; this scheme gives out-degrees k (from Y) and
    k+1 (from W).
    """
    if m < 1 or m % 2 == 0:
        raise ValueError("part size must be odd and positive")
    k = (m - 1) // 2
    arcs = []
    for i in range(m):
        targets = {(i + s) % m for s in range(k)}
        for j in range(m):
            if j in targets:
                arcs.append((i, m + j))
            else:
                arcs.append((m + j, i))
    return OrientedDigraph(2 * m, arcs)


def extremal_parts(k: int) -> dict[str, range]:
    """Index ranges of the four parts of the sharpness construction."""
    m = 2 * k + 1
    return {
        "X": range(0, m),
        "Y": range(m, 2 * m),
        "W": range(2 * m, 3 * m),
        "Z": range(3 * m, 4 * m),
    }


def extremal_construction(k: int) -> OrientedDigraph:
    """Sharpness example on n = 8k+4 vertices with min semidegree 3k+1.

    Four parts X, Y, W, Z of size 2k+1 each: X and Z induce rotational
    regular tournaments, all arcs X->W, W->Z, Z->Y, Y->X are present, and
    (Y, W) carries the rotational near-regular bipartite orientation.  The
    resulting oriented graph has minimum semidegree exactly 3n/8 - 1/2 and
    no long alternating path, which is what makes it the tight example.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    m = 2 * k + 1
    parts = extremal_parts(k)
    X, Y, W, Z = parts["X"], parts["Y"], parts["W"], parts["Z"]
    arcs: list[tuple[int, int]] = []

    def add_regular_tournament(block: range):
        base = block.start
        for i in range(m):
            for s in range(1, k + 1):
                arcs.append((base + i, base + (i + s) % m))

    add_regular_tournament(X)
    add_regular_tournament(Z)
    for x in X:
        for w in W:
            arcs.append((x, w))
    for w in W:
        for z in Z:
            arcs.append((w, z))
    for z in Z:
        for y in Y:
            arcs.append((z, y))
    for y in Y:
        for x in X:
            arcs.append((y, x))
    # Rotational near-regular orientation on (Y, W): y_i -> w_{(i+s) mod m}
    # for s = 0..k-1, every other cross pair oriented W -> Y.
    for i in range(m):
        targets = {(i + s) % m for s in range(k)}
        for j in range(m):
            if j in targets:
                arcs.append((Y.start + i, W.start + j))
            else:
                arcs.append((W.start + j, Y.start + i))
    return OrientedDigraph(8 * k + 4, arcs, require_oriented=True)


def random_subgraph(d: OrientedDigraph, p: float, seed) -> OrientedDigraph:
    """Keep every arc independently with probability p (deterministic per seed)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    if p == 1.0:
        return OrientedDigraph(d.n, d.arcs)
    rng = np.random.default_rng(seed)
    ordered = sorted(d.arcs)
    keep = rng.random(len(ordered)) < p
    return OrientedDigraph(d.n, (a for a, k in zip(ordered, keep) if k))


def random_regular_digraph(k: int, deg: int, seed, max_tries: int = 200
                           ) -> OrientedDigraph:
    """Union of `deg` arc-disjoint fixed-point-free permutations of 0..k-1."""
    if not 0 < deg < k:
        raise ValueError("need 0 < deg < k")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        arcs: set[tuple[int, int]] = set()
        ok = True
        for _ in range(deg):
            for _ in range(max_tries):
                perm = rng.permutation(k)
                if all(perm[v] != v for v in range(k)) and \
                        all((v, int(perm[v])) not in arcs for v in range(k)):
                    arcs.update((v, int(perm[v])) for v in range(k))
                    break
            else:
                ok = False
                break
        if ok:
            return OrientedDigraph(k, arcs)
    raise RuntimeError("could not sample a regular digraph; try other parameters")


# -- exact antidirected-path search -------------------------------------

def longest_antidirected_path(d: OrientedDigraph) -> int:
    """Exact maximum number of vertices on any alternating (antidirected) path.

    Subset DP over states (visited set, endpoint, direction of the arc that
    reached the endpoint).  A path alternates arc directions, so every inner
    vertex is a source or a sink.  Capped at n <= 24; exactness is the point.
    """
    n = d.n
    if n > ANTIDIRECTED_MAX_N:
        raise SizeCapError(f"exact search capped at n={ANTIDIRECTED_MAX_N}")
    if n == 0:
        return 0
    if not d.arcs:
        return 1
    out_masks = d.out_masks()
    in_masks = d.in_masks()
    best = 2  # there is at least one arc
    # State packing: (mask << (bits+1)) | (v << 1) | entered_forward
    stack: list[tuple[int, int, int]] = []
    seen: set[int] = set()
    for u, v in d.arcs:
        for end, fwd in ((v, 1), (u, 0)):
            mask = (1 << u) | (1 << v)
            key = (mask << 6) | (end << 1) | fwd
            if key not in seen:
                seen.add(key)
                stack.append((mask, end, fwd))
    while stack:
        mask, v, fwd = stack.pop()
        # Alternation: after a forward arc into v, the next arc must point
        # back into v (v is a sink); after a backward arc, out of v.
        nbrs = in_masks[v] if fwd else out_masks[v]
        cand = nbrs & ~mask
        while cand:
            low = cand & -cand
            cand ^= low
            w = low.bit_length() - 1
            nmask = mask | low
            nfwd = 0 if fwd else 1
            key = (nmask << 6) | (w << 1) | nfwd
            if key not in seen:
                seen.add(key)
                size = nmask.bit_count()
                if size > best:
                    best = size
                stack.append((nmask, w, nfwd))
    return best
