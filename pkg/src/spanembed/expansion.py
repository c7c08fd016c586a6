"""Robust-expansion diagnostics, the cherry property, and pair densities.

The exact checks in this module enumerate vertex subsets, so each carries a
hard size cap; sampled variants exist for larger inputs and are explicitly
labelled non-certifying.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .digraph import OrientedDigraph, SizeCapError

EXACT_EXPANDER_MAX_N = 20
BRUTEFORCE_CHERRY_MAX_N = 16
EXACT_ALPHA_MAX_N = 14
EXACT_REGULARITY_MAX_PART = 12

_EPS = 1e-9


@dataclass(frozen=True)
class ExpansionParams:
    """Expansion fractions: each qualifying set must grow by nu*n, and the
    qualifying sizes are tau*n .. (1-tau)*n."""
    nu: float
    tau: float

    def __post_init__(self):
        if not (0.0 < self.nu <= self.tau < 1.0):
            raise ValueError("need 0 < nu <= tau < 1")


@dataclass
class ExpanderVerdict:
    is_expander: bool
    worst_margin: float                  # min over checked S of |RN(S)| - |S| - nu*n
    witness: Optional[frozenset]         # S attaining the worst margin
    checked_sets: int
    certified: bool                      # False for sampled runs


def robust_out_nbhd(d: OrientedDigraph, s: Iterable[int], nu: float) -> set[int]:
    """Vertices receiving at least nu*n arcs from the set s."""
    s = set(s)
    thr = nu * d.n
    return {x for x in range(d.n)
            if sum(1 for u in d.inn(x) if u in s) + _EPS >= thr}


def robust_in_nbhd(d: OrientedDigraph, s: Iterable[int], nu: float) -> set[int]:
    """Vertices sending at least nu*n arcs into the set s."""
    s = set(s)
    thr = nu * d.n
    return {x for x in range(d.n)
            if sum(1 for u in d.out(x) if u in s) + _EPS >= thr}


def _popcounts(n_bits: int) -> np.ndarray:
    pc = np.zeros(1 << n_bits, dtype=np.int16)
    for b in range(n_bits):
        blk = pc.reshape(-1, 2, 1 << b)
        blk[:, 1] += 1
    return pc


def _subset_counts(rows: np.ndarray) -> np.ndarray:
    """counts[S][x] = sum of rows[u][x] over u in S, for all subsets S.

    rows is an (n, n) 0/1 matrix; memory is 2^n * n * 2 bytes.
    """
    n = rows.shape[0]
    counts = np.zeros((1 << n, n), dtype=np.int16)
    for b in range(n):
        blk = counts.reshape(-1, 2, 1 << b, n)
        blk[:, 1] += rows[b]
    return counts


def _in_rows(d: OrientedDigraph) -> np.ndarray:
    """rows[u][x] = 1 iff (u,x) is an arc, so column sums over S give
    |in-nbhd(x) intersect S|."""
    rows = np.zeros((d.n, d.n), dtype=np.int16)
    for u, v in d.arcs:
        rows[u, v] = 1
    return rows


def is_robust_out_expander_exact(d: OrientedDigraph, params: ExpansionParams
                                 ) -> ExpanderVerdict:
    """Exhaustive check over every S with tau*n <= |S| <= (1-tau)*n.

    Returns the verdict together with the qualifying S of worst margin
    |RN(S)| - |S| - nu*n.  Capped at n = 20 (2^20 subsets).
    """
    n = d.n
    if n > EXACT_EXPANDER_MAX_N:
        raise SizeCapError(f"exact expander check capped at n={EXACT_EXPANDER_MAX_N}")
    counts = _subset_counts(_in_rows(d))
    rn_sizes = (counts + _EPS >= params.nu * n).sum(axis=1)
    pc = _popcounts(n)
    lo, hi = params.tau * n - _EPS, (1 - params.tau) * n + _EPS
    qualifying = (pc >= lo) & (pc <= hi)
    qualifying[0] = False
    if not qualifying.any():
        return ExpanderVerdict(True, math.inf, None, 0, True)
    margins = rn_sizes - pc - params.nu * n
    margins = np.where(qualifying, margins, np.inf)
    worst = int(np.argmin(margins))
    worst_margin = float(margins[worst])
    witness = frozenset(v for v in range(n) if worst >> v & 1)
    return ExpanderVerdict(worst_margin >= -_EPS, worst_margin, witness,
                           int(qualifying.sum()), True)


def is_robust_in_expander_exact(d: OrientedDigraph, params: ExpansionParams
                                ) -> ExpanderVerdict:
    """Mirror of the out-version on reversed arcs."""
    return is_robust_out_expander_exact(d.reverse(), params)


def is_robust_expander_exact(d: OrientedDigraph, params: ExpansionParams) -> bool:
    return (is_robust_out_expander_exact(d, params).is_expander
            and is_robust_in_expander_exact(d, params).is_expander)


def expander_margin_sampled(d: OrientedDigraph, params: ExpansionParams,
                            trials: int, seed, direction: str = "+"
                            ) -> ExpanderVerdict:
    """Empirical minimum margin over sampled qualifying sets.

    Diagnostic only: a nonnegative result is *not* a certificate, a negative
    one is a genuine counterexample.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = d.n
    rng = np.random.default_rng(seed)
    masks = d.in_masks() if direction == "+" else d.out_masks()
    lo = max(1, math.ceil(params.tau * n - _EPS))
    hi = math.floor((1 - params.tau) * n + _EPS)
    if lo > hi:
        return ExpanderVerdict(True, math.inf, None, 0, False)
    thr = params.nu * n
    worst, witness = math.inf, None
    for _ in range(trials):
        size = int(rng.integers(lo, hi + 1))
        sel = rng.choice(n, size=size, replace=False)
        smask = 0
        for v in sel:
            smask |= 1 << int(v)
        rn = sum(1 for x in range(n) if (masks[x] & smask).bit_count() + _EPS >= thr)
        margin = rn - size - thr
        if margin < worst:
            worst, witness = margin, frozenset(int(v) for v in sel)
    return ExpanderVerdict(worst >= -_EPS, worst, witness, trials, False)


# -- cherry property -----------------------------------------------------

@dataclass
class CherryReport:
    has_plus: bool
    has_minus: bool
    alpha_star: Fraction | float
    alpha_exact: bool
    witness: Optional[frozenset] = None   # a bad partition side, on failure

    @property
    def has_both(self) -> bool:
        return self.has_plus and self.has_minus


def _common_nbr_components(d: OrientedDigraph, direction: str) -> list[set[int]]:
    """Connected components of the auxiliary graph joining x,y when they share
    a neighbour in the given direction."""
    a = d.adjacency_matrix()
    share = (a @ a.T) if direction == "+" else (a.T @ a)
    n = d.n
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp = {s}
        seen[s] = True
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in np.flatnonzero(share[x]):
                y = int(y)
                if not seen[y]:
                    seen[y] = True
                    comp.add(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def has_cherry_property(d: OrientedDigraph, alpha_samples: int = 256,
                        seed=0) -> CherryReport:
    """Decide the cherry property via connectivity of the shared-neighbour graph.

    A partition with no cherry is exactly a disconnection of that graph, so
    the boolean verdicts are exact at any size.  alpha_star is the exact
    partition minimum for n <= 14 and a sampled lower estimate otherwise.
    """
    witness = None
    verdicts = {}
    for direction in "+-":
        comps = _common_nbr_components(d, direction)
        ok = len(comps) == 1 and d.n >= 2
        verdicts[direction] = ok
        if not ok and witness is None and d.n >= 2:
            witness = frozenset(comps[0])
    if d.n <= EXACT_ALPHA_MAX_N:
        alpha, exact = (alpha_cherry_exact(d), True) if d.n >= 2 else (Fraction(0), True)
    else:
        alpha, exact = _alpha_cherry_sampled(d, alpha_samples, seed), False
    return CherryReport(verdicts["+"], verdicts["-"], alpha, exact, witness)


def has_cherry_property_bruteforce(d: OrientedDigraph) -> bool:
    """Literal quantifier over all 2-partitions with nonempty parts, both
    directions.  Capped at n = 16."""
    n = d.n
    if n > BRUTEFORCE_CHERRY_MAX_N:
        raise SizeCapError(f"brute-force cherry check capped at n={BRUTEFORCE_CHERRY_MAX_N}")
    if n < 2:
        return False
    full = (1 << n) - 1
    for masks in (d.out_masks(), d.in_masks()):
        # Fix vertex 0 in X so each unordered partition is visited once.
        for x_mask in range(1, full, 2):
            union = 0
            rest = x_mask
            while rest:
                low = rest & -rest
                rest ^= low
                union |= masks[low.bit_length() - 1]
            y_mask = full ^ x_mask
            found = False
            rest = y_mask
            while rest:
                low = rest & -rest
                rest ^= low
                if masks[low.bit_length() - 1] & union:
                    found = True
                    break
            if not found:
                return False
    return True


def _cherry_numerators(d: OrientedDigraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every subset S: |cherries(S, ~S)| in each direction, plus popcounts."""
    n = d.n
    in_counts = _subset_counts(_in_rows(d))            # |N^-(z) ∩ S|
    out_counts = _subset_counts(_in_rows(d.reverse())) # |N^+(z) ∩ S|
    indeg = in_counts[-1].astype(np.int64)
    outdeg = out_counts[-1].astype(np.int64)
    ic = in_counts.astype(np.int64)
    oc = out_counts.astype(np.int64)
    plus = (ic * (indeg[None, :] - ic)).sum(axis=1)
    minus = (oc * (outdeg[None, :] - oc)).sum(axis=1)
    return plus, minus, _popcounts(n).astype(np.int64)


def alpha_cherry_exact(d: OrientedDigraph) -> Fraction:
    """Exact min over nonempty partitions and directions of
    |cherries(X,Y)| / (|X|*|Y|*n).  Capped at n = 14."""
    n = d.n
    if n > EXACT_ALPHA_MAX_N:
        raise SizeCapError(f"exact alpha capped at n={EXACT_ALPHA_MAX_N}")
    if n < 2:
        raise ValueError("alpha needs at least two vertices")
    plus, minus, pc = _cherry_numerators(d)
    nums = np.minimum(plus, minus)
    denom = pc * (n - pc) * n
    valid = (pc >= 1) & (pc <= n - 1)
    ratios = np.where(valid, nums / np.maximum(denom, 1), np.inf)
    best = int(np.argmin(ratios))
    return Fraction(int(nums[best]), int(denom[best]))


def _alpha_cherry_sampled(d: OrientedDigraph, samples: int, seed) -> float:
    n = d.n
    rng = np.random.default_rng(seed)
    a = d.adjacency_matrix().astype(np.int64)
    best = math.inf
    for _ in range(samples):
        size = int(rng.integers(1, n))
        side = np.zeros(n, dtype=bool)
        side[rng.choice(n, size=size, replace=False)] = True
        for mat in (a, a.T):  # '+': common out-nbr via in-rows, '-': transposed
            cx = mat[side].sum(axis=0)
            cy = mat[~side].sum(axis=0)
            val = int((cx * cy).sum()) / (size * (n - size) * n)
            if val < best:
                best = val
    return best


# -- densities and regularity -------------------------------------------

@dataclass
class DensityReport:
    d_plus: Fraction
    d_minus: Fraction
    e_plus: int
    e_minus: int


def densities(d: OrientedDigraph, xs: Iterable[int], ys: Iterable[int]
              ) -> DensityReport:
    """Exact pair densities: arcs X->Y over |X||Y|, and arcs Y->X likewise."""
    xs, ys = set(xs), set(ys)
    if xs & ys:
        raise ValueError("parts must be disjoint")
    if not xs or not ys:
        return DensityReport(Fraction(0), Fraction(0), 0, 0)
    e_plus = sum(1 for u in xs for v in d.out(u) if v in ys)
    e_minus = sum(1 for u in xs for v in d.inn(u) if v in ys)
    denom = len(xs) * len(ys)
    return DensityReport(Fraction(e_plus, denom), Fraction(e_minus, denom),
                         e_plus, e_minus)


def eps_regular_exact(d: OrientedDigraph, xs: Iterable[int], ys: Iterable[int],
                      eps: float, direction: str = "+") -> bool:
    """Exact epsilon-regularity of the ordered pair (X, Y).

    True iff |d(X,Y) - d(X',Y')| <= eps for all X' ⊆ X with |X'| >= eps|X|
    and Y' ⊆ Y with |Y'| >= eps|Y|.  All significant X' are enumerated; for
    each, the extreme densities over Y' of each admissible size are realised
    by count-sorted prefixes, so the check is exact.  Parts capped at 12.
    """
    xs, ys = sorted(set(xs)), sorted(set(ys))
    if set(xs) & set(ys):
        raise ValueError("parts must be disjoint")
    if not xs or not ys:
        return True
    if len(xs) > EXACT_REGULARITY_MAX_PART or len(ys) > EXACT_REGULARITY_MAX_PART:
        raise SizeCapError(
            f"exact regularity capped at parts of {EXACT_REGULARITY_MAX_PART}")
    nx, ny = len(xs), len(ys)
    # rows[i][j] = 1 iff the arc runs from xs[i] to ys[j] in `direction`.
    rows = np.zeros((nx, ny), dtype=np.int16)
    for i, x in enumerate(xs):
        nbrs = d.out(x) if direction == "+" else d.inn(x)
        nbrs = set(nbrs)
        for j, y in enumerate(ys):
            if y in nbrs:
                rows[i, j] = 1
    counts = _subset_counts_rect(rows)          # (2^nx, ny)
    pc = _popcounts(nx).astype(np.int64)
    base = counts[-1].sum() / (nx * ny)
    x_min = eps * nx - _EPS
    y_min = max(1, math.ceil(eps * ny - _EPS))
    desc = np.sort(counts, axis=1)[:, ::-1].astype(np.int64)
    pref_hi = np.cumsum(desc, axis=1)
    pref_lo = np.cumsum(desc[:, ::-1], axis=1)
    sig = (pc >= x_min) & (pc >= 1)
    sizes = np.arange(1, ny + 1, dtype=np.float64)
    for s_mask in np.flatnonzero(sig):
        sz = pc[s_mask]
        dens_hi = pref_hi[s_mask] / (sz * sizes)
        dens_lo = pref_lo[s_mask] / (sz * sizes)
        hi = dens_hi[y_min - 1:].max()
        lo = dens_lo[y_min - 1:].min()
        if hi - base > eps + _EPS or base - lo > eps + _EPS:
            return False
    return True


def _subset_counts_rect(rows: np.ndarray) -> np.ndarray:
    """Like _subset_counts but for an (n, m) matrix: counts[S] = rows[S].sum(0)."""
    n, m = rows.shape
    counts = np.zeros((1 << n, m), dtype=np.int16)
    for b in range(n):
        blk = counts.reshape(-1, 2, 1 << b, m)
        blk[:, 1] += rows[b]
    return counts


# -- expander splitting and short paths ----------------------------------

class SplitError(RuntimeError):
    """Randomised split failed verification within the retry budget."""


@dataclass
class SplitRecord:
    attempts: int
    size_ok: bool
    degree_a_ok: bool
    degree_b_ok: bool
    expander_a: Optional[ExpanderVerdict]
    expander_b: Optional[ExpanderVerdict]
    certified: bool

    @property
    def ok(self) -> bool:
        return (self.size_ok and self.degree_a_ok and self.degree_b_ok
                and (self.expander_a is None or self.expander_a.is_expander)
                and (self.expander_b is None or self.expander_b.is_expander))


def induced_subgraph(d: OrientedDigraph, vertices: Iterable[int]
                     ) -> tuple[OrientedDigraph, list[int]]:
    """Induced subgraph with vertices relabelled 0..|S|-1; returns the label map."""
    verts = sorted(set(vertices))
    index = {v: i for i, v in enumerate(verts)}
    arcs = [(index[u], index[v]) for u, v in d.arcs if u in index and v in index]
    return OrientedDigraph(len(verts), arcs), verts


def split_expander(d: OrientedDigraph, mu: float, gamma: float,
                   params: ExpansionParams, seed, max_retries: int = 32,
                   sample_trials: int = 400) -> tuple[set[int], set[int], SplitRecord]:
    """Random partition {A, B} with |A| = ceil(mu*n), verified to keep
    per-vertex degrees gamma/2-dense into both sides and both induced halves
    robust (nu, tau)-expanders.

    Degree conditions are checked exactly; the expander condition is exact up
    to side size 20 and sampled (non-certifying) beyond.  Retries with fresh
    seeds; raises SplitError with the last record when the budget runs out.
    """
    n = d.n
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie strictly between 0 and 1 (both sides nonempty)")
    a_size = math.ceil(mu * n)
    if a_size == 0 or a_size == n:
        raise ValueError("degenerate split: one side would be empty")
    rng = np.random.default_rng(seed)
    record = None
    for attempt in range(1, max_retries + 1):
        perm = rng.permutation(n)
        a = set(int(v) for v in perm[:a_size])
        b = set(range(n)) - a
        deg_a = all(
            sum(1 for w in d.out(v) if w in a) + _EPS >= gamma / 2 * len(a)
            and sum(1 for w in d.inn(v) if w in a) + _EPS >= gamma / 2 * len(a)
            for v in range(n))
        deg_b = all(
            sum(1 for w in d.out(v) if w in b) + _EPS >= gamma / 2 * len(b)
            and sum(1 for w in d.inn(v) if w in b) + _EPS >= gamma / 2 * len(b)
            for v in range(n))
        va = vb = None
        certified = True
        if deg_a and deg_b:
            for side, slot in ((a, "a"), (b, "b")):
                sub, _ = induced_subgraph(d, side)
                if sub.n <= EXACT_EXPANDER_MAX_N:
                    out_v = is_robust_out_expander_exact(sub, params)
                    in_v = is_robust_in_expander_exact(sub, params)
                    verdict = out_v if out_v.worst_margin <= in_v.worst_margin else in_v
                    verdict = ExpanderVerdict(
                        out_v.is_expander and in_v.is_expander,
                        min(out_v.worst_margin, in_v.worst_margin),
                        verdict.witness, out_v.checked_sets + in_v.checked_sets, True)
                else:
                    ov = expander_margin_sampled(sub, params, sample_trials,
                                                 rng.integers(2**63), "+")
                    iv = expander_margin_sampled(sub.reverse(), params, sample_trials,
                                                 rng.integers(2**63), "+")
                    verdict = ExpanderVerdict(
                        ov.is_expander and iv.is_expander,
                        min(ov.worst_margin, iv.worst_margin),
                        ov.witness, ov.checked_sets + iv.checked_sets, False)
                    certified = False
                if slot == "a":
                    va = verdict
                else:
                    vb = verdict
        record = SplitRecord(attempt, len(a) == a_size, deg_a, deg_b, va, vb,
                             certified)
        if record.ok:
            return a, b, record
    raise SplitError(f"no verified split after {max_retries} attempts; "
                     f"last record: {record}")


def short_path(d: OrientedDigraph, u: int, v: int, params: ExpansionParams
               ) -> Optional[list[int]]:
    """A directed u->v path with exactly ceil(1/nu) arcs, or None.

    Depth-limited search over simple paths, pruned by reverse BFS distance
    to v.  Absence is a result, not an error.
    """
    if u == v:
        raise ValueError("endpoints must differ")
    length = math.ceil(1.0 / params.nu)
    # dist_to_v[x]: arc-distance from x to v (infinity when unreachable).
    dist = [math.inf] * d.n
    dist[v] = 0
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for w in d.inn(x):
            if dist[w] == math.inf:
                dist[w] = dist[x] + 1
                queue.append(w)
    if dist[u] > length:
        return None
    path = [u]
    used = {u}

    def extend() -> bool:
        remaining = length - (len(path) - 1)
        head = path[-1]
        if remaining == 0:
            return head == v
        for w in d.out(head):
            if w in used or dist[w] > remaining - 1:
                continue
            if w == v and remaining != 1:
                continue
            path.append(w)
            used.add(w)
            if extend():
                return True
            path.pop()
            used.remove(w)
        return False

    return path if extend() else None
