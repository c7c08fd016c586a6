"""Pattern-driven random walks on digraphs.

A walk follows an orientation pattern, a string over '+'/'-': step i moves
from the current vertex to a uniformly random out-neighbour ('+') or
in-neighbour ('-').  Distributions are propagated exactly step by step, so
probabilistic statements about the final vertex can be checked without
sampling error; a sampling routine exists for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .digraph import OrientedDigraph
from .expansion import has_cherry_property

_SUM_TOL = 1e-12


class ZeroDegreeError(ValueError):
    """A walk step hit a vertex with no neighbour in the required direction
    while that vertex carried positive probability."""


def validate_pattern(pattern: str) -> str:
    if not pattern:
        raise ValueError("pattern must be nonempty")
    if set(pattern) - {"+", "-"}:
        raise ValueError("pattern characters must be '+' or '-'")
    return pattern


def _step_matrices(h: OrientedDigraph) -> dict[str, np.ndarray]:
    """Row-stochastic step matrices; rows of degree zero are left at zero and
    guarded at propagation time."""
    mats = {}
    for direction in "+-":
        m = np.zeros((h.n, h.n))
        for v in range(h.n):
            nbrs = h.out(v) if direction == "+" else h.inn(v)
            if nbrs:
                m[v, list(nbrs)] = 1.0 / len(nbrs)
        mats[direction] = m
    return mats


def walk_distribution(h: OrientedDigraph, pattern: str, start: int,
                      exact: bool = False) -> list[np.ndarray] | list[list[Fraction]]:
    """Exact per-step distributions of the pattern walk from `start`.

    Returns one distribution per visited vertex: index 0 is the point mass at
    the start, index i the distribution after i steps.  Float mode
    renormalises each step and monitors drift; exact mode uses rationals.
    """
    validate_pattern(pattern)
    if not 0 <= start < h.n:
        raise ValueError("start out of range")
    if exact:
        return _walk_distribution_exact(h, pattern, start)
    mats = _step_matrices(h)
    dist = np.zeros(h.n)
    dist[start] = 1.0
    out: list[np.ndarray] = [dist.copy()]
    for i, direction in enumerate(pattern):
        degs = np.array([len(h.out(v)) if direction == "+" else len(h.inn(v))
                         for v in range(h.n)])
        dead = (degs == 0) & (dist > 0)
        if dead.any():
            raise ZeroDegreeError(
                f"step {i + 1}: vertex {int(np.flatnonzero(dead)[0])} has no "
                f"'{direction}' neighbour but carries mass")
        dist = dist @ mats[direction]
        total = dist.sum()
        if abs(total - 1.0) > 1e-9:
            raise ArithmeticError("probability drift beyond repairable range")
        dist /= total
        out.append(dist.copy())
    return out


def _walk_distribution_exact(h: OrientedDigraph, pattern: str, start: int
                             ) -> list[list[Fraction]]:
    dist = [Fraction(0)] * h.n
    dist[start] = Fraction(1)
    out = [list(dist)]
    for i, direction in enumerate(pattern):
        nxt = [Fraction(0)] * h.n
        for v in range(h.n):
            if dist[v] == 0:
                continue
            nbrs = h.out(v) if direction == "+" else h.inn(v)
            if not nbrs:
                raise ZeroDegreeError(
                    f"step {i + 1}: vertex {v} has no '{direction}' neighbour "
                    f"but carries mass")
            share = dist[v] / len(nbrs)
            for w in nbrs:
                nxt[w] += share
        assert sum(nxt) == 1
        dist = nxt
        out.append(list(dist))
    return out


def squared_distance(dist: Sequence) -> float:
    """Sum over vertices of (p_v - 1/k)^2, the squared distance to uniform."""
    k = len(dist)
    if k == 0:
        raise ValueError("empty distribution")
    if isinstance(dist[0], Fraction):
        u = Fraction(1, k)
        return float(sum((p - u) ** 2 for p in dist))
    arr = np.asarray(dist, dtype=float)
    return float(((arr - 1.0 / k) ** 2).sum())


@dataclass
class MixingRow:
    step: int                 # number of vertices visited so far (1-based)
    deviation: float          # max_v |p_v - 1/k|
    m_value: float            # squared distance to uniform
    bound: float              # exp(-step / (4 k^5))
    ratio: Optional[float]    # m_i / m_{i-1}, None at step 1 or when m_{i-1}=0


@dataclass
class MixingReport:
    k: int
    regular: bool
    degree: Optional[int]
    cherry: bool
    asserted: bool            # bounds asserted (regular and cherry) vs informational
    deviation_ok: bool
    contraction_ok: bool
    rows: list[MixingRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def violations(self) -> list[int]:
        out = []
        for row in self.rows:
            bad_dev = row.deviation > row.bound + 1e-12
            bad_ratio = (row.ratio is not None
                         and row.ratio > (1 - 1 / (2 * self.k ** 5)) * (1 + 1e-12))
            if bad_dev or bad_ratio:
                out.append(row.step)
        return out


def regular_degree(h: OrientedDigraph) -> Optional[int]:
    """The common in/out degree if the digraph is regular, else None."""
    if h.n == 0:
        return None
    d = h.out_degree(0)
    for v in range(h.n):
        if h.out_degree(v) != d or h.in_degree(v) != d:
            return None
    return d


def mixing_report(h: OrientedDigraph, pattern: str, start: int) -> MixingReport:
    """Per-step mixing table with the exponential deviation bound and the
    per-step contraction of the squared distance.

    The bound and contraction columns are assertions only when the host is
    regular with the cherry property; otherwise they are informational and a
    warning records the downgrade.
    """
    k = h.n
    dists = walk_distribution(h, pattern, start)
    deg = regular_degree(h)
    cherry = has_cherry_property(h).has_both if k >= 2 else False
    asserted = deg is not None and deg > 0 and cherry
    contraction = 1 - 1 / (2 * k ** 5)
    rows = []
    prev_m = None
    dev_ok = True
    con_ok = True
    for i, dist in enumerate(dists):
        step = i + 1
        deviation = float(np.abs(dist - 1.0 / k).max())
        m_val = squared_distance(dist)
        bound = math.exp(-step / (4 * k ** 5))
        ratio = None
        if prev_m is not None and prev_m > 0:
            ratio = m_val / prev_m
            if m_val > prev_m * contraction * (1 + 1e-12) + 1e-30:
                con_ok = False
        elif prev_m == 0 and m_val > 1e-24:
            con_ok = False
        if deviation > bound + 1e-12:
            dev_ok = False
        rows.append(MixingRow(step, deviation, m_val, bound, ratio))
        prev_m = m_val
    warnings = []
    if not asserted:
        warnings.append("host is not regular-with-cherry; bound columns are "
                        "informational only")
    return MixingReport(k, deg is not None, deg, cherry, asserted,
                        dev_ok, con_ok, rows, warnings)


def sample_walk(h: OrientedDigraph, pattern: str, start: int, seed) -> list[int]:
    """One trajectory of the pattern walk; frequencies over many seeds match
    walk_distribution (tested property)."""
    validate_pattern(pattern)
    rng = np.random.default_rng(seed)
    v = start
    traj = [v]
    for i, direction in enumerate(pattern):
        nbrs = h.out(v) if direction == "+" else h.inn(v)
        if not nbrs:
            raise ZeroDegreeError(f"step {i + 1}: vertex {v} has no "
                                  f"'{direction}' neighbour")
        v = int(nbrs[rng.integers(len(nbrs))])
        traj.append(v)
    return traj


def random_pattern(length: int, seed) -> str:
    rng = np.random.default_rng(seed)
    return "".join("+" if b else "-" for b in rng.integers(0, 2, size=length))


def cauchy_identity_check(a: Sequence[float], b: Sequence[float]) -> float:
    """Relative residual of the exchange identity
    (sum a_i b_i)^2 = sum a_i^2 sum b_i^2 - 1/2 * sum_{i,j} (a_i b_j - a_j b_i)^2.

    Both sides are evaluated independently (the double sum via an explicit
    outer product); the residual is |lhs - rhs| / max(1, |lhs|, |rhs|).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("sequences must be 1-D of equal length")
    lhs = float(a.dot(b)) ** 2
    ab = np.outer(a, b)
    cross = ab - ab.T  # (a_i b_j - a_j b_i) at [i, j]
    rhs = float((a ** 2).sum() * (b ** 2).sum() - 0.5 * (cross ** 2).sum())
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
