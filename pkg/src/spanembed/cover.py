"""Matching decompositions and spanning regular covers.

A sparse subgraph F of a dense digraph D is decomposed into matchings of the
underlying multigraph and each matching is completed into a 1-regular
spanning subdigraph of D, arc-disjointly; the union is a spanning regular
digraph that contains F.  Completion is a forced bipartite perfect matching
between out-copies and in-copies of the vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .digraph import OrientedDigraph, max_underlying_degree
from .expansion import has_cherry_property


class InfeasibleError(RuntimeError):
    """No perfect matching exists for the requested completion."""


class RetryBudgetError(RuntimeError):
    """Random sampling failed to produce a usable subgraph within budget."""


@dataclass
class MatchingDecomposition:
    matchings: list[frozenset]   # arc sets, pairwise disjoint, union = A(F)
    max_degree: int              # underlying max degree of F

    def __len__(self):
        return len(self.matchings)


def _underlying_adjacent(a: tuple[int, int], used: set[int]) -> bool:
    return a[0] in used or a[1] in used


def edge_colour_decompose(f: OrientedDigraph, size_cap: Optional[int] = None
                          ) -> MatchingDecomposition:
    """Greedy proper edge colouring of the underlying multigraph of f.

    Each arc goes to the first matching touching neither endpoint, which needs
    at most 2*Delta(F) matchings.  Matchings are further chopped to respect
    `size_cap` when given.
    """
    matchings: list[set[tuple[int, int]]] = []
    used: list[set[int]] = []
    for arc in sorted(f.arcs):
        for i, match in enumerate(matchings):
            if not _underlying_adjacent(arc, used[i]):
                match.add(arc)
                used[i].update(arc)
                break
        else:
            matchings.append({arc})
            used.append(set(arc))
    delta = max_underlying_degree(f)
    assert len(matchings) <= max(2 * delta, 1) or not f.arcs
    if size_cap is not None:
        if size_cap < 1:
            raise ValueError("size_cap must be positive")
        chopped = []
        for match in matchings:
            ordered = sorted(match)
            for i in range(0, len(ordered), size_cap):
                chopped.append(set(ordered[i:i + size_cap]))
        matchings = chopped
    return MatchingDecomposition([frozenset(m) for m in matchings], delta)


def one_factor_containing(d: OrientedDigraph, matching: Iterable[tuple[int, int]],
                          forbidden: Iterable[tuple[int, int]] = ()
                          ) -> frozenset:
    """A 1-regular spanning subdigraph of d containing `matching` and avoiding
    `forbidden`, as an arc set.

    Realised as a perfect matching between out-copies and in-copies with the
    matching's arcs forced.  Raises InfeasibleError when no completion exists.
    """
    matching = set(matching)
    forbidden = set(forbidden)
    ends_out = {u for u, _ in matching}
    ends_in = {v for _, v in matching}
    if len(ends_out) != len(matching) or len(ends_in) != len(matching):
        raise ValueError("forced arcs are not a matching")
    for arc in matching:
        if arc not in d.arcs or arc in forbidden:
            raise ValueError(f"forced arc {arc} unavailable in the host")
    left = [u for u in range(d.n) if u not in ends_out]
    right = [v for v in range(d.n) if v not in ends_in]
    r_index = {v: j for j, v in enumerate(right)}
    rows, cols = [], []
    for i, u in enumerate(left):
        for v in d.out(u):
            if v in r_index and (u, v) not in forbidden:
                rows.append(i)
                cols.append(r_index[v])
    bi = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                    shape=(len(left), len(right)))
    match = maximum_bipartite_matching(bi, perm_type="column")
    if (match < 0).any():
        raise InfeasibleError("no 1-regular completion: bipartite matching "
                              "is not perfect at this scale")
    arcs = set(matching)
    for i, u in enumerate(left):
        arcs.add((u, right[int(match[i])]))
    return frozenset(arcs)


def verify_one_factor(d: OrientedDigraph, arcs: frozenset) -> bool:
    outdeg = [0] * d.n
    indeg = [0] * d.n
    for u, v in arcs:
        if (u, v) not in d.arcs:
            return False
        outdeg[u] += 1
        indeg[v] += 1
    return all(o == 1 and i == 1 for o, i in zip(outdeg, indeg))


@dataclass
class RegularCover:
    graph: OrientedDigraph       # the spanning regular digraph H
    degree: int                  # common in/out degree = number of factors
    factors: list[frozenset]     # arc-disjoint 1-regular arc sets


def regular_cover(d: OrientedDigraph, f: OrientedDigraph,
                  size_cap: Optional[int] = None, min_factors: int = 0
                  ) -> RegularCover:
    """Spanning regular H with F ⊆ H ⊆ D.

    F's arcs are decomposed into matchings; each matching is completed into a
    1-regular spanning subdigraph avoiding all other factors and all arcs of
    later matchings.  `min_factors` pads with unconstrained factors so even
    F = empty can yield a nonempty regular subgraph.
    """
    if f.n != d.n:
        raise ValueError("F and D must share a vertex set")
    if not set(f.arcs) <= set(d.arcs):
        raise ValueError("F must be a subgraph of D")
    decomp = edge_colour_decompose(f, size_cap)
    matchings = [set(m) for m in decomp.matchings if m]
    while len(matchings) < min_factors:
        matchings.append(set())
    factors: list[frozenset] = []
    used: set[tuple[int, int]] = set()
    for i, matching in enumerate(matchings):
        later = set().union(*matchings[i + 1:]) if i + 1 < len(matchings) else set()
        try:
            factor = one_factor_containing(d, matching, used | later)
        except InfeasibleError as exc:
            raise InfeasibleError(f"factor {i} of {len(matchings)}: {exc}") from exc
        assert verify_one_factor(d, factor)
        assert not (factor & used)
        factors.append(factor)
        used |= factor
    h = OrientedDigraph(d.n, used)
    assert set(f.arcs) <= used
    return RegularCover(h, len(factors), factors)


def regular_cherry_subgraph(d: OrientedDigraph, xi: float = 0.5, seed=0,
                            max_retries: int = 64, min_factors: int = 1
                            ) -> RegularCover:
    """Spanning regular subgraph of d with the cherry property.

    Samples F = D_p with p = xi/2 until F is sparse (max underlying degree
    <= xi * n) and has the cherry property, then completes F via
    regular_cover; the property is monotone under arc addition, so the cover
    keeps it.  Raises RetryBudgetError when sampling keeps failing, which on
    structurally hopeless hosts (e.g. a directed cycle) is the expected
    outcome.
    """
    from .digraph import random_subgraph

    if not 0.0 < xi <= 1.0:
        raise ValueError("xi must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(max_retries):
        f = random_subgraph(d, xi / 2.0, rng.integers(2 ** 63))
        if max_underlying_degree(f) > xi * d.n:
            last = "sampled subgraph too dense"
            continue
        if not has_cherry_property(f).has_both:
            last = "sampled subgraph lacks the cherry property"
            continue
        try:
            cover = regular_cover(d, f, min_factors=min_factors)
        except InfeasibleError as exc:
            last = str(exc)
            continue
        report = has_cherry_property(cover.graph)
        if not report.has_both:
            last = "cover lost the cherry property (should not happen)"
            continue
        return cover
    raise RetryBudgetError(f"no regular cherry subgraph in {max_retries} tries; "
                           f"last failure: {last}")
