"""End-to-end harness: scenario trees, synthetic reduced models, the full
assignment pipeline (split, collections, assignment, incorporation,
balancing), desk-scale embedding, and the theorem spot-check.

All randomness flows from the config seed through numpy SeedSequence
spawning: stage i uses child stream i, so stage outputs are reproducible
from (config, seed) alone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import assign, embed, trees
from .assign import (Assignment, ExceptionalVertex, ReducedModel, SupplyError,
                     TraverseError, build_reduced_model, prop72_constants,
                     split_capacity)
from .digraph import (OrientedDigraph, extremal_construction, min_semidegree,
                      random_tournament, regular_tournament)
from .embed import BlowUpHost, brute_force_embed, greedy_blowup_embed
from .trees import (Member, RootedOrientedTree, TreeCollections,
                    antidirected_path, bare_segment_length, directed_path,
                    extract_subtree, random_tree, select_collections,
                    split_tree)

KINDS = ("leafy", "bare", "switchy")
CASE_OF_KIND = {"leafy": "a", "bare": "b", "switchy": "c"}
KIND_OF_CASE = {v: k for k, v in CASE_OF_KIND.items()}


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    kind: str = "leafy"
    n: int = 2000
    k: int = 8
    u0: int = 3
    seed: int = 0
    gamma: float = 0.9
    delta: int = 3
    ell: Optional[int] = None          # bare-path harvest length (bare kind)
    density: float = 0.5               # blow-up block density
    embed_stage: bool = False          # run blow-up + greedy embedding
    declaration_mode: str = "supplied"  # or "uniform"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0,1)")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0,1]")
        if self.declaration_mode not in ("supplied", "uniform"):
            raise ValueError("declaration_mode must be 'supplied' or 'uniform'")
        if self.n < 2 or self.k < 3 or self.u0 < 0:
            raise ValueError("need n >= 2, k >= 3 and u0 >= 0")


def scenario_tree(kind: str, n: int, delta: int, seed) -> RootedOrientedTree:
    """Canonical tree family per scenario: many leaves, one long directed
    chain, or one long alternating chain."""
    if kind == "leafy":
        return random_tree(n, delta, seed)
    if kind == "bare":
        return directed_path(n)
    if kind == "switchy":
        return antidirected_path(n)
    raise ValueError(f"unknown kind {kind!r}")


def synthesize_exceptionals(model: ReducedModel, count: int, kind: str,
                            r_members: Sequence[Member],
                            t_b: RootedOrientedTree, asg: Assignment,
                            seed, mode: str = "supplied"
                            ) -> list[ExceptionalVertex]:
    """Declare count exceptional vertices with (i_plus, i_minus) clusters.

    'supplied' draws the supply-relevant cluster uniformly among clusters
    that still have an unreserved member anchored there (mirroring the degree
    pigeonhole, which in a dense host admits many qualifying clusters);
    'uniform' draws both clusters uniformly and may exhaust supply downstream.
    """
    rng = np.random.default_rng(seed)
    k = model.k
    out = []
    if mode == "uniform" or not r_members:
        for token in range(count):
            out.append(ExceptionalVertex(token, int(rng.integers(k)),
                                         int(rng.integers(k))))
        return out
    in_root = assign._member_root_is_in_vertex(t_b, r_members[0]) \
        if kind in ("leafy", "switchy") else False
    supply = np.zeros(k, dtype=np.int64)
    for m in r_members:
        anchor = m.start if kind == "bare" else m.root
        supply[int(asg.targets[anchor])] += 1
    for token in range(count):
        avail = np.flatnonzero(supply > 0)
        if not len(avail):
            raise SupplyError("not enough collection members to anchor all "
                              "exceptional vertices")
        anchored = int(avail[rng.integers(len(avail))])
        supply[anchored] -= 1
        free = int(rng.integers(k))
        if kind == "bare":
            out.append(ExceptionalVertex(token, free, anchored))
        elif in_root:
            out.append(ExceptionalVertex(token, anchored, free))
        else:
            out.append(ExceptionalVertex(token, free, anchored))
    return out


@dataclass
class PipelineResult:
    config: PipelineConfig
    stages: dict = field(default_factory=dict)
    error: Optional[str] = None
    error_stage: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict:
        return {"config": asdict(self.config), "stages": self.stages,
                "error": self.error, "error_stage": self.error_stage}


def pipeline_run(config: PipelineConfig, stop_after: str = "balance",
                 collect_objects: bool = False) -> PipelineResult:
    """Run the assignment pipeline stage by stage, validating as it goes.

    stop_after: 'balance' (default) or 'embed'.  Stage errors are caught and
    tagged; the result carries JSON-ready stage summaries, plus live objects
    when collect_objects is set (used by tests).
    """
    streams = np.random.SeedSequence(config.seed).spawn(8)
    result = PipelineResult(config)
    stages = result.stages
    objs: dict = {}
    if collect_objects:
        stages["objects"] = objs
    stage = "scenario-tree"
    try:
        t = scenario_tree(config.kind, config.n, config.delta, streams[0])
        stage = "split-tree"
        k_split = max(4, min(config.ell or 8, 64)) if config.kind != "bare" else \
            (config.ell or 2 * bare_segment_length(config.gamma, config.k))
        split = split_tree(t, k_split, config.delta)
        if split.case != CASE_OF_KIND[config.kind]:
            raise RuntimeError(
                f"scenario tree split into case {split.case!r}, wanted "
                f"{CASE_OF_KIND[config.kind]!r}")
        side_b = split.side_b if len(split.side_b) >= len(split.side_a) \
            else split.side_a
        root_b = split.root_b if side_b is split.side_b else split.root_a
        t_b, vmap = extract_subtree(t, side_b, root_b)
        stages["split"] = {"case": split.case, "n_b": t_b.n,
                           "n_a": t.n - t_b.n, "t_bound": split.t_bound}
        stage = "collections"
        ell = config.ell or (2 * bare_segment_length(config.gamma, config.k)
                             if config.kind == "bare" else 8)
        coll = select_collections(t_b, split.case, ell=ell, gamma=config.gamma,
                                  k_b=config.k)
        stages["collections"] = {"kind": coll.kind,
                                 "p": len(coll.p_members),
                                 "r": len(coll.r_members),
                                 **coll.report}
        stage = "model"
        n_assigned = t_b.n - config.u0
        capacity = split_capacity(n_assigned, config.k)
        model = build_reduced_model(config.k, capacity,
                                    seed=streams[1])
        stages["model"] = {"k": model.k, "walk_degree":
                           model.walk_graph.out_degree(0),
                           "capacity": capacity.tolist()}
        stage = "admissible-prune"
        _, delta_c, _ = prop72_constants(config.k, config.delta)
        big_k = max(1, round(t_b.n ** (1.0 - 5 * delta_c)))
        family = trees.admissible_partition(t_b, big_k)
        order = trees.family_topdown_order(t_b, family)
        p_kept, p_removed = assign.prune_collection(
            t_b, coll.p_members, model, config.delta, family.roots)
        r_kept, r_removed = assign.prune_collection(
            t_b, coll.r_members, model, config.delta, family.roots)
        stages["prune"] = {"K": big_k, "pieces": len(family.pieces),
                           "p_removed": len(p_removed),
                           "r_removed": len(r_removed)}
        if not p_kept or not r_kept:
            raise SupplyError("pruning exhausted a collection side")
        stage = "assignment"
        asg = assign.semi_random_assignment(model, t_b, p_kept + r_kept,
                                            streams[2], order=order)
        stats = assign.assignment_stats(model, t_b, asg, p_kept, r_kept)
        stages["assignment"] = {
            "counts": stats.vert_all.tolist(),
            "max_deviation": stats.max_deviation(),
            "members_on_cycle": stats.members_on_cycle,
        }
        stage = "exceptional"
        excs = synthesize_exceptionals(model, config.u0, config.kind, r_kept,
                                       t_b, asg, streams[3],
                                       config.declaration_mode)
        asg1, r_after = assign.incorporate_exceptional(
            model, t_b, asg, excs, r_kept, config.kind)
        stages["exceptional"] = {"count": len(excs),
                                 "r_remaining": len(r_after)}
        stage = "balance"
        asg2, r_final, rounds = assign.balance_assignment(
            model, t_b, asg1, r_after, config.kind, capacity)
        verdict = assign.validate_assignment(model, t_b, asg2, capacity,
                                             p_members=p_kept)
        stages["balance"] = {
            "rounds": rounds,
            "r_remaining": len(r_final),
            "valid": verdict.ok,
            "violations": verdict.violations[:10],
            "perfectly_balanced": bool((verdict.counts == capacity).all()),
            "p_members_on_cycle": assign.members_on_cycle(model, t_b, asg2,
                                                          p_kept),
        }
        if not verdict.ok:
            raise RuntimeError(f"final assignment invalid: {verdict.violations[:3]}")
        if collect_objects:
            objs.update(tree=t, t_b=t_b, model=model, collections=coll,
                        p_members=p_kept, r_members=r_final, assignment=asg2,
                        exceptionals=excs, capacity=capacity)
        if stop_after == "balance":
            return result
        stage = "blow-up"
        host = embed.blow_up(model, capacity.tolist(), config.density,
                             streams[4], excs)
        stages["blow_up"] = {"host_n": host.graph.n, "host_m": host.graph.m,
                             "floor_resamples": host.floor_resamples}
        stage = "greedy-embed"
        report = greedy_blowup_embed(host, model, t_b, asg2, streams[5])
        stages["embed"] = {"status": report.status,
                           "embedded": report.embedded,
                           "retries": report.retries,
                           "failed_vertex": report.failed_vertex}
        if collect_objects:
            objs.update(host=host, embedding=report)
        return result
    except Exception as exc:   # noqa: BLE001 - stage tagging is the point
        result.error = f"{type(exc).__name__}: {exc}"
        result.error_stage = stage
        return result


# -- theorem desk check --------------------------------------------------------

@dataclass
class TheoremConfig:
    sizes: tuple[int, ...] = (9, 11, 13)
    gamma: float = 0.05
    delta: int = 3
    trees_per_host: int = 200
    seed: int = 0
    budget: int = 5_000_000
    include_random_hosts: bool = False


@dataclass
class TheoremRow:
    host: str
    n: int
    threshold: int
    trials: int
    embedded: int
    none: int
    budget_hits: int


@dataclass
class TheoremReport:
    rows: list[TheoremRow]
    extremal_row: dict
    empty_hosts: list[int]

    def all_embedded(self) -> bool:
        return all(r.embedded == r.trials for r in self.rows)


def theorem_desk_check(config: TheoremConfig) -> TheoremReport:
    """Spot-check of the embedding statement at desk scale.

    Hosts with min semidegree above ceil((3/8+gamma)n) get random
    bounded-degree spanning trees embedded by the exact oracle; the sharpness
    construction versus the alternating Hamilton path supplies the negative
    row.  Sizes whose threshold exceeds the tournament bound (n-1)/2 yield no
    host and are reported as empty.
    """
    rng = np.random.default_rng(config.seed)
    rows = []
    empty = []
    for n in config.sizes:
        threshold = math.ceil((3 / 8 + config.gamma) * n)
        if threshold > (n - 1) // 2:
            empty.append(n)
            continue
        hosts = [("regular-tournament", regular_tournament(n))]
        if config.include_random_hosts:
            for _ in range(20):
                cand = random_tournament(n, rng.integers(2 ** 63))
                if min_semidegree(cand) >= threshold:
                    hosts.append(("random-tournament", cand))
                    break
        for name, host in hosts:
            embedded = none = budget_hits = 0
            for _ in range(config.trees_per_host):
                tr = random_tree(n, config.delta, rng.integers(2 ** 63))
                res = brute_force_embed(tr, host, config.budget)
                if res.status == "found":
                    embedded += 1
                elif res.status == "none":
                    none += 1
                else:
                    budget_hits += 1
            rows.append(TheoremRow(name, n, threshold, config.trees_per_host,
                                   embedded, none, budget_hits))
    sharp = extremal_construction(1)
    anti = antidirected_path(sharp.n)
    res = brute_force_embed(anti, sharp, config.budget)
    extremal_row = {"host": "extremal-construction(k=1)", "n": sharp.n,
                    "tree": "antidirected hamilton path",
                    "status": res.status, "nodes": res.nodes}
    return TheoremReport(rows, extremal_row, empty)
