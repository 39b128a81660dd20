"""Deterministic curriculum construction from per-problem scores.

Sorting is stable with the original corpus index as tiebreak, so plans are
reproducible and auditable. All shuffling goes through the seeded portable
PRNG in `currikit.prng`; tiered strategies derive per-tier sub-seeds as
seed XOR tier-index (low=0, medium=1, high=2), which makes SGC, GFC and
GRC agree on within-tier permutations for the same seed.
"""

from __future__ import annotations

import json
import statistics
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .core import (
    CurriculumPlan,
    MetricVector,
    Problem,
    Strategy,
    Tier,
    TierBoundary,
)
from .ingest import SinkFailure, write_problems
from .prng import PRNG_NAME, shuffled, subseed

EQUAL_COUNT = "equal_count"
QUANTILE = "quantile"

_TIER_INDEX = {Tier.LOW: 0, Tier.MEDIUM: 1, Tier.HIGH: 2}


class MissingMetric(ValueError):
    def __init__(self, problem_id: str, metric: str):
        super().__init__(f"problem {problem_id!r} has no value for metric {metric!r}")
        self.problem_id = problem_id
        self.metric = metric


class CorpusTooSmall(ValueError):
    pass


class UnknownId(ValueError):
    def __init__(self, problem_id: str):
        super().__init__(f"plan references unknown problem id {problem_id!r}")
        self.problem_id = problem_id


class UnknownStrategy(ValueError):
    pass


@dataclass(frozen=True)
class TierPartition:
    """Three difficulty bands; low holds the smallest metric values."""

    metric_name: str
    low: tuple[str, ...]
    medium: tuple[str, ...]
    high: tuple[str, ...]
    split_rule: str

    def members(self, tier: Tier) -> tuple[str, ...]:
        return {Tier.LOW: self.low, Tier.MEDIUM: self.medium, Tier.HIGH: self.high}[tier]


def _fcl_ids(scores: Sequence[MetricVector], metric: str) -> list[str]:
    """Ids sorted ascending by metric value, corpus order breaking ties."""
    for vector in scores:
        if vector.value(metric) is None:
            raise MissingMetric(vector.problem_id, metric)
    ranked = sorted(enumerate(scores), key=lambda pair: (pair[1].value(metric), pair[0]))
    return [vector.problem_id for _, vector in ranked]


def order_fcl(
    scores: Sequence[MetricVector], metric: str, seed: int = 0
) -> CurriculumPlan:
    """Ascending metric value (stable; ties keep corpus order)."""
    return CurriculumPlan(
        strategy=Strategy.FCL,
        metric_name=metric,
        seed=seed,
        ordering=tuple(_fcl_ids(scores, metric)),
    )


def order_rcl(
    scores: Sequence[MetricVector], metric: str, seed: int = 0
) -> CurriculumPlan:
    """Exact reverse of the forward ordering, tie handling included."""
    return CurriculumPlan(
        strategy=Strategy.RCL,
        metric_name=metric,
        seed=seed,
        ordering=tuple(reversed(_fcl_ids(scores, metric))),
    )


def partition_tiers(
    scores: Sequence[MetricVector], metric: str, rule: str = EQUAL_COUNT
) -> TierPartition:
    """Cut the ascending ordering into three tiers.

    equal_count: contiguous thirds; when N mod 3 = r the first r tiers take
    one extra element. quantile: cuts at the 1/3 and 2/3 empirical quantiles
    (value <= q1 -> low, value > q2 -> high), so duplicates never straddle a
    value boundary.
    """
    if rule not in (EQUAL_COUNT, QUANTILE):
        raise ValueError(f"unknown split rule {rule!r}")
    ordered = _fcl_ids(scores, metric)
    n = len(ordered)
    if rule == EQUAL_COUNT:
        if n < 3:
            raise CorpusTooSmall(f"equal_count tiering needs >= 3 problems, got {n}")
        base, remainder = divmod(n, 3)
        sizes = [base + (1 if i < remainder else 0) for i in range(3)]
        low_end = sizes[0]
        medium_end = sizes[0] + sizes[1]
    else:
        if n < 1:
            raise CorpusTooSmall("quantile tiering needs a non-empty corpus")
        values_by_id = {v.problem_id: v.value(metric) for v in scores}
        ordered_values = [values_by_id[i] for i in ordered]
        if n == 1:
            q1 = q2 = ordered_values[0]
        else:
            q1, q2 = statistics.quantiles(ordered_values, n=3, method="inclusive")
        low_end = sum(1 for v in ordered_values if v <= q1)
        medium_end = sum(1 for v in ordered_values if v <= q2)
    return TierPartition(
        metric_name=metric,
        low=tuple(ordered[:low_end]),
        medium=tuple(ordered[low_end:medium_end]),
        high=tuple(ordered[medium_end:]),
        split_rule=rule,
    )


def _tier_shuffle(partition: TierPartition, tier: Tier, seed: int) -> list[str]:
    return shuffled(partition.members(tier), subseed(seed, _TIER_INDEX[tier]))


def order_sgc(partition: TierPartition, tier: Tier, seed: int) -> CurriculumPlan:
    """One tier only, shuffled."""
    return CurriculumPlan(
        strategy=Strategy.SGC,
        metric_name=partition.metric_name,
        seed=seed,
        ordering=tuple(_tier_shuffle(partition, tier, seed)),
        tier_selector=tier,
        tier_rule=partition.split_rule,
    )


def _grouped_plan(
    partition: TierPartition, seed: int, strategy: Strategy, tiers: list[Tier]
) -> CurriculumPlan:
    ordering: list[str] = []
    boundaries: list[TierBoundary] = []
    for tier in tiers:
        block = _tier_shuffle(partition, tier, seed)
        boundaries.append(TierBoundary(tier, len(ordering), len(ordering) + len(block)))
        ordering.extend(block)
    return CurriculumPlan(
        strategy=strategy,
        metric_name=partition.metric_name,
        seed=seed,
        ordering=tuple(ordering),
        tier_rule=partition.split_rule,
        tier_boundaries=tuple(boundaries),
    )


def order_gfc(partition: TierPartition, seed: int) -> CurriculumPlan:
    """Shuffled tier blocks, low -> medium -> high."""
    return _grouped_plan(partition, seed, Strategy.GFC, [Tier.LOW, Tier.MEDIUM, Tier.HIGH])


def order_grc(partition: TierPartition, seed: int) -> CurriculumPlan:
    """Same tier blocks as GFC (same sub-seeds), concatenated high -> low."""
    return _grouped_plan(partition, seed, Strategy.GRC, [Tier.HIGH, Tier.MEDIUM, Tier.LOW])


def order_shuf(problem_ids: Sequence[str], seed: int) -> CurriculumPlan:
    """Full-corpus seeded shuffle baseline."""
    return CurriculumPlan(
        strategy=Strategy.SHUF,
        metric_name=None,
        seed=seed,
        ordering=tuple(shuffled(problem_ids, seed)),
    )


def plan_to_manifest(
    plan: CurriculumPlan, input_digests: dict[str, str] | None = None
) -> dict:
    return {
        "strategy": plan.strategy.value,
        "metric": plan.metric_name,
        "seed": plan.seed,
        "prng": PRNG_NAME,
        "tier_rule": plan.tier_rule,
        "tier_selector": plan.tier_selector.value if plan.tier_selector else None,
        "tier_boundaries": (
            None
            if plan.tier_boundaries is None
            else [[b.tier.value, b.start, b.end] for b in plan.tier_boundaries]
        ),
        "input_digests": dict(sorted((input_digests or {}).items())),
    }


def emit_plan(
    plan: CurriculumPlan,
    problems: Sequence[Problem],
    out_dir: Path,
    input_digests: dict[str, str] | None = None,
    repeat: int = 1,
) -> int:
    """Write ordered_train.jsonl (problems in plan order, optionally repeated
    verbatim for multi-epoch trainers) plus the plan.json manifest."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    by_id = {problem.id: problem for problem in problems}
    for problem_id in plan.ordering:
        if problem_id not in by_id:
            raise UnknownId(problem_id)
    ordered = [by_id[problem_id] for problem_id in plan.ordering] * repeat

    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        with (out_dir / "ordered_train.jsonl").open("w", encoding="utf-8", newline="\n") as sink:
            count = write_problems(ordered, sink)
        manifest = plan_to_manifest(plan, input_digests)
        if repeat != 1:
            manifest["repeat"] = repeat
        with (out_dir / "plan.json").open("w", encoding="utf-8", newline="\n") as sink:
            json.dump(manifest, sink, indent=2, ensure_ascii=False)
            sink.write("\n")
    except OSError as exc:
        raise SinkFailure(str(exc)) from exc
    return count
