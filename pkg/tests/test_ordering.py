from __future__ import annotations

import json
from pathlib import Path

import pytest

from currikit.core import MetricVector, Problem, Strategy, Tier
from currikit.ingest import file_digest
from currikit.ordering import (
    EQUAL_COUNT,
    QUANTILE,
    CorpusTooSmall,
    MissingMetric,
    TierPartition,
    UnknownId,
    emit_plan,
    order_fcl,
    order_gfc,
    order_grc,
    order_rcl,
    order_sgc,
    order_shuf,
    partition_tiers,
)
from currikit.prng import SplitMix64


def scores_from(values: dict[str, float]) -> list[MetricVector]:
    return [MetricVector(pid, slp=value) for pid, value in values.items()]


def random_scores(n: int, seed: int) -> list[MetricVector]:
    rng = SplitMix64(seed)
    return [MetricVector(f"p{i:03d}", slp=1.0 + rng.next_float() * 9) for i in range(n)]


# --- forward / reverse -----------------------------------------------------------

def test_fcl_sorts_ascending() -> None:
    plan = order_fcl(scores_from({"a": 3.0, "b": 1.0, "c": 2.0}), "slp")
    assert plan.ordering == ("b", "c", "a")
    assert plan.strategy is Strategy.FCL


def test_fcl_stable_ties_keep_corpus_order() -> None:
    plan = order_fcl(scores_from({"a": 1.0, "b": 1.0, "c": 2.0}), "slp")
    assert plan.ordering == ("a", "b", "c")


def test_fcl_missing_metric() -> None:
    scores = [MetricVector("a", slp=1.0), MetricVector("b")]
    with pytest.raises(MissingMetric) as excinfo:
        order_fcl(scores, "slp")
    assert excinfo.value.problem_id == "b"


def test_rcl_is_exact_reverse() -> None:
    plan = order_rcl(scores_from({"a": 3.0, "b": 1.0, "c": 2.0}), "slp")
    assert plan.ordering == ("a", "c", "b")


def test_rcl_reverses_stable_ties() -> None:
    plan = order_rcl(scores_from({"a": 1.0, "b": 1.0}), "slp")
    assert plan.ordering == ("b", "a")


def test_reverse_law_on_random_score_sets() -> None:
    for seed in range(100):
        scores = random_scores(17, seed)
        forward = order_fcl(scores, "slp").ordering
        assert tuple(reversed(forward)) == order_rcl(scores, "slp").ordering


# --- tier partitions ---------------------------------------------------------------

def test_partition_nine_items_equal_thirds() -> None:
    scores = scores_from({f"p{i}": float(i) for i in range(9)})
    partition = partition_tiers(scores, "slp")
    assert partition.low == ("p0", "p1", "p2")
    assert partition.medium == ("p3", "p4", "p5")
    assert partition.high == ("p6", "p7", "p8")


def test_partition_remainder_goes_to_earlier_tiers() -> None:
    ten = partition_tiers(scores_from({f"p{i}": float(i) for i in range(10)}), "slp")
    assert (len(ten.low), len(ten.medium), len(ten.high)) == (4, 3, 3)
    eleven = partition_tiers(scores_from({f"p{i}": float(i) for i in range(11)}), "slp")
    assert (len(eleven.low), len(eleven.medium), len(eleven.high)) == (4, 4, 3)


def test_partition_requires_three_items() -> None:
    with pytest.raises(CorpusTooSmall):
        partition_tiers(scores_from({"a": 1.0, "b": 2.0}), "slp")


def test_partition_rejects_unknown_rule() -> None:
    with pytest.raises(ValueError):
        partition_tiers(scores_from({"a": 1.0, "b": 2.0, "c": 3.0}), "slp", "thirds")


def test_partition_is_ordered_and_covers_corpus() -> None:
    for seed in (0, 1, 2):
        scores = random_scores(20, seed)
        partition = partition_tiers(scores, "slp")
        ordered = order_fcl(scores, "slp").ordering
        assert partition.low + partition.medium + partition.high == ordered


def test_quantile_partition_respects_value_boundaries() -> None:
    values = {f"p{i}": v for i, v in enumerate([1.0, 1.0, 1.0, 1.0, 5.0, 9.0])}
    partition = partition_tiers(scores_from(values), "slp", QUANTILE)
    assert set(partition.low) == {"p0", "p1", "p2", "p3"}  # duplicates stay together
    assert partition.medium == ()
    assert set(partition.high) == {"p4", "p5"}
    union = set(partition.low) | set(partition.medium) | set(partition.high)
    assert union == set(values)


# --- shuffled strategies -------------------------------------------------------------

def make_partition() -> TierPartition:
    scores = scores_from({f"p{i}": float(i) for i in range(9)})
    return partition_tiers(scores, "slp")


def test_sgc_is_permutation_of_selected_tier() -> None:
    plan = order_sgc(make_partition(), Tier.LOW, seed=3)
    assert sorted(plan.ordering) == ["p0", "p1", "p2"]
    assert plan.tier_selector is Tier.LOW
    assert plan.strategy is Strategy.SGC


def test_sgc_deterministic_and_seed_sensitive() -> None:
    partition = partition_tiers(random_scores(300, 5), "slp")
    first = order_sgc(partition, Tier.HIGH, seed=0).ordering
    second = order_sgc(partition, Tier.HIGH, seed=0).ordering
    other = order_sgc(partition, Tier.HIGH, seed=1).ordering
    assert first == second
    assert first != other
    assert sorted(first) == sorted(other)


def test_gfc_blocks_are_tiers_in_forward_order() -> None:
    partition = make_partition()
    plan = order_gfc(partition, seed=11)
    assert sorted(plan.ordering[:3]) == sorted(partition.low)
    assert sorted(plan.ordering[3:6]) == sorted(partition.medium)
    assert sorted(plan.ordering[6:]) == sorted(partition.high)
    assert [b.tier for b in plan.tier_boundaries] == [Tier.LOW, Tier.MEDIUM, Tier.HIGH]
    assert [(b.start, b.end) for b in plan.tier_boundaries] == [(0, 3), (3, 6), (6, 9)]


def test_grc_reverses_tier_blocks_with_identical_inner_permutations() -> None:
    partition = make_partition()
    forward = order_gfc(partition, seed=11)
    reverse = order_grc(partition, seed=11)
    assert reverse.ordering[:3] == forward.ordering[6:]  # high block
    assert reverse.ordering[3:6] == forward.ordering[3:6]  # medium block
    assert reverse.ordering[6:] == forward.ordering[:3]  # low block
    assert sorted(reverse.ordering) == sorted(forward.ordering)


def test_sgc_block_matches_gfc_block_for_same_seed() -> None:
    partition = make_partition()
    gfc = order_gfc(partition, seed=4)
    assert order_sgc(partition, Tier.MEDIUM, seed=4).ordering == gfc.ordering[3:6]


def test_shuf_is_seeded_permutation() -> None:
    ids = [f"p{i}" for i in range(40)]
    plan = order_shuf(ids, seed=9)
    assert sorted(plan.ordering) == sorted(ids)
    assert plan.ordering == order_shuf(ids, seed=9).ordering
    assert plan.ordering != order_shuf(ids, seed=10).ordering
    assert plan.metric_name is None


# --- emit_plan ----------------------------------------------------------------------

def test_emit_plan_writes_problems_in_plan_order(tmp_path: Path) -> None:
    problems = [Problem("a", "qa", "1"), Problem("b", "qb", "2")]
    plan = order_shuf(["a", "b"], seed=2)
    count = emit_plan(plan, problems, tmp_path)
    assert count == 2
    lines = (tmp_path / "ordered_train.jsonl").read_text().splitlines()
    assert [json.loads(line)["id"] for line in lines] == list(plan.ordering)
    manifest = json.loads((tmp_path / "plan.json").read_text())
    assert manifest["strategy"] == "shuf"
    assert manifest["prng"] == "splitmix64"
    assert manifest["seed"] == 2


def test_emit_plan_digest_stable_across_reruns(tmp_path: Path) -> None:
    problems = [Problem(f"p{i}", f"q{i}", "1") for i in range(6)]
    scores = [MetricVector(p.id, slp=float(i)) for i, p in enumerate(problems)]
    plan = order_gfc(partition_tiers(scores, "slp"), seed=1)
    digests = []
    for run in ("one", "two"):
        out = tmp_path / run
        emit_plan(plan, problems, out, input_digests={"scores.jsonl": "00" * 32})
        digests.append(
            (file_digest(out / "ordered_train.jsonl"), file_digest(out / "plan.json"))
        )
    assert digests[0] == digests[1]


def test_emit_plan_unknown_id(tmp_path: Path) -> None:
    plan = order_shuf(["a", "z"], seed=0)
    with pytest.raises(UnknownId) as excinfo:
        emit_plan(plan, [Problem("a", "q", "1")], tmp_path)
    assert excinfo.value.problem_id == "z"


def test_emit_plan_repeat_writes_ordering_verbatim(tmp_path: Path) -> None:
    problems = [Problem("a", "qa", "1"), Problem("b", "qb", "2")]
    plan = order_shuf(["a", "b"], seed=2)
    count = emit_plan(plan, problems, tmp_path, repeat=3)
    assert count == 6
    lines = (tmp_path / "ordered_train.jsonl").read_text().splitlines()
    ids = [json.loads(line)["id"] for line in lines]
    assert ids == list(plan.ordering) * 3
    assert json.loads((tmp_path / "plan.json").read_text())["repeat"] == 3


def test_tier_rule_recorded_in_plan_manifest(tmp_path: Path) -> None:
    scores = scores_from({f"p{i}": float(i) for i in range(9)})
    problems = [Problem(f"p{i}", "q", "1") for i in range(9)]
    plan = order_grc(partition_tiers(scores, "slp", EQUAL_COUNT), seed=0)
    emit_plan(plan, problems, tmp_path)
    manifest = json.loads((tmp_path / "plan.json").read_text())
    assert manifest["tier_rule"] == "equal_count"
    assert manifest["tier_boundaries"] == [["high", 0, 3], ["medium", 3, 6], ["low", 6, 9]]
