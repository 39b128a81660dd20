"""Domain types for the curriculum toolkit.

Everything here is an immutable value object. Constructors validate
structural invariants and raise ValueError; corpus-level consistency
(missing sets, K mismatches, annotation ranges) is the job of
`validate_corpus`, which reports instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class Strategy(str, Enum):
    FCL = "fcl"  # ascending metric value
    RCL = "rcl"  # descending metric value
    SGC = "sgc"  # one tier only, shuffled
    GFC = "gfc"  # tier blocks low -> high, shuffled within
    GRC = "grc"  # tier blocks high -> low, shuffled within
    SHUF = "shuf"  # full-corpus shuffled baseline


class Tier(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


MODEL_METRICS = ("slp", "tlp", "lg", "sle", "tle")
OUTCOME_METRICS = ("acc", "vacc")
ANNOTATION_METRICS = ("rs", "sc", "cd")
ALL_METRICS = MODEL_METRICS + OUTCOME_METRICS + ANNOTATION_METRICS


@dataclass(frozen=True)
class Problem:
    """One training/eval instance."""

    id: str
    question: str
    reference_answer: str
    source_tag: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("problem id must be non-empty")
        if not self.question:
            raise ValueError(f"problem {self.id!r}: question must be non-empty")


@dataclass(frozen=True)
class TokenRecord:
    """Per-position logprob record: the emitted token plus its top-k candidates.

    `topk_logprobs` must arrive sorted non-increasing; ingestion repairs
    unsorted input before construction, the constructor rejects it.
    """

    chosen_logprob: float
    topk_logprobs: tuple[float, ...]
    candidate_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "topk_logprobs", tuple(self.topk_logprobs))
        for value in (self.chosen_logprob, *self.topk_logprobs):
            if not math.isfinite(value):
                raise ValueError(f"logprob {value!r} is not finite")
            if value > 0.0:
                raise ValueError(f"logprob {value!r} is positive")
        pairs = zip(self.topk_logprobs, self.topk_logprobs[1:])
        if any(a < b for a, b in pairs):
            raise ValueError("topk_logprobs must be sorted non-increasing")
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be >= 1")
        if self.candidate_count != len(self.topk_logprobs):
            raise ValueError(
                f"candidate_count {self.candidate_count} != "
                f"{len(self.topk_logprobs)} stored logprobs"
            )


@dataclass(frozen=True)
class GenerationTrace:
    """One sampled completion for a problem, response tokens only."""

    problem_id: str
    completion_index: int
    temperature: float
    tokens: tuple[TokenRecord, ...]
    final_answer_text: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(
                f"trace {self.problem_id!r}/{self.completion_index}: empty token list"
            )
        if self.completion_index < 0:
            raise ValueError("completion_index must be >= 0")


@dataclass(frozen=True)
class CompletionSet:
    """The K sampled traces for one problem, plus per-completion correctness."""

    problem_id: str
    traces: tuple[GenerationTrace, ...]
    correctness: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "traces", tuple(self.traces))
        if not self.traces:
            raise ValueError(f"completion set {self.problem_id!r} has no traces")
        for trace in self.traces:
            if trace.problem_id != self.problem_id:
                raise ValueError(
                    f"trace for {trace.problem_id!r} in set {self.problem_id!r}"
                )
        indices = [t.completion_index for t in self.traces]
        if len(set(indices)) != len(indices):
            raise ValueError(
                f"completion set {self.problem_id!r}: duplicate completion_index"
            )
        if self.correctness is not None:
            object.__setattr__(self, "correctness", tuple(self.correctness))
            if len(self.correctness) != len(self.traces):
                raise ValueError(
                    f"completion set {self.problem_id!r}: "
                    f"{len(self.correctness)} correctness flags for "
                    f"{len(self.traces)} traces"
                )

    @property
    def k(self) -> int:
        return len(self.traces)

    def with_correctness(self, flags: tuple[bool, ...]) -> "CompletionSet":
        return CompletionSet(self.problem_id, self.traces, tuple(flags))


@dataclass(frozen=True)
class AnnotationRecord:
    """Judge-model annotations: reasoning steps, symbol complexity (1-5),
    comprehension difficulty (1-5).

    Range checks are deliberately not enforced here so `validate_corpus` can
    report out-of-range values; `read_annotations` rejects them at ingest.
    """

    problem_id: str
    rs: int
    sc: int
    cd: int

    def range_violations(self) -> list[str]:
        issues = []
        if self.rs < 0:
            issues.append(f"rs out of range: {self.rs}")
        if not 1 <= self.sc <= 5:
            issues.append(f"sc out of range: {self.sc}")
        if not 1 <= self.cd <= 5:
            issues.append(f"cd out of range: {self.cd}")
        return issues


@dataclass(frozen=True)
class MetricProvenance:
    """How a per-problem metric value was aggregated."""

    n_completions_used: int
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricVector:
    """Per-problem scores for every computed metric; absent metrics are None."""

    problem_id: str
    slp: float | None = None
    tlp: float | None = None
    lg: float | None = None
    sle: float | None = None
    tle: float | None = None
    acc: float | None = None
    vacc: float | None = None
    rs: int | None = None
    sc: int | None = None
    cd: int | None = None
    provenance: dict[str, MetricProvenance] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in MODEL_METRICS + OUTCOME_METRICS:
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{self.problem_id!r}: {name} is not finite")
        if (self.acc is None) != (self.vacc is None):
            raise ValueError(
                f"{self.problem_id!r}: acc and vacc must be present together"
            )
        if self.acc is not None:
            if not 0.0 <= self.acc <= 1.0:
                raise ValueError(f"{self.problem_id!r}: acc outside [0, 1]")
            if abs(self.vacc - self.acc * (1.0 - self.acc)) > 1e-12:
                raise ValueError(
                    f"{self.problem_id!r}: vacc {self.vacc} != acc(1-acc)"
                )

    def value(self, metric: str) -> float | int | None:
        if metric not in ALL_METRICS:
            raise KeyError(f"unknown metric {metric!r}")
        return getattr(self, metric)


@dataclass(frozen=True)
class TierBoundary:
    """Half-open [start, end) block of one tier inside a plan ordering."""

    tier: Tier
    start: int
    end: int


@dataclass(frozen=True)
class CurriculumPlan:
    """A deterministic permutation of problem ids plus how it was built."""

    strategy: Strategy
    metric_name: str | None
    seed: int
    ordering: tuple[str, ...]
    tier_selector: Tier | None = None
    tier_rule: str | None = None
    tier_boundaries: tuple[TierBoundary, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering", tuple(self.ordering))
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if len(set(self.ordering)) != len(self.ordering):
            raise ValueError("plan ordering contains duplicate ids")
        if (self.strategy is Strategy.SGC) != (self.tier_selector is not None):
            raise ValueError("tier_selector is required for SGC and only SGC")
        if self.strategy is not Strategy.SHUF and self.metric_name is None:
            raise ValueError(f"{self.strategy.value} plan requires a metric name")


@dataclass(frozen=True)
class ValidationIssue:
    problem_id: str | None
    message: str


@dataclass
class ValidationReport:
    violations: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_corpus(
    problems: list[Problem],
    sets: list[CompletionSet],
    annotations: list[AnnotationRecord] | None = None,
    *,
    k_completions: int = 20,
    permissive: bool = False,
) -> ValidationReport:
    """Cross-check a corpus and report every inconsistency; never mutates.

    K mismatches are violations unless `permissive` downgrades them to
    warnings. Missing annotations are only reported when an annotation list
    was supplied at all.
    """
    report = ValidationReport()

    seen_ids: set[str] = set()
    for problem in problems:
        if problem.id in seen_ids:
            report.violations.append(
                ValidationIssue(problem.id, "duplicate problem id")
            )
        seen_ids.add(problem.id)

    sets_by_id: dict[str, CompletionSet] = {}
    for cset in sets:
        if cset.problem_id in sets_by_id:
            report.violations.append(
                ValidationIssue(cset.problem_id, "duplicate completion set")
            )
            continue
        sets_by_id[cset.problem_id] = cset
        if cset.problem_id not in seen_ids:
            report.violations.append(
                ValidationIssue(cset.problem_id, "completion set for unknown problem")
            )

    for problem in problems:
        cset = sets_by_id.get(problem.id)
        if cset is None:
            report.violations.append(
                ValidationIssue(problem.id, "missing completion set")
            )
            continue
        if cset.k != k_completions:
            issue = ValidationIssue(
                problem.id, f"K mismatch: {cset.k}/{k_completions}"
            )
            if permissive:
                report.warnings.append(issue)
            else:
                report.violations.append(issue)

    if annotations is not None:
        annotated: set[str] = set()
        for record in annotations:
            if record.problem_id in annotated:
                report.violations.append(
                    ValidationIssue(record.problem_id, "duplicate annotation")
                )
            annotated.add(record.problem_id)
            if record.problem_id not in seen_ids:
                report.violations.append(
                    ValidationIssue(record.problem_id, "annotation for unknown problem")
                )
            for message in record.range_violations():
                report.violations.append(ValidationIssue(record.problem_id, message))
        for problem in problems:
            if problem.id not in annotated:
                report.violations.append(
                    ValidationIssue(problem.id, "missing annotation")
                )

    return report
