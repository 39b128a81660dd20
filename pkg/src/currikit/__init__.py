"""Offline curriculum construction from generation traces.

Scores training problems with problem-side and model-side difficulty
metrics, then emits deterministic forward/reverse/tiered data orderings.
"""

from .core import (
    ALL_METRICS,
    AnnotationRecord,
    CompletionSet,
    CurriculumPlan,
    GenerationTrace,
    MetricProvenance,
    MetricVector,
    Problem,
    Strategy,
    Tier,
    TokenRecord,
    ValidationReport,
    validate_corpus,
)
from .answers import NormalizedAnswer, equivalent, judge_set, normalize
from .metrics import (
    TruncatedDistribution,
    aggregate,
    logit_gap,
    score_completion_set,
    sequence_entropy,
    sequence_perplexity,
    token_entropy,
    token_perplexity,
    truncated_distribution,
)
from .ordering import (
    TierPartition,
    emit_plan,
    order_fcl,
    order_gfc,
    order_grc,
    order_rcl,
    order_sgc,
    order_shuf,
    partition_tiers,
)
from .outcomes import accuracy, accuracy_variance, assemble

__version__ = "0.1.0"

__all__ = [
    "ALL_METRICS",
    "AnnotationRecord",
    "CompletionSet",
    "CurriculumPlan",
    "GenerationTrace",
    "MetricProvenance",
    "MetricVector",
    "NormalizedAnswer",
    "Problem",
    "Strategy",
    "Tier",
    "TierPartition",
    "TokenRecord",
    "TruncatedDistribution",
    "ValidationReport",
    "accuracy",
    "accuracy_variance",
    "aggregate",
    "assemble",
    "emit_plan",
    "equivalent",
    "judge_set",
    "logit_gap",
    "normalize",
    "order_fcl",
    "order_gfc",
    "order_grc",
    "order_rcl",
    "order_sgc",
    "order_shuf",
    "partition_tiers",
    "score_completion_set",
    "sequence_entropy",
    "sequence_perplexity",
    "token_entropy",
    "token_perplexity",
    "truncated_distribution",
    "validate_corpus",
]
