"""Model-side difficulty metrics computed from per-token logprob traces.

Unit conventions: stored logprobs are natural-log everywhere. The two
perplexity metrics exponentiate natural-log means; the two entropy metrics
are reported in bits (base 2); the logit gap stays in natural-log units.

Every reduction goes through math.fsum (error-compensated), and traces are
always folded in stored token order, so per-problem values are bitwise
identical no matter how the corpus is sharded across workers.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .core import (
    CompletionSet,
    GenerationTrace,
    MetricProvenance,
    MODEL_METRICS,
    TokenRecord,
)


@dataclass(frozen=True)
class TruncatedDistribution:
    """Softmax renormalization of the stored top-k candidate logprobs.

    Probabilities may underflow to exactly 0.0 for candidates hundreds of
    nats below the head; entropy treats those as contributing nothing.
    """

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(self.probs))
        if not self.probs:
            raise ValueError("distribution must have at least one candidate")
        for q in self.probs:
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"probability {q!r} outside [0, 1]")
        if any(a < b for a, b in zip(self.probs, self.probs[1:])):
            raise ValueError("probabilities must be sorted non-increasing")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")


def truncated_distribution(record: TokenRecord) -> TruncatedDistribution:
    """Max-shifted softmax over the candidate logprobs (stable for any scale)."""
    shift = record.topk_logprobs[0]
    weights = [math.exp(value - shift) for value in record.topk_logprobs]
    total = math.fsum(weights)
    return TruncatedDistribution(tuple(w / total for w in weights))


def _entropy_nat(dist: TruncatedDistribution) -> float:
    return 0.0 - math.fsum(q * math.log(q) for q in dist.probs if q > 0.0)


def _entropy_bits(dist: TruncatedDistribution) -> float:
    return 0.0 - math.fsum(q * math.log2(q) for q in dist.probs if q > 0.0)


def sequence_perplexity(trace: GenerationTrace) -> float:
    """exp of the negated mean chosen-token logprob; >= 1 for valid logprobs."""
    mean = math.fsum(t.chosen_logprob for t in trace.tokens) / len(trace.tokens)
    return math.exp(-mean)


def token_perplexity(trace: GenerationTrace) -> float:
    """exp of the mean per-token natural-log entropy; ranges over [1, k]."""
    entropies = (_entropy_nat(truncated_distribution(t)) for t in trace.tokens)
    return math.exp(math.fsum(entropies) / len(trace.tokens))


def logit_gap(trace: GenerationTrace) -> float | None:
    """Mean top-1 minus top-2 logprob margin over positions with >= 2
    candidates; None when no position qualifies."""
    gaps = [
        t.topk_logprobs[0] - t.topk_logprobs[1]
        for t in trace.tokens
        if t.candidate_count >= 2
    ]
    if not gaps:
        return None
    return math.fsum(gaps) / len(gaps)


def sequence_entropy(trace: GenerationTrace) -> float:
    """Summed (not averaged) per-token entropy in bits; in [0, T*log2(k)]."""
    return math.fsum(
        _entropy_bits(truncated_distribution(t)) for t in trace.tokens
    )


def token_entropy(trace: GenerationTrace) -> float:
    """Mean per-token entropy in bits; in [0, log2(k)]."""
    total = math.fsum(_entropy_bits(truncated_distribution(t)) for t in trace.tokens)
    return total / len(trace.tokens)


TRACE_METRICS: dict[str, Callable[[GenerationTrace], float | None]] = {
    "slp": sequence_perplexity,
    "tlp": token_perplexity,
    "lg": logit_gap,
    "sle": sequence_entropy,
    "tle": token_entropy,
}

assert tuple(TRACE_METRICS) == MODEL_METRICS


def aggregate(
    per_trace_values: Sequence[float | None], k: int
) -> tuple[float | None, MetricProvenance]:
    """Mean over the present per-completion values.

    Absent values shrink the divisor (recorded in provenance) instead of
    failing the problem; all-absent aggregates to None.
    """
    if len(per_trace_values) != k:
        raise ValueError(f"expected {k} per-trace values, got {len(per_trace_values)}")
    present = [v for v in per_trace_values if v is not None]
    if not present:
        return None, MetricProvenance(0, ("no completions produced a value",))
    warnings: tuple[str, ...] = ()
    if len(present) < k:
        warnings = (f"aggregated over {len(present)} of {k} completions",)
    return math.fsum(present) / len(present), MetricProvenance(len(present), warnings)


def score_completion_set(
    cset: CompletionSet, metrics: Sequence[str] = MODEL_METRICS
) -> dict[str, tuple[float | None, MetricProvenance]]:
    """Per-trace metrics aggregated to one value per metric for a problem."""
    results: dict[str, tuple[float | None, MetricProvenance]] = {}
    for name in metrics:
        fn = TRACE_METRICS[name]
        values = [fn(trace) for trace in cset.traces]
        results[name] = aggregate(values, cset.k)
    return results
