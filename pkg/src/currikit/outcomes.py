"""Task-aligned metrics (accuracy over K trials, its variance) and
assembly of full per-problem metric vectors."""

from __future__ import annotations

from collections.abc import Mapping

from .core import (
    AnnotationRecord,
    CompletionSet,
    MetricProvenance,
    MetricVector,
    MODEL_METRICS,
)


class CorrectnessUnset(ValueError):
    """Completion set has no correctness flags; judge it first."""


class NoMetricSource(ValueError):
    """No model-side values, completion set, or annotation supplied."""


def accuracy(cset: CompletionSet) -> float:
    """Fraction of the K completions judged correct (empirical p-hat)."""
    if cset.correctness is None:
        raise CorrectnessUnset(cset.problem_id)
    return sum(cset.correctness) / cset.k


def accuracy_variance(cset: CompletionSet) -> float:
    """Variance of per-trial correctness via the closed form p(1-p).

    Identical to the mean squared deviation from p-hat, without the second
    pass and its cancellation error.
    """
    p_hat = accuracy(cset)
    return p_hat * (1.0 - p_hat)


def assemble(
    problem_id: str,
    model_side: Mapping[str, tuple[float | None, MetricProvenance]] | None = None,
    cset: CompletionSet | None = None,
    annotation: AnnotationRecord | None = None,
) -> MetricVector:
    """Combine whatever sources exist into one MetricVector.

    acc/vacc are filled together from the judged completion set; annotation
    supplies rs/sc/cd; model_side supplies the trace metrics plus their
    aggregation provenance.
    """
    if model_side is None and cset is None and annotation is None:
        raise NoMetricSource(problem_id)

    fields: dict[str, float | int | None] = {}
    provenance: dict[str, MetricProvenance] = {}

    if model_side is not None:
        for name in MODEL_METRICS:
            if name in model_side:
                value, prov = model_side[name]
                fields[name] = value
                provenance[name] = prov

    if cset is not None:
        p_hat = accuracy(cset)
        fields["acc"] = p_hat
        fields["vacc"] = p_hat * (1.0 - p_hat)
        prov = MetricProvenance(cset.k)
        provenance["acc"] = prov
        provenance["vacc"] = prov

    if annotation is not None:
        fields["rs"] = annotation.rs
        fields["sc"] = annotation.sc
        fields["cd"] = annotation.cd

    return MetricVector(problem_id=problem_id, provenance=provenance, **fields)
