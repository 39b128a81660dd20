"""Brute-force reference implementations and synthetic trace generation.

Everything here re-derives results with the plainest possible code:
unshifted softmax, bare Python sums, one literal loop per formula. It
shares no reduction code with `currikit.metrics`, so agreement between the
two paths is meaningful. Slow on purpose; meant for small fuzz corpora.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import GenerationTrace, TokenRecord
from .prng import SplitMix64

PROFILES = ("uniform", "deterministic", "random")

# Logprob for the "impossible" tail candidates of the deterministic profile:
# exp(-800) underflows to 0.0, so the renormalized head carries exactly 1.0.
_NEGLIGIBLE = -800.0


@dataclass(frozen=True)
class SyntheticTraceSpec:
    """Recipe for one synthetic trace with known or seeded statistics."""

    token_count: int
    candidate_counts: tuple[int, ...]
    entropy_profile: str
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidate_counts", tuple(self.candidate_counts))
        if self.token_count < 1:
            raise ValueError("token_count must be >= 1")
        if len(self.candidate_counts) != self.token_count:
            raise ValueError("need one candidate count per token")
        if any(m < 1 for m in self.candidate_counts):
            raise ValueError("candidate counts must be >= 1")
        if self.entropy_profile not in PROFILES:
            raise ValueError(f"unknown entropy profile {self.entropy_profile!r}")


def generate_trace(
    spec: SyntheticTraceSpec,
    problem_id: str = "synthetic",
    completion_index: int = 0,
    temperature: float = 0.7,
    final_answer_text: str = "0",
) -> GenerationTrace:
    """Build a trace whose metric values are known (uniform/deterministic)
    or reproducible from the seed (random: Dirichlet-like candidate masses)."""
    rng = SplitMix64(spec.seed)
    tokens = []
    for m in spec.candidate_counts:
        if spec.entropy_profile == "uniform":
            level = math.log(1.0 / m)
            topk = (level,) * m
            chosen = level
        elif spec.entropy_profile == "deterministic":
            topk = (0.0,) + (_NEGLIGIBLE,) * (m - 1)
            chosen = 0.0
        else:
            draws = [-math.log(1.0 - rng.next_float()) for _ in range(m)]
            total = sum(draws)
            mass = 0.5 + 0.5 * rng.next_float()  # top-k mass of the full vocab
            probs = sorted((d / total for d in draws), reverse=True)
            topk = tuple(math.log(mass * p) for p in probs)
            chosen = topk[rng.next_below(m)]
        tokens.append(TokenRecord(chosen, topk, m))
    return GenerationTrace(
        problem_id=problem_id,
        completion_index=completion_index,
        temperature=temperature,
        tokens=tuple(tokens),
        final_answer_text=final_answer_text,
    )


def _naive_probs(record: TokenRecord) -> list[float]:
    weights = [math.exp(value) for value in record.topk_logprobs]
    total = sum(weights)
    return [w / total for w in weights]


def _naive_entropy(record: TokenRecord, log) -> float:
    total = 0.0
    for q in _naive_probs(record):
        if q > 0.0:
            total += q * log(q)
    return -total


def oracle_metric(trace: GenerationTrace, metric_name: str) -> float | None:
    """Literal transliteration of each metric formula, one value per trace."""
    t_count = len(trace.tokens)
    if metric_name == "slp":
        total = 0.0
        for token in trace.tokens:
            total += token.chosen_logprob
        return math.exp(-total / t_count)
    if metric_name == "tlp":
        total = 0.0
        for token in trace.tokens:
            total += _naive_entropy(token, math.log)
        return math.exp(total / t_count)
    if metric_name == "lg":
        gaps = []
        for token in trace.tokens:
            if token.candidate_count >= 2:
                gaps.append(token.topk_logprobs[0] - token.topk_logprobs[1])
        if not gaps:
            return None
        total = 0.0
        for gap in gaps:
            total += gap
        return total / len(gaps)
    if metric_name == "sle":
        total = 0.0
        for token in trace.tokens:
            total += _naive_entropy(token, math.log2)
        return total
    if metric_name == "tle":
        total = 0.0
        for token in trace.tokens:
            total += _naive_entropy(token, math.log2)
        return total / t_count
    raise KeyError(f"unknown model-side metric {metric_name!r}")


def oracle_vacc(flags: list[bool]) -> float:
    """Decision-variability via the literal deviation sum, not the closed form."""
    if not flags:
        raise ValueError("need at least one correctness flag")
    k = len(flags)
    p_hat = sum(1.0 for flag in flags if flag) / k
    total = 0.0
    for flag in flags:
        z = 1.0 if flag else 0.0
        total += (z - p_hat) ** 2
    return total / k
