from __future__ import annotations

import math

from currikit.core import CompletionSet, GenerationTrace, TokenRecord


def make_token(logprobs: list[float], chosen: float | None = None) -> TokenRecord:
    """TokenRecord from already-sorted candidate logprobs."""
    return TokenRecord(
        chosen_logprob=logprobs[0] if chosen is None else chosen,
        topk_logprobs=tuple(logprobs),
        candidate_count=len(logprobs),
    )


def make_trace(
    tokens: list[TokenRecord],
    problem_id: str = "p1",
    completion_index: int = 0,
    answer: str = "42",
) -> GenerationTrace:
    return GenerationTrace(
        problem_id=problem_id,
        completion_index=completion_index,
        temperature=0.7,
        tokens=tuple(tokens),
        final_answer_text=answer,
    )


def uniform_token(m: int) -> TokenRecord:
    level = math.log(1.0 / m)
    return make_token([level] * m)


def flags_set(flags: list[bool], problem_id: str = "p1") -> CompletionSet:
    """Minimal judged completion set carrying the given correctness flags."""
    traces = tuple(
        make_trace([uniform_token(2)], problem_id=problem_id, completion_index=i)
        for i in range(len(flags))
    )
    return CompletionSet(problem_id, traces, tuple(flags))
