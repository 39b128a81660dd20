"""Rule-based final-answer normalization and equivalence.

Deterministic by design: no LLM judging. Coverage targets the integer,
decimal, fraction, and percent answers typical of math word-problem sets;
anything else falls back to canonical-text comparison. Exact rationals are
compared exactly; a tolerance of 1e-6 applies only when one side was
written as a decimal literal, so 1/3 never fails to equal 1/3.
"""

from __future__ import annotations

import re
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

from .core import CompletionSet, Problem

NUMERIC = "numeric"
SYMBOLIC_TEXT = "symbolic_text"

_DECIMAL_TOLERANCE = Fraction(1, 10**6)

_COMMA_GROUPED = re.compile(r"[+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?")
_INTEGER = re.compile(r"[+-]?\d+")
_DECIMAL = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+)")
_FRACTION = re.compile(r"([+-]?\d+)\s*/\s*(\d+)")


class EmptyAnswer(ValueError):
    """Raw answer is empty after trimming."""


@dataclass(frozen=True)
class NormalizedAnswer:
    canonical_text: str
    numeric_value: Fraction | None
    kind: str
    decimal_literal: bool = False

    def __post_init__(self) -> None:
        if self.kind == NUMERIC and self.numeric_value is None:
            raise ValueError("numeric answers must carry a value")


def _strip_wrappers(text: str) -> str:
    """Peel surrounding math wrappers until nothing changes."""
    while True:
        before = text
        text = text.strip()
        while text.endswith("."):
            text = text[:-1].rstrip()
        if len(text) >= 2 and text.startswith("$") and text.endswith("$"):
            text = text[1:-1]
            continue
        if text.startswith("\\boxed{") and text.endswith("}"):
            inner = text[len("\\boxed{") : -1]
            # only unwrap when the braces are balanced, i.e. the whole
            # string really is one \boxed{...}
            depth = 0
            balanced = True
            for ch in inner:
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth < 0:
                        balanced = False
                        break
            if balanced and depth == 0:
                text = inner
                continue
        if text == before:
            return text


def _parse_rational(text: str) -> tuple[Fraction, bool] | None:
    """Parse one of the supported number forms; returns (value, was_decimal)."""
    if _INTEGER.fullmatch(text):
        return Fraction(int(text)), False
    if _DECIMAL.fullmatch(text):
        return Fraction(text), True
    match = _FRACTION.fullmatch(text)
    if match:
        denominator = int(match.group(2))
        if denominator == 0:
            return None
        return Fraction(int(match.group(1)), denominator), False
    if text.endswith("%"):
        inner = _parse_rational(text[:-1].strip())
        if inner is not None:
            value, was_decimal = inner
            return value / 100, was_decimal
    return None


def normalize(raw: str) -> NormalizedAnswer:
    """Strip wrappers, lowercase, drop thousand separators, parse numbers.

    Idempotent: normalizing a canonical_text reproduces the same answer.
    """
    text = raw.strip()
    if not text:
        raise EmptyAnswer("answer is empty")
    text = _strip_wrappers(text)
    if not text:
        raise EmptyAnswer("answer is empty after unwrapping")
    text = text.lower()
    text = " ".join(text.split())
    if _COMMA_GROUPED.fullmatch(text):
        text = text.replace(",", "")
    parsed = _parse_rational(text)
    if parsed is None:
        return NormalizedAnswer(text, None, SYMBOLIC_TEXT)
    value, was_decimal = parsed
    return NormalizedAnswer(text, value, NUMERIC, was_decimal)


def equivalent(a: NormalizedAnswer, b: NormalizedAnswer) -> bool:
    """Numeric answers compare as rationals (exactly, unless a decimal
    literal is involved); everything else compares canonical text."""
    if a.kind == NUMERIC and b.kind == NUMERIC:
        if a.decimal_literal or b.decimal_literal:
            return abs(a.numeric_value - b.numeric_value) <= _DECIMAL_TOLERANCE
        return a.numeric_value == b.numeric_value
    return a.canonical_text == b.canonical_text


def judge_set(
    cset: CompletionSet,
    reference: Problem,
    on_warning: Callable[[str], None] | None = None,
) -> CompletionSet:
    """Fill per-completion correctness against the problem's reference answer.

    Unnormalizable answers (including an unusable reference) judge as
    incorrect with a warning; every trial gets a binary outcome.
    """

    def warn(message: str) -> None:
        if on_warning is not None:
            on_warning(message)

    try:
        reference_norm = normalize(reference.reference_answer)
    except EmptyAnswer:
        warn(f"{reference.id}: reference answer is empty; all completions judged incorrect")
        return cset.with_correctness(tuple(False for _ in cset.traces))

    flags = []
    for trace in cset.traces:
        try:
            answer_norm = normalize(trace.final_answer_text)
        except EmptyAnswer:
            warn(
                f"{cset.problem_id}/{trace.completion_index}: "
                "empty final answer judged incorrect"
            )
            flags.append(False)
            continue
        flags.append(equivalent(answer_norm, reference_norm))
    return cset.with_correctness(tuple(flags))
