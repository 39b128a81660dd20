"""JSONL wire formats: problems, traces, annotations, scores, manifests.

All files are UTF-8 with LF line endings. Readers fail fast with the line
number on malformed input and never drop a record silently: structural
problems raise, repairable ones (unsorted top-k lists) are fixed and
reported through the warning callback. Writers emit byte-identical output
for identical input order; floats serialize with Python's shortest
round-trip repr.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    ALL_METRICS,
    AnnotationRecord,
    CompletionSet,
    GenerationTrace,
    MetricProvenance,
    MetricVector,
    Problem,
    TokenRecord,
)


class IngestError(Exception):
    pass


class MalformedRecord(IngestError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(IngestError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate id {record_id!r}")
        self.record_id = record_id


class RangeViolation(IngestError):
    def __init__(self, field_name: str, value):
        super().__init__(f"{field_name} out of range: {value!r}")
        self.field_name = field_name
        self.value = value


class NonFiniteLogprob(IngestError):
    def __init__(self, problem_id: str, position: int):
        super().__init__(f"{problem_id!r}: non-finite logprob at position {position}")
        self.problem_id = problem_id
        self.position = position


class PositiveLogprob(IngestError):
    def __init__(self, problem_id: str, position: int):
        super().__init__(f"{problem_id!r}: positive logprob at position {position}")
        self.problem_id = problem_id
        self.position = position


class EmptyTrace(IngestError):
    def __init__(self, problem_id: str, completion_index: int):
        super().__init__(f"{problem_id!r}/{completion_index}: trace has no tokens")
        self.problem_id = problem_id
        self.completion_index = completion_index


class SinkFailure(IngestError):
    pass


@dataclass(frozen=True)
class CorpusManifest:
    """Corpus-level configuration plus provenance digests."""

    schema_version: str = "1"
    k_completions: int = 20
    k_topk: int = 5
    temperature: float = 0.7
    counts: dict[str, int] = field(default_factory=dict)
    content_digest: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k_completions < 1:
            raise ValueError("k_completions must be >= 1")
        if self.k_topk < 1:
            raise ValueError("k_topk must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")


def _lines(stream) -> Iterator[tuple[int, str]]:
    """Yield (line_no, text) from a text/bytes file object or iterable."""
    if isinstance(stream, (str, Path)):
        raise TypeError("pass an open stream, not a path")
    if isinstance(stream, io.TextIOBase):
        source: Iterable = stream
    elif hasattr(stream, "read"):
        source = io.TextIOWrapper(stream, encoding="utf-8")
    else:
        source = stream
    for line_no, raw in enumerate(source, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        text = raw.strip()
        if text:
            yield line_no, text


def _parse_line(line_no: int, text: str) -> dict:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")
    return record


def _require(record: dict, name: str, line_no: int):
    if name not in record:
        raise MalformedRecord(line_no, f"missing field {name}")
    return record[name]


def read_problems(stream) -> list[Problem]:
    problems: list[Problem] = []
    seen: set[str] = set()
    for line_no, text in _lines(stream):
        record = _parse_line(line_no, text)
        problem_id = _require(record, "id", line_no)
        question = _require(record, "question", line_no)
        reference = _require(record, "reference_answer", line_no)
        if not isinstance(problem_id, str) or not isinstance(question, str):
            raise MalformedRecord(line_no, "id and question must be strings")
        if problem_id in seen:
            raise DuplicateId(problem_id)
        seen.add(problem_id)
        try:
            problems.append(
                Problem(problem_id, question, str(reference), record.get("source_tag"))
            )
        except ValueError as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
    return problems


def _token_record(
    raw: dict,
    problem_id: str,
    position: int,
    line_no: int,
    k_topk: int,
    warn: Callable[[str], None],
) -> TokenRecord:
    chosen = _require(raw, "chosen_logprob", line_no)
    topk = _require(raw, "topk_logprobs", line_no)
    count = _require(raw, "candidate_count", line_no)
    if not isinstance(topk, list) or not topk:
        raise MalformedRecord(line_no, "topk_logprobs must be a non-empty list")
    values = [chosen, *topk]
    for value in values:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise MalformedRecord(line_no, "logprobs must be numbers")
        if not math.isfinite(value):
            raise NonFiniteLogprob(problem_id, position)
        if value > 0.0:
            raise PositiveLogprob(problem_id, position)
    if count != len(topk):
        raise MalformedRecord(
            line_no, f"candidate_count {count} != {len(topk)} logprobs"
        )
    if len(topk) > k_topk:
        raise MalformedRecord(line_no, f"{len(topk)} candidates exceed k={k_topk}")
    sorted_topk = sorted(topk, reverse=True)
    if sorted_topk != topk:
        warn(f"line {line_no}: unsorted topk_logprobs repaired at position {position}")
    return TokenRecord(float(chosen), tuple(float(v) for v in sorted_topk), count)


def read_traces(
    stream,
    manifest: CorpusManifest,
    on_warning: Callable[[str], None] | None = None,
) -> list[CompletionSet]:
    """Group trace records into CompletionSets (correctness unset).

    Records may arrive interleaved; sets come back in first-appearance order
    with traces sorted by completion_index.
    """

    def warn(message: str) -> None:
        if on_warning is not None:
            on_warning(message)

    grouped: dict[str, list[GenerationTrace]] = {}
    for line_no, text in _lines(stream):
        record = _parse_line(line_no, text)
        problem_id = _require(record, "problem_id", line_no)
        completion_index = _require(record, "completion_index", line_no)
        temperature = _require(record, "temperature", line_no)
        final_answer = _require(record, "final_answer_text", line_no)
        raw_tokens = _require(record, "tokens", line_no)
        if not isinstance(raw_tokens, list):
            raise MalformedRecord(line_no, "tokens must be a list")
        if not raw_tokens:
            raise EmptyTrace(problem_id, completion_index)
        tokens = tuple(
            _token_record(raw, problem_id, position, line_no, manifest.k_topk, warn)
            for position, raw in enumerate(raw_tokens)
        )
        try:
            trace = GenerationTrace(
                problem_id=problem_id,
                completion_index=int(completion_index),
                temperature=float(temperature),
                tokens=tokens,
                final_answer_text=str(final_answer),
            )
        except ValueError as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
        bucket = grouped.setdefault(problem_id, [])
        if any(t.completion_index == trace.completion_index for t in bucket):
            raise MalformedRecord(
                line_no,
                f"duplicate completion_index {trace.completion_index} "
                f"for problem {problem_id!r}",
            )
        bucket.append(trace)

    return [
        CompletionSet(problem_id, tuple(sorted(traces, key=lambda t: t.completion_index)))
        for problem_id, traces in grouped.items()
    ]


def read_annotations(stream) -> list[AnnotationRecord]:
    records: list[AnnotationRecord] = []
    for line_no, text in _lines(stream):
        record = _parse_line(line_no, text)
        problem_id = _require(record, "problem_id", line_no)
        values = {}
        for name in ("rs", "sc", "cd"):
            value = _require(record, name, line_no)
            if not isinstance(value, int) or isinstance(value, bool):
                raise MalformedRecord(line_no, f"{name} must be an integer")
            values[name] = value
        if values["rs"] < 0:
            raise RangeViolation("rs", values["rs"])
        for name in ("sc", "cd"):
            if not 1 <= values[name] <= 5:
                raise RangeViolation(name, values[name])
        records.append(
            AnnotationRecord(problem_id, values["rs"], values["sc"], values["cd"])
        )
    return records


def _vector_to_record(vector: MetricVector) -> dict:
    record: dict = {"problem_id": vector.problem_id}
    for name in ALL_METRICS:
        record[name] = getattr(vector, name)
    if vector.provenance:
        record["provenance"] = {
            name: {
                "n_completions_used": prov.n_completions_used,
                "warnings": list(prov.warnings),
            }
            for name, prov in sorted(vector.provenance.items())
        }
    return record


def write_scores(scores: list[MetricVector], sink) -> int:
    """One JSON line per vector, absent metrics as null; byte-stable."""
    if not scores:
        raise ValueError("scores must be non-empty")
    count = 0
    try:
        for vector in scores:
            line = json.dumps(_vector_to_record(vector), ensure_ascii=False)
            data = line + "\n"
            if hasattr(sink, "encoding") or isinstance(sink, io.TextIOBase):
                sink.write(data)
            else:
                sink.write(data.encode("utf-8"))
            count += 1
    except OSError as exc:
        raise SinkFailure(str(exc)) from exc
    return count


def read_scores(stream) -> list[MetricVector]:
    vectors: list[MetricVector] = []
    seen: set[str] = set()
    for line_no, text in _lines(stream):
        record = _parse_line(line_no, text)
        problem_id = _require(record, "problem_id", line_no)
        if problem_id in seen:
            raise DuplicateId(problem_id)
        seen.add(problem_id)
        provenance = {
            name: MetricProvenance(raw["n_completions_used"], tuple(raw["warnings"]))
            for name, raw in record.get("provenance", {}).items()
        }
        fields = {name: record.get(name) for name in ALL_METRICS}
        try:
            vectors.append(
                MetricVector(problem_id=problem_id, provenance=provenance, **fields)
            )
        except (TypeError, ValueError) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
    return vectors


def write_problems(problems: list[Problem], sink) -> int:
    """Problems back to wire format, used for emitting reordered corpora."""
    count = 0
    try:
        for problem in problems:
            record = {
                "id": problem.id,
                "question": problem.question,
                "reference_answer": problem.reference_answer,
            }
            if problem.source_tag is not None:
                record["source_tag"] = problem.source_tag
            data = json.dumps(record, ensure_ascii=False) + "\n"
            if hasattr(sink, "encoding") or isinstance(sink, io.TextIOBase):
                sink.write(data)
            else:
                sink.write(data.encode("utf-8"))
            count += 1
    except OSError as exc:
        raise SinkFailure(str(exc)) from exc
    return count


def manifest_to_json(manifest: CorpusManifest) -> str:
    record = {
        "schema_version": manifest.schema_version,
        "k_completions": manifest.k_completions,
        "k_topk": manifest.k_topk,
        "temperature": manifest.temperature,
        "counts": dict(sorted(manifest.counts.items())),
        "content_digest": dict(sorted(manifest.content_digest.items())),
    }
    return json.dumps(record, indent=2, ensure_ascii=False) + "\n"


def manifest_from_json(text: str) -> CorpusManifest:
    record = json.loads(text)
    return CorpusManifest(
        schema_version=record["schema_version"],
        k_completions=record["k_completions"],
        k_topk=record["k_topk"],
        temperature=record["temperature"],
        counts=dict(record.get("counts", {})),
        content_digest=dict(record.get("content_digest", {})),
    )


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
