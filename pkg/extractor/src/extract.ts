/**
 * Extraction orchestration: problems.jsonl in, traces.jsonl plus an
 * extraction manifest out. The adapter never computes metrics; the scoring
 * toolkit is the single source of truth for the math.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";

import { extractAnswerSpan } from "./answers.js";
import { CompletionBackend } from "./backend.js";
import { mapWithConcurrency, withRetry } from "./retry.js";
import {
  BackendConfig,
  Completion,
  PartialExtraction,
  ProblemRecord,
  TraceRecord,
  validateConfig,
} from "./types.js";

export interface ExtractionFailure {
  problem_id: string;
  completion_index: number;
  error: string;
}

export interface ExtractionResult {
  traceCount: number;
  failures: ExtractionFailure[];
  tracesPath: string;
  manifestPath: string;
}

export function readProblems(path: string): ProblemRecord[] {
  const problems: ProblemRecord[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    const text = line.trim();
    if (text.length === 0) return;
    let record: unknown;
    try {
      record = JSON.parse(text);
    } catch (error) {
      throw new Error(`${path}:${index + 1}: invalid JSON: ${error}`);
    }
    const problem = record as ProblemRecord;
    if (typeof problem.id !== "string" || typeof problem.question !== "string") {
      throw new Error(`${path}:${index + 1}: missing id or question`);
    }
    if (seen.has(problem.id)) {
      throw new Error(`${path}:${index + 1}: duplicate id ${problem.id}`);
    }
    seen.add(problem.id);
    problems.push(problem);
  });
  return problems;
}

function traceLine(problem: ProblemRecord, index: number, completion: Completion, temperature: number): string {
  const record: TraceRecord = {
    problem_id: problem.id,
    completion_index: index,
    temperature,
    final_answer_text: extractAnswerSpan(completion.text),
    tokens: completion.tokens,
  };
  return JSON.stringify(record);
}

function sha256(data: string): string {
  return createHash("sha256").update(data, "utf-8").digest("hex");
}

export async function extract(
  problems: ProblemRecord[],
  backend: CompletionBackend,
  config: BackendConfig,
  outDir: string,
  manifestExtra: Record<string, unknown> = {},
): Promise<ExtractionResult> {
  validateConfig(config);
  mkdirSync(outDir, { recursive: true });

  // One task per (problem, completion index); indices are fixed up front so
  // arrival order can never reshuffle completions.
  const tasks = problems.flatMap((problem) =>
    Array.from({ length: config.k }, (_, index) => ({ problem, index })),
  );

  const outcomes = await mapWithConcurrency(tasks, config.concurrency, async (task) => {
    try {
      const completion = await withRetry(
        () => backend.complete(task.problem, task.index, config),
        { attempts: config.retryBudget },
      );
      return { task, completion, error: null as string | null };
    } catch (error) {
      return { task, completion: null, error: String(error) };
    }
  });

  const lines: string[] = [];
  const failures: ExtractionFailure[] = [];
  const failedProblems = new Map<string, number>();
  for (const outcome of outcomes) {
    if (outcome.completion !== null) {
      lines.push(
        traceLine(outcome.task.problem, outcome.task.index, outcome.completion, config.temperature),
      );
    } else {
      failures.push({
        problem_id: outcome.task.problem.id,
        completion_index: outcome.task.index,
        error: outcome.error ?? "unknown failure",
      });
      failedProblems.set(
        outcome.task.problem.id,
        (failedProblems.get(outcome.task.problem.id) ?? 0) + 1,
      );
    }
  }

  const tracesPath = join(outDir, "traces.jsonl");
  const body = lines.length > 0 ? lines.join("\n") + "\n" : "";
  writeFileSync(tracesPath, body, "utf-8");

  const manifest = {
    schema_version: "1",
    k_completions: config.k,
    k_topk: config.topk,
    temperature: config.temperature,
    max_new_tokens: config.maxNewTokens,
    endpoint: config.endpoint,
    model: config.model ?? null,
    counts: { problems: problems.length, traces: lines.length },
    content_digest: { "traces.jsonl": sha256(body) },
    failures,
    ...manifestExtra,
  };
  const manifestPath = join(outDir, "extraction_manifest.json");
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n", "utf-8");

  // A problem with zero surviving completions is unusable downstream.
  const unusable = problems
    .filter((p) => (failedProblems.get(p.id) ?? 0) === config.k)
    .map((p) => p.id);
  if (unusable.length > 0) {
    throw new PartialExtraction(unusable);
  }

  return { traceCount: lines.length, failures, tracesPath, manifestPath };
}
