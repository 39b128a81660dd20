import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { spawnSync } from "node:child_process";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { MockBackend } from "../src/backend.js";
import { extract, readProblems } from "../src/extract.js";
import { DEFAULT_CONFIG, PartialExtraction } from "../src/types.js";

const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");
const PROBLEMS_PATH = join(REPO_ROOT, "tests", "data", "corpus", "problems.jsonl");

// sha256 of traces.jsonl for the recorded mock run (seed 5, k=2, defaults),
// pinned when the fixture was first captured.
const RECORDED_TRACES_DIGEST =
  "59e014ba5be98f0b92b8b8c55cf54898ab67727120fb59c0d9f983d71d49d022";

const CONFIG = { ...DEFAULT_CONFIG, k: 2 };

function sha256File(path: string): string {
  return createHash("sha256").update(readFileSync(path)).digest("hex");
}

function workDir(): string {
  return mkdtempSync(join(tmpdir(), "extractor-test-"));
}

async function runMockExtraction(out: string, overrides: Partial<typeof CONFIG> = {}) {
  const problems = readProblems(PROBLEMS_PATH);
  return extract(problems, new MockBackend({ seed: 5n }), { ...CONFIG, ...overrides }, out, {
    backend: "mock",
    seed: "5",
  });
}

describe("extract with the deterministic mock backend", () => {
  it("emits traces.jsonl that the primary validator accepts with zero violations", async () => {
    const out = workDir();
    const result = await runMockExtraction(out);
    expect(result.traceCount).toBe(24); // 12 problems x K=2
    expect(result.failures).toEqual([]);

    const validation = spawnSync(
      "python3",
      [
        "-m",
        "currikit",
        "validate",
        "--problems",
        PROBLEMS_PATH,
        "--traces",
        result.tracesPath,
        "--k",
        "2",
        "--out",
        join(out, "validation"),
      ],
      {
        env: { ...process.env, PYTHONPATH: join(REPO_ROOT, "src") },
        encoding: "utf-8",
      },
    );
    expect(validation.status).toBe(0);
    const report = JSON.parse(
      readFileSync(join(out, "validation", "validation.json"), "utf-8"),
    );
    expect(report.ok).toBe(true);
    expect(report.violations).toEqual([]);
    expect(report.warnings).toEqual([]);
  });

  it("reproduces the recorded fixture byte for byte", async () => {
    const result = await runMockExtraction(workDir());
    expect(sha256File(result.tracesPath)).toBe(RECORDED_TRACES_DIGEST);
  });

  it("is byte-stable across reruns, including the manifest", async () => {
    const first = await runMockExtraction(workDir());
    const second = await runMockExtraction(workDir());
    expect(sha256File(first.tracesPath)).toBe(sha256File(second.tracesPath));
    expect(readFileSync(first.manifestPath, "utf-8")).toBe(
      readFileSync(second.manifestPath, "utf-8"),
    );
  });

  it("assigns completion indices independent of request concurrency", async () => {
    const serial = await runMockExtraction(workDir(), { concurrency: 1 });
    const parallel = await runMockExtraction(workDir(), { concurrency: 8 });
    expect(sha256File(serial.tracesPath)).toBe(sha256File(parallel.tracesPath));
  });

  it("writes the manifest with counts, digest and config echo", async () => {
    const result = await runMockExtraction(workDir());
    const manifest = JSON.parse(readFileSync(result.manifestPath, "utf-8"));
    expect(manifest.counts).toEqual({ problems: 12, traces: 24 });
    expect(manifest.k_completions).toBe(2);
    expect(manifest.k_topk).toBe(5);
    expect(manifest.temperature).toBe(0.7);
    expect(manifest.content_digest["traces.jsonl"]).toBe(RECORDED_TRACES_DIGEST);
    expect(manifest.failures).toEqual([]);
    expect(manifest.backend).toBe("mock");
  });
});

describe("failure handling", () => {
  const problems = readProblems(PROBLEMS_PATH).slice(0, 3);

  it("retries transient failures inside the budget", async () => {
    const backend = new MockBackend({
      seed: 5n,
      failures: new Map([["p01/0", 2]]),
    });
    const result = await extract(problems, backend, { ...CONFIG, retryBudget: 3 }, workDir());
    expect(result.traceCount).toBe(6);
    expect(result.failures).toEqual([]);
  });

  it("records completions that exhaust the retry budget as absent", async () => {
    const backend = new MockBackend({
      seed: 5n,
      failures: new Map([["p02/1", 99]]),
    });
    const result = await extract(problems, backend, { ...CONFIG, retryBudget: 2 }, workDir());
    expect(result.traceCount).toBe(5);
    expect(result.failures).toHaveLength(1);
    expect(result.failures[0]).toMatchObject({ problem_id: "p02", completion_index: 1 });
    const manifest = JSON.parse(readFileSync(result.manifestPath, "utf-8"));
    expect(manifest.failures).toHaveLength(1);
  });

  it("throws PartialExtraction when a problem yields nothing at all", async () => {
    const backend = new MockBackend({
      seed: 5n,
      failures: new Map([
        ["p03/0", 99],
        ["p03/1", 99],
      ]),
    });
    await expect(
      extract(problems, backend, { ...CONFIG, retryBudget: 2 }, workDir()),
    ).rejects.toThrow(PartialExtraction);
  });

  it("rejects invalid configuration up front", async () => {
    await expect(
      extract(problems, new MockBackend(), { ...CONFIG, temperature: 0 }, workDir()),
    ).rejects.toThrow("temperature");
    await expect(
      extract(problems, new MockBackend(), { ...CONFIG, k: 0 }, workDir()),
    ).rejects.toThrow("k must be");
  });
});
