#!/usr/bin/env node
/**
 * currikit-extract: sample K completions per problem from a logprob-capable
 * backend and write the traces.jsonl wire format plus a manifest.
 *
 * Exit codes match the scoring CLI: 0 success, 1 domain problem (partial
 * extraction, bad flags), 2 backend/environment failure.
 */

import { parseArgs } from "node:util";

import { HttpBackend, MockBackend } from "./backend.js";
import { extract, readProblems } from "./extract.js";
import { BackendUnavailable, DEFAULT_CONFIG, LogprobsUnsupported, PartialExtraction } from "./types.js";

function usageError(message: string): never {
  console.error(`currikit-extract: ${message}`);
  process.exit(1);
}

export async function main(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      problems: { type: "string" },
      out: { type: "string" },
      endpoint: { type: "string", default: DEFAULT_CONFIG.endpoint },
      model: { type: "string" },
      k: { type: "string", default: String(DEFAULT_CONFIG.k) },
      topk: { type: "string", default: String(DEFAULT_CONFIG.topk) },
      temperature: { type: "string", default: String(DEFAULT_CONFIG.temperature) },
      "max-new-tokens": { type: "string", default: String(DEFAULT_CONFIG.maxNewTokens) },
      "timeout-ms": { type: "string", default: String(DEFAULT_CONFIG.timeoutMs) },
      retries: { type: "string", default: String(DEFAULT_CONFIG.retryBudget) },
      concurrency: { type: "string", default: String(DEFAULT_CONFIG.concurrency) },
      mock: { type: "boolean", default: false },
      seed: { type: "string", default: "0" },
    },
  });

  if (!values.problems) usageError("--problems is required");
  if (!values.out) usageError("--out is required");

  const config = {
    endpoint: values.endpoint!,
    model: values.model,
    temperature: Number(values.temperature),
    k: Number(values.k),
    topk: Number(values.topk),
    maxNewTokens: Number(values["max-new-tokens"]),
    timeoutMs: Number(values["timeout-ms"]),
    retryBudget: Number(values.retries),
    concurrency: Number(values.concurrency),
  };

  const seed = BigInt(values.seed!);
  const backend = values.mock ? new MockBackend({ seed }) : new HttpBackend();
  const manifestExtra = values.mock ? { backend: "mock", seed: values.seed } : { backend: "http" };

  try {
    const problems = readProblems(values.problems);
    const result = await extract(problems, backend, config, values.out, manifestExtra);
    console.error(
      `wrote ${result.traceCount} traces for ${problems.length} problems` +
        (result.failures.length > 0 ? ` (${result.failures.length} completions failed)` : ""),
    );
    return result.failures.length > 0 ? 1 : 0;
  } catch (error) {
    if (error instanceof PartialExtraction) {
      console.error(`currikit-extract: ${error.message}`);
      return 1;
    }
    if (error instanceof BackendUnavailable || error instanceof LogprobsUnsupported) {
      console.error(`currikit-extract: ${error.message}`);
      return 2;
    }
    throw error;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (error) => {
      console.error(`currikit-extract: ${error}`);
      process.exit(2);
    },
  );
}
