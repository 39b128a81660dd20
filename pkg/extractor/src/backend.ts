/**
 * Completion backends. The HTTP backend speaks the common completions
 * protocol (OpenAI/vLLM style) with per-token top-k logprobs; the mock
 * backend is fully deterministic for contract tests and fixtures.
 */

import {
  BackendConfig,
  BackendUnavailable,
  Completion,
  LogprobsUnsupported,
  ProblemRecord,
  TokenRecord,
} from "./types.js";

export interface CompletionBackend {
  /** Sample one completion for (problem, completionIndex). */
  complete(
    problem: ProblemRecord,
    completionIndex: number,
    config: BackendConfig,
  ): Promise<Completion>;
}

// ---------------------------------------------------------------------------
// Deterministic mock

const MASK64 = (1n << 64n) - 1n;

/** SplitMix64, matching the scoring toolkit's published-constant PRNG. */
export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  nextUint64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return z ^ (z >> 31n);
  }

  nextBelow(bound: number): number {
    const b = BigInt(bound);
    const limit = (1n << 64n) - ((1n << 64n) % b);
    while (true) {
      const x = this.nextUint64();
      if (x < limit) return Number(x % b);
    }
  }

  nextFloat(): number {
    return Number(this.nextUint64() >> 11n) * 2 ** -53;
  }
}

function fnv1a64(text: string): bigint {
  let hash = 0xcbf29ce484222325n;
  for (const byte of Buffer.from(text, "utf-8")) {
    hash ^= BigInt(byte);
    hash = (hash * 0x100000001b3n) & MASK64;
  }
  return hash;
}

/** Stable per-request seed: arrival order can never change a completion. */
export function requestSeed(baseSeed: bigint, problemId: string, completionIndex: number): bigint {
  return (baseSeed ^ fnv1a64(problemId) ^ (BigInt(completionIndex) << 32n)) & MASK64;
}

function stripWrappers(text: string): string {
  let out = text.trim();
  while (true) {
    const before = out;
    out = out.trim().replace(/\.+$/, "");
    if (out.startsWith("$") && out.endsWith("$") && out.length >= 2) {
      out = out.slice(1, -1);
    }
    if (out.startsWith("\\boxed{") && out.endsWith("}")) {
      out = out.slice("\\boxed{".length, -1);
    }
    if (out === before) return out;
  }
}

export interface MockOptions {
  seed?: bigint;
  /** "problemId/completionIndex" -> number of times that request fails. */
  failures?: Map<string, number>;
  /** Pretend the engine cannot return logprobs. */
  supportsLogprobs?: boolean;
  /** Pretend the endpoint is down. */
  unavailable?: boolean;
}

export class MockBackend implements CompletionBackend {
  private readonly seed: bigint;
  private readonly failures: Map<string, number>;
  private readonly supportsLogprobs: boolean;
  private readonly unavailable: boolean;

  constructor(options: MockOptions = {}) {
    this.seed = options.seed ?? 0n;
    this.failures = new Map(options.failures ?? []);
    this.supportsLogprobs = options.supportsLogprobs ?? true;
    this.unavailable = options.unavailable ?? false;
  }

  async complete(
    problem: ProblemRecord,
    completionIndex: number,
    config: BackendConfig,
  ): Promise<Completion> {
    if (this.unavailable) {
      throw new BackendUnavailable(`mock endpoint ${config.endpoint} is down`);
    }
    if (!this.supportsLogprobs) {
      throw new LogprobsUnsupported("mock engine has no logprob support");
    }
    const key = `${problem.id}/${completionIndex}`;
    const remaining = this.failures.get(key) ?? 0;
    if (remaining > 0) {
      this.failures.set(key, remaining - 1);
      throw new BackendUnavailable(`mock transient failure for ${key}`);
    }

    const rng = new SplitMix64(requestSeed(this.seed, problem.id, completionIndex));
    const tokenCount = Math.min(3 + rng.nextBelow(6), config.maxNewTokens);
    const tokens: TokenRecord[] = [];
    for (let t = 0; t < tokenCount; t++) {
      const m = 1 + rng.nextBelow(config.topk);
      const draws: number[] = [];
      for (let i = 0; i < m; i++) {
        draws.push(-Math.log(1 - rng.nextFloat()));
      }
      const total = draws.reduce((a, b) => a + b, 0);
      const mass = 0.5 + 0.5 * rng.nextFloat();
      const probs = draws.map((d) => d / total).sort((a, b) => b - a);
      const topk = probs.map((p) => Math.log(mass * p));
      tokens.push({
        chosen_logprob: topk[rng.nextBelow(m)],
        topk_logprobs: topk,
        candidate_count: m,
      });
    }

    const core = stripWrappers(problem.reference_answer);
    const style = rng.nextBelow(3);
    let text: string;
    if (style === 0) {
      text = `Working through ${problem.id} step by step.\nThe answer is \\boxed{${core}}.`;
    } else if (style === 1) {
      text = `Reasoning about the question...\nSo the result is ${core}`;
    } else {
      text = `A quick attempt.\nThe answer is \\boxed{${core}0}.`; // wrong on purpose
    }
    return { text, tokens };
  }
}

// ---------------------------------------------------------------------------
// HTTP backend

interface CompletionsApiResponse {
  choices?: Array<{
    text?: string;
    logprobs?: {
      token_logprobs?: Array<number | null>;
      top_logprobs?: Array<Record<string, number> | null>;
    };
  }>;
}

/** Engines occasionally report logprobs a hair above zero; clamp the noise. */
function clampLogprob(value: number): number {
  return value > 0 && value <= 1e-6 ? 0 : value;
}

export class HttpBackend implements CompletionBackend {
  async complete(
    problem: ProblemRecord,
    _completionIndex: number,
    config: BackendConfig,
  ): Promise<Completion> {
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), config.timeoutMs);
    let response: Response;
    try {
      response = await fetch(config.endpoint, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          model: config.model,
          prompt: problem.question,
          max_tokens: config.maxNewTokens,
          temperature: config.temperature,
          logprobs: config.topk,
          n: 1,
        }),
        signal: controller.signal,
      });
    } catch (error) {
      throw new BackendUnavailable(`request to ${config.endpoint} failed: ${error}`);
    } finally {
      clearTimeout(timer);
    }
    if (!response.ok) {
      throw new BackendUnavailable(`${config.endpoint} returned HTTP ${response.status}`);
    }
    const payload = (await response.json()) as CompletionsApiResponse;
    const choice = payload.choices?.[0];
    if (choice === undefined) {
      throw new BackendUnavailable("response carried no choices");
    }
    const logprobs = choice.logprobs;
    if (!logprobs?.token_logprobs || !logprobs.top_logprobs) {
      throw new LogprobsUnsupported("backend response has no per-token top-k logprobs");
    }
    const tokens: TokenRecord[] = [];
    for (let i = 0; i < logprobs.token_logprobs.length; i++) {
      const chosen = logprobs.token_logprobs[i];
      const alternatives = logprobs.top_logprobs[i];
      if (chosen === null || alternatives === null) {
        throw new LogprobsUnsupported(`missing logprobs at position ${i}`);
      }
      const topk = Object.values(alternatives)
        .map(clampLogprob)
        .sort((a, b) => b - a)
        .slice(0, config.topk);
      if (topk.length === 0) {
        throw new LogprobsUnsupported(`empty top-k at position ${i}`);
      }
      tokens.push({
        chosen_logprob: clampLogprob(chosen),
        topk_logprobs: topk,
        candidate_count: topk.length,
      });
    }
    return { text: choice.text ?? "", tokens };
  }
}
