/** Wire types shared with the scoring toolkit, plus backend configuration. */

export interface ProblemRecord {
  id: string;
  question: string;
  reference_answer: string;
  source_tag?: string;
}

export interface TokenRecord {
  chosen_logprob: number;
  topk_logprobs: number[];
  candidate_count: number;
}

export interface TraceRecord {
  problem_id: string;
  completion_index: number;
  temperature: number;
  final_answer_text: string;
  tokens: TokenRecord[];
}

/** One sampled completion as returned by a backend. */
export interface Completion {
  text: string;
  tokens: TokenRecord[];
}

export interface BackendConfig {
  /** HTTP endpoint or a local-model identifier (informational for mocks). */
  endpoint: string;
  model?: string;
  temperature: number;
  k: number;
  topk: number;
  maxNewTokens: number;
  timeoutMs: number;
  retryBudget: number;
  /** Upper bound on in-flight requests. */
  concurrency: number;
}

export const DEFAULT_CONFIG: BackendConfig = {
  endpoint: "http://localhost:8000/v1/completions",
  temperature: 0.7,
  k: 20,
  topk: 5,
  maxNewTokens: 256,
  timeoutMs: 60_000,
  retryBudget: 3,
  concurrency: 4,
};

export function validateConfig(config: BackendConfig): void {
  if (!(config.temperature > 0)) {
    throw new Error(`temperature must be > 0, got ${config.temperature}`);
  }
  if (config.k < 1) {
    throw new Error(`k must be >= 1, got ${config.k}`);
  }
  if (config.topk < 1) {
    throw new Error(`topk must be >= 1, got ${config.topk}`);
  }
  if (config.maxNewTokens < 1) {
    throw new Error(`maxNewTokens must be >= 1, got ${config.maxNewTokens}`);
  }
}

export class BackendUnavailable extends Error {
  constructor(message: string) {
    super(message);
    this.name = "BackendUnavailable";
  }
}

export class LogprobsUnsupported extends Error {
  constructor(message: string) {
    super(message);
    this.name = "LogprobsUnsupported";
  }
}

export class PartialExtraction extends Error {
  readonly problemIds: string[];
  constructor(problemIds: string[]) {
    super(`extraction incomplete for: ${problemIds.join(", ")}`);
    this.name = "PartialExtraction";
    this.problemIds = problemIds;
  }
}
