export { extractAnswerSpan } from "./answers.js";
export {
  CompletionBackend,
  HttpBackend,
  MockBackend,
  MockOptions,
  SplitMix64,
  requestSeed,
} from "./backend.js";
export { extract, readProblems, ExtractionFailure, ExtractionResult } from "./extract.js";
export { mapWithConcurrency, withRetry } from "./retry.js";
export {
  BackendConfig,
  BackendUnavailable,
  Completion,
  DEFAULT_CONFIG,
  LogprobsUnsupported,
  PartialExtraction,
  ProblemRecord,
  TokenRecord,
  TraceRecord,
  validateConfig,
} from "./types.js";
