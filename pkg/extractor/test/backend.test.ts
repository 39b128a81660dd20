import { createServer, Server } from "node:http";
import { AddressInfo } from "node:net";

import { afterEach, describe, expect, it } from "vitest";

import { HttpBackend, MockBackend, requestSeed } from "../src/backend.js";
import {
  BackendUnavailable,
  DEFAULT_CONFIG,
  LogprobsUnsupported,
  ProblemRecord,
} from "../src/types.js";

const PROBLEM: ProblemRecord = {
  id: "p1",
  question: "What is 6 times 7?",
  reference_answer: "42",
};

const CONFIG = { ...DEFAULT_CONFIG, k: 2, topk: 5, maxNewTokens: 32, retryBudget: 1 };

describe("MockBackend", () => {
  it("is deterministic per (seed, problem, completion index)", async () => {
    const a = await new MockBackend({ seed: 9n }).complete(PROBLEM, 1, CONFIG);
    const b = await new MockBackend({ seed: 9n }).complete(PROBLEM, 1, CONFIG);
    expect(a).toEqual(b);
  });

  it("differs across completion indices and seeds", async () => {
    const backend = new MockBackend({ seed: 9n });
    const first = await backend.complete(PROBLEM, 0, CONFIG);
    const second = await backend.complete(PROBLEM, 1, CONFIG);
    expect(first).not.toEqual(second);
    const otherSeed = await new MockBackend({ seed: 10n }).complete(PROBLEM, 0, CONFIG);
    expect(otherSeed).not.toEqual(first);
  });

  it("emits wire-valid token records", async () => {
    const completion = await new MockBackend({ seed: 3n }).complete(PROBLEM, 0, CONFIG);
    expect(completion.tokens.length).toBeGreaterThan(0);
    for (const token of completion.tokens) {
      expect(token.candidate_count).toBe(token.topk_logprobs.length);
      expect(token.candidate_count).toBeLessThanOrEqual(CONFIG.topk);
      const sorted = [...token.topk_logprobs].sort((a, b) => b - a);
      expect(token.topk_logprobs).toEqual(sorted);
      for (const lp of [token.chosen_logprob, ...token.topk_logprobs]) {
        expect(lp).toBeLessThanOrEqual(0);
        expect(Number.isFinite(lp)).toBe(true);
      }
    }
  });

  it("consumes configured transient failures", async () => {
    const backend = new MockBackend({
      seed: 1n,
      failures: new Map([["p1/0", 2]]),
    });
    await expect(backend.complete(PROBLEM, 0, CONFIG)).rejects.toThrow(BackendUnavailable);
    await expect(backend.complete(PROBLEM, 0, CONFIG)).rejects.toThrow(BackendUnavailable);
    const completion = await backend.complete(PROBLEM, 0, CONFIG);
    expect(completion.tokens.length).toBeGreaterThan(0);
  });

  it("signals missing logprob support and downtime", async () => {
    await expect(
      new MockBackend({ supportsLogprobs: false }).complete(PROBLEM, 0, CONFIG),
    ).rejects.toThrow(LogprobsUnsupported);
    await expect(
      new MockBackend({ unavailable: true }).complete(PROBLEM, 0, CONFIG),
    ).rejects.toThrow(BackendUnavailable);
  });
});

describe("requestSeed", () => {
  it("depends on problem id and completion index only", () => {
    expect(requestSeed(5n, "p1", 2)).toBe(requestSeed(5n, "p1", 2));
    expect(requestSeed(5n, "p1", 2)).not.toBe(requestSeed(5n, "p1", 3));
    expect(requestSeed(5n, "p1", 2)).not.toBe(requestSeed(5n, "p2", 2));
    expect(requestSeed(5n, "p1", 2)).not.toBe(requestSeed(6n, "p1", 2));
  });
});

describe("HttpBackend", () => {
  let server: Server | undefined;

  afterEach(() => {
    server?.close();
    server = undefined;
  });

  function serve(status: number, payload: unknown): Promise<string> {
    return new Promise((resolve) => {
      server = createServer((_request, response) => {
        response.writeHead(status, { "Content-Type": "application/json" });
        response.end(JSON.stringify(payload));
      });
      server.listen(0, "127.0.0.1", () => {
        const { port } = server!.address() as AddressInfo;
        resolve(`http://127.0.0.1:${port}/v1/completions`);
      });
    });
  }

  it("maps the completions payload onto token records", async () => {
    const endpoint = await serve(200, {
      choices: [
        {
          text: "The answer is \\boxed{42}.",
          logprobs: {
            token_logprobs: [-0.5, -0.25],
            top_logprobs: [
              { The: -0.5, answer: -1.5, is: -2.0 },
              { " answer": -0.25, " is": -1.0 },
            ],
          },
        },
      ],
    });
    const completion = await new HttpBackend().complete(PROBLEM, 0, { ...CONFIG, endpoint });
    expect(completion.text).toContain("\\boxed{42}");
    expect(completion.tokens).toEqual([
      { chosen_logprob: -0.5, topk_logprobs: [-0.5, -1.5, -2.0], candidate_count: 3 },
      { chosen_logprob: -0.25, topk_logprobs: [-0.25, -1.0], candidate_count: 2 },
    ]);
  });

  it("raises LogprobsUnsupported when the engine returns none", async () => {
    const endpoint = await serve(200, { choices: [{ text: "42" }] });
    await expect(
      new HttpBackend().complete(PROBLEM, 0, { ...CONFIG, endpoint }),
    ).rejects.toThrow(LogprobsUnsupported);
  });

  it("raises BackendUnavailable on server errors and dead endpoints", async () => {
    const endpoint = await serve(500, {});
    await expect(
      new HttpBackend().complete(PROBLEM, 0, { ...CONFIG, endpoint }),
    ).rejects.toThrow(BackendUnavailable);
    await expect(
      new HttpBackend().complete(PROBLEM, 0, {
        ...CONFIG,
        endpoint: "http://127.0.0.1:1/v1/completions",
      }),
    ).rejects.toThrow(BackendUnavailable);
  });
});
