import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import error409 from "./fixtures/error_409.json";
import error422 from "./fixtures/error_422.json";

interface Call {
  url: string;
  init?: RequestInit;
}

function mockFetch(status: number, body: unknown, headers: Record<string, string> = {}) {
  const calls: Call[] = [];
  const fetchFn = (async (url: string | URL | Request, init?: RequestInit) => {
    calls.push({ url: String(url), init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json", ...headers },
    });
  }) as typeof fetch;
  return { calls, fetchFn };
}

describe("ApiClient request shapes", () => {
  it("creates sessions with POST /v1/sessions", async () => {
    const { calls, fetchFn } = mockFetch(201, { session_id: "s1" });
    const client = new ApiClient("http://svc.test", fetchFn);
    await client.createSession({ abstract: "A", keywords: ["k"], seed_ids: [] });
    expect(calls[0].url).toBe("http://svc.test/v1/sessions");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      abstract: "A",
      keywords: ["k"],
      seed_ids: [],
    });
  });

  it("fetches sorted candidate views", async () => {
    const { calls, fetchFn } = mockFetch(200, { papers: [] });
    const client = new ApiClient("", fetchFn);
    await client.getPapers("abc123", "citations");
    expect(calls[0].url).toBe("/v1/sessions/abc123/papers?sort=citations");
  });

  it("posts plans to the drafts endpoint", async () => {
    const { calls, fetchFn } = mockFetch(200, { draft: null, view_order: [], view_sort: "" });
    const client = new ApiClient("", fetchFn);
    await client.createDraft("abc123", { plan: "Please generate 1 sentences." });
    expect(calls[0].url).toBe("/v1/sessions/abc123/drafts");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      plan: "Please generate 1 sentences.",
    });
  });
});

describe("ApiClient error mapping", () => {
  it("maps the service's 409 body onto ApiError", async () => {
    const { fetchFn } = mockFetch(409, error409);
    const client = new ApiClient("", fetchFn);
    try {
      await client.createDraft("s", { plan: "Please generate 1 sentences. Cite [9] at line 1." });
      expect.unreachable();
    } catch (error) {
      const apiError = error as ApiError;
      expect(apiError).toBeInstanceOf(ApiError);
      expect(apiError.status).toBe(409);
      expect(apiError.code).toBe("PlanContextMismatch");
    }
  });

  it("maps the service's 422 body with the syntax offset", async () => {
    const { fetchFn } = mockFetch(422, error422);
    const client = new ApiClient("", fetchFn);
    try {
      await client.createDraft("s", { plan: "Write five sentences please." });
      expect.unreachable();
    } catch (error) {
      const apiError = error as ApiError;
      expect(apiError.code).toBe("PlanSyntaxError");
      expect(apiError.position).toBe(0);
    }
  });

  it("exposes Retry-After on rate limits", async () => {
    const { fetchFn } = mockFetch(
      429,
      { code: "RateLimited", message: "slow down" },
      { "Retry-After": "7" },
    );
    const client = new ApiClient("", fetchFn);
    try {
      await client.createSession({ abstract: "A" });
      expect.unreachable();
    } catch (error) {
      const apiError = error as ApiError;
      expect(apiError.isRateLimit).toBe(true);
      expect(apiError.retryAfter).toBe(7);
    }
  });
});
