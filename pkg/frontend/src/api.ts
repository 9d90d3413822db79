// Thin typed client for the /v1 API. The UI performs no business logic
// of its own: every state change is one of these calls.

import type {
  ApiErrorBody,
  DraftResponse,
  PapersView,
  SessionSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly stage: string | null = null,
    public readonly position: number | null = null,
    public readonly retryAfter: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isRateLimit(): boolean {
    return this.status === 429;
  }
}

export interface CreateSessionRequest {
  abstract?: string;
  keywords?: string[];
  seed_ids?: string[];
  plan?: string;
  config?: Record<string, unknown>;
}

export class ApiClient {
  constructor(
    public baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new ApiError(0, "NetworkError", String(err));
    }
    if (!response.ok) {
      let body: ApiErrorBody = { code: "UnknownError", message: response.statusText };
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        // keep the fallback body
      }
      const retryAfter = response.headers.get("Retry-After");
      throw new ApiError(
        response.status,
        body.code ?? "UnknownError",
        body.message ?? response.statusText,
        body.stage ?? null,
        body.position ?? null,
        retryAfter !== null ? Number(retryAfter) : null,
      );
    }
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<SessionSummary> {
    return this.request<SessionSummary>("/v1/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<Record<string, unknown>> {
    return this.request(`/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  getPapers(sessionId: string, sort: string): Promise<PapersView> {
    const id = encodeURIComponent(sessionId);
    return this.request<PapersView>(`/v1/sessions/${id}/papers?sort=${encodeURIComponent(sort)}`);
  }

  createDraft(
    sessionId: string,
    body: { plan?: string; sort?: string },
  ): Promise<DraftResponse> {
    return this.request<DraftResponse>(
      `/v1/sessions/${encodeURIComponent(sessionId)}/drafts`,
      { method: "POST", body: JSON.stringify(body) },
    );
  }
}
