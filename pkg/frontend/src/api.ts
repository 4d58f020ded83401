// Fetch-based client for the evaluate-and-grade API.

import type { CheckRequest, CheckResponse, EvalRequest, EvalResponse } from "./protocol.js";

export class ApiError extends Error {
  constructor(message: string, readonly retryable: boolean) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiClient {
  evaluate(request: EvalRequest): Promise<EvalResponse>;
  check(request: CheckRequest): Promise<CheckResponse>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpApiClient implements ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async evaluate(request: EvalRequest): Promise<EvalResponse> {
    return (await this.post("/eval", request)) as EvalResponse;
  }

  async check(request: CheckRequest): Promise<CheckResponse> {
    return (await this.post("/check", request)) as CheckResponse;
  }

  private async post(path: string, payload: unknown): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      // network failures are worth retrying; protocol errors are not
      throw new ApiError(`cannot reach the evaluation server: ${String(err)}`, true);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // fall through; handled below
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "error" in body
          ? String((body as Record<string, unknown>).error)
          : `${response.status}`;
      throw new ApiError(`request failed: ${detail}`, response.status >= 500);
    }
    if (body === null || typeof body !== "object") {
      throw new ApiError("server returned a non-JSON response", true);
    }
    return body;
  }
}
