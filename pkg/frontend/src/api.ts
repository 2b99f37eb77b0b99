// Thin fetch client for the diagram service. The console does no analysis
// of its own, so every method returns the server payload unmodified.

import type {
  EdgResponse,
  ErrorResponse,
  InferResponse,
  ParseResponse,
  PruneResponse,
  UsecaseListResponse,
  UsecaseResponse,
  WireDiagnostic,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Raised for responses the server answered with a diagnostic body. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly diagnostic: WireDiagnostic,
  ) {
    super(diagnostic.message);
    this.name = "ServiceError";
  }
}

export class ServiceClient {
  // fetchFn is injectable so tests can replay captured responses
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async usecases(): Promise<UsecaseListResponse> {
    return this.get("/api/usecases");
  }

  async usecase(name: string): Promise<UsecaseResponse> {
    return this.get(`/api/usecase/${encodeURIComponent(name)}`);
  }

  async edg(name: string): Promise<EdgResponse> {
    return this.get(`/api/usecase/${encodeURIComponent(name)}/edg`);
  }

  async prune(name: string, target: string): Promise<PruneResponse> {
    const query = `target=${encodeURIComponent(target)}`;
    return this.get(`/api/usecase/${encodeURIComponent(name)}/prune?${query}`);
  }

  async infer(usecase: string, target?: string): Promise<InferResponse> {
    const body: Record<string, string> = { usecase };
    if (target !== undefined) {
      body.target = target;
    }
    return this.post("/api/infer", body);
  }

  async parse(text: string): Promise<ParseResponse> {
    return this.post("/api/parse", { text });
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    return this.unwrap(response);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap(response);
  }

  private async unwrap<T>(response: Response): Promise<T> {
    if (response.ok) {
      return (await response.json()) as T;
    }
    let payload: ErrorResponse | null = null;
    try {
      payload = (await response.json()) as ErrorResponse;
    } catch {
      payload = null;
    }
    if (payload && payload.diagnostic) {
      throw new ServiceError(response.status, payload.diagnostic);
    }
    throw new ServiceError(response.status, {
      severity: "error",
      code: "E_TRANSPORT",
      message: `service answered ${response.status} without a diagnostic body`,
      node: null,
      entity: null,
    });
  }
}
