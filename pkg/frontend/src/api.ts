import type {
  DatasetDetail,
  QueryRequest,
  QueryResult,
  Rule,
  SearchResponse,
  SimilarEntry,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Typed client for the service API. Every request path is recorded in
 * requestLog so tests can assert the UI never calls an undocumented
 * endpoint.
 */
export class ApiClient {
  requestLog: string[] = [];

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike,
  ) {}

  private async request<T>(
    path: string,
    init?: RequestInit,
    signal?: AbortSignal,
  ): Promise<T> {
    this.requestLog.push(path);
    const response = await this.fetchImpl(this.baseUrl + path, {
      ...init,
      signal,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  searchDatasets(
    params: { q?: string; category?: string; page?: number; pageSize?: number },
    signal?: AbortSignal,
  ): Promise<SearchResponse> {
    const query = new URLSearchParams();
    if (params.q) query.set("q", params.q);
    if (params.category) query.set("category", params.category);
    if (params.page) query.set("page", String(params.page));
    if (params.pageSize) query.set("page_size", String(params.pageSize));
    const suffix = query.toString() ? `?${query.toString()}` : "";
    return this.request<SearchResponse>(`/api/datasets${suffix}`, undefined, signal);
  }

  datasetDetail(id: string, signal?: AbortSignal): Promise<DatasetDetail> {
    return this.request<DatasetDetail>(
      `/api/datasets/${encodeURIComponent(id)}`,
      undefined,
      signal,
    );
  }

  rules(signal?: AbortSignal): Promise<Rule[]> {
    return this.request<Rule[]>("/api/rules", undefined, signal);
  }

  /** Returns null when the service has no embeddings loaded (503). */
  async similar(
    id: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<SimilarEntry[] | null> {
    try {
      return await this.request<SimilarEntry[]>(
        `/api/similar/${encodeURIComponent(id)}?k=${k}`,
        undefined,
        signal,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 503) return null;
      throw err;
    }
  }

  runQuery(body: QueryRequest, signal?: AbortSignal): Promise<QueryResult> {
    return this.request<QueryResult>(
      "/api/query",
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
      signal,
    );
  }
}

/** Documented endpoint patterns; the walkthrough test checks the log. */
export const DOCUMENTED_ENDPOINTS: RegExp[] = [
  /^\/api\/datasets(\?.*)?$/,
  /^\/api\/datasets\/[^/?]+$/,
  /^\/api\/query$/,
  /^\/api\/rules$/,
  /^\/api\/similar\/[^/?]+(\?.*)?$/,
  /^\/api\/health$/,
];

export function isDocumentedEndpoint(path: string): boolean {
  return DOCUMENTED_ENDPOINTS.some((pattern) => pattern.test(path));
}
