import type {
  ApiClient,
  HealthResponse,
  MapPoint,
  PaperDetail,
  RecommendationsResponse,
  SearchResponse,
  Verdict,
} from "./types.js";

/** Same-origin fetch client; the user cookie rides along automatically. */
export class HttpApi implements ApiClient {
  constructor(private base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path, { credentials: "same-origin" });
    if (!response.ok) throw new Error(`${path}: HTTP ${response.status}`);
    return response.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      credentials: "same-origin",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new Error(`${path}: HTTP ${response.status}`);
    return response.json() as Promise<T>;
  }

  getMap(): Promise<MapPoint[]> {
    return this.get("/api/map");
  }

  getPaper(docId: string): Promise<PaperDetail> {
    return this.get(`/api/papers/${encodeURIComponent(docId)}`);
  }

  search(text: string, limit = 20): Promise<SearchResponse> {
    return this.post("/api/search", { text, limit });
  }

  async rate(docId: string, verdict: Verdict): Promise<void> {
    await this.post(`/api/papers/${encodeURIComponent(docId)}/rating`, { verdict });
  }

  getRecommendations(limit = 20): Promise<RecommendationsResponse> {
    return this.get(`/api/recommendations?limit=${limit}`);
  }

  getHealth(): Promise<HealthResponse> {
    return this.get("/api/health");
  }
}

/**
 * Latest-request-wins guard: each panel wraps its async loads so a slow
 * stale response can never overwrite a newer one.
 */
export function latestOnly<Args extends unknown[], T>(
  run: (...args: Args) => Promise<T>,
): (...args: Args) => Promise<T | undefined> {
  let token = 0;
  return async (...args: Args) => {
    const mine = ++token;
    const result = await run(...args);
    return mine === token ? result : undefined;
  };
}
