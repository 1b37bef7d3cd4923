/** Thin client for the search service endpoints. */

import type {
  ClustersResponse,
  FeedbackRecord,
  SearchResponse,
  ZoomResponse,
} from "./types.js";

async function readError(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new Error(await readError(response));
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  async search(abstract: string, sentenceIndex: number, t?: number): Promise<SearchResponse> {
    const body: Record<string, unknown> = { abstract, sentence_index: sentenceIndex };
    if (t !== undefined) body.t = t;
    return this.post<SearchResponse>("/api/search", body);
  }

  async zoom(queryId: string, selectedClusters: number[], l?: number, m?: number): Promise<ZoomResponse> {
    const body: Record<string, unknown> = {
      query_id: queryId,
      selected_clusters: selectedClusters,
    };
    if (l !== undefined) body.l = l;
    if (m !== undefined) body.m = m;
    return this.post<ZoomResponse>("/api/zoom", body);
  }

  async clusters(): Promise<ClustersResponse> {
    const response = await fetch(`${this.baseUrl}/api/clusters`);
    if (!response.ok) throw new Error(await readError(response));
    return (await response.json()) as ClustersResponse;
  }

  async feedback(record: FeedbackRecord): Promise<void> {
    await this.post<void>("/api/feedback", record);
  }
}
