/** Payload shapes of the backing REST API; the client adds nothing to them. */

export interface MapPoint {
  doc_id: string;
  x: number;
  y: number;
  title: string;
  year: number | null;
  venue: string;
}

export interface PaperSummary {
  doc_id: string;
  title: string;
  year: number | null;
  venue: string;
  score?: number;
}

export interface PaperDocument {
  doc_id: string;
  source: string;
  title: string;
  abstract_text: string;
  authors: string[];
  venue: string;
  published_year: number | null;
  url: string;
}

export interface PaperDetail {
  paper: PaperDocument;
  similar: PaperSummary[];
}

export interface SearchResponse {
  results: PaperSummary[];
  query_terms_matched: number;
  total: number;
}

export interface RecommendationsResponse {
  recommendations: PaperSummary[];
}

export interface HealthResponse {
  status: string;
  corpus_version: number;
  snapshot_checksum: string;
  n_documents: number;
}

export type Verdict = "relevant" | "irrelevant";

export interface ApiClient {
  getMap(): Promise<MapPoint[]>;
  getPaper(docId: string): Promise<PaperDetail>;
  search(text: string, limit?: number): Promise<SearchResponse>;
  rate(docId: string, verdict: Verdict): Promise<void>;
  getRecommendations(limit?: number): Promise<RecommendationsResponse>;
  getHealth(): Promise<HealthResponse>;
}
