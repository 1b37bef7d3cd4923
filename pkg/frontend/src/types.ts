/** Wire types for the search service API. */

export interface WireHit {
  paper_id: string;
  title: string;
  abstract: string;
  position: number;
  sentence: string;
  score: number;
  cluster_id: number;
}

export interface WireGroup {
  cluster_id: number;
  descriptors: string[];
  hits: WireHit[];
}

export interface SearchResponse {
  query_id: string;
  sentences: string[];
  groups: WireGroup[];
}

export interface LocalGroup {
  local_id: number;
  descriptors: string[];
  hits: WireHit[];
}

export interface ZoomResponse {
  query_id: string;
  selected_clusters: number[];
  local_groups: LocalGroup[];
}

export interface ClusterInfo {
  id: number;
  size: number;
  descriptors: string[];
}

export interface ClustersResponse {
  clusters: ClusterInfo[];
}

export type Novelty = 1 | 2 | 3;

export interface FeedbackRecord {
  session_id: string;
  paper_id: string;
  novelty: Novelty;
  relevance: boolean;
}
