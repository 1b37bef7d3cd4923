/** Application state as a pure reducer over events.
 *
 * Every transition goes through reduce(), so a recorded event sequence
 * replays to an identical state. Responses carry the sequence number of the
 * request that produced them; anything older than the latest issued request
 * is discarded as stale.
 */

import type {
  ClusterInfo,
  Novelty,
  SearchResponse,
  WireGroup,
  ZoomResponse,
} from "./types.js";

export interface FeedbackState {
  novelty?: Novelty;
  relevance?: boolean;
}

export interface ViewState {
  abstract: string;
  /** Server-provided split; the UI never splits text itself. */
  sentences: string[];
  selectedSentence: number | null;
  queryId: string | null;
  groups: WireGroup[];
  clusterInfo: ClusterInfo[];
  selectedClusters: number[];
  filterKeyword: string;
  zoom: ZoomResponse | null;
  feedback: Record<string, FeedbackState>;
  phase: "idle" | "searching" | "zooming";
  latestSeq: number;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    abstract: "",
    sentences: [],
    selectedSentence: null,
    queryId: null,
    groups: [],
    clusterInfo: [],
    selectedClusters: [],
    filterKeyword: "",
    zoom: null,
    feedback: {},
    phase: "idle",
    latestSeq: 0,
    error: null,
  };
}

export type AppEvent =
  | { type: "abstract-changed"; abstract: string }
  | { type: "clusters-loaded"; clusters: ClusterInfo[] }
  | { type: "search-started"; seq: number }
  | { type: "search-succeeded"; seq: number; response: SearchResponse; sentenceIndex: number }
  | { type: "search-failed"; seq: number; message: string }
  | { type: "sentence-selected"; index: number }
  | { type: "cluster-toggled"; clusterId: number }
  | { type: "filter-changed"; keyword: string }
  | { type: "zoom-started"; seq: number }
  | { type: "zoom-succeeded"; seq: number; response: ZoomResponse }
  | { type: "zoom-failed"; seq: number; message: string }
  | { type: "zoom-closed" }
  | { type: "feedback-set"; paperId: string; novelty?: Novelty; relevance?: boolean };

function stale(state: ViewState, seq: number): boolean {
  return seq < state.latestSeq;
}

export function reduce(state: ViewState, event: AppEvent): ViewState {
  switch (event.type) {
    case "abstract-changed":
      // New text invalidates the previous split and everything derived.
      return {
        ...initialState(),
        clusterInfo: state.clusterInfo,
        feedback: state.feedback,
        latestSeq: state.latestSeq,
        abstract: event.abstract,
      };

    case "clusters-loaded":
      return { ...state, clusterInfo: event.clusters };

    case "search-started":
      return { ...state, phase: "searching", latestSeq: event.seq, error: null };

    case "search-failed":
      if (stale(state, event.seq)) return state;
      return { ...state, phase: "idle", error: event.message };

    case "search-succeeded": {
      if (stale(state, event.seq)) return state;
      const sentences = event.response.sentences;
      const selected =
        event.sentenceIndex >= 0 && event.sentenceIndex < sentences.length
          ? event.sentenceIndex
          : 0;
      return {
        ...state,
        phase: "idle",
        error: null,
        sentences,
        selectedSentence: selected,
        queryId: event.response.query_id,
        groups: event.response.groups,
        selectedClusters: [],
        filterKeyword: "",
        zoom: null,
      };
    }

    case "sentence-selected":
      if (event.index < 0 || event.index >= state.sentences.length) return state;
      return { ...state, selectedSentence: event.index };

    case "cluster-toggled": {
      const present = state.selectedClusters.includes(event.clusterId);
      const selectedClusters = present
        ? state.selectedClusters.filter((c) => c !== event.clusterId)
        : [...state.selectedClusters, event.clusterId].sort((a, b) => a - b);
      return { ...state, selectedClusters };
    }

    case "filter-changed":
      return { ...state, filterKeyword: event.keyword };

    case "zoom-started":
      return { ...state, phase: "zooming", latestSeq: event.seq, error: null };

    case "zoom-failed":
      if (stale(state, event.seq)) return state;
      return { ...state, phase: "idle", error: event.message };

    case "zoom-succeeded":
      if (stale(state, event.seq)) return state;
      return { ...state, phase: "idle", error: null, zoom: event.response };

    case "zoom-closed":
      return { ...state, zoom: null };

    case "feedback-set": {
      const previous = state.feedback[event.paperId] ?? {};
      const next: FeedbackState = { ...previous };
      if (event.novelty !== undefined) next.novelty = event.novelty;
      if (event.relevance !== undefined) next.relevance = event.relevance;
      return { ...state, feedback: { ...state.feedback, [event.paperId]: next } };
    }
  }
}

export function replay(events: AppEvent[], start?: ViewState): ViewState {
  return events.reduce(reduce, start ?? initialState());
}

/** Case-insensitive substring spans of keyword in text. */
export function keywordSpans(text: string, keyword: string): Array<[number, number]> {
  const needle = keyword.trim().toLowerCase();
  if (!needle) return [];
  const haystack = text.toLowerCase();
  const spans: Array<[number, number]> = [];
  let i = haystack.indexOf(needle);
  while (i !== -1) {
    spans.push([i, i + needle.length]);
    i = haystack.indexOf(needle, i + 1);
  }
  return spans;
}

export interface VisibleHit {
  hit: WireGroup["hits"][number];
  titleSpans: Array<[number, number]>;
  abstractSpans: Array<[number, number]>;
}

export interface VisibleGroup {
  cluster_id: number;
  descriptors: string[];
  hits: VisibleHit[];
}

/** Pure projection of groups: cluster selection and keyword filter compose
 * as set intersection over hits. No selection means all clusters. */
export function visibleGroups(state: ViewState): VisibleGroup[] {
  const bySelection = state.selectedClusters.length
    ? state.groups.filter((g) => state.selectedClusters.includes(g.cluster_id))
    : state.groups;
  const keyword = state.filterKeyword.trim();
  return bySelection.map((group) => {
    const hits: VisibleHit[] = [];
    for (const hit of group.hits) {
      if (!keyword) {
        hits.push({ hit, titleSpans: [], abstractSpans: [] });
        continue;
      }
      const titleSpans = keywordSpans(hit.title, keyword);
      const abstractSpans = keywordSpans(hit.abstract, keyword);
      if (titleSpans.length || abstractSpans.length) {
        hits.push({ hit, titleSpans, abstractSpans });
      }
    }
    return { cluster_id: group.cluster_id, descriptors: group.descriptors, hits };
  });
}
