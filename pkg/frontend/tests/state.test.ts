import { describe, expect, it } from "vitest";

import searchFixture from "./fixtures/search_response.json";
import zoomFixture from "./fixtures/zoom_response.json";
import {
  initialState,
  keywordSpans,
  reduce,
  replay,
  visibleGroups,
  type AppEvent,
} from "../src/state.js";
import type { SearchResponse, ZoomResponse } from "../src/types.js";

const search = searchFixture as SearchResponse;
const zoom = zoomFixture as ZoomResponse;

function loaded() {
  return replay([
    { type: "abstract-changed", abstract: "Some abstract. Two sentences." },
    { type: "search-started", seq: 1 },
    { type: "search-succeeded", seq: 1, response: search, sentenceIndex: 1 },
  ]);
}

describe("reducer", () => {
  it("adopts the server sentence split verbatim", () => {
    const state = loaded();
    expect(state.sentences).toEqual(search.sentences);
    expect(state.selectedSentence).toBe(1);
    expect(state.groups.length).toBe(20);
    expect(state.queryId).toBe(search.query_id);
  });

  it("keeps exactly one sentence selected and ignores out-of-range", () => {
    let state = loaded();
    state = reduce(state, { type: "sentence-selected", index: 0 });
    expect(state.selectedSentence).toBe(0);
    state = reduce(state, { type: "sentence-selected", index: 99 });
    expect(state.selectedSentence).toBe(0);
    state = reduce(state, { type: "sentence-selected", index: -1 });
    expect(state.selectedSentence).toBe(0);
  });

  it("discards stale responses by sequence number", () => {
    let state = loaded();
    state = reduce(state, { type: "search-started", seq: 2 });
    state = reduce(state, { type: "search-started", seq: 3 });
    const staleResponse: SearchResponse = { ...search, query_id: "stale" };
    state = reduce(state, {
      type: "search-succeeded", seq: 2, response: staleResponse, sentenceIndex: 0,
    });
    expect(state.queryId).toBe(search.query_id); // seq 2 ignored
    expect(state.phase).toBe("searching"); // still waiting for seq 3
    state = reduce(state, {
      type: "search-succeeded", seq: 3, response: search, sentenceIndex: 0,
    });
    expect(state.phase).toBe("idle");
  });

  it("toggles clusters on and off", () => {
    let state = loaded();
    state = reduce(state, { type: "cluster-toggled", clusterId: 4 });
    state = reduce(state, { type: "cluster-toggled", clusterId: 2 });
    expect(state.selectedClusters).toEqual([2, 4]);
    state = reduce(state, { type: "cluster-toggled", clusterId: 4 });
    expect(state.selectedClusters).toEqual([2]);
    state = reduce(state, { type: "cluster-toggled", clusterId: 2 });
    expect(state.selectedClusters).toEqual([]);
  });

  it("allows at most one zoom view", () => {
    let state = loaded();
    state = reduce(state, { type: "zoom-started", seq: 2 });
    state = reduce(state, { type: "zoom-succeeded", seq: 2, response: zoom });
    expect(state.zoom).not.toBeNull();
    const second: ZoomResponse = { ...zoom, selected_clusters: [5] };
    state = reduce(state, { type: "zoom-started", seq: 3 });
    state = reduce(state, { type: "zoom-succeeded", seq: 3, response: second });
    expect(state.zoom?.selected_clusters).toEqual([5]);
    state = reduce(state, { type: "zoom-closed" });
    expect(state.zoom).toBeNull();
  });

  it("abstract edits reset derived state but keep cluster info", () => {
    let state = loaded();
    state = reduce(state, {
      type: "clusters-loaded",
      clusters: [{ id: 0, size: 3, descriptors: ["x"] }],
    });
    state = reduce(state, { type: "abstract-changed", abstract: "New text." });
    expect(state.groups).toEqual([]);
    expect(state.sentences).toEqual([]);
    expect(state.selectedSentence).toBeNull();
    expect(state.clusterInfo.length).toBe(1);
    expect(state.abstract).toBe("New text.");
  });

  it("records feedback per paper, merging partial updates", () => {
    let state = loaded();
    state = reduce(state, { type: "feedback-set", paperId: "P1", novelty: 3 });
    state = reduce(state, { type: "feedback-set", paperId: "P1", relevance: true });
    expect(state.feedback["P1"]).toEqual({ novelty: 3, relevance: true });
  });

  it("replays a recorded event sequence to an identical state", () => {
    const events: AppEvent[] = [
      { type: "abstract-changed", abstract: "A. B." },
      { type: "search-started", seq: 1 },
      { type: "search-succeeded", seq: 1, response: search, sentenceIndex: 0 },
      { type: "cluster-toggled", clusterId: 3 },
      { type: "filter-changed", keyword: "the" },
      { type: "zoom-started", seq: 2 },
      { type: "zoom-succeeded", seq: 2, response: zoom },
      { type: "feedback-set", paperId: "X", novelty: 2 },
    ];
    expect(replay(events)).toEqual(replay(events));
  });
});

describe("visibleGroups projection", () => {
  it("shows all clusters when none selected", () => {
    const state = loaded();
    expect(visibleGroups(state).map((g) => g.cluster_id)).toEqual(
      search.groups.map((g) => g.cluster_id),
    );
  });

  it("composes cluster selection and keyword filter as intersection", () => {
    const base = loaded();
    const keyword = search.groups[0].hits[0].title.split(" ")[0];
    const clusterId = search.groups[0].cluster_id;

    const selectionOnly = visibleGroups(
      reduce(base, { type: "cluster-toggled", clusterId }),
    );
    const filterOnly = visibleGroups(
      reduce(base, { type: "filter-changed", keyword }),
    );
    let both = reduce(base, { type: "cluster-toggled", clusterId });
    both = reduce(both, { type: "filter-changed", keyword });
    const combined = visibleGroups(both);

    const refs = (groups: ReturnType<typeof visibleGroups>) =>
      new Set(groups.flatMap((g) => g.hits.map(
        (h) => `${h.hit.paper_id}:${h.hit.position}`)));
    const selectionRefs = refs(selectionOnly);
    const filterRefs = refs(filterOnly);
    const expected = new Set([...selectionRefs].filter((r) => filterRefs.has(r)));
    expect(refs(combined)).toEqual(expected);
    expect(expected.size).toBeGreaterThan(0);
  });

  it("keeps empty groups when the filter matches nothing", () => {
    const state = reduce(loaded(), {
      type: "filter-changed", keyword: "zzzzzzunmatchable",
    });
    const groups = visibleGroups(state);
    expect(groups.length).toBe(20);
    expect(groups.every((g) => g.hits.length === 0)).toBe(true);
  });
});

describe("keywordSpans", () => {
  it("finds case-insensitive occurrences", () => {
    expect(keywordSpans("Cement and cement again", "cement")).toEqual([
      [0, 6],
      [11, 17],
    ]);
  });

  it("returns nothing for blank keywords", () => {
    expect(keywordSpans("text", "  ")).toEqual([]);
  });
});
