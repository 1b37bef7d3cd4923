/** Wiring: dispatch events through the reducer, re-render, talk to the API.
 *
 * One search or zoom request may be in flight at a time; every request gets
 * a sequence number and the reducer drops responses that arrive after a
 * newer request was issued.
 */

import { ApiClient } from "./api.js";
import { renderApp, type Actions } from "./render.js";
import { initialState, reduce, type AppEvent, type ViewState } from "./state.js";
import type { Novelty } from "./types.js";

const DEFAULT_ZOOM_L = 100;
const DEFAULT_ZOOM_M = 5;

export function startApp(root: HTMLElement, api: ApiClient = new ApiClient()): {
  dispatch: (event: AppEvent) => void;
  getState: () => ViewState;
  events: AppEvent[];
} {
  let state = initialState();
  let seq = 0;
  const events: AppEvent[] = [];
  const sessionId = `web-${Math.random().toString(36).slice(2, 10)}`;

  const dispatch = (event: AppEvent) => {
    events.push(event);
    state = reduce(state, event);
    rerender();
  };

  const runSearch = (sentenceIndex: number) => {
    seq += 1;
    const mySeq = seq;
    dispatch({ type: "search-started", seq: mySeq });
    api.search(state.abstract, sentenceIndex).then(
      (response) => dispatch({
        type: "search-succeeded", seq: mySeq, response, sentenceIndex,
      }),
      (err) => dispatch({
        type: "search-failed", seq: mySeq, message: String(err.message ?? err),
      }),
    );
  };

  const actions: Actions = {
    onAbstractChanged: (abstract) => dispatch({ type: "abstract-changed", abstract }),
    // First load fetches the authoritative server split (the UI never
    // splits sentences itself); results for sentence 0 arrive with it.
    onLoadAbstract: () => runSearch(0),
    onSelectSentence: (index) => dispatch({ type: "sentence-selected", index }),
    onSearch: () => {
      if (state.selectedSentence !== null) runSearch(state.selectedSentence);
    },
    onToggleCluster: (clusterId) => dispatch({ type: "cluster-toggled", clusterId }),
    onFilterChanged: (keyword) => dispatch({ type: "filter-changed", keyword }),
    onZoom: () => {
      if (!state.queryId || !state.selectedClusters.length) return;
      seq += 1;
      const mySeq = seq;
      dispatch({ type: "zoom-started", seq: mySeq });
      api.zoom(state.queryId, state.selectedClusters, DEFAULT_ZOOM_L, DEFAULT_ZOOM_M).then(
        (response) => dispatch({ type: "zoom-succeeded", seq: mySeq, response }),
        (err) => dispatch({
          type: "zoom-failed", seq: mySeq, message: String(err.message ?? err),
        }),
      );
    },
    onCloseZoom: () => dispatch({ type: "zoom-closed" }),
    onFeedback: (paperId, change) => {
      dispatch({ type: "feedback-set", paperId, ...change });
      const current = state.feedback[paperId];
      if (current?.novelty !== undefined && current?.relevance !== undefined) {
        api.feedback({
          session_id: sessionId,
          paper_id: paperId,
          novelty: current.novelty as Novelty,
          relevance: current.relevance,
        }).catch(() => undefined);
      }
    },
  };

  const rerender = () => {
    root.replaceChildren(renderApp(state, actions));
  };

  api.clusters().then(
    (body) => dispatch({ type: "clusters-loaded", clusters: body.clusters }),
    () => undefined,
  );
  rerender();
  return { dispatch, getState: () => state, events };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp(document.getElementById("app") as HTMLElement);
}
