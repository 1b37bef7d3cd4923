/** DOM renderers. Each takes the state plus callbacks and returns a fresh
 * element; main.ts swaps them into the page on every state change. */

import { renderSegments, segment, sentenceSpan } from "./highlight.js";
import type { FeedbackState, ViewState, VisibleGroup, VisibleHit } from "./state.js";
import { visibleGroups } from "./state.js";
import type { Novelty, WireHit } from "./types.js";

export interface Actions {
  onAbstractChanged(abstract: string): void;
  onLoadAbstract(): void;
  onSelectSentence(index: number): void;
  onSearch(): void;
  onToggleCluster(clusterId: number): void;
  onFilterChanged(keyword: string): void;
  onZoom(): void;
  onCloseZoom(): void;
  onFeedback(paperId: string, change: { novelty?: Novelty; relevance?: boolean }): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderInputPanel(state: ViewState, actions: Actions): HTMLElement {
  const panel = el("section", "input-panel");
  panel.appendChild(el("h2", undefined, "Query"));

  const textarea = el("textarea");
  textarea.value = state.abstract;
  textarea.placeholder = "Paste a paper abstract…";
  textarea.addEventListener("input", () => actions.onAbstractChanged(textarea.value));
  panel.appendChild(textarea);

  const load = el("button", "load-button", "Load abstract");
  load.disabled = state.abstract.trim() === "" || state.phase !== "idle";
  load.addEventListener("click", () => actions.onLoadAbstract());
  panel.appendChild(load);

  if (state.sentences.length) {
    const hint = el("p", "hint",
      "Click the sentence that carries the aspect you want to match.");
    panel.appendChild(hint);
    const list = el("div", "sentence-list");
    state.sentences.forEach((sentence, index) => {
      const span = el("span", "sentence-option", sentence);
      if (index === state.selectedSentence) span.classList.add("selected");
      span.addEventListener("click", () => actions.onSelectSentence(index));
      list.appendChild(span);
      list.appendChild(document.createTextNode(" "));
    });
    panel.appendChild(list);
  }

  const search = el("button", "search-button", "Search");
  search.disabled = state.selectedSentence === null || state.phase !== "idle";
  search.addEventListener("click", () => actions.onSearch());
  panel.appendChild(search);

  if (state.error) panel.appendChild(el("p", "error", state.error));
  if (state.phase !== "idle") panel.appendChild(el("p", "busy", `${state.phase}…`));
  return panel;
}

export function renderClusterPanel(state: ViewState, actions: Actions): HTMLElement {
  const panel = el("section", "cluster-panel");
  panel.appendChild(el("h2", undefined, "Domain clusters"));
  const list = el("div", "cluster-list");

  const groupsById = new Map(state.groups.map((g) => [g.cluster_id, g]));
  const infoById = new Map(state.clusterInfo.map((c) => [c.id, c]));
  const ids = state.groups.length
    ? state.groups.map((g) => g.cluster_id)
    : state.clusterInfo.map((c) => c.id);

  for (const id of ids) {
    const descriptors =
      groupsById.get(id)?.descriptors ?? infoById.get(id)?.descriptors ?? [];
    const size = infoById.get(id)?.size;
    const chip = el("button", "cluster-chip");
    chip.dataset.clusterId = String(id);
    const label = descriptors.length ? descriptors.join(" · ") : `cluster ${id}`;
    chip.textContent = size !== undefined ? `${label} (${size})` : label;
    if (state.selectedClusters.includes(id)) chip.classList.add("selected");
    chip.addEventListener("click", () => actions.onToggleCluster(id));
    list.appendChild(chip);
  }
  panel.appendChild(list);

  const zoom = el("button", "zoom-button", "Zoom in");
  zoom.disabled =
    state.selectedClusters.length === 0 || !state.queryId || state.phase !== "idle";
  zoom.addEventListener("click", () => actions.onZoom());
  panel.appendChild(zoom);
  return panel;
}

function renderFeedback(
  paperId: string,
  current: FeedbackState | undefined,
  actions: Actions,
): HTMLElement {
  const box = el("div", "feedback");
  const novelties: Array<[Novelty, string]> = [
    [1, "Seen this paper"],
    [2, "Seen similar ideas"],
    [3, "Nothing like this before"],
  ];
  for (const [level, title] of novelties) {
    const btn = el("button", "novelty", String(level));
    btn.title = title;
    if (current?.novelty === level) btn.classList.add("selected");
    btn.addEventListener("click", () => actions.onFeedback(paperId, { novelty: level }));
    box.appendChild(btn);
  }
  for (const relevant of [true, false]) {
    const btn = el("button", "relevance", relevant ? "Relevant" : "Not relevant");
    if (current?.relevance === relevant) btn.classList.add("selected");
    btn.addEventListener("click", () => actions.onFeedback(paperId, { relevance: relevant }));
    box.appendChild(btn);
  }
  return box;
}

function renderRow(
  visible: VisibleHit,
  state: ViewState,
  actions: Actions,
): HTMLElement {
  const { hit, titleSpans, abstractSpans } = visible;
  const row = el("article", "result-row");
  row.dataset.paperId = hit.paper_id;
  row.dataset.clusterId = String(hit.cluster_id);

  const title = el("h3", "result-title");
  title.appendChild(renderSegments(segment(hit.title, null, titleSpans)));
  row.appendChild(title);

  const abstract = el("p", "result-abstract");
  const best = sentenceSpan(hit.abstract, hit.sentence);
  abstract.appendChild(renderSegments(segment(hit.abstract, best, abstractSpans)));
  if (best === null) {
    // Whitespace drift between stored sentence and abstract; still show it.
    const standalone = el("mark", "hl-sentence", hit.sentence);
    abstract.appendChild(document.createTextNode(" "));
    abstract.appendChild(standalone);
  }
  row.appendChild(abstract);

  const meta = el("p", "result-meta",
    `score ${hit.score.toFixed(4)} · cluster ${hit.cluster_id}`);
  row.appendChild(meta);
  row.appendChild(renderFeedback(hit.paper_id, state.feedback[hit.paper_id], actions));
  return row;
}

export function renderTable(state: ViewState, actions: Actions): HTMLElement {
  const section = el("section", "results");
  section.appendChild(el("h2", undefined, "Results"));

  const filter = el("input", "keyword-filter");
  filter.type = "search";
  filter.placeholder = "Filter by keyword…";
  filter.value = state.filterKeyword;
  filter.addEventListener("input", () => actions.onFilterChanged(filter.value));
  section.appendChild(filter);

  for (const group of visibleGroups(state)) {
    const groupBox = el("div", "result-group");
    groupBox.dataset.clusterId = String(group.cluster_id);
    const label = group.descriptors.length
      ? group.descriptors.join(" · ")
      : `cluster ${group.cluster_id}`;
    groupBox.appendChild(el("h3", "group-label", label));
    if (!group.hits.length) {
      groupBox.appendChild(el("p", "empty", "no matching papers"));
    }
    for (const visible of group.hits) {
      groupBox.appendChild(renderRow(visible, state, actions));
    }
    section.appendChild(groupBox);
  }
  return section;
}

export function renderZoomView(state: ViewState, actions: Actions): HTMLElement | null {
  if (!state.zoom) return null;
  const section = el("section", "zoom-view");
  const heading = el("h2", undefined,
    `Zoomed into clusters ${state.zoom.selected_clusters.join(", ")}`);
  section.appendChild(heading);
  const close = el("button", "close-zoom", "Close");
  close.addEventListener("click", () => actions.onCloseZoom());
  section.appendChild(close);

  for (const group of state.zoom.local_groups) {
    const box = el("div", "local-group");
    box.dataset.localId = String(group.local_id);
    const label = group.descriptors.length
      ? group.descriptors.join(" · ")
      : `local group ${group.local_id}`;
    box.appendChild(el("h3", "group-label", label));
    for (const hit of group.hits) {
      box.appendChild(renderRow(
        { hit, titleSpans: [], abstractSpans: [] }, state, actions));
    }
    section.appendChild(box);
  }
  return section;
}

export function renderApp(state: ViewState, actions: Actions): HTMLElement {
  const root = el("div", "app");
  root.appendChild(renderInputPanel(state, actions));
  root.appendChild(renderClusterPanel(state, actions));
  const zoom = renderZoomView(state, actions);
  if (zoom) root.appendChild(zoom);
  root.appendChild(renderTable(state, actions));
  return root;
}

export { visibleGroups };
export type { VisibleGroup, WireHit };
