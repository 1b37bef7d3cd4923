"""Faceted query-by-example over the cluster indices.

A query is an abstract plus one selected sentence. Retrieval fans out over
every global cluster index, groups hits per cluster, and can then zoom in:
re-retrieve a larger budget from user-selected clusters and re-cluster those
sentences locally to expose within-domain variation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ann import Hit
from .clustering import KMeans, cluster_descriptors
from .corpus import split_sentences


class SentenceIndexError(ValueError):
    """Selected sentence index is out of range for the split abstract."""


@dataclass
class SearchConfig:
    per_cluster_hits: int = 10   # wire field "t"
    zoom_total: int = 100        # wire field "l"; must exceed per_cluster_hits
    local_cluster_count: int = 5  # wire field "m"
    dedup: bool = True

    def __post_init__(self):
        if self.per_cluster_hits < 1:
            raise ValueError("per_cluster_hits must be >= 1")
        if self.zoom_total <= self.per_cluster_hits:
            raise ValueError("zoom_total must exceed per_cluster_hits")
        if self.local_cluster_count < 2:
            raise ValueError("local_cluster_count must be >= 2")


@dataclass
class Query:
    abstract: str
    sentence_index: int
    sentence_text: str
    vector: np.ndarray
    paper_id: str | None = None


@dataclass
class SearchHit:
    doc_id: str
    position: int
    score: float
    cluster_id: int
    sentence_text: str
    title: str
    abstract: str
    title_spans: list[tuple[int, int]] | None = None
    abstract_spans: list[tuple[int, int]] | None = None


@dataclass
class ResultGroup:
    cluster_id: int
    descriptors: list[str]
    hits: list[SearchHit]


@dataclass
class LocalGroup:
    local_id: int
    descriptors: list[str]
    hits: list[SearchHit]


@dataclass
class ZoomResult:
    selected: list[int]
    local_groups: list[LocalGroup] = field(default_factory=list)

    @property
    def hits(self) -> list[SearchHit]:
        return [h for g in self.local_groups for h in g.hits]


def make_query(abstract: str, sentence_index: int, provider,
               paper_id: str | None = None) -> Query:
    sentences = split_sentences(abstract)
    if not 0 <= sentence_index < len(sentences):
        raise SentenceIndexError(
            f"sentence_index {sentence_index} out of range for "
            f"{len(sentences)}-sentence abstract")
    text = sentences[sentence_index]
    vector = provider.encode([text])[0]
    return Query(abstract=abstract, sentence_index=sentence_index,
                 sentence_text=text, vector=vector, paper_id=paper_id)


def _excluded_doc(query: Query, snapshot) -> str | None:
    if query.paper_id is not None and query.paper_id in snapshot.doc_by_id:
        return query.paper_id
    return snapshot.paper_id_for_abstract(query.abstract)


def _to_search_hit(hit: Hit, snapshot) -> SearchHit:
    doc = snapshot.doc_by_id[hit.doc_id]
    return SearchHit(
        doc_id=hit.doc_id,
        position=hit.position,
        score=hit.score,
        cluster_id=hit.cluster_id,
        sentence_text=doc.sentences[hit.position].text,
        title=doc.title,
        abstract=doc.abstract,
    )


def _best_sentence(doc_id: str, query_vector: np.ndarray, snapshot) -> tuple[int, float]:
    """Exact best-scoring sentence of a document for this query."""
    matrix = snapshot.doc_sentence_matrix(doc_id)
    scores = matrix @ query_vector
    best = int(np.argmax(scores))  # ties -> lowest position
    return best, float(scores[best])


def faceted_search(query: Query, cfg: SearchConfig, snapshot) -> list[ResultGroup]:
    """Top hits per global cluster, one ResultGroup per cluster.

    With dedup each document appears at most once per group, represented by
    its best-scoring sentence (recomputed exactly, so the displayed highlight
    is right even on the approximate index path). The query's own paper is
    excluded, matched by paper_id or by its exact abstract text.
    """
    excluded = _excluded_doc(query, snapshot)
    groups: list[ResultGroup] = []
    for cluster_id in sorted(snapshot.indices):
        index = snapshot.indices[cluster_id]
        # Over-fetch so exclusion and dedup can still fill the group.
        fetch = cfg.per_cluster_hits * 3 + 16
        raw = index.query(query.vector, fetch)
        hits: list[Hit] = []
        seen_docs: set[str] = set()
        for hit in raw:
            if excluded is not None and hit.doc_id == excluded:
                continue
            if cfg.dedup:
                if hit.doc_id in seen_docs:
                    continue
                seen_docs.add(hit.doc_id)
            hits.append(hit)
            if len(hits) == cfg.per_cluster_hits:
                break
        search_hits = []
        for hit in hits:
            sh = _to_search_hit(hit, snapshot)
            if cfg.dedup:
                pos, score = _best_sentence(hit.doc_id, query.vector, snapshot)
                doc = snapshot.doc_by_id[hit.doc_id]
                sh = replace(sh, position=pos, score=score,
                             sentence_text=doc.sentences[pos].text)
            search_hits.append(sh)
        search_hits.sort(key=lambda h: (-h.score, h.doc_id, h.position))
        groups.append(ResultGroup(
            cluster_id=cluster_id,
            descriptors=list(snapshot.clusters.descriptors[cluster_id]),
            hits=search_hits,
        ))
    return groups


def zoom_in(query: Query, selected: set[int] | list[int], cfg: SearchConfig,
            snapshot, seed: int = 0) -> ZoomResult:
    """Retrieve a larger budget from the selected clusters and re-cluster.

    The budget is split evenly: top ceil(zoom_total / n_selected) sentences
    per selected index, merged, global top zoom_total kept. The kept
    sentence vectors are k-means clustered into at most local_cluster_count
    groups, each described by TF-IDF terms over its member abstracts.
    """
    selected_ids = sorted(set(int(c) for c in selected))
    if not selected_ids:
        raise ValueError("selected clusters must be non-empty")
    unknown = [c for c in selected_ids if c not in snapshot.indices]
    if unknown:
        raise ValueError(f"unknown cluster ids: {unknown}")

    excluded = _excluded_doc(query, snapshot)
    budget = math.ceil(cfg.zoom_total / len(selected_ids))
    merged: list[Hit] = []
    for cluster_id in selected_ids:
        index = snapshot.indices[cluster_id]
        extra = snapshot.sentence_count_of(excluded) if excluded is not None else 0
        raw = index.query(query.vector, budget + extra)
        kept = [h for h in raw if excluded is None or h.doc_id != excluded]
        merged.extend(kept[:budget])
    merged.sort(key=lambda h: (-h.score, h.doc_id, h.position))
    merged = merged[: cfg.zoom_total]

    if not merged:
        return ZoomResult(selected=selected_ids, local_groups=[])

    vectors = np.stack([snapshot.sentence_vector((h.doc_id, h.position))
                        for h in merged]).astype(np.float64)
    n_distinct = np.unique(vectors, axis=0).shape[0]
    k = min(cfg.local_cluster_count, n_distinct)
    labels = KMeans(n_clusters=k, seed=seed).fit(vectors).labels_

    member_hits: list[list[Hit]] = [[] for _ in range(k)]
    for hit, label in zip(merged, labels):
        member_hits[int(label)].append(hit)
    if k >= 2:
        texts = [[snapshot.doc_by_id[h.doc_id].abstract for h in hits]
                 for hits in member_hits]
        descriptors = cluster_descriptors(texts, top_n=5)
    else:
        descriptors = [[] for _ in range(k)]

    local_groups = []
    for local_id in range(k):
        hits = [_to_search_hit(h, snapshot) for h in member_hits[local_id]]
        local_groups.append(LocalGroup(
            local_id=local_id, descriptors=descriptors[local_id], hits=hits))
    return ZoomResult(selected=selected_ids, local_groups=local_groups)


def _find_spans(text: str, keyword: str) -> list[tuple[int, int]]:
    lowered, needle = text.lower(), keyword.lower()
    spans = []
    i = lowered.find(needle)
    while i != -1:
        spans.append((i, i + len(needle)))
        i = lowered.find(needle, i + 1)
    return spans


def keyword_filter(groups: list[ResultGroup], keyword: str) -> list[ResultGroup]:
    """Keep only hits whose title or abstract contains the keyword
    (case-insensitive substring); match spans are attached for highlighting.
    Group structure is preserved; groups may come back empty."""
    keyword = keyword.strip()
    if not keyword:
        raise ValueError("keyword must be non-empty")
    filtered = []
    for group in groups:
        kept = []
        for hit in group.hits:
            title_spans = _find_spans(hit.title, keyword)
            abstract_spans = _find_spans(hit.abstract, keyword)
            if title_spans or abstract_spans:
                kept.append(replace(hit, title_spans=title_spans,
                                    abstract_spans=abstract_spans))
        filtered.append(ResultGroup(cluster_id=group.cluster_id,
                                    descriptors=list(group.descriptors),
                                    hits=kept))
    return filtered
