"""Build and load the immutable serving snapshot.

A snapshot directory holds everything a serving process answers from:
corpus, document/sentence vector caches, the global cluster model with
descriptors, per-cluster sentence indices, and a manifest. Builds with the
same inputs and seed are byte-identical (nothing time- or path-dependent is
written), so rebuilds are verifiable by hashing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ann import ClusterIndex, IndexParams
from .clustering import ClusterModel, GlobalClusterSet, fit_global_clusters
from .corpus import Corpus, ingest, load_corpus, save_corpus
from .embedding import (
    DOCUMENT_KIND,
    SENTENCE_KIND,
    VectorCache,
    build_vector_cache,
    document_text,
    make_provider,
    sentence_key,
)

MANIFEST_VERSION = 1


def _normalized_abstract_digest(abstract: str) -> str:
    canonical = " ".join(abstract.split())
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class Snapshot:
    corpus: Corpus
    doc_cache: VectorCache
    sent_cache: VectorCache
    clusters: GlobalClusterSet
    indices: dict[int, ClusterIndex]
    sentence_provider: object
    meta: dict
    doc_by_id: dict = field(init=False)

    def __post_init__(self):
        self.doc_by_id = {d.paper_id: d for d in self.corpus.documents}
        self._abstract_to_id = {
            _normalized_abstract_digest(d.abstract): d.paper_id
            for d in self.corpus.documents
        }
        stats = self.corpus.stats
        if len(self.doc_cache) != stats.document_count:
            raise ValueError("doc vector cache does not cover the corpus")
        if len(self.sent_cache) != stats.sentence_count:
            raise ValueError("sentence vector cache does not cover the corpus")
        indexed = sum(len(idx) for idx in self.indices.values())
        if indexed != stats.sentence_count:
            raise ValueError("cluster indices do not partition the sentences")

    def paper_id_for_abstract(self, abstract: str) -> str | None:
        return self._abstract_to_id.get(_normalized_abstract_digest(abstract))

    def sentence_vector(self, ref: tuple[str, int]) -> np.ndarray:
        return self.sent_cache.get(sentence_key(ref[0], ref[1]))

    def doc_sentence_matrix(self, doc_id: str) -> np.ndarray:
        doc = self.doc_by_id[doc_id]
        rows = [self.sent_cache.row(sentence_key(doc_id, s.position))
                for s in doc.sentences]
        return self.sent_cache.vectors[rows]

    def sentence_count_of(self, doc_id: str) -> int:
        doc = self.doc_by_id.get(doc_id)
        return len(doc.sentences) if doc is not None else 0

    @property
    def seed(self) -> int:
        return int(self.meta.get("seed", 0))


def _cluster_entries(corpus: Corpus, clusters: GlobalClusterSet,
                     sent_cache: VectorCache):
    by_id = {d.paper_id: d for d in corpus.documents}
    for cluster_id in range(clusters.n_clusters):
        entries = []
        for paper_id in clusters.doc_ids[cluster_id]:
            for sent in by_id[paper_id].sentences:
                key = sentence_key(paper_id, sent.position)
                entries.append(((paper_id, sent.position), sent_cache.get(key)))
        yield cluster_id, entries


def build_snapshot(source: str | Path | Corpus, out_dir: str | Path, *,
                   provider_spec: str = "fallback", doc_dim: int = 256,
                   sent_dim: int = 256, n_clusters: int = 20, seed: int = 0,
                   index_params: IndexParams | None = None,
                   max_docs: int | None = None) -> Snapshot:
    """Run the full pipeline: ingest, embed, cluster, index, persist."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "indices").mkdir(exist_ok=True)

    if isinstance(source, Corpus):
        corpus = source
    else:
        corpus = ingest(source, max_docs=max_docs)
    save_corpus(corpus, out / "corpus.jsonl")

    doc_provider = make_provider(provider_spec, DOCUMENT_KIND, doc_dim)
    sent_provider = make_provider(provider_spec, SENTENCE_KIND, sent_dim)

    paper_ids = [d.paper_id for d in corpus.documents]
    doc_texts = [document_text(d) for d in corpus.documents]
    doc_cache = build_vector_cache(paper_ids, doc_texts, doc_provider,
                                   out / "doc_vectors.bin")

    sent_keys, sent_texts = [], []
    for doc in corpus.documents:
        for sent in doc.sentences:
            sent_keys.append(sentence_key(doc.paper_id, sent.position))
            sent_texts.append(sent.text)
    sent_cache = build_vector_cache(sent_keys, sent_texts, sent_provider,
                                    out / "sent_vectors.bin")

    descriptor_texts = [f"{d.title} {d.abstract}" for d in corpus.documents]
    clusters = fit_global_clusters(doc_cache.vectors.astype(np.float64),
                                   paper_ids, descriptor_texts,
                                   n_clusters=n_clusters, seed=seed)
    save_clusters(clusters, out / "clusters.json")

    params = index_params or IndexParams(seed=seed)
    indices: dict[int, ClusterIndex] = {}
    for cluster_id, entries in _cluster_entries(corpus, clusters, sent_cache):
        index = ClusterIndex.build(cluster_id, entries, params)
        index.save(out / "indices" / f"cluster_{cluster_id:03d}.idx")
        indices[cluster_id] = index

    meta = {
        "format": "domainlens-snapshot",
        "version": MANIFEST_VERSION,
        "seed": seed,
        "n_clusters": n_clusters,
        "provider_spec": provider_spec,
        "doc_provider": doc_provider.name,
        "sent_provider": sent_provider.name,
        "doc_dim": doc_provider.dimension,
        "sent_dim": sent_provider.dimension,
        "document_count": corpus.stats.document_count,
        "sentence_count": corpus.stats.sentence_count,
        "index_params": {
            "max_degree": params.max_degree,
            "construction_beam": params.construction_beam,
            "query_beam": params.query_beam,
            "exact_threshold": params.exact_threshold,
            "seed": params.seed,
        },
    }
    (out / "manifest.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n",
                                       encoding="utf-8")
    return Snapshot(corpus=corpus, doc_cache=doc_cache, sent_cache=sent_cache,
                    clusters=clusters, indices=indices,
                    sentence_provider=sent_provider, meta=meta)


def save_clusters(clusters: GlobalClusterSet, path: str | Path) -> None:
    payload = {
        "format": "domainlens-clusters",
        "version": 1,
        "centroids": clusters.model.centroids.tolist(),
        "assignments": clusters.model.assignments.tolist(),
        "sizes": clusters.model.sizes.tolist(),
        "inertia": clusters.model.inertia,
        "seed": clusters.model.seed,
        "doc_ids": clusters.doc_ids,
        "descriptors": clusters.descriptors,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_clusters(path: str | Path) -> GlobalClusterSet:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "domainlens-clusters":
        raise ValueError(f"{path} is not a cluster model file")
    model = ClusterModel(
        centroids=np.array(payload["centroids"], dtype=np.float64),
        assignments=np.array(payload["assignments"], dtype=np.int64),
        inertia=float(payload["inertia"]),
        sizes=np.array(payload["sizes"], dtype=np.int64),
        seed=int(payload["seed"]),
    )
    return GlobalClusterSet(model=model, doc_ids=payload["doc_ids"],
                            descriptors=payload["descriptors"])


def load_snapshot(snapshot_dir: str | Path,
                  provider_spec: str | None = None) -> Snapshot:
    """Load a snapshot directory; the sentence provider is rebuilt from the
    manifest unless an explicit provider_spec overrides it."""
    root = Path(snapshot_dir)
    meta = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    if meta.get("format") != "domainlens-snapshot":
        raise ValueError(f"{snapshot_dir} is not a snapshot directory")

    corpus = load_corpus(root / "corpus.jsonl")
    doc_cache = VectorCache.load(root / "doc_vectors.bin")
    sent_cache = VectorCache.load(root / "sent_vectors.bin")
    clusters = load_clusters(root / "clusters.json")
    indices = {}
    for path in sorted((root / "indices").glob("cluster_*.idx")):
        index = ClusterIndex.load(path)
        indices[index.cluster_id] = index

    spec = provider_spec or meta["provider_spec"]
    sent_provider = make_provider(spec, SENTENCE_KIND, meta["sent_dim"])
    return Snapshot(corpus=corpus, doc_cache=doc_cache, sent_cache=sent_cache,
                    clusters=clusters, indices=indices,
                    sentence_provider=sent_provider, meta=meta)
