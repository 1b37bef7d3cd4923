"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from domainlens.ann import ClusterIndex, IndexParams, exact_query
from domainlens.clustering import KMeans, purity
from domainlens.evalharness import (
    CONDITION_PRESENT,
    CONDITION_REMOVED,
    EvalConfig,
    build_eval_corpus,
    run_eval,
)
from domainlens.search import SearchConfig, faceted_search, make_query, zoom_in
from domainlens.service import create_app
from domainlens.snapshot import build_snapshot

from conftest import synthetic_records, write_records
from test_evalharness import PLANTED_CLASSES, planted_eval_corpus


def _report(name: str, elapsed: float, budget: float) -> None:
    print(f"\nACCEPTANCE PASS: {name} ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{name} exceeded runtime budget"


def test_c1_purity_metric_exactness():
    start = time.monotonic()
    assert purity([0, 1, 0, 1], ["A", "A", "B", "B"]) == 0.5
    assert purity([0, 0, 1, 1], ["A", "A", "B", "B"]) == 1.0
    assert purity([0, 0, 0, 0], ["A", "A", "A", "B"]) == 0.75
    assert purity(list(range(5)), ["a", "b", "a", "c", "b"]) == 1.0

    rng = np.random.Generator(np.random.PCG64(12))
    assign = rng.integers(0, 7, size=500)
    labels = rng.integers(0, 5, size=500)
    base = purity(assign, labels)
    for _ in range(100):
        pa = rng.permutation(7)
        pl = rng.permutation(5)
        assert purity(pa[assign], pl[labels]) == base
    _report("purity metric exactness + permutation invariance",
            time.monotonic() - start, 1.0)


def test_c2_random_baseline_sanity():
    start = time.monotonic()
    n, n_classes = 10_000, 18
    labels = np.arange(n) % n_classes
    rng = np.random.Generator(np.random.PCG64(99))
    values = [purity(rng.integers(0, n_classes, size=n), labels)
              for _ in range(50)]
    mean = float(np.mean(values))
    low, high = 1.0 / 18 - 0.03, 1.0 / 18 + 0.05
    assert low <= mean <= high, f"random purity {mean:.4f} outside [{low:.4f}, {high:.4f}]"
    _report(f"random-baseline sanity (mean {mean:.4f})",
            time.monotonic() - start, 10.0)


def test_c3_keyword_ablation_directionality():
    start = time.monotonic()
    corpus = planted_eval_corpus(n_per_class=150)
    labeled = build_eval_corpus(corpus, PLANTED_CLASSES)
    cfg = EvalConfig(keywords=PLANTED_CLASSES, n_clusters=6, runs=3,
                     representations=("random", "tfidf"), remove_keywords=True)
    report = run_eval(cfg, labeled)
    present = report.row("tfidf", CONDITION_PRESENT).mean
    removed = report.row("tfidf", CONDITION_REMOVED).mean
    random_mean = report.row("random", CONDITION_PRESENT).mean
    assert present >= 95.0, f"tfidf purity with keywords {present:.2f} < 95"
    assert abs(removed - random_mean) <= 10.0, \
        f"tfidf after removal {removed:.2f} not within 10 of random {random_mean:.2f}"
    _report(
        f"keyword-ablation directionality (tfidf {present:.2f} -> {removed:.2f}, "
        f"random {random_mean:.2f})",
        time.monotonic() - start, 120.0)


def test_c4_ann_fidelity():
    start = time.monotonic()
    rng = np.random.Generator(np.random.PCG64(2024))
    n, d = 10_000, 64
    X = rng.standard_normal((n, d))
    X = (X / np.linalg.norm(X, axis=1, keepdims=True)).astype(np.float32)
    entries = [((f"v{i:06d}", 0), X[i]) for i in range(n)]
    index = ClusterIndex.build(0, entries, IndexParams())
    assert not index.exact

    queries = rng.standard_normal((100, d))
    queries = (queries / np.linalg.norm(queries, axis=1, keepdims=True)).astype(np.float32)
    found = 0
    for q in queries:
        approx = {h.ref for h in index.query(q, 10)}
        oracle_rows = np.argsort(-(X @ q), kind="stable")[:10]
        oracle = {(f"v{i:06d}", 0) for i in oracle_rows.tolist()}
        found += len(approx & oracle)
    recall = found / 1000.0
    assert recall >= 0.95, f"recall@10 {recall:.4f} < 0.95"

    # Below the exact-fallback threshold: exact agreement with the oracle.
    small_entries = entries[:500]
    small = ClusterIndex.build(1, small_entries, IndexParams())
    assert small.exact
    for q in queries[:100]:
        assert [h.ref for h in small.query(q, 10)] == \
            [h.ref for h in exact_query(small_entries, q, 10, 1)]
    _report(f"ann fidelity (recall@10 {recall:.3f})",
            time.monotonic() - start, 120.0)


def test_c5_kmeans_invariants():
    start = time.monotonic()
    for seed in range(20):
        rng = np.random.Generator(np.random.PCG64(seed))
        X = rng.standard_normal((150, 10))
        km = KMeans(n_clusters=5, seed=seed).fit(X)
        hist = km.inertia_history_
        for a, b in zip(hist, hist[1:]):
            assert b <= a * (1 + 1e-9) + 1e-12, "inertia increased"

    rng = np.random.Generator(np.random.PCG64(7))
    pts = rng.standard_normal((8, 6))
    km = KMeans(n_clusters=8, seed=0).fit(pts)
    assert km.inertia_ == pytest.approx(0.0, abs=1e-12)

    offsets = rng.standard_normal((50, 4))
    offsets /= np.maximum(np.linalg.norm(offsets, axis=1, keepdims=True), 1.0)
    blob_a = offsets * 0.9
    blob_b = offsets * 0.9 + np.array([10.0, 0.0, 0.0, 0.0])
    X = np.vstack([blob_a, blob_b])
    labels = np.array([0] * 50 + [1] * 50)
    km = KMeans(n_clusters=2, seed=1).fit(X)
    assert purity(km.labels_, labels) == 1.0
    _report("kmeans invariants (monotone inertia, zero-inertia, blob recovery)",
            time.monotonic() - start, 60.0)


def test_c6_end_to_end_faceted_search(tmp_path):
    start = time.monotonic()
    records = synthetic_records(2000, n_topics=20, seed=77)
    path = write_records(records, tmp_path / "records.jsonl")
    snap = build_snapshot(path, tmp_path / "snap", provider_spec="fallback",
                          doc_dim=64, sent_dim=64, n_clusters=20, seed=5)
    assert snap.clusters.n_clusters == 20
    assert all(len(idx) > 0 for idx in snap.indices.values())

    # Query whose selected sentence is byte-identical to another paper's:
    # that paper must rank first in its home cluster with score 1.
    target = snap.corpus.documents[321]
    stolen = target.sentences[2].text
    abstract = f"Opening sentence unique to this query. {stolen} Closing words here."
    query = make_query(abstract, 1, snap.sentence_provider)
    assert query.sentence_text == stolen

    cfg = SearchConfig(per_cluster_hits=10, zoom_total=100, local_cluster_count=5)
    groups = faceted_search(query, cfg, snap)
    assert len(groups) == 20, "one group per global cluster"
    seen_docs: set[str] = set()
    for g in groups:
        assert len(g.hits) <= 10
        docs = {h.doc_id for h in g.hits}
        assert len(docs) == len(g.hits), "dedup violated"
        assert not (docs & seen_docs), "cross-group disjointness violated"
        seen_docs |= docs
    home_cluster = next(g for g in groups
                        if any(h.doc_id == target.paper_id for h in g.hits))
    assert home_cluster.hits[0].doc_id == target.paper_id
    assert home_cluster.hits[0].score == pytest.approx(1.0, abs=1e-6)

    # Self-exclusion: querying with an indexed abstract hides that paper.
    own = make_query(target.abstract, 0, snap.sentence_provider)
    for g in faceted_search(own, cfg, snap):
        assert all(h.doc_id != target.paper_id for h in g.hits)

    # Zoom over two clusters at l=100 > t.
    selected = sorted(snap.indices)[:2]
    zoomed = zoom_in(query, selected, cfg, snap, seed=snap.seed)
    assert 0 < len(zoomed.hits) <= 100
    assert len(zoomed.local_groups) <= 5
    assert all(h.cluster_id in selected for h in zoomed.hits)

    with pytest.raises(ValueError):
        SearchConfig(per_cluster_hits=10, zoom_total=10)
    _report("end-to-end faceted search contract",
            time.monotonic() - start, 60.0)


def test_c7_determinism_and_replay(tmp_path):
    start = time.monotonic()
    records = synthetic_records(300, n_topics=6, seed=55)
    path = write_records(records, tmp_path / "records.jsonl")

    def digest(root: Path) -> dict:
        return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(root.rglob("*")) if p.is_file()}

    build_snapshot(path, tmp_path / "a", doc_dim=48, sent_dim=48,
                   n_clusters=6, seed=9)
    snap = build_snapshot(path, tmp_path / "b", doc_dim=48, sent_dim=48,
                          n_clusters=6, seed=9)
    assert digest(tmp_path / "a") == digest(tmp_path / "b"), \
        "rebuild with same seed not byte-identical"

    app = create_app(snap, feedback_log=tmp_path / "feedback.jsonl")
    body = {"abstract": "Replay query sentence one. Replay sentence two.",
            "sentence_index": 0}
    with TestClient(app) as client:
        r1 = client.post("/api/search", json=body)
        r2 = client.post("/api/search", json=body)
        assert r1.status_code == 200
        assert r1.content == r2.content, "replayed search bodies differ"
        qid = r1.json()["query_id"]
        zoom_body = {"query_id": qid, "selected_clusters": [0, 1]}
        z1 = client.post("/api/zoom", json=zoom_body)
        z2 = client.post("/api/zoom", json=zoom_body)
        assert z1.status_code == 200
        assert z1.content == z2.content, "replayed zoom bodies differ"
        c1 = client.get("/api/clusters")
        c2 = client.get("/api/clusters")
        assert c1.content == c2.content
    _report("determinism and replay", time.monotonic() - start, 120.0)
