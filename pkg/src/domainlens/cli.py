"""Command-line interface: build-pipeline steps, evaluation, serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .ann import ClusterIndex, IndexParams
from .clustering import fit_global_clusters
from .corpus import ingest as ingest_corpus
from .corpus import load_corpus, save_corpus
from .embedding import (
    DOCUMENT_KIND,
    SENTENCE_KIND,
    build_vector_cache,
    document_text,
    make_provider,
    sentence_key,
    VectorCache,
)
from .evalharness import BUILTIN_KEYWORDS, EvalConfig, build_eval_corpus, run_eval
from .snapshot import build_snapshot, load_snapshot, save_clusters
from .snapshot import load_clusters as _load_clusters


@click.group()
def main():
    """Sentence-aspect search over scholarly abstracts."""


@main.group()
def corpus():
    """Corpus operations."""


@corpus.command("ingest")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--max-docs", type=int, default=None)
def corpus_ingest(input_path, out_path, max_docs):
    """Read line-delimited records and persist a validated corpus."""
    c = ingest_corpus(input_path, max_docs=max_docs)
    save_corpus(c, out_path)
    click.echo(f"ingested {c.stats.document_count} documents "
               f"({c.stats.sentence_count} sentences, {c.skipped} skipped) "
               f"-> {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--provider", default="fallback", show_default=True,
              help="'fallback' or 'http:<url>'")
@click.option("--kind", type=click.Choice(["doc", "sent"]), required=True)
@click.option("--dim", type=int, default=256, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def embed(corpus_path, provider, kind, dim, out_path):
    """Encode documents or sentences into a vector cache."""
    c = load_corpus(corpus_path)
    provider_kind = DOCUMENT_KIND if kind == "doc" else SENTENCE_KIND
    enc = make_provider(provider, provider_kind, dim)
    if kind == "doc":
        keys = [d.paper_id for d in c.documents]
        texts = [document_text(d) for d in c.documents]
    else:
        keys, texts = [], []
        for d in c.documents:
            for s in d.sentences:
                keys.append(sentence_key(d.paper_id, s.position))
                texts.append(s.text)
    cache = build_vector_cache(keys, texts, enc, out_path)
    click.echo(f"encoded {len(cache)} {kind} vectors (dim {cache.dimension}) -> {out_path}")


@main.command()
@click.option("--vectors", "vectors_path", required=True, type=click.Path(exists=True))
@click.option("--k", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="Optional corpus for descriptor extraction.")
def cluster(vectors_path, k, seed, out_path, corpus_path):
    """K-means over a document vector cache."""
    cache = VectorCache.load(vectors_path)
    if corpus_path:
        c = load_corpus(corpus_path)
        by_id = {d.paper_id: d for d in c.documents}
        texts = [f"{by_id[pid].title} {by_id[pid].abstract}" for pid in cache.keys]
    else:
        texts = ["" for _ in cache.keys]
    clusters = fit_global_clusters(cache.vectors.astype(np.float64), cache.keys,
                                   texts, n_clusters=k, seed=seed)
    if not corpus_path:
        clusters.descriptors = [[] for _ in range(k)]
    save_clusters(clusters, out_path)
    click.echo(f"clustered {len(cache)} docs into {k} clusters "
               f"(inertia {clusters.model.inertia:.4f}) -> {out_path}")


@main.group()
def index():
    """Nearest-neighbor index operations."""


@index.command("build")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--sent-cache", "sent_cache_path", required=True, type=click.Path(exists=True))
@click.option("--clusters", "clusters_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
def index_build(corpus_path, sent_cache_path, clusters_path, out_dir, seed):
    """Build one index per global cluster."""
    c = load_corpus(corpus_path)
    sent_cache = VectorCache.load(sent_cache_path)
    clusters = _load_clusters(clusters_path)
    by_id = {d.paper_id: d for d in c.documents}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = IndexParams(seed=seed)
    total = 0
    for cluster_id in range(clusters.n_clusters):
        entries = []
        for pid in clusters.doc_ids[cluster_id]:
            for s in by_id[pid].sentences:
                entries.append(((pid, s.position),
                                sent_cache.get(sentence_key(pid, s.position))))
        idx = ClusterIndex.build(cluster_id, entries, params)
        idx.save(out / f"cluster_{cluster_id:03d}.idx")
        total += len(idx)
    click.echo(f"built {clusters.n_clusters} indices over {total} sentences -> {out_dir}")


@main.group("eval")
def eval_group():
    """Evaluation harness."""


@eval_group.command("purity")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--keywords", default="builtin18", show_default=True,
              help="Keyword file (one per line) or 'builtin18'.")
@click.option("--k", type=int, default=18, show_default=True)
@click.option("--runs", type=int, default=3, show_default=True)
@click.option("--strip-keywords", is_flag=True, default=False,
              help="Also evaluate with class keywords removed from texts.")
@click.option("--reps", default="random,tfidf,doc", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--provider", default="fallback", show_default=True)
@click.option("--dim", type=int, default=256, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write machine-readable CSV here.")
def eval_purity(corpus_path, keywords, k, runs, strip_keywords, reps, seed,
                provider, dim, out_path):
    """Cluster-purity comparison across representations."""
    c = load_corpus(corpus_path)
    if keywords == "builtin18":
        keyword_list = list(BUILTIN_KEYWORDS)
    else:
        keyword_list = [line.strip() for line in
                        Path(keywords).read_text(encoding="utf-8").splitlines()
                        if line.strip()]
    cfg = EvalConfig(keywords=keyword_list, n_clusters=k, runs=runs,
                     representations=tuple(reps.split(",")),
                     remove_keywords=strip_keywords, base_seed=seed)
    labeled = build_eval_corpus(c, keyword_list)
    click.echo(f"eval corpus: {len(labeled)} documents across "
               f"{len(labeled.class_counts)} classes")
    enc = make_provider(provider, DOCUMENT_KIND, dim)
    report = run_eval(cfg, labeled, provider=enc)
    click.echo(report.to_text())
    if report.emptied_texts:
        click.echo(f"note: {report.emptied_texts} texts were emptied by keyword removal")
    if out_path:
        Path(out_path).write_text(report.to_csv(), encoding="utf-8")
        click.echo(f"csv -> {out_path}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--provider", default="fallback", show_default=True)
@click.option("--doc-dim", type=int, default=256, show_default=True)
@click.option("--sent-dim", type=int, default=256, show_default=True)
@click.option("--k", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-docs", type=int, default=None)
def build(input_path, out_dir, provider, doc_dim, sent_dim, k, seed, max_docs):
    """Full pipeline: ingest, embed, cluster, index, into one snapshot dir."""
    snap = build_snapshot(input_path, out_dir, provider_spec=provider,
                          doc_dim=doc_dim, sent_dim=sent_dim, n_clusters=k,
                          seed=seed, max_docs=max_docs)
    click.echo(f"snapshot: {snap.meta['document_count']} docs, "
               f"{snap.meta['sentence_count']} sentences, {k} clusters -> {out_dir}")


@main.command()
@click.option("--snapshot-dir", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--provider", default=None,
              help="Override sentence provider: 'fallback' or 'http:<url>'.")
@click.option("--feedback-log", default=None, type=click.Path(),
              envvar="DOMAINLENS_FEEDBACK_LOG",
              help="Feedback log path (or env DOMAINLENS_FEEDBACK_LOG).")
@click.option("--static-dir", default=None, type=click.Path(exists=True),
              help="Serve a built frontend from this directory at /.")
def serve(snapshot_dir, port, host, provider, feedback_log, static_dir):
    """Serve the search API over a snapshot."""
    import uvicorn
    from .service import create_app

    snap = load_snapshot(snapshot_dir, provider_spec=provider)
    log_path = feedback_log or str(Path(snapshot_dir) / "feedback.jsonl")
    app = create_app(snap, feedback_log=log_path)
    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    click.echo(f"serving snapshot {snapshot_dir} on {host}:{port} "
               f"(feedback -> {log_path})")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
