"""Shared fixtures: synthetic corpora and a prebuilt snapshot."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from domainlens.ann import IndexParams
from domainlens.corpus import ingest
from domainlens.snapshot import build_snapshot

_LETTERS = np.array(list("abcdefghijklmnopqrstuvwxyz"))


def _word(rng: np.random.Generator) -> str:
    return "".join(rng.choice(_LETTERS, size=int(rng.integers(5, 8))))


def synthetic_records(n_docs: int, n_topics: int = 20, seed: int = 7,
                      with_keywords: bool = False) -> list[dict]:
    """Documents with per-topic vocabularies so embeddings carry real
    cluster structure; abstracts are plain period-separated sentences."""
    rng = np.random.Generator(np.random.PCG64(seed))
    shared = [_word(rng) for _ in range(60)]
    topics = [[_word(rng) for _ in range(30)] for _ in range(n_topics)]
    records = []
    for i in range(n_docs):
        t = i % n_topics
        sentences = []
        for _ in range(3 + i % 4):
            length = int(rng.integers(6, 11))
            words = [
                topics[t][int(rng.integers(30))]
                if rng.random() < 0.8 else shared[int(rng.integers(60))]
                for _ in range(length)
            ]
            sentences.append((" ".join(words)).capitalize() + ".")
        title = " ".join(
            topics[t][int(rng.integers(30))] for _ in range(3)).capitalize()
        records.append({
            "paper_id": f"P{i:05d}",
            "title": title,
            "abstract": " ".join(sentences),
            "keywords": [f"topic{t:02d}"] if with_keywords else [],
        })
    return records


def write_records(records: list[dict], path: Path) -> Path:
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n",
                    encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_corpus_path(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("smallcorpus")
    return write_records(synthetic_records(240, n_topics=8, seed=11),
                         root / "records.jsonl")


@pytest.fixture(scope="session")
def small_corpus(small_corpus_path):
    return ingest(small_corpus_path)


@pytest.fixture(scope="session")
def small_snapshot(small_corpus_path, tmp_path_factory):
    """240 docs, 8 clusters, 48-dim fallback vectors; exact index path."""
    out = tmp_path_factory.mktemp("smallsnap")
    return build_snapshot(small_corpus_path, out, provider_spec="fallback",
                          doc_dim=48, sent_dim=48, n_clusters=8, seed=3,
                          index_params=IndexParams(seed=3))
