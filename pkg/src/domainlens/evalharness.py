"""Cluster-purity evaluation harness.

Protocol: keep only documents carrying exactly one of the class-defining
keywords, treat that keyword as the gold label, cluster several document
representations with K-means (k = number of classes), and report purity
averaged over seeded runs -- optionally repeating with the class keywords
stripped from titles and abstracts to test how much a representation leans
on literal term overlap.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

import numpy as np

from .clustering import KMeans, purity
from .corpus import Corpus, Document
from .embedding import FallbackEncoder, TfidfVectorizer, DOCUMENT_KIND

# Default sub-domain keyword classes for materials-science corpora.
BUILTIN_KEYWORDS = [
    "magnetic materials",
    "carbon materials",
    "ceramics",
    "optical properties",
    "electrochemistry",
    "nanomaterials",
    "alloys",
    "photocatalysis",
    "semiconductors",
    "solar cells",
    "fuel cells",
    "polymers",
    "composite materials",
    "biomaterials",
    "thermodynamics",
    "lithium-ion batteries",
    "thin films",
    "microstructure",
]

# Stands in when stripping leaves a text empty; counted in the report.
EMPTY_TEXT_TOKEN = "xxempty"

REPRESENTATIONS = ("random", "tfidf", "doc")

CONDITION_PRESENT = "present"
CONDITION_REMOVED = "removed"


@dataclass
class EvalConfig:
    keywords: list[str] = field(default_factory=lambda: list(BUILTIN_KEYWORDS))
    n_clusters: int = 18
    runs: int = 3
    representations: tuple[str, ...] = REPRESENTATIONS
    remove_keywords: bool = False
    base_seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        lowered = [k.strip().lower() for k in self.keywords]
        if len(set(lowered)) != len(lowered):
            raise ValueError("keywords must be distinct (case-insensitive)")
        reps = []
        for rep in self.representations:
            canonical = "doc" if rep == "embedding-doc" else rep
            if canonical not in REPRESENTATIONS:
                raise ValueError(f"unknown representation {rep!r}")
            reps.append(canonical)
        self.representations = tuple(reps)


@dataclass
class LabeledCorpus:
    documents: list[Document]
    labels: list[str]
    class_counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.documents)


def build_eval_corpus(corpus: Corpus, keywords: list[str]) -> LabeledCorpus:
    """Keep documents whose author keywords match exactly one class; the
    matched class becomes the gold label. Errors if any class ends up empty."""
    if not keywords:
        raise ValueError("keywords must be non-empty")
    canonical = {k.strip().lower(): k.strip() for k in keywords}
    if len(canonical) != len(keywords):
        raise ValueError("keywords must be distinct (case-insensitive)")

    documents, labels = [], []
    counts = {k: 0 for k in canonical.values()}
    for doc in corpus.documents:
        matched = {canonical[kw.strip().lower()]
                   for kw in doc.keywords if kw.strip().lower() in canonical}
        if len(matched) != 1:
            continue
        label = matched.pop()
        documents.append(doc)
        labels.append(label)
        counts[label] += 1

    empty = sorted(k for k, c in counts.items() if c == 0)
    if empty:
        raise ValueError(f"classes with no documents: {empty}")
    return LabeledCorpus(documents=documents, labels=labels, class_counts=counts)


def _keyword_pattern(keywords: list[str]) -> re.Pattern:
    parts = []
    for kw in sorted(keywords, key=len, reverse=True):
        tokens = kw.strip().split()
        if tokens:
            parts.append(r"\s+".join(re.escape(tok) for tok in tokens))
    if not parts:
        raise ValueError("keywords must contain at least one non-empty entry")
    return re.compile(r"(?<!\w)(?:" + "|".join(parts) + r")(?!\w)", re.IGNORECASE)


def strip_keywords(text: str, keywords: list[str]) -> str:
    """Remove each keyword as a token-boundary phrase match, case-insensitive,
    collapsing whitespace. Repeats to a fixpoint so removal cannot splice two
    halves of a keyword together (keeps the operation idempotent). An emptied
    text becomes EMPTY_TEXT_TOKEN."""
    pattern = _keyword_pattern(keywords)
    out = " ".join(text.split())
    prev = None
    while out != prev:
        prev = out
        out = " ".join(pattern.sub(" ", out).split())
    return out if out else EMPTY_TEXT_TOKEN


@dataclass
class EvalRow:
    representation: str
    condition: str
    purities: list[float]  # percent, one per run
    seeds: list[int]
    error: str | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.purities)) if self.purities else float("nan")


@dataclass
class EvalReport:
    rows: list[EvalRow]
    doc_count: int
    class_counts: dict[str, int]
    emptied_texts: int = 0

    def row(self, representation: str, condition: str) -> EvalRow:
        for r in self.rows:
            if r.representation == representation and r.condition == condition:
                return r
        raise KeyError((representation, condition))

    def to_text(self) -> str:
        conditions = sorted({r.condition for r in self.rows},
                            key=lambda c: c != CONDITION_PRESENT)
        header = ["representation"] + [f"keywords_{c}" for c in conditions]
        widths = [max(14, len(h)) for h in header]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for rep in dict.fromkeys(r.representation for r in self.rows):
            cells = [rep]
            for cond in conditions:
                try:
                    row = self.row(rep, cond)
                    cells.append("failed" if row.error else f"{row.mean:.2f}")
                except KeyError:
                    cells.append("-")
            lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["representation", "condition", "run", "seed", "purity_percent"])
        for row in self.rows:
            if row.error:
                writer.writerow([row.representation, row.condition, "error", "", row.error])
                continue
            for i, (seed, p) in enumerate(zip(row.seeds, row.purities)):
                writer.writerow([row.representation, row.condition, i, seed, f"{p:.2f}"])
            writer.writerow([row.representation, row.condition, "mean", "", f"{row.mean:.2f}"])
        return buf.getvalue()


def _condition_texts(labeled: LabeledCorpus, keywords: list[str],
                     condition: str) -> tuple[list[str], list[str], int]:
    """(tfidf texts, doc-encoder texts, emptied count) for one condition."""
    tfidf_texts, doc_texts, emptied = [], [], 0
    for doc in labeled.documents:
        title, abstract = doc.title, doc.abstract
        if condition == CONDITION_REMOVED:
            title = strip_keywords(title, keywords)
            abstract = strip_keywords(abstract, keywords)
            emptied += (title == EMPTY_TEXT_TOKEN) + (abstract == EMPTY_TEXT_TOKEN)
        tfidf_texts.append(f"{title} {abstract}")
        doc_texts.append(f"{title} [SEP] {abstract}")
    return tfidf_texts, doc_texts, emptied


def run_eval(cfg: EvalConfig, labeled: LabeledCorpus, provider=None) -> EvalReport:
    """Purity per representation and keyword condition, averaged over runs.

    Seeds are base_seed + run index and are recorded per run for replay. The
    'random' representation assigns clusters uniformly at random without
    K-means. A provider failure skips that representation, marked in the
    report, and the others still run.
    """
    n_classes = len(set(labeled.labels))
    if cfg.n_clusters != n_classes:
        raise ValueError(
            f"n_clusters={cfg.n_clusters} must equal the {n_classes} classes present")

    conditions = [CONDITION_PRESENT]
    if cfg.remove_keywords:
        conditions.append(CONDITION_REMOVED)

    rows: list[EvalRow] = []
    total_emptied = 0
    seeds = [cfg.base_seed + run for run in range(cfg.runs)]
    labels = labeled.labels
    n = len(labeled)

    for condition in conditions:
        tfidf_texts, doc_texts, emptied = _condition_texts(
            labeled, cfg.keywords, condition)
        total_emptied += emptied
        for rep in cfg.representations:
            try:
                if rep == "random":
                    purities = []
                    for seed in seeds:
                        rng = np.random.Generator(np.random.PCG64(seed))
                        assign = rng.integers(0, cfg.n_clusters, size=n)
                        purities.append(purity(assign, labels) * 100.0)
                    rows.append(EvalRow(rep, condition, purities, list(seeds)))
                    continue
                if rep == "tfidf":
                    X = TfidfVectorizer().fit(tfidf_texts).transform(tfidf_texts)
                    X = np.asarray(X.todense())
                else:  # doc
                    enc = provider or FallbackEncoder(dimension=256, kind=DOCUMENT_KIND)
                    if enc.kind != DOCUMENT_KIND:
                        raise ValueError("eval provider must be document-level")
                    X = enc.encode(doc_texts).astype(np.float64)
                purities = []
                for seed in seeds:
                    km = KMeans(n_clusters=cfg.n_clusters, seed=seed).fit(X)
                    purities.append(purity(km.labels_, labels) * 100.0)
                rows.append(EvalRow(rep, condition, purities, list(seeds)))
            except Exception as exc:  # keep other representations alive
                rows.append(EvalRow(rep, condition, [], [], error=str(exc)))

    return EvalReport(rows=rows, doc_count=n, class_counts=labeled.class_counts,
                      emptied_texts=total_emptied)
