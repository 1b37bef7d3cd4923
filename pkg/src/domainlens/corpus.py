"""Corpus ingestion: record parsing, sentence splitting, persistence.

Input is a line-delimited file of JSON records with fields ``paper_id``,
``title``, ``abstract`` and optional ``keywords``. Records that violate the
document invariants are skipped and counted, never fatal; an empty result is.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

CORPUS_FORMAT_VERSION = 1

# Trailing-dot tokens that never end a sentence. Matched case-insensitively
# against the text immediately before a candidate break.
ABBREVIATIONS = (
    "fig.",
    "figs.",
    "eq.",
    "eqs.",
    "sec.",
    "ref.",
    "refs.",
    "et al.",
    "e.g.",
    "i.e.",
    "vs.",
    "cf.",
    "ca.",
    "approx.",
    "dr.",
    "mr.",
    "ms.",
    "prof.",
    "no.",
    "nos.",
)

MIN_SENTENCE_CHARS = 3

# Break after ., ! or ? when followed by whitespace and an uppercase letter
# or digit.
_BREAK_RE = re.compile(r"[.!?](?=\s+[A-Z0-9])")
_ALPHA_RE = re.compile(r"[A-Za-z]")


class CorpusError(Exception):
    """Fatal ingestion problem (unreadable input, empty corpus)."""


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    position: int
    text: str


@dataclass
class Document:
    paper_id: str
    title: str
    abstract: str
    sentences: list[Sentence]
    keywords: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class CorpusStats:
    document_count: int
    sentence_count: int


@dataclass
class Corpus:
    documents: list[Document]
    source_path: str = ""
    skipped: int = 0

    @property
    def stats(self) -> CorpusStats:
        return CorpusStats(
            document_count=len(self.documents),
            sentence_count=sum(len(d.sentences) for d in self.documents),
        )

    def __iter__(self):
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)


def _is_abbreviation(prefix: str) -> bool:
    lowered = prefix.lower()
    for abbr in ABBREVIATIONS:
        if lowered.endswith(abbr):
            head = lowered[: -len(abbr)]
            # Word boundary: "No. 5" is an abbreviation, "piano." is not.
            if not head or not head[-1].isalnum():
                return True
    return False


def split_sentences(abstract: str) -> list[str]:
    """Split an abstract into sentence strings.

    Breaks after sentence-final punctuation followed by whitespace and an
    uppercase letter or digit; a fixed abbreviation list suppresses breaks.
    Fragments shorter than ``MIN_SENTENCE_CHARS`` after trimming, or with no
    alphabetic character, are merged into the preceding sentence (or the
    following one when there is no preceding). Deterministic and idempotent.
    """
    if abstract is None or not abstract.strip():
        raise ValueError("abstract is empty")
    if not _ALPHA_RE.search(abstract):
        raise ValueError("abstract has no alphabetic content")

    text = abstract.strip()
    spans: list[str] = []
    start = 0
    for m in _BREAK_RE.finditer(text):
        end = m.end()  # position just past the punctuation mark
        if _is_abbreviation(text[start:end]):
            continue
        spans.append(text[start:end].strip())
        start = end
    tail = text[start:].strip()
    if tail:
        spans.append(tail)

    # Merge undersized or letterless fragments so no text is dropped.
    merged: list[str] = []
    for span in spans:
        if len(span) < MIN_SENTENCE_CHARS or not _ALPHA_RE.search(span):
            if merged:
                merged[-1] = merged[-1] + " " + span
            else:
                merged.append(span)  # merged forward by the pass below
        else:
            if merged and (
                len(merged[-1]) < MIN_SENTENCE_CHARS or not _ALPHA_RE.search(merged[-1])
            ):
                merged[-1] = merged[-1] + " " + span
            else:
                merged.append(span)

    if merged and (len(merged[-1]) < MIN_SENTENCE_CHARS or not _ALPHA_RE.search(merged[-1])):
        # Whole text collapsed into one invalid fragment; callers skip the doc.
        raise ValueError("abstract yields no valid sentence")
    return merged


def _build_document(record: dict) -> Document:
    paper_id = record.get("paper_id")
    title = record.get("title")
    abstract = record.get("abstract")
    keywords = record.get("keywords") or []
    if not isinstance(paper_id, str) or not paper_id.strip():
        raise ValueError("missing or empty paper_id")
    if not isinstance(title, str) or not title.strip():
        raise ValueError("missing or empty title")
    if not isinstance(abstract, str) or not abstract.strip():
        raise ValueError("missing or empty abstract")
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise ValueError("keywords must be a list of strings")

    texts = split_sentences(abstract)
    sentences = [Sentence(doc_id=paper_id, position=i, text=t) for i, t in enumerate(texts)]
    return Document(
        paper_id=paper_id,
        title=title.strip(),
        abstract=abstract.strip(),
        sentences=sentences,
        keywords=[k.strip() for k in keywords if k.strip()],
    )


def ingest(path: str | Path, max_docs: int | None = None) -> Corpus:
    """Read a line-delimited record file into a Corpus.

    Invalid records and duplicate paper_ids are skipped and counted; the
    first occurrence of a paper_id wins. Raises CorpusError when the file is
    unreadable or no valid document remains.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc

    documents: list[Document] = []
    seen: set[str] = set()
    skipped = 0
    for line in raw.splitlines():
        if not line.strip():
            continue
        if max_docs is not None and len(documents) >= max_docs:
            break
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            doc = _build_document(record)
        except (ValueError, KeyError):
            skipped += 1
            continue
        if doc.paper_id in seen:
            skipped += 1
            continue
        seen.add(doc.paper_id)
        documents.append(doc)

    if not documents:
        raise CorpusError(f"no valid documents in {path}")
    return Corpus(documents=documents, source_path=str(path), skipped=skipped)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Persist as line-delimited JSON with a format-version header line."""
    path = Path(path)
    header = {
        "format": "domainlens-corpus",
        "version": CORPUS_FORMAT_VERSION,
        "document_count": corpus.stats.document_count,
        "sentence_count": corpus.stats.sentence_count,
        "source_path": corpus.source_path,
        "skipped": corpus.skipped,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for doc in corpus.documents:
        lines.append(
            json.dumps(
                {
                    "paper_id": doc.paper_id,
                    "title": doc.title,
                    "abstract": doc.abstract,
                    "keywords": doc.keywords,
                    "sentences": [s.text for s in doc.sentences],
                },
                sort_keys=True,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    """Load a corpus persisted by save_corpus, preserving sentence boundaries."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise CorpusError(f"{path} is empty")

    header = json.loads(lines[0])
    if header.get("format") != "domainlens-corpus":
        raise CorpusError(f"{path} is not a corpus file")
    if header.get("version") != CORPUS_FORMAT_VERSION:
        raise CorpusError(f"unsupported corpus version {header.get('version')}")

    documents = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line)
        sentences = [
            Sentence(doc_id=rec["paper_id"], position=i, text=t)
            for i, t in enumerate(rec["sentences"])
        ]
        documents.append(
            Document(
                paper_id=rec["paper_id"],
                title=rec["title"],
                abstract=rec["abstract"],
                sentences=sentences,
                keywords=list(rec.get("keywords", [])),
            )
        )
    if not documents:
        raise CorpusError(f"no documents in {path}")
    corpus = Corpus(
        documents=documents,
        source_path=header.get("source_path", ""),
        skipped=int(header.get("skipped", 0)),
    )
    return corpus
