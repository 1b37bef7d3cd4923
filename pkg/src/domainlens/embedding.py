"""Vector providers and the TF-IDF vectorizer.

Two encoder families sit behind the same provider surface (name, dimension,
kind, encode): a deterministic offline fallback and an HTTP client for real
encoder services. All providers return unit-normalized float32 rows, so
cosine similarity is a plain dot product everywhere downstream.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from pathlib import Path

import numpy as np
import requests
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .corpus import Document, Sentence
from .validation import as_float_matrix, l2_normalize

logger = logging.getLogger(__name__)

# Fixed seed for the fallback encoder's sign projection; part of the
# reproducibility contract, do not change between builds.
FALLBACK_SEED = 1729

CACHE_FORMAT_VERSION = 1

DOCUMENT_KIND = "document"
SENTENCE_KIND = "sentence"

_KEY_SEP = "\x1f"


class ProviderUnavailableError(Exception):
    """Transport-level failure talking to an external encoder; retryable."""


class ProviderContractError(Exception):
    """External encoder violated its contract (wrong dimension, bad payload)."""


def document_text(doc: Document) -> str:
    """Canonical document encoding input: title, separator token, abstract."""
    return f"{doc.title} [SEP] {doc.abstract}"


def sentence_key(doc_id: str, position: int) -> str:
    return f"{doc_id}{_KEY_SEP}{position}"


def _content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Fallback encoder
# ---------------------------------------------------------------------------

_N_BUCKETS = 4096
_FNV_PRIME = np.uint64(1099511628211)
_MIX = np.uint64(0x9E3779B97F4A7C15)

_sign_matrix_cache: dict[tuple[int, int], np.ndarray] = {}


def _sign_matrix(seed: int, dimension: int) -> np.ndarray:
    key = (seed, dimension)
    if key not in _sign_matrix_cache:
        rng = np.random.Generator(np.random.PCG64(seed))
        signs = rng.integers(0, 2, size=(_N_BUCKETS, dimension))
        _sign_matrix_cache[key] = (signs * 2 - 1).astype(np.float32)
    return _sign_matrix_cache[key]


def _ngram_bucket_counts(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Hash character n-grams (n=3..5) into bucket ids with counts."""
    data = np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.uint64)
    pieces = []
    for n in (3, 4, 5):
        if len(data) < n:
            continue
        h = np.full(len(data) - n + 1, np.uint64(n), dtype=np.uint64)
        for j in range(n):
            h = h * _FNV_PRIME + data[j : len(data) - n + 1 + j]
        pieces.append(h)
    if not pieces:
        # Degenerate very-short text: hash it whole.
        h = np.full(1, np.uint64(1), dtype=np.uint64)
        for b in data:
            h = h * _FNV_PRIME + b
        pieces.append(h)
    hashes = np.concatenate(pieces)
    hashes = (hashes ^ (hashes >> np.uint64(33))) * _MIX
    buckets = (hashes >> np.uint64(40)) % np.uint64(_N_BUCKETS)
    counts = np.bincount(buckets.astype(np.int64), minlength=_N_BUCKETS)
    nz = np.nonzero(counts)[0]
    return nz, counts[nz]


def fallback_encode(text: str, dimension: int, seed: int = FALLBACK_SEED) -> np.ndarray:
    """Deterministic offline embedding of a single text.

    Character n-gram (3..5) bag, hashed into fixed buckets, projected by a
    seeded random sign matrix, then L2-normalized. A pure function of
    (text, dimension, seed): byte-identical across runs and platforms.
    """
    if dimension < 16:
        raise ValueError("dimension must be >= 16")
    if not text or not text.strip():
        raise ValueError("text is empty")
    normalized = " ".join(text.lower().split())
    buckets, counts = _ngram_bucket_counts(normalized)
    signs = _sign_matrix(seed, dimension)
    vec = counts.astype(np.float32) @ signs[buckets]
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # All-colliding pathological input; emit a fixed unit vector.
        vec = np.zeros(dimension, dtype=np.float32)
        vec[0] = 1.0
        return vec
    return (vec / norm).astype(np.float32)


class FallbackEncoder:
    """Offline provider wrapping fallback_encode; safe for concurrent use."""

    def __init__(self, dimension: int = 256, kind: str = SENTENCE_KIND,
                 seed: int = FALLBACK_SEED):
        if dimension < 16:
            raise ValueError("dimension must be >= 16")
        if kind not in (DOCUMENT_KIND, SENTENCE_KIND):
            raise ValueError(f"unknown provider kind {kind!r}")
        self.dimension = dimension
        self.kind = kind
        self.seed = seed
        self.name = f"fallback-{dimension}-{seed}"

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension), dtype=np.float32)
        return np.stack([fallback_encode(t, self.dimension, self.seed) for t in texts])

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return self.encode(list(X))


class HttpEncoder:
    """Client for an external encoder service speaking the JSON protocol.

    Request: {"texts": [...], "kind": "document"|"sentence"}
    Response: {"vectors": [[...], ...], "dimension": int}

    Transport failures raise ProviderUnavailableError after bounded retries;
    a wrong dimension or malformed payload is a fatal ProviderContractError.
    Outputs are re-normalized so the cosine contract holds regardless of the
    remote model's conventions.
    """

    def __init__(self, url: str, kind: str, dimension: int | None = None,
                 timeout: float = 30.0, retries: int = 2, session=None):
        if kind not in (DOCUMENT_KIND, SENTENCE_KIND):
            raise ValueError(f"unknown provider kind {kind!r}")
        self.url = url
        self.kind = kind
        self.dimension = dimension
        self.timeout = timeout
        self.retries = retries
        self.name = f"http:{url}"
        self._session = session or requests.Session()

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            dim = self.dimension or 0
            return np.zeros((0, dim), dtype=np.float32)
        payload = {"texts": list(texts), "kind": self.kind}
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._session.post(self.url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = ProviderUnavailableError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProviderContractError(f"encoder returned {resp.status_code}")
            return self._parse(resp.json(), len(texts))
        raise ProviderUnavailableError(f"encoder unreachable at {self.url}: {last_error}")

    def _parse(self, body: dict, expected_rows: int) -> np.ndarray:
        try:
            vectors = np.asarray(body["vectors"], dtype=np.float32)
            dimension = int(body["dimension"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderContractError(f"malformed encoder response: {exc}") from exc
        if vectors.ndim != 2 or vectors.shape[0] != expected_rows:
            raise ProviderContractError(
                f"expected {expected_rows} vectors, got shape {vectors.shape}")
        if vectors.shape[1] != dimension:
            raise ProviderContractError("response dimension field disagrees with vectors")
        if self.dimension is None:
            self.dimension = dimension
        elif dimension != self.dimension:
            raise ProviderContractError(
                f"dimension mismatch: expected {self.dimension}, got {dimension}")
        if not np.all(np.isfinite(vectors)):
            raise ProviderContractError("encoder returned non-finite values")
        return l2_normalize(vectors.astype(np.float64)).astype(np.float32)

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return self.encode(list(X))


def check_provider_contract(provider, texts: list[str], atol: float = 1e-5) -> None:
    """Verify a provider is reproducible and unit-normalized on sample texts.

    External encoders must return the same vectors (within atol per
    component) across calls; anything else breaks the cache and the
    determinism guarantees downstream.
    """
    first = provider.encode(texts)
    second = provider.encode(texts)
    if first.shape != second.shape or first.shape != (len(texts), provider.dimension):
        raise ProviderContractError(f"unstable output shape {first.shape}")
    if not np.allclose(first, second, rtol=0, atol=atol):
        worst = float(np.max(np.abs(first - second)))
        raise ProviderContractError(
            f"provider not reproducible: max component drift {worst:.2e} > {atol:.0e}")
    norms = np.linalg.norm(first.astype(np.float64), axis=1)
    if not np.allclose(norms, 1.0, rtol=0, atol=1e-6):
        raise ProviderContractError("provider output is not unit-normalized")


def make_provider(spec: str, kind: str, dimension: int | None = None):
    """Build a provider from a CLI-style spec: 'fallback' or 'http:<url>'."""
    if spec == "fallback":
        return FallbackEncoder(dimension=dimension or 256, kind=kind)
    if spec.startswith("http:") or spec.startswith("https:"):
        url = spec if spec.startswith(("http://", "https://")) else spec[len("http:"):]
        return HttpEncoder(url=url, kind=kind, dimension=dimension)
    raise ValueError(f"unknown provider spec {spec!r}")


# ---------------------------------------------------------------------------
# Embedding operations
# ---------------------------------------------------------------------------

def embed_document(doc: Document, provider) -> np.ndarray:
    if provider.kind != DOCUMENT_KIND:
        raise ValueError("provider is not document-level")
    return provider.encode([document_text(doc)])[0]


def embed_sentence(sentence: Sentence, provider) -> np.ndarray:
    if provider.kind != SENTENCE_KIND:
        raise ValueError("provider is not sentence-level")
    if not sentence.text.strip():
        raise ValueError("sentence text is empty")
    return provider.encode([sentence.text])[0]


# ---------------------------------------------------------------------------
# TF-IDF
# ---------------------------------------------------------------------------

_TOKEN_SPLIT_RE = re.compile(r"[^0-9a-z]+")

STOP_WORDS = frozenset(ENGLISH_STOP_WORDS)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stopwords."""
    tokens = _TOKEN_SPLIT_RE.split(text.lower())
    return [t for t in tokens if len(t) >= 2 and t not in STOP_WORDS]


class TfidfVectorizer(BaseEstimator, TransformerMixin):
    """Unigram TF-IDF with smoothed idf and L2-normalized rows.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, tf = raw count. Tokens appearing
    in more than max_df of the documents are dropped from the vocabulary.
    Vocabulary order is sorted, so fits are deterministic.
    """

    def __init__(self, max_df: float = 1.0):
        self.max_df = max_df

    def fit(self, texts: list[str], y=None) -> "TfidfVectorizer":
        if not texts:
            raise ValueError("need at least one text")
        n_docs = len(texts)
        df: dict[str, int] = {}
        for text in texts:
            for token in set(tokenize(text)):
                df[token] = df.get(token, 0) + 1
        limit = self.max_df * n_docs
        vocab = sorted(t for t, c in df.items() if c <= limit)
        if not vocab:
            raise ValueError("empty vocabulary after filtering")
        self.vocabulary_ = {t: i for i, t in enumerate(vocab)}
        self.doc_count_ = n_docs
        dfs = np.array([df[t] for t in vocab], dtype=np.float64)
        self.idf_ = np.log((1.0 + n_docs) / (1.0 + dfs)) + 1.0
        return self

    def transform(self, texts: list[str]) -> sparse.csr_matrix:
        if not hasattr(self, "vocabulary_"):
            raise ValueError("vectorizer is not fitted")
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        empty_rows = 0
        for text in texts:
            counts: dict[int, int] = {}
            for token in tokenize(text):
                col = self.vocabulary_.get(token)
                if col is not None:
                    counts[col] = counts.get(col, 0) + 1
            if not counts:
                empty_rows += 1
            for col in sorted(counts):
                indices.append(col)
                data.append(counts[col] * self.idf_[col])
            indptr.append(len(indices))
        X = sparse.csr_matrix(
            (np.array(data, dtype=np.float64), indices, indptr),
            shape=(len(texts), len(self.vocabulary_)),
        )
        if empty_rows:
            logger.warning("%d of %d texts share no token with the vocabulary",
                           empty_rows, len(texts))
        norms = sparse.linalg.norm(X, axis=1)
        norms[norms == 0.0] = 1.0
        X = sparse.diags(1.0 / norms) @ X
        return X.tocsr()


def fit_tfidf(texts: list[str], max_df: float = 1.0) -> TfidfVectorizer:
    return TfidfVectorizer(max_df=max_df).fit(texts)


# ---------------------------------------------------------------------------
# Vector cache
# ---------------------------------------------------------------------------

class VectorCache:
    """Immutable id -> vector store with a single-file binary format.

    Layout: one JSON header line (format, provider, dimension, count, keys,
    content hashes) followed by the raw float32 matrix.
    """

    def __init__(self, provider_name: str, dimension: int, keys: list[str],
                 vectors: np.ndarray, hashes: list[str]):
        if vectors.shape != (len(keys), dimension):
            raise ValueError("vector matrix shape disagrees with keys/dimension")
        if len(hashes) != len(keys):
            raise ValueError("hashes must align with keys")
        self.provider_name = provider_name
        self.dimension = dimension
        self.keys = list(keys)
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self.hashes = list(hashes)
        self._row = {k: i for i, k in enumerate(self.keys)}

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self._row

    def row(self, key: str) -> int:
        return self._row[key]

    def get(self, key: str) -> np.ndarray:
        return self.vectors[self._row[key]]

    def save(self, path: str | Path) -> None:
        header = {
            "format": "domainlens-vectors",
            "version": CACHE_FORMAT_VERSION,
            "provider": self.provider_name,
            "dimension": self.dimension,
            "count": len(self.keys),
            "keys": self.keys,
            "hashes": self.hashes,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            fh.write(self.vectors.tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "VectorCache":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            if header.get("format") != "domainlens-vectors":
                raise ValueError(f"{path} is not a vector cache")
            if header.get("version") != CACHE_FORMAT_VERSION:
                raise ValueError(f"unsupported cache version {header.get('version')}")
            count, dim = header["count"], header["dimension"]
            raw = fh.read(count * dim * 4)
        vectors = np.frombuffer(raw, dtype=np.float32).reshape(count, dim).copy()
        return cls(header["provider"], dim, header["keys"], vectors, header["hashes"])


def build_vector_cache(keys: list[str], texts: list[str], provider,
                       cache_path: str | Path | None = None,
                       batch_size: int = 256) -> VectorCache:
    """Encode texts, reusing rows from an existing cache file when the
    provider and per-record content hashes still match."""
    if len(keys) != len(texts):
        raise ValueError("keys and texts must align")
    hashes = [_content_hash(t) for t in texts]

    reuse: dict[tuple[str, str], np.ndarray] = {}
    if cache_path is not None and Path(cache_path).exists():
        try:
            old = VectorCache.load(cache_path)
        except ValueError:
            old = None
        if old is not None and old.provider_name == provider.name \
                and old.dimension == provider.dimension:
            reuse = {(k, h): old.vectors[i]
                     for i, (k, h) in enumerate(zip(old.keys, old.hashes))}

    vectors = np.zeros((len(keys), provider.dimension), dtype=np.float32)
    todo: list[int] = []
    for i, (key, h) in enumerate(zip(keys, hashes)):
        cached = reuse.get((key, h))
        if cached is not None:
            vectors[i] = cached
        else:
            todo.append(i)
    for start in range(0, len(todo), batch_size):
        chunk = todo[start : start + batch_size]
        encoded = provider.encode([texts[i] for i in chunk])
        encoded = as_float_matrix(encoded, dtype=np.float32)
        vectors[chunk] = encoded

    cache = VectorCache(provider.name, provider.dimension, keys, vectors, hashes)
    if cache_path is not None:
        cache.save(cache_path)
    return cache
