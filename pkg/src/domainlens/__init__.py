"""domainlens: sentence-aspect search over scholarly abstracts.

Query with an abstract plus one selected sentence; results come back grouped
by corpus-wide domain clusters, with zoom-in re-clustering to surface
within-domain variation. Includes a cluster-purity evaluation harness.
"""

from .ann import ClusterIndex, Hit, IndexParams, exact_query
from .clustering import KMeans, cluster_descriptors, fit_global_clusters, purity
from .corpus import Corpus, Document, Sentence, ingest, load_corpus, save_corpus, split_sentences
from .embedding import (
    FallbackEncoder,
    HttpEncoder,
    TfidfVectorizer,
    VectorCache,
    embed_document,
    embed_sentence,
    fallback_encode,
    fit_tfidf,
)
from .evalharness import (
    BUILTIN_KEYWORDS,
    EvalConfig,
    EvalReport,
    build_eval_corpus,
    run_eval,
    strip_keywords,
)
from .search import (
    Query,
    ResultGroup,
    SearchConfig,
    ZoomResult,
    faceted_search,
    keyword_filter,
    make_query,
    zoom_in,
)
from .snapshot import Snapshot, build_snapshot, load_snapshot

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_KEYWORDS",
    "ClusterIndex",
    "Corpus",
    "Document",
    "EvalConfig",
    "EvalReport",
    "FallbackEncoder",
    "Hit",
    "HttpEncoder",
    "IndexParams",
    "KMeans",
    "Query",
    "ResultGroup",
    "SearchConfig",
    "Sentence",
    "Snapshot",
    "TfidfVectorizer",
    "VectorCache",
    "ZoomResult",
    "build_eval_corpus",
    "build_snapshot",
    "cluster_descriptors",
    "embed_document",
    "embed_sentence",
    "exact_query",
    "faceted_search",
    "fallback_encode",
    "fit_global_clusters",
    "fit_tfidf",
    "ingest",
    "keyword_filter",
    "load_corpus",
    "load_snapshot",
    "make_query",
    "purity",
    "run_eval",
    "save_corpus",
    "split_sentences",
    "strip_keywords",
    "zoom_in",
]
