"""K-means clustering, the cluster purity metric, and cluster descriptors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClusterMixin

from .embedding import TfidfVectorizer
from .validation import as_float_matrix

# Slack for the non-increasing inertia assertion; Lloyd is monotone in exact
# arithmetic, float64 sums wobble at this scale.
_INERTIA_RTOL = 1e-9


def _kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed centroids: first uniform, rest sampled with probability
    proportional to squared distance from the nearest chosen centroid."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]), dtype=X.dtype)
    first = int(rng.integers(n))
    centers[0] = X[first]
    closest = cdist(X, centers[:1], "sqeuclidean").ravel()
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # All remaining points coincide with chosen centers; k exceeds
            # the number of distinct points (guarded by the caller).
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[i] = X[idx]
        dist_new = cdist(X, centers[i : i + 1], "sqeuclidean").ravel()
        closest = np.minimum(closest, dist_new)
    return centers


def _lloyd(X: np.ndarray, k: int, max_iter: int, tol: float,
           rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    n = X.shape[0]
    centers = _kmeans_plus_plus(X, k, rng)
    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    prev_inertia = np.inf
    for _ in range(max_iter):
        dists = cdist(X, centers, "sqeuclidean")
        labels = np.argmin(dists, axis=1)
        own = dists[np.arange(n), labels]

        # Repair empty clusters from the globally farthest point so the
        # final model always has k non-empty clusters.
        counts = np.bincount(labels, minlength=k)
        for c in np.nonzero(counts == 0)[0]:
            far = int(np.argmax(own))
            labels[far] = c
            centers[c] = X[far]
            own[far] = 0.0
            counts = np.bincount(labels, minlength=k)

        inertia = float(own.sum())
        assert inertia <= prev_inertia * (1.0 + _INERTIA_RTOL) + 1e-12, \
            "inertia increased across an iteration"
        history.append(inertia)

        for c in range(k):
            centers[c] = X[labels == c].mean(axis=0)

        if prev_inertia < np.inf:
            improvement = (prev_inertia - inertia) / max(prev_inertia, 1e-300)
            if improvement < tol:
                break
        prev_inertia = inertia

    # Final assignment against the updated centers.
    dists = cdist(X, centers, "sqeuclidean")
    labels = np.argmin(dists, axis=1)
    own = dists[np.arange(n), labels]
    counts = np.bincount(labels, minlength=k)
    for c in np.nonzero(counts == 0)[0]:
        far = int(np.argmax(own))
        labels[far] = c
        centers[c] = X[far]
        own[far] = 0.0
        counts = np.bincount(labels, minlength=k)
    inertia = float(own.sum())
    if not history or inertia < history[-1]:
        history.append(inertia)
    return centers, labels, inertia, history


class KMeans(BaseEstimator, ClusterMixin):
    """Lloyd's algorithm with k-means++ seeding and best-of-n_init restarts.

    Squared Euclidean distance; on unit vectors this is monotone in cosine
    distance. Bit-reproducible for a fixed seed. The fitted model never
    contains an empty cluster (repaired by reseeding from the farthest
    point).

    Attributes after fit: cluster_centers_, labels_, inertia_, sizes_,
    inertia_history_ (per-iteration inertia of the winning restart).
    """

    def __init__(self, n_clusters: int = 8, max_iter: int = 100,
                 tol: float = 1e-4, seed: int = 0, n_init: int = 3):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed
        self.n_init = n_init

    def fit(self, X, y=None) -> "KMeans":
        X = as_float_matrix(X)
        k = self.n_clusters
        if k < 1:
            raise ValueError("n_clusters must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if k > X.shape[0]:
            raise ValueError(f"n_clusters={k} exceeds {X.shape[0]} points")
        n_distinct = np.unique(X, axis=0).shape[0]
        if k > n_distinct:
            raise ValueError(f"n_clusters={k} exceeds {n_distinct} distinct points")

        best: tuple[float, int] | None = None
        results = []
        for restart in range(self.n_init):
            rng = np.random.Generator(np.random.PCG64(self.seed + restart))
            centers, labels, inertia, history = _lloyd(
                X, k, self.max_iter, self.tol, rng)
            results.append((centers, labels, inertia, history))
            if best is None or inertia < best[0]:
                best = (inertia, restart)

        centers, labels, inertia, history = results[best[1]]
        self.cluster_centers_ = centers
        self.labels_ = labels
        self.inertia_ = inertia
        self.inertia_history_ = history
        self.sizes_ = np.bincount(labels, minlength=k)
        return self

    def predict(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        return np.argmin(cdist(X, self.cluster_centers_, "sqeuclidean"), axis=1)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_


def purity(assignments, labels) -> float:
    """Cluster purity: (1/N) * sum over clusters of the largest single-class
    member count. Accepts aligned sequences/arrays, or two dicts keyed by the
    same points. Invariant under relabeling of either side."""
    if isinstance(assignments, Mapping) or isinstance(labels, Mapping):
        if not (isinstance(assignments, Mapping) and isinstance(labels, Mapping)):
            raise ValueError("assignments and labels must both be mappings or both sequences")
        if set(assignments.keys()) != set(labels.keys()):
            raise ValueError("assignments and labels cover different points")
        points = sorted(assignments.keys())
        a = [assignments[p] for p in points]
        c = [labels[p] for p in points]
    else:
        a, c = list(assignments), list(labels)
        if len(a) != len(c):
            raise ValueError(f"length mismatch: {len(a)} assignments vs {len(c)} labels")
    n = len(a)
    if n == 0:
        raise ValueError("need at least one point")

    _, a_codes = np.unique(np.asarray(a), return_inverse=True)
    classes, c_codes = np.unique(np.asarray(c), return_inverse=True)
    n_classes = len(classes)
    contingency = np.bincount(a_codes * n_classes + c_codes,
                              minlength=int(a_codes.max() + 1) * n_classes)
    contingency = contingency.reshape(-1, n_classes)
    return float(contingency.max(axis=1).sum()) / n


def cluster_descriptors(cluster_texts: Sequence[Sequence[str]], top_n: int = 5,
                        max_df: float = 0.6) -> list[list[str]]:
    """Top TF-IDF unigrams per cluster, each cluster treated as one
    pseudo-document. Ties break lexicographically; tokens present in more
    than max_df of the pseudo-documents are dropped as uninformative."""
    if len(cluster_texts) < 2:
        raise ValueError("need at least two clusters for idf contrast")
    pseudo_docs = [" ".join(texts) for texts in cluster_texts]
    vectorizer = TfidfVectorizer(max_df=max_df).fit(pseudo_docs)
    scores = vectorizer.transform(pseudo_docs).toarray()
    vocab = sorted(vectorizer.vocabulary_, key=vectorizer.vocabulary_.get)

    out: list[list[str]] = []
    for row in scores:
        nz = np.nonzero(row)[0]
        ranked = sorted(((-row[i], vocab[i]) for i in nz))
        out.append([token for _, token in ranked[:top_n]])
    return out


@dataclass
class ClusterModel:
    """Fitted clustering over a fixed point set."""
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    sizes: np.ndarray
    seed: int

    @property
    def n_clusters(self) -> int:
        return self.centroids.shape[0]


@dataclass
class GlobalClusterSet:
    """Corpus-wide domain partition with per-cluster members and descriptors."""
    model: ClusterModel
    doc_ids: list[list[str]] = field(default_factory=list)
    descriptors: list[list[str]] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return self.model.n_clusters


def fit_global_clusters(doc_vectors: np.ndarray, paper_ids: list[str],
                        doc_texts: Sequence[str], n_clusters: int = 20,
                        seed: int = 0, descriptor_count: int = 5) -> GlobalClusterSet:
    """Partition document vectors into domain clusters and attach TF-IDF
    descriptors computed from each cluster's concatenated text."""
    km = KMeans(n_clusters=n_clusters, seed=seed).fit(doc_vectors)
    model = ClusterModel(
        centroids=km.cluster_centers_,
        assignments=km.labels_,
        inertia=km.inertia_,
        sizes=km.sizes_,
        seed=seed,
    )
    doc_ids: list[list[str]] = [[] for _ in range(n_clusters)]
    texts: list[list[str]] = [[] for _ in range(n_clusters)]
    for pid, text, label in zip(paper_ids, doc_texts, km.labels_):
        doc_ids[int(label)].append(pid)
        texts[int(label)].append(text)
    if n_clusters >= 2:
        descriptors = cluster_descriptors(texts, top_n=descriptor_count)
    else:
        descriptors = [[] for _ in range(n_clusters)]
    return GlobalClusterSet(model=model, doc_ids=doc_ids, descriptors=descriptors)
