"""Per-cluster nearest-neighbor indices over sentence vectors.

Small clusters use exact scan; larger ones a navigable small-world graph.
Similarity is inner product on unit vectors (= cosine). Builds are
deterministic: entries are inserted in sorted (doc_id, position) order and
graph level assignment draws from a fixed-seed stream.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .validation import check_unit_norm

INDEX_FORMAT_VERSION = 1

SentenceRef = tuple[str, int]


@dataclass(frozen=True)
class IndexParams:
    max_degree: int = 16
    construction_beam: int = 200
    query_beam: int = 64
    exact_threshold: int = 1000  # below this entry count, scan exactly
    seed: int = 0


@dataclass(frozen=True)
class Hit:
    doc_id: str
    position: int
    score: float
    cluster_id: int

    @property
    def ref(self) -> SentenceRef:
        return (self.doc_id, self.position)


def _order_hits(refs: list[SentenceRef], scores: np.ndarray) -> np.ndarray:
    """Indices sorted by score descending, ties by (doc_id, position) asc."""
    doc_ids = np.array([r[0] for r in refs])
    positions = np.array([r[1] for r in refs], dtype=np.int64)
    return np.lexsort((positions, doc_ids, -scores.astype(np.float64)))


def exact_query(entries: list[tuple[SentenceRef, np.ndarray]], v: np.ndarray,
                t: int, cluster_id: int = -1) -> list[Hit]:
    """Full-scan top-t by cosine; the oracle for recall tests."""
    if not entries:
        raise ValueError("entries must be non-empty")
    if t < 1:
        raise ValueError("t must be >= 1")
    refs = [ref for ref, _ in entries]
    matrix = np.stack([vec for _, vec in entries]).astype(np.float32)
    scores = matrix @ v.astype(np.float32)
    order = _order_hits(refs, scores)[:t]
    return [Hit(refs[i][0], refs[i][1], float(scores[i]), cluster_id) for i in order]


class HnswGraph:
    """Navigable small-world graph over unit vectors, inner-product metric.

    Layered greedy search: each node gets a geometric random level; upper
    layers hold long-range links (max_degree per node), layer 0 is dense
    (4 * max_degree). Neighbor sets are chosen with the diversity heuristic:
    a candidate joins only if it is closer to the inserted point than to any
    already-selected neighbor, which keeps links spread across directions.
    Adjacency lists may overshoot their cap up to 2x before being pruned;
    pruning lazily is dramatically cheaper and the extra links only help.
    """

    def __init__(self, vectors: np.ndarray, max_degree: int = 16,
                 construction_beam: int = 200, seed: int = 0):
        self._vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self._n = vectors.shape[0]
        self._max_degree = max_degree
        self._beam = construction_beam
        self._level_mult = 1.0 / math.log(max_degree)
        # adjacency[node][layer] -> list of neighbor ids
        self._adj: list[list[list[int]]] = []
        self._levels: list[int] = []
        self._entry_point = -1
        self._max_level = -1
        self._visit_mark = [0] * self._n
        self._visit_gen = 0
        rng = np.random.Generator(np.random.PCG64(seed))
        draws = rng.random(self._n)
        for i in range(self._n):
            # 1 - draw keeps the log argument in (0, 1].
            self._insert(i, int(-math.log(1.0 - draws[i]) * self._level_mult))

    def _prune(self, node: int, adj: list[int], cap: int) -> list[int]:
        arr = np.array(adj, dtype=np.int64)
        sims = (self._vectors[arr] @ self._vectors[node]).astype(np.float32)
        order = np.lexsort((arr, -sims))
        return self._select_diverse(arr[order], sims[order], cap)

    # -- construction -------------------------------------------------------

    def _insert(self, node: int, level: int) -> None:
        self._levels.append(level)
        self._adj.append([[] for _ in range(level + 1)])
        if self._entry_point < 0:
            self._entry_point = node
            self._max_level = level
            return

        q = self._vectors[node]
        eps = [self._entry_point]
        for layer in range(self._max_level, level, -1):
            eps = [n for _, n in self._search_layer(q, eps, layer, 1)]

        for layer in range(min(level, self._max_level), -1, -1):
            cands = self._search_layer(q, eps, layer, self._beam)
            cap = self._degree_cap(layer)
            nodes = np.fromiter((n for _, n in cands), dtype=np.int64, count=len(cands))
            scores = np.fromiter((s for s, _ in cands), dtype=np.float32, count=len(cands))
            selected = self._select_diverse(nodes, scores, cap)
            self._adj[node][layer] = selected
            for nb in selected:
                nb_adj = self._adj[nb][layer]
                nb_adj.append(node)
                if len(nb_adj) > 2 * cap:
                    self._adj[nb][layer] = self._prune(nb, nb_adj, cap)
            eps = [n for _, n in cands]

        if level > self._max_level:
            self._entry_point = node
            self._max_level = level

    def _degree_cap(self, layer: int) -> int:
        # Layer 0 is kept dense (4x) -- on weakly structured high-dimensional
        # data the base layer's connectivity is what carries recall.
        return self._max_degree * 4 if layer == 0 else self._max_degree

    def _select_diverse(self, nodes: np.ndarray, scores: np.ndarray,
                        m: int) -> list[int]:
        """Diversity-aware selection; nodes/scores arrive sorted best-first.

        A candidate is kept only while it is closer to the query point than
        to every already-kept neighbor; leftovers backfill up to m.
        """
        k = len(nodes)
        if k <= m:
            return nodes.tolist()
        vecs = self._vectors[nodes]
        cross = vecs @ vecs.T
        best_to_kept = np.full(k, -np.inf, dtype=np.float32)
        kept: list[int] = []
        passed_over: list[int] = []
        for j in range(k):
            if len(kept) == m:
                break
            if kept and scores[j] <= best_to_kept[j]:
                passed_over.append(j)
                continue
            kept.append(j)
            np.maximum(best_to_kept, cross[j], out=best_to_kept)
        for j in passed_over:
            if len(kept) == m:
                break
            kept.append(j)
        return [int(nodes[j]) for j in kept]

    # -- search -------------------------------------------------------------

    def _search_layer(self, q: np.ndarray, eps: list[int], layer: int,
                      ef: int) -> list[tuple[float, int]]:
        """Beam search on one layer; returns (score, node) best-first."""
        self._visit_gen += 1
        gen = self._visit_gen
        mark = self._visit_mark
        for e in eps:
            mark[e] = gen
        scores = self._vectors[eps] @ q
        candidates = [(-float(s), e) for s, e in zip(scores, eps)]
        heapq.heapify(candidates)
        results = [(float(s), e) for s, e in zip(scores, eps)]
        heapq.heapify(results)
        while len(results) > ef:
            heapq.heappop(results)

        while candidates:
            neg, current = heapq.heappop(candidates)
            if len(results) >= ef and -neg < results[0][0]:
                break
            fresh = [n for n in self._adj[current][layer] if mark[n] != gen]
            if not fresh:
                continue
            for n in fresh:
                mark[n] = gen
            fresh_scores = self._vectors[fresh] @ q
            worst = results[0][0] if results else -np.inf
            for n, s in zip(fresh, fresh_scores.tolist()):
                if len(results) < ef or s > worst:
                    heapq.heappush(candidates, (-s, n))
                    heapq.heappush(results, (s, n))
                    if len(results) > ef:
                        heapq.heappop(results)
                    worst = results[0][0]
        return sorted(results, key=lambda p: (-p[0], p[1]))

    def search(self, q: np.ndarray, ef: int) -> list[tuple[float, int]]:
        if self._entry_point < 0:
            return []
        eps = [self._entry_point]
        for layer in range(self._max_level, 0, -1):
            eps = [n for _, n in self._search_layer(q, eps, layer, 1)]
        return self._search_layer(q, eps, 0, ef)

    # -- persistence --------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "levels": self._levels,
            "entry_point": self._entry_point,
            "max_level": self._max_level,
            "adjacency": self._adj,
        }

    @classmethod
    def from_state(cls, vectors: np.ndarray, state: dict, max_degree: int,
                   construction_beam: int, seed: int) -> "HnswGraph":
        graph = cls.__new__(cls)
        graph._vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        graph._n = vectors.shape[0]
        graph._max_degree = max_degree
        graph._beam = construction_beam
        graph._level_mult = 1.0 / math.log(max_degree)
        graph._levels = list(state["levels"])
        graph._entry_point = int(state["entry_point"])
        graph._max_level = int(state["max_level"])
        graph._adj = [[list(layer) for layer in node] for node in state["adjacency"]]
        graph._visit_mark = [0] * graph._n
        graph._visit_gen = 0
        return graph


class ClusterIndex:
    """Frozen nearest-neighbor index over one cluster's sentences."""

    def __init__(self, cluster_id: int, refs: list[SentenceRef],
                 vectors: np.ndarray, params: IndexParams,
                 graph: HnswGraph | None):
        self.cluster_id = cluster_id
        self.refs = refs
        self.vectors = vectors
        self.params = params
        self._graph = graph
        self._row = {ref: i for i, ref in enumerate(refs)}

    def __len__(self) -> int:
        return len(self.refs)

    @property
    def exact(self) -> bool:
        return self._graph is None

    @classmethod
    def build(cls, cluster_id: int, entries: list[tuple[SentenceRef, np.ndarray]],
              params: IndexParams = IndexParams()) -> "ClusterIndex":
        if not entries:
            raise ValueError("cluster index needs at least one sentence")
        entries = sorted(entries, key=lambda e: e[0])
        refs = [ref for ref, _ in entries]
        if len(set(refs)) != len(refs):
            raise ValueError("duplicate sentence refs in cluster")
        vectors = np.stack([vec for _, vec in entries]).astype(np.float32)
        dims = {vec.shape[0] for _, vec in entries}
        if len(dims) != 1:
            raise ValueError(f"mixed vector dimensions in cluster: {sorted(dims)}")
        check_unit_norm(vectors.astype(np.float64))
        graph = None
        if len(entries) >= params.exact_threshold:
            graph = HnswGraph(vectors, params.max_degree,
                              params.construction_beam, params.seed)
        return cls(cluster_id, refs, vectors, params, graph)

    def query(self, v: np.ndarray, t: int) -> list[Hit]:
        if t < 1:
            raise ValueError("t must be >= 1")
        v = np.asarray(v, dtype=np.float32)
        if v.shape[0] != self.vectors.shape[1]:
            raise ValueError(
                f"query dimension {v.shape[0]} != index dimension {self.vectors.shape[1]}")
        if self._graph is None:
            scores = self.vectors @ v
            order = _order_hits(self.refs, scores)[:t]
            return [Hit(self.refs[i][0], self.refs[i][1], float(scores[i]),
                        self.cluster_id) for i in order]
        ef = max(self.params.query_beam, t)
        found = self._graph.search(v, ef)
        rows = [n for _, n in found]
        scores = np.array([s for s, _ in found], dtype=np.float32)
        sub_refs = [self.refs[r] for r in rows]
        order = _order_hits(sub_refs, scores)[:t]
        return [Hit(sub_refs[i][0], sub_refs[i][1], float(scores[i]),
                    self.cluster_id) for i in order]

    def vector_for(self, ref: SentenceRef) -> np.ndarray:
        return self.vectors[self._row[ref]]

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        header = {
            "format": "domainlens-index",
            "version": INDEX_FORMAT_VERSION,
            "metric": "inner_product",
            "cluster_id": self.cluster_id,
            "dimension": int(self.vectors.shape[1]),
            "entry_count": len(self.refs),
            "params": asdict(self.params),
            "refs": [[d, p] for d, p in self.refs],
            "graph": self._graph.to_state() if self._graph is not None else None,
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            fh.write(np.ascontiguousarray(self.vectors, dtype=np.float32).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "ClusterIndex":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            if header.get("format") != "domainlens-index":
                raise ValueError(f"{path} is not an index file")
            if header.get("version") != INDEX_FORMAT_VERSION:
                raise ValueError(f"unsupported index version {header.get('version')}")
            count, dim = header["entry_count"], header["dimension"]
            raw = fh.read(count * dim * 4)
        vectors = np.frombuffer(raw, dtype=np.float32).reshape(count, dim).copy()
        params = IndexParams(**header["params"])
        refs = [(d, int(p)) for d, p in header["refs"]]
        graph = None
        if header["graph"] is not None:
            graph = HnswGraph.from_state(vectors, header["graph"], params.max_degree,
                                         params.construction_beam, params.seed)
        return cls(header["cluster_id"], refs, vectors, params, graph)
