"""
End-to-end selection pipelines.

TRS: topological description vectors -> k-medoids.
Naive: binary context matrix (pattern x graph occurrences) -> k-medoids.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from app.services.clustering import ClusteringConfig, ClusteringResult, FeatureMatrix, cluster
from app.services.graph_core import GraphDatabase, SubgraphRecord
from app.services.isomorphism import OccurrenceMatrix, occurrence_matrix, occurrences_from_records
from app.services.topo_descriptors import ATTRIBUTE_NAMES, describe_many
from app.utils.errors import SelectionError

logger = logging.getLogger(__name__)

NORMALIZATIONS = ("none", "min-max")
ENCODINGS = ("topological", "context")


@dataclass(frozen=True)
class SelectionReport:
    representatives: Tuple[int, ...]
    membership: Dict[int, int]
    encoding: str
    k: int
    algorithm: str
    seed: int
    params: Dict[str, Any]
    total_distance: float
    effective_clusters: int
    attributes: Tuple[str, ...] = ()
    normalization: str = "none"
    encode_seconds: float = 0.0
    cluster_seconds: float = 0.0
    clustering: Optional[ClusteringResult] = field(default=None, compare=False)
    occurrence: Optional[OccurrenceMatrix] = field(default=None, compare=False)

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        doc = {
            "representatives": list(self.representatives),
            "membership": [[pid, rep] for pid, rep in self.membership.items()],
            "encoding": self.encoding,
            "k": self.k,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "params": dict(self.params),
            "total_distance": self.total_distance,
            "effective_clusters": self.effective_clusters,
            "attributes": list(self.attributes),
            "normalization": self.normalization,
        }
        if include_timings:
            doc["encode_seconds"] = self.encode_seconds
            doc["cluster_seconds"] = self.cluster_seconds
        return doc

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SelectionReport":
        try:
            return cls(
                representatives=tuple(int(p) for p in doc["representatives"]),
                membership={int(pid): int(rep) for pid, rep in doc["membership"]},
                encoding=doc["encoding"],
                k=int(doc["k"]),
                algorithm=doc["algorithm"],
                seed=int(doc["seed"]),
                params=dict(doc.get("params", {})),
                total_distance=float(doc["total_distance"]),
                effective_clusters=int(doc["effective_clusters"]),
                attributes=tuple(doc.get("attributes", ())),
                normalization=doc.get("normalization", "none"),
                encode_seconds=float(doc.get("encode_seconds", 0.0)),
                cluster_seconds=float(doc.get("cluster_seconds", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SelectionError(f"malformed selection report: {e}")

    def clusters(self) -> Dict[int, Tuple[int, ...]]:
        """representative pattern_id -> member pattern_ids"""
        groups: Dict[int, list] = {rep: [] for rep in self.representatives}
        for pid, rep in self.membership.items():
            groups[rep].append(pid)
        return {rep: tuple(members) for rep, members in groups.items()}


def normalize_features(matrix: np.ndarray, mode: str = "none") -> np.ndarray:
    """'min-max' maps each column onto [0, 1] (constant columns -> 0); 'none' is identity."""
    if mode not in NORMALIZATIONS:
        raise SelectionError(f"unknown normalization {mode!r}; expected one of {NORMALIZATIONS}")
    if mode == "none":
        return matrix
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.size == 0:
        return matrix.copy()
    lo = matrix.min(axis=0)
    span = matrix.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (matrix - lo) / safe, 0.0)


def _check_k(records: Sequence[SubgraphRecord], k: int):
    if not records:
        raise SelectionError("no subgraphs to select from")
    if not 1 <= k <= len(records):
        raise SelectionError(f"k must lie in [1, {len(records)}], got {k}")


def _build_report(
    records: Sequence[SubgraphRecord],
    rows: np.ndarray,
    result: ClusteringResult,
    encoding: str,
    k: int,
    config: ClusteringConfig,
    attributes: Tuple[str, ...],
    normalization: str,
    encode_seconds: float,
    cluster_seconds: float,
    occurrence: Optional[OccurrenceMatrix] = None,
) -> SelectionReport:
    pattern_ids = [r.pattern_id for r in records]
    representatives = tuple(pattern_ids[m] for m in result.medoids)
    membership = {pattern_ids[i]: pattern_ids[a] for i, a in enumerate(result.assignment)}
    effective = len({rows[m].tobytes() for m in result.medoids})
    if effective < k:
        logger.warning("Only %d distinct medoid vectors for k=%d", effective, k)
    return SelectionReport(
        representatives=representatives,
        membership=membership,
        encoding=encoding,
        k=k,
        algorithm=result.algorithm,
        seed=config.seed,
        params=result.params,
        total_distance=result.total_distance,
        effective_clusters=effective,
        attributes=attributes,
        normalization=normalization,
        encode_seconds=encode_seconds,
        cluster_seconds=cluster_seconds,
        clustering=result,
        occurrence=occurrence,
    )


def select_trs(
    subgraphs: Sequence[SubgraphRecord],
    k: int,
    attribute_mask: Optional[Sequence[str]] = None,
    normalization: str = "none",
    config: Optional[ClusteringConfig] = None,
    threads: int = 1,
    cache=None,
) -> SelectionReport:
    """Topological representative subgraphs: describe every pattern, then cluster"""
    config = config or ClusteringConfig()
    _check_k(subgraphs, k)
    names = tuple(attribute_mask) if attribute_mask is not None else ATTRIBUTE_NAMES

    started = time.perf_counter()
    vectors = describe_many([r.pattern for r in subgraphs], names, threads=threads, cache=cache)
    rows = normalize_features(vectors, normalization)
    encode_seconds = time.perf_counter() - started

    started = time.perf_counter()
    result = cluster(FeatureMatrix(rows, tuple(r.pattern_id for r in subgraphs)), k, config)
    cluster_seconds = time.perf_counter() - started

    logger.info(
        "TRS selected %d of %d patterns (%d attributes, %s) in %.3fs + %.3fs",
        k, len(subgraphs), len(names), config.algorithm, encode_seconds, cluster_seconds,
    )
    return _build_report(
        subgraphs, rows, result, "topological", k, config, names, normalization,
        encode_seconds, cluster_seconds,
    )


def context_matrix(
    subgraphs: Sequence[SubgraphRecord],
    db: Optional[GraphDatabase] = None,
    n_graphs: Optional[int] = None,
    threads: int = 1,
    graph_ids: Optional[Sequence[str]] = None,
) -> OccurrenceMatrix:
    """
    Occurrence matrix from the database, or from the records' own lists.

    Without a database the columns are graph positions: `graph_ids` names them
    (e.g. in labels-file order), else `n_graphs` sizes them, else the largest
    occurrence index does. Trailing graphs no pattern occurs in are kept only
    when `graph_ids` or `n_graphs` is given.
    """
    if db is not None:
        return occurrence_matrix(subgraphs, db, threads=threads)
    if any(r.occurrences is None for r in subgraphs):
        raise SelectionError("patterns lack occurrence lists and no graph database was given")
    if graph_ids is not None:
        return occurrences_from_records(subgraphs, [str(i) for i in graph_ids])
    if n_graphs is None:
        n_graphs = 1 + max((max(r.occurrences) for r in subgraphs if r.occurrences), default=-1)
    return occurrences_from_records(subgraphs, [str(i) for i in range(n_graphs)])


def select_naive(
    subgraphs: Sequence[SubgraphRecord],
    db: Optional[GraphDatabase],
    k: int,
    config: Optional[ClusteringConfig] = None,
    threads: int = 1,
    n_graphs: Optional[int] = None,
    graph_ids: Optional[Sequence[str]] = None,
) -> SelectionReport:
    """Naive baseline: cluster the binary context vectors"""
    config = config or ClusteringConfig()
    _check_k(subgraphs, k)

    started = time.perf_counter()
    occurrence = context_matrix(subgraphs, db, n_graphs=n_graphs, threads=threads, graph_ids=graph_ids)
    rows = occurrence.bits.astype(np.float64)
    encode_seconds = time.perf_counter() - started

    started = time.perf_counter()
    result = cluster(FeatureMatrix(rows, occurrence.pattern_ids), k, config)
    cluster_seconds = time.perf_counter() - started

    logger.info(
        "Naive selected %d of %d patterns over %d graphs (%s) in %.3fs + %.3fs",
        k, len(subgraphs), occurrence.shape[1], config.algorithm, encode_seconds, cluster_seconds,
    )
    return _build_report(
        subgraphs, rows, result, "context", k, config, (), "none",
        encode_seconds, cluster_seconds, occurrence,
    )
