"""
L1 k-medoids: PAM swap search, CLARANS randomized search and an exhaustive
oracle for small inputs.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from app.utils.errors import ClusteringError

logger = logging.getLogger(__name__)

ALGORITHMS = ("clarans", "pam")
BRUTE_FORCE_LIMIT = 10 ** 6
DEFAULT_MEMORY_BUDGET_BYTES = 256 * 1024 * 1024
IMPROVEMENT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray
    row_ids: Tuple[Any, ...] = ()

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise ClusteringError("feature matrix must be two-dimensional")
        if not np.all(np.isfinite(rows)):
            raise ClusteringError("feature matrix holds non-finite values")
        row_ids = tuple(self.row_ids) if len(self.row_ids) else tuple(range(rows.shape[0]))
        if len(row_ids) != rows.shape[0]:
            raise ClusteringError("row_ids must name every row")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class ClusteringResult:
    medoids: Tuple[int, ...]
    assignment: Tuple[int, ...]
    total_distance: float
    algorithm: str = ""
    seed: Optional[int] = None
    params: Dict[str, Any] = field(default_factory=dict)
    trace: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "medoids": list(self.medoids),
            "assignment": list(self.assignment),
            "total_distance": self.total_distance,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class ClusteringConfig:
    algorithm: str = "clarans"
    numlocal: int = 2
    maxneighbor: Optional[int] = None
    seed: int = 0
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ClusteringError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.numlocal < 1:
            raise ClusteringError("numlocal must be >= 1")
        if self.maxneighbor is not None and self.maxneighbor < 1:
            raise ClusteringError("maxneighbor must be >= 1")


def _as_matrix(matrix) -> FeatureMatrix:
    return matrix if isinstance(matrix, FeatureMatrix) else FeatureMatrix(np.asarray(matrix, dtype=np.float64))


def l1_distance(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ClusteringError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.abs(x - y).sum())


class DistanceOracle:
    """
    Row access to the L1 distance matrix.

    The full matrix is memoized when it fits the memory budget; otherwise rows
    are computed on demand. Both paths use the same kernel so values agree.
    """

    def __init__(self, rows: np.ndarray, memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES):
        self._rows = rows
        n = rows.shape[0]
        self._full: Optional[np.ndarray] = None
        if n * n * 8 <= memory_budget_bytes:
            self._full = cdist(rows, rows, metric="cityblock")

    @property
    def memoized(self) -> bool:
        return self._full is not None

    def row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        return cdist(self._rows[i:i + 1], self._rows, metric="cityblock")[0]

    def columns(self, indices: Sequence[int]) -> np.ndarray:
        """n x len(indices) block of distances to the given objects"""
        if self._full is not None:
            return self._full[:, list(indices)]
        return np.column_stack([self.row(i) for i in indices])


def global_distance(o: int, matrix) -> float:
    """Total distance between row o and all other rows"""
    rows = _as_matrix(matrix).rows
    if not 0 <= o < rows.shape[0]:
        raise ClusteringError(f"row index {o} out of range")
    return float(np.abs(rows - rows[o]).sum())


def cluster_medoid(matrix, members: Sequence[int]) -> int:
    """Member with the smallest global distance inside the cluster (ties -> lowest index)"""
    rows = _as_matrix(matrix).rows
    members = sorted(members)
    if not members:
        raise ClusteringError("empty cluster")
    sub = rows[members]
    totals = cdist(sub, sub, metric="cityblock").sum(axis=1)
    return members[int(np.argmin(totals))]


class _MedoidState:
    """Nearest / second-nearest bookkeeping for fast swap evaluation"""

    def __init__(self, oracle: DistanceOracle, medoids: Sequence[int]):
        self.oracle = oracle
        self.medoids = sorted(int(m) for m in medoids)
        self._refresh()

    def _refresh(self):
        block = self.oracle.columns(self.medoids)
        if len(self.medoids) == 1:
            self.nearest_slot = np.zeros(block.shape[0], dtype=np.int64)
            self.nearest = block[:, 0].copy()
            self.second = np.full(block.shape[0], np.inf)
        else:
            order = np.argsort(block, axis=1, kind="stable")
            rows = np.arange(block.shape[0])
            self.nearest_slot = order[:, 0]
            self.nearest = block[rows, order[:, 0]]
            self.second = block[rows, order[:, 1]]
        self.total = float(self.nearest.sum())

    def swap_delta(self, slot: int, candidate: int) -> float:
        d = self.oracle.row(candidate)
        lost = self.nearest_slot == slot
        updated = np.where(lost, np.minimum(self.second, d), np.minimum(self.nearest, d))
        return float(updated.sum()) - self.total

    def apply(self, slot: int, candidate: int):
        self.medoids[slot] = int(candidate)
        self.medoids.sort()
        self._refresh()


def _improves(delta: float, current: float) -> bool:
    return delta < -IMPROVEMENT_TOLERANCE * max(1.0, current)


def _result(oracle: DistanceOracle, medoids: Sequence[int], algorithm: str, seed, params, trace) -> ClusteringResult:
    medoids = tuple(sorted(int(m) for m in medoids))
    block = oracle.columns(medoids)
    # argmin keeps the first minimum: ties go to the lowest medoid index
    slots = np.argmin(block, axis=1)
    assignment = [medoids[s] for s in slots]
    for m in medoids:
        assignment[m] = m
    rows = np.arange(block.shape[0])
    total = float(block[rows, slots].sum())
    return ClusteringResult(
        medoids=medoids,
        assignment=tuple(int(a) for a in assignment),
        total_distance=total,
        algorithm=algorithm,
        seed=seed,
        params=dict(params),
        trace=tuple(trace),
    )


def _check_k(n: int, k: int):
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    if k > n:
        raise ClusteringError(f"k={k} exceeds the number of objects ({n})")


def pam(matrix, k: int, seed: int = 0, memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES) -> ClusteringResult:
    """
    PAM-style swap search with first-improvement acceptance.

    Swap candidates are scanned medoid ascending, then non-medoid ascending;
    the first strictly improving swap is applied and the scan restarts.
    """
    fm = _as_matrix(matrix)
    _check_k(fm.n, k)
    oracle = DistanceOracle(fm.rows, memory_budget_bytes)
    rng = np.random.default_rng(seed)
    state = _MedoidState(oracle, rng.choice(fm.n, size=k, replace=False))
    trace = [state.total]

    improved = True
    while improved:
        improved = False
        medoid_set = set(state.medoids)
        for slot in range(k):
            for candidate in range(fm.n):
                if candidate in medoid_set:
                    continue
                if _improves(state.swap_delta(slot, candidate), state.total):
                    state.apply(slot, candidate)
                    trace.append(state.total)
                    improved = True
                    break
            if improved:
                break

    logger.debug("pam k=%d: %d swaps, total=%.6g", k, len(trace) - 1, state.total)
    return _result(oracle, state.medoids, "pam", seed, {"k": k}, trace)


def default_maxneighbor(n: int, k: int) -> int:
    return max(250, math.ceil(0.0125 * k * (n - k)))


def clarans(
    matrix,
    k: int,
    numlocal: int = 2,
    maxneighbor: Optional[int] = None,
    seed: int = 0,
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES,
) -> ClusteringResult:
    """
    CLARANS: best of `numlocal` randomized local searches. A search stops
    after `maxneighbor` consecutive random swaps that fail to improve.
    """
    fm = _as_matrix(matrix)
    _check_k(fm.n, k)
    if numlocal < 1:
        raise ClusteringError("numlocal must be >= 1")
    if maxneighbor is None:
        maxneighbor = default_maxneighbor(fm.n, k)
    if maxneighbor < 1:
        raise ClusteringError("maxneighbor must be >= 1")

    oracle = DistanceOracle(fm.rows, memory_budget_bytes)
    params = {"k": k, "numlocal": numlocal, "maxneighbor": maxneighbor}
    streams = np.random.SeedSequence(seed).spawn(numlocal)

    best_medoids, best_total, best_trace = None, math.inf, []
    for local in range(numlocal):
        rng = np.random.default_rng(streams[local])
        state = _MedoidState(oracle, rng.choice(fm.n, size=k, replace=False))
        trace = [state.total]
        if k < fm.n:
            failures = 0
            while failures < maxneighbor:
                slot = int(rng.integers(k))
                candidate = int(rng.integers(fm.n - k))
                # map the draw onto the non-medoids in ascending order
                for m in state.medoids:
                    if candidate >= m:
                        candidate += 1
                if _improves(state.swap_delta(slot, candidate), state.total):
                    state.apply(slot, candidate)
                    trace.append(state.total)
                    failures = 0
                else:
                    failures += 1
        logger.debug("clarans local %d: total=%.6g after %d swaps", local, state.total, len(trace) - 1)
        if state.total < best_total:
            best_medoids, best_total, best_trace = list(state.medoids), state.total, trace

    return _result(oracle, best_medoids, "clarans", seed, params, best_trace)


def brute_force_medoids(matrix, k: int) -> ClusteringResult:
    """Exhaustive optimum over all C(n, k) medoid sets; ties keep the lexicographically first"""
    fm = _as_matrix(matrix)
    _check_k(fm.n, k)
    if math.comb(fm.n, k) > BRUTE_FORCE_LIMIT:
        raise ClusteringError(f"C({fm.n}, {k}) exceeds the brute-force limit of {BRUTE_FORCE_LIMIT}")

    full = cdist(fm.rows, fm.rows, metric="cityblock")
    best, best_total = None, math.inf
    for combo in itertools.combinations(range(fm.n), k):
        total = float(full[:, combo].min(axis=1).sum())
        if best is None or _improves(total - best_total, best_total):
            best, best_total = combo, total

    oracle = DistanceOracle(fm.rows)
    return _result(oracle, best, "brute_force", None, {"k": k}, [best_total])


def cluster(matrix, k: int, config: ClusteringConfig) -> ClusteringResult:
    if config.algorithm == "pam":
        return pam(matrix, k, seed=config.seed, memory_budget_bytes=config.memory_budget_bytes)
    return clarans(
        matrix,
        k,
        numlocal=config.numlocal,
        maxneighbor=config.maxneighbor,
        seed=config.seed,
        memory_budget_bytes=config.memory_budget_bytes,
    )
