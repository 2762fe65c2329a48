"""
Evaluation of selected pattern sets: information gain against class labels,
size distributions, synthetic occurrence data and clustering runtime
benchmarks.
"""
import csv
import logging
import statistics
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from scipy.stats import entropy as _shannon

from app.services.clustering import ClusteringConfig, FeatureMatrix, cluster
from app.services.graph_core import Edge, LabeledGraph, SubgraphRecord
from app.services.isomorphism import OccurrenceMatrix
from app.services.selection import SelectionReport
from app.services.topo_descriptors import ATTRIBUTE_NAMES, describe_many
from app.utils.errors import EvaluationError

logger = logging.getLogger(__name__)

SYNTH_LABELS = ("C", "N", "O", "S")
MIN_BENCHMARK_RUNS = 3


# ============================================================
# INFORMATION GAIN
# ============================================================

def _as_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise EvaluationError("labels must be a flat vector")
    return labels


def entropy(labels) -> float:
    """Base-2 entropy of the class distribution; 0 log 0 = 0"""
    labels = _as_labels(labels)
    if labels.size == 0:
        raise EvaluationError("entropy of an empty label vector")
    _, counts = np.unique(labels, return_counts=True)
    return float(_shannon(counts, base=2))


def information_gain(feature, labels) -> float:
    feature = np.asarray(feature)
    labels = _as_labels(labels)
    if feature.shape != labels.shape:
        raise EvaluationError(f"feature length {feature.size} != label length {labels.size}")
    gain = entropy(labels)
    for value in np.unique(feature):
        subset = labels[feature == value]
        gain -= subset.size / labels.size * entropy(subset)
    # conditional entropy can exceed H by rounding only
    return max(0.0, gain)


def avg_information_gain(rows, labels) -> float:
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise EvaluationError("average information gain of an empty pattern set")
    return float(np.mean([information_gain(row, labels) for row in rows]))


@dataclass(frozen=True)
class GainRow:
    selection: str
    encoding: str
    k: Optional[int]
    n_patterns: int
    mean: float
    minimum: float
    maximum: float


def evaluate_reports(
    occurrence: OccurrenceMatrix,
    labels: Sequence[int],
    reports: Sequence[Tuple[str, SelectionReport]],
) -> List[GainRow]:
    """
    One row for the full frequent set, one per report, then an average row
    per encoding with mean/min/max over its reports.
    """
    labels = np.asarray(labels)
    if occurrence.shape[1] != labels.size:
        raise EvaluationError(
            f"occurrence matrix covers {occurrence.shape[1]} graphs but {labels.size} labels were given"
        )
    fsg = avg_information_gain(occurrence.bits, labels)
    rows = [GainRow("FSG", "all", None, occurrence.shape[0], fsg, fsg, fsg)]

    by_encoding: Dict[str, List[float]] = {}
    for name, report in reports:
        value = avg_information_gain(occurrence.rows_for(report.representatives), labels)
        rows.append(GainRow(name, report.encoding, report.k, len(report.representatives), value, value, value))
        by_encoding.setdefault(report.encoding, []).append(value)

    for encoding, values in by_encoding.items():
        rows.append(GainRow(
            "Average", encoding, None, len(values),
            float(np.mean(values)), float(min(values)), float(max(values)),
        ))
    return rows


def write_gain_csv(rows: Iterable[GainRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["selection", "encoding", "k", "n_patterns", "avg_information_gain", "min", "max"])
    for row in rows:
        writer.writerow([
            row.selection, row.encoding, "" if row.k is None else row.k, row.n_patterns,
            repr(row.mean), repr(row.minimum), repr(row.maximum),
        ])


# ============================================================
# SIZE DISTRIBUTIONS
# ============================================================

def size_histogram(subgraphs: Iterable[SubgraphRecord]) -> Dict[int, int]:
    """Number of patterns per size (edge count)"""
    counts = Counter(record.pattern.n_edges for record in subgraphs)
    return dict(sorted(counts.items()))


def histogram_table(histograms: Dict[str, Dict[int, int]], stream: TextIO) -> None:
    """TSV: one row per size, one column per named histogram"""
    sizes = sorted({size for hist in histograms.values() for size in hist})
    names = list(histograms)
    stream.write("\t".join(["size"] + names) + "\n")
    for size in sizes:
        stream.write("\t".join([str(size)] + [str(histograms[n].get(size, 0)) for n in names]) + "\n")


# ============================================================
# SYNTHETIC DATA
# ============================================================

def synth_occurrences(n_subgraphs: int, n_graphs: int, seed: int = 0) -> OccurrenceMatrix:
    """
    Random occurrence lists: each pattern draws a count uniformly in
    [0, n_graphs], then that many distinct graphs.
    """
    if n_subgraphs < 1 or n_graphs < 1:
        raise EvaluationError("n_subgraphs and n_graphs must be >= 1")
    rng = np.random.default_rng(seed)
    bits = np.zeros((n_subgraphs, n_graphs), dtype=np.uint8)
    for row in bits:
        count = int(rng.integers(0, n_graphs + 1))
        row[rng.choice(n_graphs, size=count, replace=False)] = 1
    return OccurrenceMatrix(bits, tuple(range(n_subgraphs)), tuple(str(j) for j in range(n_graphs)))


def random_connected_graph(rng: np.random.Generator, n_nodes: int, extra_edge_prob: float) -> LabeledGraph:
    """Random recursive spanning tree plus independent extra edges"""
    edges = {(int(rng.integers(v)), v) for v in range(1, n_nodes)}
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    labels = tuple(SYNTH_LABELS[i] for i in rng.integers(len(SYNTH_LABELS), size=n_nodes))
    return LabeledGraph(labels, tuple(Edge(u, v) for u, v in sorted(edges)))


def synth_patterns(n_subgraphs: int, seed: int = 0, min_nodes: int = 3, max_nodes: int = 12) -> List[SubgraphRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for pattern_id in range(n_subgraphs):
        n_nodes = int(rng.integers(min_nodes, max_nodes + 1))
        graph = random_connected_graph(rng, n_nodes, float(rng.uniform(0.0, 0.5)))
        records.append(SubgraphRecord(graph, pattern_id))
    return records


# ============================================================
# BENCHMARK
# ============================================================

@dataclass(frozen=True)
class BenchmarkSpec:
    encodings: Tuple[str, ...] = ("topological", "context")
    n_subgraphs: Tuple[int, ...] = (2000,)
    n_graphs: Tuple[int, ...] = (1000,)
    ks: Tuple[int, ...] = (50,)
    algorithm: str = "clarans"
    seeds: Tuple[int, ...] = (0, 1, 2)
    attribute_mask: Tuple[str, ...] = ATTRIBUTE_NAMES
    numlocal: int = 2
    maxneighbor: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        unknown = set(self.encodings) - {"topological", "context"}
        if unknown:
            raise EvaluationError(f"unknown encoding(s): {', '.join(sorted(unknown))}")
        if len(self.seeds) < 1:
            raise EvaluationError("benchmark needs at least one seed")
        if len(self.seeds) < MIN_BENCHMARK_RUNS:
            logger.warning(
                "Only %d run(s) per configuration; medians want at least %d seeds",
                len(self.seeds), MIN_BENCHMARK_RUNS,
            )


@dataclass(frozen=True)
class TimingRow:
    method: str
    n_subgraphs: int
    n_graphs: int
    k: int
    dim: int
    encode_seconds: float
    cluster_seconds: float
    runs: int
    samples: Tuple[float, ...] = field(default=(), compare=False)


def _time_clustering(rows: np.ndarray, k: int, spec: BenchmarkSpec) -> List[float]:
    samples = []
    for seed in spec.seeds:
        config = ClusteringConfig(spec.algorithm, spec.numlocal, spec.maxneighbor, seed)
        matrix = FeatureMatrix(rows)
        started = time.perf_counter()
        cluster(matrix, k, config)
        samples.append(time.perf_counter() - started)
    return samples


def benchmark(spec: BenchmarkSpec) -> List[TimingRow]:
    """
    Clustering wall-clock per configuration (median over seeds).
    Encoding time is measured once per input and reported separately.
    Configurations run one after another.
    """
    results = []
    for n_subgraphs in spec.n_subgraphs:
        topo_rows, topo_encode = None, 0.0
        if "topological" in spec.encodings:
            patterns = synth_patterns(n_subgraphs, seed=spec.seeds[0])
            started = time.perf_counter()
            topo_rows = describe_many([p.pattern for p in patterns], spec.attribute_mask, threads=spec.threads)
            topo_encode = time.perf_counter() - started

        for n_graphs in spec.n_graphs:
            context_rows, context_encode = None, 0.0
            if "context" in spec.encodings:
                started = time.perf_counter()
                context_rows = synth_occurrences(n_subgraphs, n_graphs, seed=spec.seeds[0]).bits.astype(np.float64)
                context_encode = time.perf_counter() - started

            for k in spec.ks:
                for method, rows, encode in (
                    ("topological", topo_rows, topo_encode),
                    ("context", context_rows, context_encode),
                ):
                    if rows is None:
                        continue
                    samples = _time_clustering(rows, k, spec)
                    row = TimingRow(
                        method, n_subgraphs, n_graphs, k, rows.shape[1],
                        encode, statistics.median(samples), len(samples), tuple(samples),
                    )
                    logger.info(
                        "bench %s n=%d |G|=%d k=%d: %.3fs",
                        method, n_subgraphs, n_graphs, k, row.cluster_seconds,
                    )
                    results.append(row)
    return results


TIMING_FIELDS = ("method", "n_subgraphs", "n_graphs", "k", "dim", "encode_seconds", "cluster_seconds", "runs")


def write_timing_csv(rows: Iterable[TimingRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TIMING_FIELDS)
    for row in rows:
        writer.writerow([getattr(row, name) for name in TIMING_FIELDS])


def write_timing_tsv(rows: Iterable[TimingRow], stream: TextIO) -> None:
    """Curve-friendly layout: one line per configuration, seconds last"""
    stream.write("# method\tn_subgraphs\tn_graphs\tk\tcluster_seconds\n")
    for row in rows:
        stream.write(f"{row.method}\t{row.n_subgraphs}\t{row.n_graphs}\t{row.k}\t{row.cluster_seconds:.6f}\n")
