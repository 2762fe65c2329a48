"""
Subgraph-isomorphism decision and binary occurrence matrices.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Sequence, TextIO, Tuple

import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher

from app.services.graph_core import GraphDatabase, LabeledGraph, SubgraphRecord
from app.utils.errors import GraphError, ParseError
from app.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OccurrenceMatrix:
    bits: np.ndarray
    pattern_ids: Tuple[int, ...]
    graph_ids: Tuple[str, ...]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(len(self.pattern_ids), len(self.graph_ids))
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "pattern_ids", tuple(self.pattern_ids))
        object.__setattr__(self, "graph_ids", tuple(str(i) for i in self.graph_ids))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bits.shape

    def row_sums(self) -> np.ndarray:
        return self.bits.sum(axis=1, dtype=np.int64)

    def rows_for(self, pattern_ids: Iterable[int]) -> np.ndarray:
        index = {pid: i for i, pid in enumerate(self.pattern_ids)}
        try:
            return self.bits[[index[pid] for pid in pattern_ids]]
        except KeyError as e:
            raise GraphError(f"pattern {e.args[0]} is not in the occurrence matrix")


def _node_match(a, b) -> bool:
    return a["label"] == b["label"]


def _edge_match(a, b) -> bool:
    # absent labels match only absent labels
    return a.get("label") == b.get("label")


def _could_embed(pattern: LabeledGraph, target: LabeledGraph) -> bool:
    if pattern.n_nodes > target.n_nodes or pattern.n_edges > target.n_edges:
        return False
    need = Counter(pattern.labels)
    have = Counter(target.labels)
    return all(have[label] >= count for label, count in need.items())


def embeds(pattern: LabeledGraph, target: LabeledGraph) -> bool:
    """True iff an injective label-preserving map sends pattern edges onto target edges."""
    if not _could_embed(pattern, target):
        return False
    if pattern.n_edges == 0:
        return True
    matcher = GraphMatcher(
        target.to_networkx(),
        pattern.to_networkx(),
        node_match=_node_match,
        edge_match=_edge_match,
    )
    return matcher.subgraph_is_monomorphic()


def support(pattern: LabeledGraph, db: GraphDatabase) -> int:
    return sum(1 for graph in db.graphs if embeds(pattern, graph))


def occurrence_matrix(
    patterns: Sequence[SubgraphRecord],
    db: GraphDatabase,
    threads: int = 1,
) -> OccurrenceMatrix:
    """
    bits[p][g] = 1 iff pattern p embeds in graph g.
    Records carrying an occurrence list are used as-is, no search.
    """
    n_graphs = len(db)

    def row(record: SubgraphRecord) -> np.ndarray:
        bits = np.zeros(n_graphs, dtype=np.uint8)
        if record.occurrences is not None:
            for index in record.occurrences:
                if not 0 <= index < n_graphs:
                    raise GraphError(
                        f"pattern {record.pattern_id}: occurrence index {index} "
                        f"outside database of {n_graphs} graphs"
                    )
                bits[index] = 1
            return bits
        for j, graph in enumerate(db.graphs):
            if embeds(record.pattern, graph):
                bits[j] = 1
        return bits

    rows = ordered_map(row, patterns, threads)
    bits = np.vstack(rows) if rows else np.zeros((0, n_graphs), dtype=np.uint8)
    logger.debug("Occurrence matrix %dx%d", *bits.shape)
    return OccurrenceMatrix(bits, tuple(r.pattern_id for r in patterns), db.graph_ids)


def occurrences_from_records(patterns: Sequence[SubgraphRecord], graph_ids: Sequence[str]) -> OccurrenceMatrix:
    """Context matrix built purely from per-record occurrence lists"""
    missing = [r.pattern_id for r in patterns if r.occurrences is None]
    if missing:
        raise GraphError(f"no occurrence list for pattern(s) {missing[:5]} and no graph database given")
    placeholder = GraphDatabase(tuple(LabeledGraph(("?",)) for _ in graph_ids), tuple(graph_ids))
    return occurrence_matrix(patterns, placeholder)


# ============================================================
# TSV
# ============================================================

def write_occurrence_tsv(matrix: OccurrenceMatrix, stream: TextIO) -> None:
    stream.write("\t".join(["pattern_id"] + list(matrix.graph_ids)) + "\n")
    for pattern_id, bits in zip(matrix.pattern_ids, matrix.bits):
        stream.write("\t".join([str(pattern_id)] + [str(int(b)) for b in bits]) + "\n")


def read_occurrence_tsv(stream: Iterable[str]) -> OccurrenceMatrix:
    lines = iter(stream)
    try:
        header = next(lines).rstrip("\n").split("\t")
    except StopIteration:
        raise ParseError("empty occurrence file")
    graph_ids = header[1:]
    pattern_ids: List[int] = []
    rows: List[List[int]] = []
    for line_number, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != len(header):
            raise ParseError("row width does not match header", line_number)
        try:
            pattern_ids.append(int(parts[0]))
            values = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError("non-integer cell", line_number)
        if any(v not in (0, 1) for v in values):
            raise ParseError("occurrence cells must be 0 or 1", line_number)
        rows.append(values)
    bits = np.array(rows, dtype=np.uint8) if rows else np.zeros((0, len(graph_ids)), dtype=np.uint8)
    return OccurrenceMatrix(bits, tuple(pattern_ids), tuple(graph_ids))
