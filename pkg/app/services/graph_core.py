"""
Graph data model and ingestion.

gSpan transaction text:
    t # <id> [* <support>]
    v <node_id> <label>
    e <u> <v> [<edge_label>]
Subgraph files may add per block:
    s <support>
    x <graph_index> <graph_index> ...
"""
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from app.utils.errors import GraphError, ParseError

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 7.0
PDB_SUFFIXES = (".pdb", ".ent")


class Edge(NamedTuple):
    u: int
    v: int
    label: Optional[str] = None


@dataclass(frozen=True)
class LabeledGraph:
    """Undirected, node-labeled simple graph; node ids are 0..n-1."""

    labels: Tuple[str, ...]
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        seen = set()
        canonical = []
        for edge in self.edges:
            u, v, label = (tuple(edge) + (None,))[:3]
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < len(labels) and 0 <= v < len(labels)):
                raise GraphError(f"edge ({u}, {v}) references an undeclared node")
            u, v = min(u, v), max(u, v)
            if (u, v) in seen:
                raise GraphError(f"parallel edge ({u}, {v})")
            seen.add((u, v))
            canonical.append(Edge(u, v, None if label is None else str(label)))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", tuple(sorted(canonical)))

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> Tuple[Tuple[int, ...], ...]:
        adj: List[List[int]] = [[] for _ in self.labels]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(nbrs)) for nbrs in adj)

    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self.neighbors], dtype=np.int64)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for node_id, label in enumerate(self.labels):
            g.add_node(node_id, label=label)
        for u, v, label in self.edges:
            g.add_edge(u, v, label=label)
        return g


@dataclass(frozen=True)
class GraphDatabase:
    graphs: Tuple[LabeledGraph, ...] = ()
    graph_ids: Tuple[str, ...] = ()
    labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        object.__setattr__(self, "graph_ids", tuple(str(i) for i in self.graph_ids))
        if len(self.graph_ids) != len(self.graphs):
            raise GraphError("graph_ids must name every graph")
        if len(set(self.graph_ids)) != len(self.graph_ids):
            raise GraphError("graph_ids must be unique")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(int(label) for label in self.labels))
            if len(self.labels) != len(self.graphs):
                raise GraphError("class labels must cover every graph")

    def __len__(self) -> int:
        return len(self.graphs)

    def with_labels(self, labels: Iterable[int]) -> "GraphDatabase":
        return GraphDatabase(self.graphs, self.graph_ids, tuple(labels))


@dataclass(frozen=True)
class SubgraphRecord:
    pattern: LabeledGraph
    pattern_id: int
    support: int = 0
    occurrences: Optional[Tuple[int, ...]] = field(default=None)

    def __post_init__(self):
        if self.support < 0:
            raise GraphError(f"pattern {self.pattern_id}: negative support")
        if self.occurrences is not None:
            object.__setattr__(self, "occurrences", tuple(int(i) for i in self.occurrences))
            if self.support != len(self.occurrences):
                raise GraphError(
                    f"pattern {self.pattern_id}: support {self.support} "
                    f"!= {len(self.occurrences)} occurrences"
                )


# ============================================================
# gSpan TEXT
# ============================================================

class _Block:
    """Accumulates one 't' block while parsing"""

    def __init__(self, header: List[str], line_number: int):
        self.header = header
        self.line_number = line_number
        self.labels: Dict[int, str] = {}
        self.edges: List[Edge] = []
        self.edge_pairs = set()
        self.support: Optional[int] = None
        self.support_line: Optional[int] = None
        self.occurrences: Optional[List[int]] = None

    def build(self) -> LabeledGraph:
        if sorted(self.labels) != list(range(len(self.labels))):
            raise ParseError("node ids must be contiguous from 0", self.line_number)
        labels = tuple(self.labels[i] for i in range(len(self.labels)))
        return LabeledGraph(labels, tuple(self.edges))


def _int(token: str, line_number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {token!r}", line_number)


def _iter_blocks(lines: Iterable[str], allow_extensions: bool):
    block: Optional[_Block] = None
    for line_number, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]

        if tag == "t":
            if block is not None:
                yield block
                block = None
            # "t # -1" terminates some miner outputs
            if len(parts) >= 3 and parts[2] == "-1":
                continue
            if len(parts) < 3 or parts[1] != "#":
                raise ParseError("expected 't # <id>'", line_number)
            block = _Block(parts, line_number)
            if len(parts) >= 5 and parts[3] == "*":
                if not allow_extensions:
                    raise ParseError("support annotation in a graph database", line_number)
                block.support = _int(parts[4], line_number, "support")
                block.support_line = line_number
            continue

        if block is None:
            raise ParseError(f"'{tag}' line before any 't' line", line_number)

        if tag == "v":
            if len(parts) != 3:
                raise ParseError("expected 'v <id> <label>'", line_number)
            node_id = _int(parts[1], line_number, "node id")
            if node_id in block.labels:
                raise ParseError(f"duplicate node id {node_id}", line_number)
            block.labels[node_id] = parts[2]
        elif tag == "e":
            if len(parts) not in (3, 4):
                raise ParseError("expected 'e <u> <v> [<label>]'", line_number)
            u = _int(parts[1], line_number, "edge endpoint")
            v = _int(parts[2], line_number, "edge endpoint")
            for endpoint in (u, v):
                if endpoint not in block.labels:
                    raise ParseError(f"edge references undeclared node {endpoint}", line_number)
            if u == v:
                raise ParseError(f"self-loop on node {u}", line_number)
            pair = (min(u, v), max(u, v))
            if pair in block.edge_pairs:
                raise ParseError(f"parallel edge {pair}", line_number)
            block.edge_pairs.add(pair)
            block.edges.append(Edge(u, v, parts[3] if len(parts) == 4 else None))
        elif tag == "s" and allow_extensions:
            if len(parts) != 2:
                raise ParseError("expected 's <support>'", line_number)
            support = _int(parts[1], line_number, "support")
            if block.support is not None and block.support != support:
                raise ParseError(f"support {support} contradicts {block.support}", line_number)
            block.support = support
            block.support_line = line_number
        elif tag == "x" and allow_extensions:
            indices = [_int(tok, line_number, "graph index") for tok in parts[1:]]
            block.occurrences = (block.occurrences or []) + indices
        else:
            raise ParseError(f"unknown record type '{tag}'", line_number)

    if block is not None:
        yield block


def parse_graph_db(stream: Iterable[str], format_id: str = "gspan") -> GraphDatabase:
    """Parse a gSpan transaction stream into a GraphDatabase, graphs in file order."""
    if format_id != "gspan":
        raise ParseError(f"unsupported graph format: {format_id}")

    graphs, graph_ids = [], []
    seen_ids = set()
    for block in _iter_blocks(stream, allow_extensions=False):
        graph_id = block.header[2]
        if graph_id in seen_ids:
            raise ParseError(f"duplicate graph id {graph_id}", block.line_number)
        seen_ids.add(graph_id)
        graphs.append(block.build())
        graph_ids.append(graph_id)

    logger.debug("Parsed %d graphs", len(graphs))
    return GraphDatabase(tuple(graphs), tuple(graph_ids))


def parse_subgraphs(stream: Iterable[str]) -> List[SubgraphRecord]:
    """Parse miner output into SubgraphRecords.

    Support comes from the 's' line (or '*' header), else from the 'x' list,
    else 0. Both present and disagreeing is an error.
    """
    records = []
    seen_ids = set()
    for block in _iter_blocks(stream, allow_extensions=True):
        pattern_id = _int(block.header[2], block.line_number, "pattern id")
        if pattern_id in seen_ids:
            raise ParseError(f"duplicate pattern id {pattern_id}", block.line_number)
        seen_ids.add(pattern_id)

        occurrences = tuple(block.occurrences) if block.occurrences is not None else None
        if occurrences is not None and len(set(occurrences)) != len(occurrences):
            raise ParseError(f"pattern {pattern_id}: repeated graph index", block.line_number)
        if block.support is not None:
            support = block.support
            if occurrences is not None and support != len(occurrences):
                raise ParseError(
                    f"pattern {pattern_id}: support {support} != {len(occurrences)} listed occurrences",
                    block.support_line,
                )
        elif occurrences is not None:
            support = len(occurrences)
        else:
            support = 0
        if support < 0:
            raise ParseError(f"pattern {pattern_id}: negative support", block.support_line)

        records.append(SubgraphRecord(block.build(), pattern_id, support, occurrences))

    logger.debug("Parsed %d subgraph patterns", len(records))
    return records


def _graph_lines(graph: LabeledGraph) -> List[str]:
    lines = [f"v {node_id} {label}" for node_id, label in enumerate(graph.labels)]
    for u, v, label in graph.edges:
        lines.append(f"e {u} {v}" if label is None else f"e {u} {v} {label}")
    return lines


def format_graph_db(db: GraphDatabase) -> str:
    lines = []
    for graph_id, graph in zip(db.graph_ids, db.graphs):
        lines.append(f"t # {graph_id}")
        lines.extend(_graph_lines(graph))
    return "".join(f"{line}\n" for line in lines)


def format_subgraphs(records: Iterable[SubgraphRecord]) -> str:
    lines = []
    for record in records:
        lines.append(f"t # {record.pattern_id}")
        lines.extend(_graph_lines(record.pattern))
        lines.append(f"s {record.support}")
        if record.occurrences is not None:
            lines.append(" ".join(["x"] + [str(i) for i in record.occurrences]))
    return "".join(f"{line}\n" for line in lines)


def parse_labels(stream: Iterable[str], graph_ids: Optional[Iterable[str]] = None) -> Tuple[Tuple[str, ...], Tuple[int, ...]]:
    """
    Parse '<graph_id> <+1|-1>' lines.

    With graph_ids, labels are returned in that order and must cover it exactly;
    otherwise file order is kept.
    """
    by_id: Dict[str, int] = {}
    order: List[str] = []
    for line_number, raw in enumerate(stream, start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) != 2:
            raise ParseError("expected '<graph_id> <+1|-1>'", line_number)
        graph_id, symbol = parts
        if symbol in ("+1", "1"):
            value = 1
        elif symbol == "-1":
            value = -1
        else:
            raise ParseError(f"class label must be +1 or -1, got {symbol!r}", line_number)
        if graph_id in by_id:
            raise ParseError(f"duplicate graph id {graph_id}", line_number)
        by_id[graph_id] = value
        order.append(graph_id)

    if graph_ids is None:
        return tuple(order), tuple(by_id[i] for i in order)

    graph_ids = tuple(graph_ids)
    missing = [i for i in graph_ids if i not in by_id]
    if missing:
        raise ParseError(f"no class label for graph(s): {', '.join(missing[:5])}")
    unknown = sorted(set(by_id) - set(graph_ids))
    if unknown:
        raise ParseError(f"labels for unknown graph(s): {', '.join(unknown[:5])}")
    return graph_ids, tuple(by_id[i] for i in graph_ids)


# ============================================================
# PDB
# ============================================================

def _ca_records(text: str):
    residues = {}
    order = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if line.startswith("ENDMDL"):
            break
        if not line.startswith("ATOM"):
            continue
        if line[12:16].strip() != "CA":
            continue
        key = (line[21:22], line[22:26].strip(), line[26:27])
        if key in residues:
            # first alternate location wins
            continue
        try:
            coords = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError:
            raise ParseError("unparseable coordinate field", line_number)
        residues[key] = (line[17:20].strip(), coords)
        order.append(key)
    return [residues[key] for key in order]


def pdb_to_contact_graph(pdb_text: str, delta: float = DEFAULT_DELTA) -> LabeledGraph:
    """One node per residue (3-letter type); edge iff the C-alpha distance is <= delta."""
    if delta <= 0:
        raise GraphError(f"delta must be positive, got {delta}")
    records = _ca_records(pdb_text)
    if not records:
        raise ParseError("no C-alpha atoms found")

    labels = tuple(name for name, _ in records)
    if len(records) == 1:
        return LabeledGraph(labels)

    coords = np.array([xyz for _, xyz in records], dtype=np.float64)
    distances = squareform(pdist(coords))
    us, vs = np.nonzero(np.triu(distances <= delta, k=1))
    return LabeledGraph(labels, tuple(Edge(int(u), int(v)) for u, v in zip(us, vs)))


def read_pdb_dir(path, delta: float = DEFAULT_DELTA) -> GraphDatabase:
    """Build a contact-graph database from every PDB file in a directory"""
    root = Path(path)
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in PDB_SUFFIXES)
    graphs, graph_ids = [], []
    for pdb_file in files:
        try:
            graphs.append(pdb_to_contact_graph(pdb_file.read_text(), delta))
        except ParseError as e:
            raise ParseError(f"{os.path.basename(pdb_file)}: {e}")
        graph_ids.append(pdb_file.stem)
    logger.info("Built %d contact graphs from %s (delta=%.2f)", len(graphs), root, delta)
    return GraphDatabase(tuple(graphs), tuple(graph_ids))


def adjacency_matrix(g: LabeledGraph) -> np.ndarray:
    a = np.zeros((g.n_nodes, g.n_nodes), dtype=np.int64)
    for u, v, _ in g.edges:
        a[u, v] = 1
        a[v, u] = 1
    return a
