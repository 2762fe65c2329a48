"""
Topological description vectors for subgraph patterns.

Seventeen built-in attributes in a fixed order; extra attributes can be
plugged in with @register_attribute and selected through the mask.
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import networkx as nx
import numpy as np

from app.services.graph_core import LabeledGraph, adjacency_matrix
from app.utils.errors import DescriptorError
from app.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

ATTRIBUTE_NAMES: Tuple[str, ...] = (
    "n_nodes",
    "n_edges",
    "avg_degree",
    "density",
    "avg_clustering_coeff",
    "avg_eccentricity",
    "diameter",
    "radius",
    "avg_closeness",
    "pct_central",
    "pct_endpoints",
    "n_distinct_eigenvalues",
    "spectral_radius",
    "second_largest_eigenvalue",
    "energy",
    "neighborhood_impurity",
    "link_impurity",
)

EIGEN_RELATIVE_TOLERANCE = 1e-6

_EXTRA_ATTRIBUTES: Dict[str, Callable[[LabeledGraph], float]] = {}


def register_attribute(name: str):
    """Decorator: make a graph -> float function available as an attribute"""
    def decorator(fn: Callable[[LabeledGraph], float]):
        if name in ATTRIBUTE_NAMES or name in _EXTRA_ATTRIBUTES:
            raise DescriptorError(f"attribute {name!r} already defined")
        _EXTRA_ATTRIBUTES[name] = fn
        return fn
    return decorator


def unregister_attribute(name: str) -> None:
    _EXTRA_ATTRIBUTES.pop(name, None)


def available_attributes() -> Tuple[str, ...]:
    return ATTRIBUTE_NAMES + tuple(_EXTRA_ATTRIBUTES)


def parse_attribute_mask(text: Optional[str]) -> Tuple[str, ...]:
    """'all' (or empty) means the 17 built-ins; otherwise comma-separated names"""
    if text is None or text.strip() in ("", "all"):
        return ATTRIBUTE_NAMES
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    known = set(available_attributes())
    unknown = [n for n in names if n not in known]
    if unknown:
        raise DescriptorError(f"unknown attribute(s): {', '.join(unknown)}")
    if len(set(names)) != len(names):
        raise DescriptorError("attribute mask repeats a name")
    return names


@dataclass(frozen=True)
class TopoVector:
    values: np.ndarray
    names: Tuple[str, ...] = ATTRIBUTE_NAMES

    def as_dict(self) -> Dict[str, float]:
        return {name: float(v) for name, v in zip(self.names, self.values)}

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


# ============================================================
# PER-ATTRIBUTE PROFILES
# ============================================================

def basic_counts(g: LabeledGraph) -> Tuple[int, int]:
    return g.n_nodes, g.n_edges


def degree_stats(g: LabeledGraph) -> Tuple[float, float]:
    """(average degree, fraction of degree-1 nodes)"""
    degrees = g.degrees()
    return float(degrees.mean()), float(np.count_nonzero(degrees == 1) / g.n_nodes)


def density(g: LabeledGraph) -> float:
    return float(nx.density(g.to_networkx()))


def avg_clustering_coefficient(g: LabeledGraph) -> float:
    # nx gives c(u) = 0 when deg(u) < 2
    return float(nx.average_clustering(g.to_networkx()))


def _shortest_path_lengths(g: LabeledGraph) -> List[Dict[int, int]]:
    graph = g.to_networkx()
    return [dict(nx.single_source_shortest_path_length(graph, u)) for u in range(g.n_nodes)]


def eccentricity_profile(g: LabeledGraph) -> Tuple[float, int, int, float]:
    """(avg effective eccentricity, diameter, radius, fraction of central nodes)"""
    ecc = np.array([max(lengths.values()) for lengths in _shortest_path_lengths(g)], dtype=np.int64)
    radius = int(ecc.min())
    return (
        float(ecc.mean()),
        int(ecc.max()),
        radius,
        float(np.count_nonzero(ecc == radius) / g.n_nodes),
    )


def avg_closeness_centrality(g: LabeledGraph) -> float:
    n = g.n_nodes
    closeness = []
    for lengths in _shortest_path_lengths(g):
        total = sum(lengths.values())
        closeness.append((n - 1) / total if total > 0 else 0.0)
    return float(np.mean(closeness))


def spectral_profile(g: LabeledGraph) -> Tuple[int, float, float, float]:
    """(distinct eigenvalues, spectral radius, second largest eigenvalue, energy)"""
    a = adjacency_matrix(g).astype(np.float64)
    try:
        eigenvalues = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as e:
        raise DescriptorError(f"eigensolver failed: {e}")

    eigenvalues = np.sort(eigenvalues)[::-1]
    spectral_radius = float(np.abs(eigenvalues).max())
    tolerance = EIGEN_RELATIVE_TOLERANCE * max(1.0, spectral_radius)
    n_distinct = 1 + int(np.count_nonzero(np.abs(np.diff(eigenvalues)) > tolerance))
    second = float(eigenvalues[1]) if len(eigenvalues) > 1 else 0.0
    energy = float(np.sum(eigenvalues ** 2))
    return n_distinct, spectral_radius, second, energy


def impurity_profile(g: LabeledGraph) -> Tuple[float, float]:
    """(neighborhood impurity over impure nodes, fraction of impure edges)"""
    impurity = []
    for u, nbrs in enumerate(g.neighbors):
        own = g.labels[u]
        degree = len({g.labels[v] for v in nbrs} - {own})
        if degree > 0:
            impurity.append(degree)
    neighborhood = float(np.mean(impurity)) if impurity else 0.0
    if g.n_edges == 0:
        return neighborhood, 0.0
    impure_edges = sum(1 for u, v, _ in g.edges if g.labels[u] != g.labels[v])
    return neighborhood, impure_edges / g.n_edges


# ============================================================
# VECTOR ASSEMBLY
# ============================================================

_GROUPS = {
    "counts": (("n_nodes", "n_edges"), basic_counts),
    "degree": (("avg_degree", "pct_endpoints"), degree_stats),
    "density": (("density",), lambda g: (density(g),)),
    "clustering": (("avg_clustering_coeff",), lambda g: (avg_clustering_coefficient(g),)),
    "eccentricity": (("avg_eccentricity", "diameter", "radius", "pct_central"), eccentricity_profile),
    "closeness": (("avg_closeness",), lambda g: (avg_closeness_centrality(g),)),
    "spectral": (
        ("n_distinct_eigenvalues", "spectral_radius", "second_largest_eigenvalue", "energy"),
        spectral_profile,
    ),
    "impurity": (("neighborhood_impurity", "link_impurity"), impurity_profile),
}

_GROUP_OF = {name: group for group, (names, _) in _GROUPS.items() for name in names}


def describe(g: LabeledGraph, attribute_mask: Optional[Sequence[str]] = None) -> TopoVector:
    """Encode g as a topological description vector restricted to the mask"""
    names = tuple(attribute_mask) if attribute_mask is not None else ATTRIBUTE_NAMES
    if g.n_nodes < 1:
        raise DescriptorError("cannot describe an empty graph")

    computed: Dict[str, float] = {}
    for name in names:
        if name in computed:
            continue
        group = _GROUP_OF.get(name)
        if group is not None:
            group_names, fn = _GROUPS[group]
            computed.update(zip(group_names, (float(v) for v in fn(g))))
        elif name in _EXTRA_ATTRIBUTES:
            computed[name] = float(_EXTRA_ATTRIBUTES[name](g))
        else:
            raise DescriptorError(f"unknown attribute {name!r}")

    return TopoVector(np.array([computed[name] for name in names], dtype=np.float64), names)


def graph_digest(g: LabeledGraph) -> str:
    """Digest of the graph's canonical text; key for descriptor caching"""
    text = json.dumps([list(g.labels), [[u, v, l] for u, v, l in g.edges]], separators=(",", ":"))
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


def describe_many(
    graphs: Sequence[LabeledGraph],
    attribute_mask: Optional[Sequence[str]] = None,
    threads: int = 1,
    cache=None,
) -> np.ndarray:
    """
    Stack description vectors, one row per graph, input order preserved.

    `cache` (get(graph, names) / set(graph, names, values)) memoizes vectors
    per mask; it is consulted on the calling thread only.
    """
    names = tuple(attribute_mask) if attribute_mask is not None else ATTRIBUTE_NAMES
    if not graphs:
        return np.zeros((0, len(names)), dtype=np.float64)

    rows: List[Optional[np.ndarray]] = [None] * len(graphs)
    if cache is not None:
        for i, g in enumerate(graphs):
            full = cache.get(g, names)
            if full is not None:
                rows[i] = full

    missing = [i for i, row in enumerate(rows) if row is None]
    fresh = ordered_map(lambda i: describe(graphs[i], names).values, missing, threads)
    for i, values in zip(missing, fresh):
        rows[i] = values
        if cache is not None:
            cache.set(graphs[i], names, values)

    if missing:
        logger.debug("Described %d graphs (%d from cache)", len(graphs), len(graphs) - len(missing))
    return np.vstack(rows)


def write_feature_tsv(
    stream: TextIO,
    row_ids: Iterable,
    names: Sequence[str],
    matrix: np.ndarray,
) -> None:
    stream.write("\t".join(["pattern_id"] + list(names)) + "\n")
    for row_id, row in zip(row_ids, matrix):
        stream.write("\t".join([str(row_id)] + [repr(float(v)) for v in row]) + "\n")
