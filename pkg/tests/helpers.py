"""Small graph builders and file writers shared by the test modules"""
from itertools import combinations

from app.services.graph_core import Edge, LabeledGraph, SubgraphRecord, format_subgraphs


def graph(labels, edges):
    return LabeledGraph(tuple(labels), tuple(Edge(*e) for e in edges))


def clique(n, label="A"):
    return graph([label] * n, combinations(range(n), 2))


def path(n, labels=None):
    return graph(labels or ["A"] * n, [(i, i + 1) for i in range(n - 1)])


def star(n_leaves, label="A"):
    return graph([label] * (n_leaves + 1), [(0, i) for i in range(1, n_leaves + 1)])


def single(label="A"):
    return LabeledGraph((label,))


def records_of(graphs, start=0):
    return [SubgraphRecord(g, start + i) for i, g in enumerate(graphs)]


def write_subgraphs(path_, records):
    path_.write_text(format_subgraphs(records))
    return str(path_)


def pdb_atom(serial, resname, resseq, xyz, name="CA", chain="A", altloc=" "):
    x, y, z = xyz
    return (
        f"ATOM  {serial:5d} {name:^4s}{altloc}{resname:>3s} {chain}{resseq:4d}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C"
    )


def pdb_text(residues):
    """residues: (resname, (x, y, z)) in chain order"""
    lines = [pdb_atom(i + 1, name, i + 1, xyz) for i, (name, xyz) in enumerate(residues)]
    return "\n".join(lines + ["END"]) + "\n"
