import os
from pathlib import Path

import click
from flask import Blueprint, current_app

from app.config import build_run_config
from app.services.graph_core import (
    format_graph_db,
    parse_graph_db,
    parse_subgraphs,
    read_pdb_dir,
)
from app.services.topo_descriptors import describe_many, write_feature_tsv
from app.utils.cache import DescriptorCache, invalidate_all_cache
from app.utils.errors import cli_errors

bp = Blueprint("graphs", __name__, cli_group=None)

_existing = click.Path(exists=True, dir_okay=False)


def load_graph_db(path):
    with open(path) as stream:
        return parse_graph_db(stream)


def load_subgraphs(path):
    with open(path) as stream:
        return parse_subgraphs(stream)


def run_config(config_file=None, **overrides):
    """Helper: defaults < app config < --config file < flags"""
    return build_run_config(config_file, overrides)


def output_path(explicit, output_dir, filename):
    """Helper: explicit --output, else <output_dir>/<filename>"""
    path = Path(explicit) if explicit else Path(output_dir) / filename
    path.parent.mkdir(parents=True, exist_ok=True)
    return str(path)


@bp.cli.command("ingest")
@click.argument("source", type=click.Path(exists=True))
@click.option("--delta", type=float, help="Contact threshold in angstrom for PDB input")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Graph database file to write")
@click.option("--output-dir", type=click.Path(file_okay=False))
@click.option("--config", "config_file", type=_existing)
@cli_errors
def ingest(source, delta, output, output_dir, config_file):
    """Build a gSpan graph database from a PDB directory or a gSpan file"""
    cfg = run_config(config_file, delta=delta, output_dir=output_dir)

    if os.path.isdir(source):
        db = read_pdb_dir(source, cfg.delta)
    else:
        db = load_graph_db(source)

    target = output_path(output, cfg.output_dir, "graphs.gspan")
    with open(target, "w") as stream:
        stream.write(format_graph_db(db))

    n_edges = sum(g.n_edges for g in db.graphs)
    click.echo(f"{len(db)} graphs, {n_edges} edges -> {target}")


@bp.cli.command("describe")
@click.option("--subgraphs", type=_existing, help="Frequent subgraph file")
@click.option("--attributes", help="Comma-separated attribute names, or 'all'")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Feature TSV to write")
@click.option("--output-dir", type=click.Path(file_okay=False))
@click.option("--threads", type=click.IntRange(min=1))
@click.option("--config", "config_file", type=_existing)
@cli_errors
def describe(subgraphs, attributes, output, output_dir, threads, config_file):
    """Write the topological description vector of every pattern"""
    cfg = run_config(
        config_file, subgraphs=subgraphs, attributes=attributes,
        output_dir=output_dir, threads=threads,
    )
    if not cfg.subgraphs:
        raise click.UsageError("--subgraphs is required")

    records = load_subgraphs(cfg.subgraphs)
    names = cfg.attribute_mask()
    matrix = describe_many([r.pattern for r in records], names, threads=cfg.threads, cache=DescriptorCache())

    target = output_path(output, cfg.output_dir, "features.tsv")
    with open(target, "w") as stream:
        write_feature_tsv(stream, [r.pattern_id for r in records], names, matrix)
    click.echo(f"{len(records)} x {len(names)} features -> {target}")


@bp.cli.command("clear-cache")
def clear_cache():
    """Drop memoized description vectors"""
    deleted = invalidate_all_cache(current_app)
    if deleted < 0:
        click.echo("Cache cleared")
    else:
        click.echo(f"Deleted {deleted} cache entries")
