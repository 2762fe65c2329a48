import os

import click
from flask import Blueprint

from app.blueprints.graphs import load_graph_db, load_subgraphs, run_config
from app.services.clustering import ALGORITHMS
from app.services.graph_core import parse_labels
from app.services.selection import NORMALIZATIONS
from app.services.selection_service import FileReportRepository, SelectionService
from app.utils.cache import DescriptorCache
from app.utils.errors import cli_errors

bp = Blueprint("selection", __name__, cli_group=None)

_existing = click.Path(exists=True, dir_okay=False)


def clustering_options(f):
    """Options shared by select and baseline"""
    options = [
        click.option("--subgraphs", type=_existing, help="Frequent subgraph file"),
        click.option("--k", type=click.IntRange(min=1), help="Number of representatives"),
        click.option("--algorithm", type=click.Choice(ALGORITHMS)),
        click.option("--numlocal", type=click.IntRange(min=1)),
        click.option("--maxneighbor", type=click.IntRange(min=1)),
        click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1)),
        click.option("--output-dir", type=click.Path(file_okay=False)),
        click.option("--threads", type=click.IntRange(min=1)),
        click.option("--config", "config_file", type=_existing),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _summary(report, paths):
    click.echo(
        f"{report.encoding}: {len(report.representatives)} representatives "
        f"({report.effective_clusters} distinct), total distance {report.total_distance:.6g}"
    )
    for kind, path in paths.items():
        click.echo(f"  {kind}: {path}")


@bp.cli.command("select")
@clustering_options
@click.option("--attributes", help="Comma-separated attribute names, or 'all'")
@click.option("--normalization", type=click.Choice(NORMALIZATIONS))
@cli_errors
def select(subgraphs, k, algorithm, numlocal, maxneighbor, seed, output_dir, threads, config_file,
           attributes, normalization):
    """Select k topological representative subgraphs"""
    cfg = run_config(
        config_file, subgraphs=subgraphs, k=k, algorithm=algorithm, numlocal=numlocal,
        maxneighbor=maxneighbor, seed=seed, output_dir=output_dir, threads=threads,
        attributes=attributes, normalization=normalization,
    )
    if not cfg.subgraphs:
        raise click.UsageError("--subgraphs is required")

    service = SelectionService(FileReportRepository(cfg.output_dir), cache=DescriptorCache(), threads=cfg.threads)
    report, paths = service.run_trs(
        load_subgraphs(cfg.subgraphs), cfg.k, cfg.attribute_mask(), cfg.normalization, cfg.clustering(),
    )
    _summary(report, paths)


@bp.cli.command("baseline")
@clustering_options
@click.option("--graph-db", type=_existing, help="Graph database; omit to use the patterns' occurrence lists")
@click.option("--labels", type=_existing, help="Labels file naming every database graph, in position order")
@click.option("--n-graphs", type=click.IntRange(min=1), help="Database size when patterns carry occurrence lists")
@cli_errors
def baseline(subgraphs, k, algorithm, numlocal, maxneighbor, seed, output_dir, threads, config_file,
             graph_db, labels, n_graphs):
    """Select k representatives by clustering occurrence (context) vectors"""
    cfg = run_config(
        config_file, subgraphs=subgraphs, k=k, algorithm=algorithm, numlocal=numlocal,
        maxneighbor=maxneighbor, seed=seed, output_dir=output_dir, threads=threads,
        graph_db=graph_db, labels=labels,
    )
    if not cfg.subgraphs:
        raise click.UsageError("--subgraphs is required")

    db = load_graph_db(cfg.graph_db) if cfg.graph_db else None
    graph_ids = None
    if db is None and cfg.labels:
        with open(cfg.labels) as stream:
            graph_ids, _ = parse_labels(stream)
        if n_graphs is not None and n_graphs != len(graph_ids):
            raise click.UsageError(f"--n-graphs {n_graphs} disagrees with {len(graph_ids)} labelled graphs")

    service = SelectionService(FileReportRepository(cfg.output_dir), threads=cfg.threads)
    os.makedirs(cfg.output_dir, exist_ok=True)
    report, paths = service.run_naive(
        load_subgraphs(cfg.subgraphs), db, cfg.k, cfg.clustering(),
        occurrence_path=os.path.join(cfg.output_dir, "naive_occurrences.tsv"),
        n_graphs=n_graphs, graph_ids=graph_ids,
    )
    _summary(report, paths)
