import click
from flask import Blueprint

from app.blueprints.graphs import load_graph_db, load_subgraphs, output_path, run_config
from app.services.clustering import ALGORITHMS
from app.services.evaluation import (
    MIN_BENCHMARK_RUNS,
    BenchmarkSpec,
    benchmark,
    evaluate_reports,
    histogram_table,
    size_histogram,
    write_gain_csv,
    write_timing_csv,
    write_timing_tsv,
)
from app.services.graph_core import parse_labels
from app.services.isomorphism import read_occurrence_tsv
from app.services.selection import ENCODINGS, context_matrix
from app.services.selection_service import FileReportRepository
from app.utils.errors import cli_errors

bp = Blueprint("evaluation", __name__, cli_group=None)

_existing = click.Path(exists=True, dir_okay=False)


def _report_name(report):
    prefix = "TRS" if report.encoding == "topological" else "Naive"
    return f"{prefix}@{report.k}"


def _load_reports(paths, output_dir):
    repository = FileReportRepository(output_dir)
    return [repository.load_report(path) for path in paths]


@bp.cli.command("eval")
@click.option("--labels", required=True, type=_existing, help="'<graph_id> <+1|-1>' per line")
@click.option("--report", "reports", multiple=True, required=True, type=_existing)
@click.option("--subgraphs", type=_existing, help="Frequent subgraph file")
@click.option("--graph-db", type=_existing)
@click.option("--occurrences", type=_existing, help="Occurrence TSV written by baseline")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Information gain CSV to write")
@click.option("--output-dir", type=click.Path(file_okay=False))
@click.option("--threads", type=click.IntRange(min=1))
@click.option("--config", "config_file", type=_existing)
@cli_errors
def evaluate(labels, reports, subgraphs, graph_db, occurrences, output, output_dir, threads, config_file):
    """Average information gain of the full pattern set and each report"""
    cfg = run_config(
        config_file, labels=labels, subgraphs=subgraphs, graph_db=graph_db,
        output_dir=output_dir, threads=threads,
    )

    if occurrences:
        with open(occurrences) as stream:
            occurrence = read_occurrence_tsv(stream)
        with open(cfg.labels) as stream:
            _, classes = parse_labels(stream, occurrence.graph_ids)
    else:
        if not cfg.subgraphs:
            raise click.UsageError("--subgraphs or --occurrences is required")
        records = load_subgraphs(cfg.subgraphs)
        db = load_graph_db(cfg.graph_db) if cfg.graph_db else None
        with open(cfg.labels) as stream:
            graph_ids, classes = parse_labels(stream, db.graph_ids if db else None)
        occurrence = context_matrix(records, db, threads=cfg.threads, graph_ids=graph_ids)

    loaded = _load_reports(reports, cfg.output_dir)
    rows = evaluate_reports(occurrence, classes, [(_report_name(r), r) for r in loaded])

    target = output_path(output, cfg.output_dir, "information_gain.csv")
    with open(target, "w") as stream:
        write_gain_csv(rows, stream)
    for row in rows:
        click.echo(f"{row.selection:<12} {row.encoding:<12} {row.mean:.4f}")
    click.echo(f"-> {target}")


@bp.cli.command("dist")
@click.option("--subgraphs", type=_existing, help="Frequent subgraph file")
@click.option("--report", "reports", multiple=True, type=_existing)
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Histogram TSV to write")
@click.option("--output-dir", type=click.Path(file_okay=False))
@click.option("--config", "config_file", type=_existing)
@cli_errors
def dist(subgraphs, reports, output, output_dir, config_file):
    """Pattern size distribution of the full set and of each selection"""
    cfg = run_config(config_file, subgraphs=subgraphs, output_dir=output_dir)
    if not cfg.subgraphs:
        raise click.UsageError("--subgraphs is required")

    records = load_subgraphs(cfg.subgraphs)
    by_id = {r.pattern_id: r for r in records}
    histograms = {"all": size_histogram(records)}
    for report in _load_reports(reports, cfg.output_dir):
        missing = [pid for pid in report.representatives if pid not in by_id]
        if missing:
            raise click.ClickException(f"report names unknown pattern(s) {missing[:5]}")
        histograms[_report_name(report)] = size_histogram(by_id[pid] for pid in report.representatives)

    target = output_path(output, cfg.output_dir, "size_distribution.tsv")
    with open(target, "w") as stream:
        histogram_table(histograms, stream)
    click.echo(f"{len(histograms)} histogram(s) -> {target}")


@bp.cli.command("bench")
@click.option("--encoding", "encodings", multiple=True, type=click.Choice(ENCODINGS))
@click.option("--n-subgraphs", multiple=True, type=click.IntRange(min=1))
@click.option("--n-graphs", multiple=True, type=click.IntRange(min=1))
@click.option("--k", "ks", multiple=True, type=click.IntRange(min=1))
@click.option("--algorithm", type=click.Choice(ALGORITHMS))
@click.option("--seed", "seeds", multiple=True, type=click.IntRange(min=0, max=2 ** 64 - 1))
@click.option("--curve", type=click.Path(dir_okay=False), help="Also write a TSV curve")
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="Timing CSV to write")
@click.option("--output-dir", type=click.Path(file_okay=False))
@click.option("--threads", type=click.IntRange(min=1))
@click.option("--config", "config_file", type=_existing)
@cli_errors
def bench(encodings, n_subgraphs, n_graphs, ks, algorithm, seeds, curve, output, output_dir, threads, config_file):
    """Clustering runtime over synthetic inputs"""
    cfg = run_config(config_file, algorithm=algorithm, output_dir=output_dir, threads=threads)
    defaults = BenchmarkSpec()
    spec = BenchmarkSpec(
        encodings=tuple(encodings) or defaults.encodings,
        n_subgraphs=tuple(n_subgraphs) or defaults.n_subgraphs,
        n_graphs=tuple(n_graphs) or defaults.n_graphs,
        ks=tuple(ks) or defaults.ks,
        algorithm=cfg.algorithm,
        seeds=tuple(seeds) or tuple(cfg.seed + i for i in range(MIN_BENCHMARK_RUNS)),
        attribute_mask=cfg.attribute_mask(),
        numlocal=cfg.numlocal,
        maxneighbor=cfg.maxneighbor,
        threads=cfg.threads,
    )
    if max(spec.ks) > min(spec.n_subgraphs):
        raise click.UsageError("every --k must be <= every --n-subgraphs")

    rows = benchmark(spec)

    target = output_path(output, cfg.output_dir, "timings.csv")
    with open(target, "w") as stream:
        write_timing_csv(rows, stream)
    if curve:
        with open(output_path(curve, cfg.output_dir, "timings.tsv"), "w") as stream:
            write_timing_tsv(rows, stream)
    click.echo(f"{len(rows)} timing row(s) -> {target}")
