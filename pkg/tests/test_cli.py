import pytest

from app.services.graph_core import GraphDatabase, SubgraphRecord, format_graph_db, parse_graph_db
from tests.helpers import clique, path, pdb_text, single, star, write_subgraphs


@pytest.fixture
def subgraph_file(tmp_path, family_records):
    # cliques occur in graphs 0-1, paths in 2-3, stars everywhere
    occurrences = [(0, 1)] * 3 + [(2, 3)] * 3 + [(0, 1, 2, 3)] * 3
    records = [
        SubgraphRecord(r.pattern, r.pattern_id, len(occ), occ)
        for r, occ in zip(family_records, occurrences)
    ]
    return write_subgraphs(tmp_path / "patterns.gspan", records)


@pytest.fixture
def graph_db_file(tmp_path):
    db = GraphDatabase((clique(6), path(7), star(6), clique(4)), ("g0", "g1", "g2", "g3"))
    target = tmp_path / "graphs.gspan"
    target.write_text(format_graph_db(db))
    return str(target)


@pytest.fixture
def labels_file(tmp_path):
    target = tmp_path / "labels.txt"
    target.write_text("0 +1\n1 +1\n2 -1\n3 -1\n")
    return str(target)


def invoke(runner, *args):
    return runner.invoke(args=[str(a) for a in args])


class TestIngest:
    def test_pdb_directory(self, runner, tmp_path):
        pdb_dir = tmp_path / "pdb"
        pdb_dir.mkdir()
        for name in ("a", "b", "c"):
            (pdb_dir / f"{name}.pdb").write_text(pdb_text([("ALA", (0, 0, 0)), ("GLY", (6, 0, 0)), ("SER", (12, 0, 0))]))
        out = tmp_path / "db.gspan"
        result = invoke(runner, "ingest", pdb_dir, "--output", out)
        assert result.exit_code == 0, result.output
        db = parse_graph_db(out.read_text().splitlines())
        assert db.graph_ids == ("a", "b", "c")
        assert [g.n_edges for g in db.graphs] == [2, 2, 2]

    def test_delta_override(self, runner, tmp_path):
        pdb_dir = tmp_path / "pdb"
        pdb_dir.mkdir()
        (pdb_dir / "a.pdb").write_text(pdb_text([("ALA", (0, 0, 0)), ("GLY", (6, 0, 0)), ("SER", (12, 0, 0))]))
        out = tmp_path / "db.gspan"
        result = invoke(runner, "ingest", pdb_dir, "--delta", 13, "--output", out)
        assert result.exit_code == 0, result.output
        assert parse_graph_db(out.read_text().splitlines()).graphs[0].n_edges == 3

    def test_gspan_input(self, runner, tmp_path, graph_db_file):
        result = invoke(runner, "ingest", graph_db_file, "--output-dir", tmp_path / "out")
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "graphs.gspan").exists()

    def test_bad_path(self, runner, tmp_path):
        assert invoke(runner, "ingest", tmp_path / "missing").exit_code == 2

    def test_malformed_input(self, runner, tmp_path):
        bad = tmp_path / "bad.gspan"
        bad.write_text("t # 0\nv 0 A\ne 0 3\n")
        result = invoke(runner, "ingest", bad, "--output-dir", tmp_path)
        assert result.exit_code == 1
        assert "line 3" in result.output

    def test_non_positive_delta(self, runner, tmp_path, graph_db_file):
        assert invoke(runner, "ingest", graph_db_file, "--delta", 0).exit_code == 2


class TestDescribe:
    def test_full_mask(self, runner, tmp_path, subgraph_file):
        out = tmp_path / "features.tsv"
        result = invoke(runner, "describe", "--subgraphs", subgraph_file, "--output", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 10
        assert len(lines[0].split("\t")) == 18

    def test_masked(self, runner, tmp_path, subgraph_file):
        out = tmp_path / "features.tsv"
        mask = "n_nodes,n_edges,density,energy,diameter"
        result = invoke(runner, "describe", "--subgraphs", subgraph_file, "--attributes", mask, "--output", out)
        assert result.exit_code == 0, result.output
        assert all(len(line.split("\t")) == 6 for line in out.read_text().splitlines())

    def test_unknown_attribute(self, runner, subgraph_file):
        result = invoke(runner, "describe", "--subgraphs", subgraph_file, "--attributes", "girth")
        assert result.exit_code == 2

    def test_missing_subgraphs(self, runner):
        assert invoke(runner, "describe").exit_code == 2


class TestSelect:
    def test_writes_artifacts(self, runner, tmp_path, subgraph_file):
        out = tmp_path / "out"
        result = invoke(runner, "select", "--subgraphs", subgraph_file, "--k", 3, "--output-dir", out)
        assert result.exit_code == 0, result.output
        for name in ("trs_report.json", "trs_representatives.gspan", "trs_timings.json"):
            assert (out / name).exists()

    def test_zero_k(self, runner, subgraph_file):
        assert invoke(runner, "select", "--subgraphs", subgraph_file, "--k", 0).exit_code == 2

    def test_k_above_pattern_count(self, runner, tmp_path, subgraph_file):
        result = invoke(runner, "select", "--subgraphs", subgraph_file, "--k", 10, "--output-dir", tmp_path)
        assert result.exit_code == 1

    def test_config_file(self, runner, tmp_path, subgraph_file):
        config = tmp_path / "run.conf"
        config.write_text(f"subgraphs={subgraph_file}\nk=2\nalgorithm=pam\nseed=5\n")
        out = tmp_path / "out"
        result = invoke(runner, "select", "--config", config, "--k", 3, "--output-dir", out)
        assert result.exit_code == 0, result.output
        report = (out / "trs_report.json").read_text()
        assert '"k": 3' in report
        assert '"algorithm": "pam"' in report

    def test_unknown_config_key(self, runner, tmp_path, subgraph_file):
        config = tmp_path / "run.conf"
        config.write_text("colour=blue\n")
        result = invoke(runner, "select", "--config", config, "--subgraphs", subgraph_file)
        assert result.exit_code == 2

    @pytest.mark.parametrize("line", ["LOG_LEVEL=DEBUG", "REDIS_URL=redis://localhost:6379/1"])
    def test_app_settings_rejected_in_config_file(self, runner, tmp_path, subgraph_file, line):
        config = tmp_path / "run.conf"
        config.write_text(line + "\n")
        result = invoke(runner, "select", "--config", config, "--subgraphs", subgraph_file, "--k", 2)
        assert result.exit_code == 2
        assert "unknown setting" in result.output

    @pytest.mark.parametrize("command,extra,report", [
        ("select", ["--normalization", "min-max"], "trs_report.json"),
        ("baseline", [], "naive_report.json"),
    ])
    def test_byte_identical_across_threads(self, runner, tmp_path, subgraph_file, command, extra, report):
        outputs = []
        for threads in (1, 4):
            out = tmp_path / f"t{threads}"
            result = invoke(
                runner, command, "--subgraphs", subgraph_file, "--k", 3, "--seed", 11,
                "--threads", threads, "--output-dir", out, *extra,
            )
            assert result.exit_code == 0, result.output
            outputs.append((out / report).read_bytes())
        assert outputs[0] == outputs[1]


class TestBaseline:
    def test_from_occurrence_lists(self, runner, tmp_path, subgraph_file):
        out = tmp_path / "out"
        result = invoke(runner, "baseline", "--subgraphs", subgraph_file, "--k", 9, "--output-dir", out)
        assert result.exit_code == 0, result.output
        assert (out / "naive_occurrences.tsv").read_text().splitlines()[0] == "pattern_id\t0\t1\t2\t3"

    def test_by_search(self, runner, tmp_path, graph_db_file):
        patterns = write_subgraphs(tmp_path / "p.gspan", [
            SubgraphRecord(clique(3), 0), SubgraphRecord(path(4), 1), SubgraphRecord(star(5), 2),
        ])
        out = tmp_path / "out"
        result = invoke(runner, "baseline", "--subgraphs", patterns, "--graph-db", graph_db_file,
                        "--k", 2, "--output-dir", out)
        assert result.exit_code == 0, result.output
        rows = (out / "naive_occurrences.tsv").read_text().splitlines()
        assert rows[0] == "pattern_id\tg0\tg1\tg2\tg3"
        assert rows[1] == "0\t1\t0\t0\t1"

    def test_no_occurrence_information(self, runner, tmp_path):
        patterns = write_subgraphs(tmp_path / "p.gspan", [SubgraphRecord(single(), 0), SubgraphRecord(single("B"), 1)])
        result = invoke(runner, "baseline", "--subgraphs", patterns, "--k", 1, "--output-dir", tmp_path)
        assert result.exit_code == 1


class TestEvaluationCommands:
    def test_eval_and_dist(self, runner, tmp_path, subgraph_file, labels_file):
        out = tmp_path / "out"
        assert invoke(runner, "select", "--subgraphs", subgraph_file, "--k", 3, "--output-dir", out).exit_code == 0
        assert invoke(runner, "baseline", "--subgraphs", subgraph_file, "--k", 3, "--output-dir", out).exit_code == 0
        reports = ["--report", out / "trs_report.json", "--report", out / "naive_report.json"]

        result = invoke(runner, "eval", "--labels", labels_file, "--subgraphs", subgraph_file,
                        "--output-dir", out, *reports)
        assert result.exit_code == 0, result.output
        rows = (out / "information_gain.csv").read_text().splitlines()
        assert rows[1].startswith("FSG,all,,9,")
        assert [r.split(",")[0] for r in rows[1:]] == ["FSG", "TRS@3", "Naive@3", "Average", "Average"]

        result = invoke(runner, "dist", "--subgraphs", subgraph_file, "--output-dir", out, *reports)
        assert result.exit_code == 0, result.output
        table = (out / "size_distribution.tsv").read_text().splitlines()
        assert table[0] == "size\tall\tTRS@3\tNaive@3"
        assert sum(int(line.split("\t")[1]) for line in table[1:]) == 9

    def test_eval_perfect_separator(self, runner, tmp_path, labels_file):
        patterns = write_subgraphs(tmp_path / "p.gspan", [SubgraphRecord(clique(3), 0, 2, (0, 1))])
        out = tmp_path / "out"
        assert invoke(runner, "select", "--subgraphs", patterns, "--k", 1, "--output-dir", out).exit_code == 0
        result = invoke(runner, "eval", "--labels", labels_file, "--subgraphs", patterns,
                        "--report", out / "trs_report.json", "--output-dir", out)
        assert result.exit_code == 0, result.output
        rows = (out / "information_gain.csv").read_text().splitlines()
        assert all(float(row.split(",")[4]) == pytest.approx(1.0) for row in rows[1:])

    def test_eval_from_occurrence_tsv(self, runner, tmp_path, subgraph_file, labels_file):
        out = tmp_path / "out"
        assert invoke(runner, "baseline", "--subgraphs", subgraph_file, "--k", 2, "--output-dir", out).exit_code == 0
        result = invoke(runner, "eval", "--labels", labels_file, "--occurrences", out / "naive_occurrences.tsv",
                        "--report", out / "naive_report.json", "--output-dir", out)
        assert result.exit_code == 0, result.output

    @pytest.mark.parametrize("coverage", [["--labels", "LABELS"], ["--n-graphs", 4]])
    def test_baseline_then_eval_covers_unmatched_graphs(self, runner, tmp_path, labels_file, coverage):
        # no pattern occurs in graphs 2 or 3
        patterns = write_subgraphs(tmp_path / "p.gspan", [
            SubgraphRecord(clique(3), 0, 2, (0, 1)), SubgraphRecord(path(3), 1, 1, (0,)),
        ])
        coverage = [labels_file if arg == "LABELS" else arg for arg in coverage]
        out = tmp_path / "out"
        result = invoke(runner, "baseline", "--subgraphs", patterns, "--k", 1, "--output-dir", out, *coverage)
        assert result.exit_code == 0, result.output
        header = (out / "naive_occurrences.tsv").read_text().splitlines()[0]
        assert header == "pattern_id\t0\t1\t2\t3"

        result = invoke(runner, "eval", "--labels", labels_file, "--occurrences", out / "naive_occurrences.tsv",
                        "--report", out / "naive_report.json", "--output-dir", out)
        assert result.exit_code == 0, result.output
        fsg = (out / "information_gain.csv").read_text().splitlines()[1].split(",")
        assert float(fsg[4]) == pytest.approx(0.5 * (1.0 + 0.3112781244591328))

    def test_baseline_labels_disagree_with_n_graphs(self, runner, tmp_path, subgraph_file, labels_file):
        result = invoke(runner, "baseline", "--subgraphs", subgraph_file, "--k", 1, "--labels", labels_file,
                        "--n-graphs", 6, "--output-dir", tmp_path)
        assert result.exit_code == 2

    def test_bench(self, runner, tmp_path):
        out = tmp_path / "timings.csv"
        result = invoke(runner, "bench", "--n-subgraphs", 20, "--n-graphs", 10, "--n-graphs", 30,
                        "--k", 2, "--seed", 0, "--output", out, "--curve", tmp_path / "curve.tsv")
        assert result.exit_code == 0, result.output
        rows = out.read_text().splitlines()
        assert len(rows) == 5
        assert {tuple(r.split(",")[:3]) for r in rows[1:]} == {
            ("topological", "20", "10"), ("context", "20", "10"),
            ("topological", "20", "30"), ("context", "20", "30"),
        }
        assert (tmp_path / "curve.tsv").exists()

    def test_bench_defaults_to_three_runs(self, runner, tmp_path):
        out = tmp_path / "timings.csv"
        result = invoke(runner, "bench", "--n-subgraphs", 20, "--n-graphs", 10, "--k", 2, "--output", out)
        assert result.exit_code == 0, result.output
        rows = out.read_text().splitlines()
        runs = rows[0].split(",").index("runs")
        assert [r.split(",")[runs] for r in rows[1:]] == ["3", "3"]

    def test_bench_k_too_large(self, runner, tmp_path):
        result = invoke(runner, "bench", "--n-subgraphs", 5, "--k", 6, "--output", tmp_path / "t.csv")
        assert result.exit_code == 2


def test_clear_cache(runner):
    result = invoke(runner, "clear-cache")
    assert result.exit_code == 0
