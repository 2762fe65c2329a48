import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Sequence

from app.services.clustering import ClusteringConfig
from app.services.graph_core import GraphDatabase, SubgraphRecord, format_subgraphs
from app.services.isomorphism import write_occurrence_tsv
from app.services.selection import SelectionReport, select_naive, select_trs
from app.utils.errors import SelectionError
from app.utils.json_encoder import dumps

logger = logging.getLogger(__name__)

REPORT_PREFIX = {"topological": "trs", "context": "naive"}


# 1. Interface Repository
class ReportRepository(ABC):
    """Where selection artifacts are persisted"""

    @abstractmethod
    def save_report(self, report: SelectionReport) -> str:
        pass

    @abstractmethod
    def load_report(self, path: str) -> SelectionReport:
        pass

    @abstractmethod
    def save_representatives(self, report: SelectionReport, records: Sequence[SubgraphRecord]) -> str:
        pass

    @abstractmethod
    def save_timings(self, report: SelectionReport) -> str:
        pass


# 2. Implementation: files in an output directory
class FileReportRepository(ReportRepository):

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)

    def _path(self, report: SelectionReport, suffix: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{REPORT_PREFIX[report.encoding]}_{suffix}"

    def save_report(self, report: SelectionReport) -> str:
        path = self._path(report, "report.json")
        path.write_text(dumps(report.to_dict()))
        return str(path)

    def load_report(self, path: str) -> SelectionReport:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise SelectionError(f"{path}: not a JSON report ({e})")
        return SelectionReport.from_dict(doc)

    def save_representatives(self, report: SelectionReport, records: Sequence[SubgraphRecord]) -> str:
        by_id = {r.pattern_id: r for r in records}
        path = self._path(report, "representatives.gspan")
        path.write_text(format_subgraphs(by_id[pid] for pid in report.representatives))
        return str(path)

    def save_timings(self, report: SelectionReport) -> str:
        path = self._path(report, "timings.json")
        path.write_text(dumps({
            "encoding": report.encoding,
            "encode_seconds": report.encode_seconds,
            "cluster_seconds": report.cluster_seconds,
        }))
        return str(path)


# 3. Service
class SelectionService:
    """Runs a pipeline and persists its artifacts"""

    def __init__(self, repository: ReportRepository, cache=None, threads: int = 1):
        self._repository = repository
        self._cache = cache
        self._threads = threads

    def _persist(self, report: SelectionReport, records: Sequence[SubgraphRecord]) -> Dict[str, str]:
        paths = {
            "report": self._repository.save_report(report),
            "representatives": self._repository.save_representatives(report, records),
            "timings": self._repository.save_timings(report),
        }
        logger.info("Saved %s", paths["report"])
        return paths

    def run_trs(
        self,
        records: Sequence[SubgraphRecord],
        k: int,
        attribute_mask: Sequence[str],
        normalization: str,
        config: ClusteringConfig,
    ):
        report = select_trs(
            records, k, attribute_mask, normalization, config,
            threads=self._threads, cache=self._cache,
        )
        return report, self._persist(report, records)

    def run_naive(
        self,
        records: Sequence[SubgraphRecord],
        db: Optional[GraphDatabase],
        k: int,
        config: ClusteringConfig,
        occurrence_path: Optional[str] = None,
        n_graphs: Optional[int] = None,
        graph_ids: Optional[Sequence[str]] = None,
    ):
        report = select_naive(
            records, db, k, config, threads=self._threads, n_graphs=n_graphs, graph_ids=graph_ids,
        )
        paths = self._persist(report, records)
        if occurrence_path and report.occurrence is not None:
            with open(occurrence_path, "w") as stream:
                write_occurrence_tsv(report.occurrence, stream)
            paths["occurrences"] = occurrence_path
        return report, paths

    def load_report(self, path: str) -> SelectionReport:
        return self._repository.load_report(path)
