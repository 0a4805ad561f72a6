from abc import ABC, abstractmethod
from dataclasses import dataclass
import time
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import Config, config as default_config
from .dataset import Dataset
from .lssvm import SvmModel, identify_bsv, train_contour
from .models import BenchRecord, ClusterResult, ExperimentConfig, QTrainConfig, ScanStats, TrainConfig
from .qsvc import QSvmModel, q_build_adjacency, q_margins, q_train_contour, quantum_cluster_finding, success_probability
from .svc import AdjacencyMatrix, build_adjacency, cluster_finding
from .utils import get_logger, make_rng


@dataclass(frozen=True)
class ClusteringRun:
    """Everything one pipeline run produces"""
    model: Any
    adjacency: AdjacencyMatrix
    result: ClusterResult
    record: BenchRecord

    def model_document(self) -> Dict[str, Any]:
        return self.model.to_document()


class ClusteringBackend(ABC):
    """Base class for the clustering pipelines: train a contour model, build
    the same-contour adjacency, then extract connected components."""

    name: str = ""

    def __init__(self, experiment: ExperimentConfig, app_config: Optional[Config] = None):
        self.experiment = experiment
        self.app_config = app_config or default_config
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def train(self, d: Dataset):
        """Fit the contour model on the dataset"""
        pass

    @abstractmethod
    def bounded_support_vectors(self, model, d: Dataset) -> List[int]:
        """Training indices outside every contour"""
        pass

    @abstractmethod
    def adjacency(self, model, d: Dataset) -> AdjacencyMatrix:
        """Same-contour adjacency over the dataset"""
        pass

    @abstractmethod
    def clusters(self, A: AdjacencyMatrix, d: Dataset) -> Tuple[ClusterResult, Dict[str, Any]]:
        """Connected components plus the backend's identification counters"""
        pass

    def describe(self) -> Dict[str, Any]:
        return {
            "backend": self.name,
            "kernel": self.experiment.kernel.describe(),
            "gamma": self.experiment.gamma,
            "line_samples": self.experiment.line_samples,
            "seed": self.experiment.seed,
        }

    def run(self, d: Dataset) -> ClusteringRun:
        """Run the full pipeline on one dataset"""
        self.logger.info(f"Starting {self.name} clustering of {d.m} points, kernel {self.experiment.kernel.describe()}")
        started = time.perf_counter()

        model = self.train(d)
        bsv = self.bounded_support_vectors(model, d)
        if bsv:
            self.logger.warning(f"{len(bsv)} bounded support vectors lie outside every contour and form singleton clusters")

        A = self.adjacency(model, d)
        result, counters = self.clusters(A, d)
        elapsed = time.perf_counter() - started

        support = int(np.count_nonzero(model.support_mask))
        metadata = {**self.describe(), "bounded_support_vectors": [d.ids[i] for i in bsv]}
        result = result.model_copy(update={"metadata": metadata})
        record = BenchRecord(
            m=d.m,
            n=d.n,
            backend=self.name,
            kernel_evaluations=d.m * d.m + A.decision_evaluations * support,
            segment_tests=A.segment_tests,
            cluster_count=result.cluster_count,
            wall_time_s=elapsed,
            config=self.experiment.model_dump(),
            **counters,
        )
        self.logger.info(f"{self.name} clustering complete: {result.cluster_count} clusters in {elapsed:.3f}s")
        return ClusteringRun(model=model, adjacency=A, result=result, record=record)


class ClassicalBackend(ClusteringBackend):
    """LS-SVM contour model, segment adjacency and depth-first search"""

    name = "classical"

    def __init__(self, experiment: ExperimentConfig, app_config: Optional[Config] = None):
        super().__init__(experiment, app_config)
        self.train_config = TrainConfig.from_config(self.app_config, gamma=experiment.gamma,
                                                    contour_level=experiment.contour_level)

    def train(self, d: Dataset) -> SvmModel:
        return train_contour(d, self.experiment.kernel, self.train_config)

    def bounded_support_vectors(self, model: SvmModel, d: Dataset) -> List[int]:
        return identify_bsv(model, d)

    def adjacency(self, model: SvmModel, d: Dataset) -> AdjacencyMatrix:
        return build_adjacency(model, d, self.experiment.line_samples)

    def clusters(self, A: AdjacencyMatrix, d: Dataset) -> Tuple[ClusterResult, Dict[str, Any]]:
        stats = ScanStats()
        result = cluster_finding(A, d.ids, stats)
        return result, {"neighbour_scans": stats.neighbour_scans}


class QuantumBackend(ClusteringBackend):
    """Spectral-inversion contour model, probability-thresholded adjacency and Grover-driven search.

    One generator seeded from the experiment feeds every sampling step in
    pipeline order, so a fixed seed reproduces the whole run.
    """

    def __init__(self, experiment: ExperimentConfig, app_config: Optional[Config] = None):
        super().__init__(experiment, app_config)
        self.name = experiment.backend
        self.train_config = QTrainConfig.from_config(self.app_config, zeta=experiment.gamma, shots=experiment.shots,
                                                     seed=experiment.seed, contour_level=experiment.contour_level)
        self.rng = make_rng(experiment.seed)
        self.logger.info(f"Soft margin zeta = gamma = {experiment.gamma:g}")

    def train(self, d: Dataset) -> QSvmModel:
        return q_train_contour(d, self.experiment.kernel, self.train_config, self.rng)

    def bounded_support_vectors(self, model: QSvmModel, d: Dataset) -> List[int]:
        probabilities = success_probability(q_margins(model, d.points, self.train_config, self.rng), model.margin_max)
        return [int(i) for i in np.flatnonzero(probabilities >= 0.5)]

    def adjacency(self, model: QSvmModel, d: Dataset) -> AdjacencyMatrix:
        return q_build_adjacency(model, d, self.experiment.line_samples, self.train_config, self.rng)

    def clusters(self, A: AdjacencyMatrix, d: Dataset) -> Tuple[ClusterResult, Dict[str, Any]]:
        result, stats = quantum_cluster_finding(A, self.train_config, d.ids, self.rng)
        return result, {"query_stats": stats}

    def describe(self) -> Dict[str, Any]:
        return {**super().describe(), "zeta": self.experiment.gamma, "shots": self.experiment.shots}


def make_backend(experiment: ExperimentConfig, app_config: Optional[Config] = None) -> ClusteringBackend:
    if experiment.backend == "classical":
        return ClassicalBackend(experiment, app_config)
    return QuantumBackend(experiment, app_config)
