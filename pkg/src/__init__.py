"""
svcq - Support Vector Clustering Package

Least-squares SVM contour clustering with a classical backend and a
quantum-emulation backend, plus a benchmark harness that compares the two
by operation and oracle-query counts.
"""

from .config import config
from .dataset import Dataset, load_csv, pca_project, synth_blobs, unit_normalize
from .kernels import kernel_eval, kernel_matrix
from .lssvm import SvmModel, decide, train, train_contour, train_one_class
from .models import ClusterResult, ExperimentConfig, KernelSpec, QTrainConfig, QueryStats, TrainConfig
from .qsvc import QSvmModel, q_train, q_train_contour, quantum_cluster_finding
from .svc import AdjacencyMatrix, build_adjacency, cluster_finding
from .backends import ClassicalBackend, QuantumBackend, make_backend
from .utils import setup_logging

__version__ = "0.1.0"
__author__ = "svcq developers"

__all__ = [
    'config',
    'Dataset',
    'load_csv',
    'pca_project',
    'synth_blobs',
    'unit_normalize',
    'kernel_eval',
    'kernel_matrix',
    'SvmModel',
    'decide',
    'train',
    'train_contour',
    'train_one_class',
    'ClusterResult',
    'ExperimentConfig',
    'KernelSpec',
    'QTrainConfig',
    'QueryStats',
    'TrainConfig',
    'QSvmModel',
    'q_train',
    'q_train_contour',
    'quantum_cluster_finding',
    'AdjacencyMatrix',
    'build_adjacency',
    'cluster_finding',
    'ClassicalBackend',
    'QuantumBackend',
    'make_backend',
    'setup_logging'
]
