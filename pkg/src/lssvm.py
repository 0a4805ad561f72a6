"""
Least-squares SVM: the KKT linear system, binary and one-class training,
the contour model used for clustering, and the signed decision function.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .dataset import Dataset
from .exceptions import InputError, SingularSystemError
from .kernels import cross_kernel, kernel_matrix
from .models import KernelSpec, TrainConfig
from .utils import get_logger

logger = get_logger(__name__)

ModelKind = Literal["binary", "one_class", "contour"]


@dataclass(frozen=True)
class SvmModel:
    bias: float
    alpha: np.ndarray
    spec: KernelSpec
    train_points: Dataset
    labels: np.ndarray
    sv_threshold: float = 1e-8
    gamma: float = 1.0
    kind: ModelKind = "binary"

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.shape != (self.train_points.m,):
            raise InputError(f"alpha has length {alpha.size}, expected {self.train_points.m}")
        alpha.setflags(write=False)
        labels = np.array(self.labels, dtype=int)
        labels.setflags(write=False)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'bias', float(self.bias))

    @property
    def support_mask(self) -> np.ndarray:
        return np.abs(self.alpha) > self.sv_threshold

    def to_document(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "bias": self.bias,
            "alpha": self.alpha.tolist(),
            "kernel": self.spec.model_dump(),
            "gamma": self.gamma,
            "sv_threshold": self.sv_threshold,
            "train_ids": list(self.train_points.ids),
            "train_points": self.train_points.points.tolist(),
            "labels": self.labels.tolist(),
        }


def load_model(path: Union[str, Path]) -> SvmModel:
    with open(path, 'r') as f:
        document = json.load(f)
    train_points = Dataset.from_points(document["train_points"], ids=document["train_ids"])
    return SvmModel(
        bias=document["bias"],
        alpha=np.array(document["alpha"]),
        spec=KernelSpec(**document["kernel"]),
        train_points=train_points,
        labels=np.array(document["labels"]),
        sv_threshold=document["sv_threshold"],
        gamma=document["gamma"],
        kind=document["kind"],
    )


def assemble_system(K: np.ndarray, gamma: float) -> np.ndarray:
    """F = [[0, 1^T], [1, K + I/γ]]"""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"kernel matrix must be square, got shape {K.shape}")
    if gamma <= 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-9):
        raise InputError("kernel matrix is not symmetric")

    m = K.shape[0]
    F = np.zeros((m + 1, m + 1))
    F[0, 1:] = 1.0
    F[1:, 0] = 1.0
    F[1:, 1:] = K + np.eye(m) / gamma
    return F


def _solve(system: np.ndarray, rhs: np.ndarray, cfg: TrainConfig, jitter_from: int, assume_a: str) -> np.ndarray:
    """Dense solve with one round of diagonal jitter on ill-conditioned systems"""
    condition = np.linalg.cond(system)
    logger.debug(f"System of size {system.shape[0]} has condition estimate {condition:.3e}")

    if not np.isfinite(condition) or condition > cfg.condition_limit:
        logger.warning(f"Condition estimate {condition:.3e} exceeds {cfg.condition_limit:.1e}, adding jitter {cfg.jitter:.1e}")
        system = system.copy()
        diagonal = np.arange(jitter_from, system.shape[0])
        system[diagonal, diagonal] += cfg.jitter
        condition = np.linalg.cond(system)
        if not np.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
            raise SingularSystemError(f"LS-SVM system is singular (condition estimate {condition:.3e})", condition)

    try:
        return scipy.linalg.solve(system, rhs, assume_a=assume_a)
    except np.linalg.LinAlgError:
        if assume_a == 'pos':
            return scipy.linalg.solve(system, rhs, assume_a='sym')
        raise SingularSystemError(f"LS-SVM system is singular (condition estimate {condition:.3e})", condition)


def train(d: Dataset, labels: Sequence[int], spec: KernelSpec, cfg: Optional[TrainConfig] = None) -> SvmModel:
    """Solve F (b, α) = (0, y) by symmetric indefinite factorization"""
    cfg = cfg or TrainConfig()
    y = np.asarray(labels, dtype=float)
    if y.shape != (d.m,):
        raise InputError(f"{y.size} labels for {d.m} points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InputError("labels must be +1 or -1")

    F = assemble_system(kernel_matrix(spec, d), cfg.gamma)
    rhs = np.concatenate(([0.0], y))
    z = _solve(F, rhs, cfg, jitter_from=1, assume_a='sym')

    model = SvmModel(bias=z[0], alpha=z[1:], spec=spec, train_points=d, labels=y.astype(int),
                     sv_threshold=cfg.sv_threshold, gamma=cfg.gamma, kind="binary")
    logger.debug(f"Trained LS-SVM on {d.m} points, b={model.bias:.6g}, residual={residual(model):.2e}")
    return model


def train_one_class(d: Dataset, spec: KernelSpec, cfg: Optional[TrainConfig] = None) -> SvmModel:
    model = train(d, np.ones(d.m, dtype=int), spec, cfg)
    return SvmModel(bias=model.bias, alpha=model.alpha, spec=spec, train_points=d, labels=model.labels,
                    sv_threshold=model.sv_threshold, gamma=model.gamma, kind="one_class")


def contour_offset(training_values: np.ndarray, level: float) -> float:
    """Contour height ρ that leaves every training value strictly above it.

    Positive minima give ρ = level · min. Otherwise ρ drops below the minimum
    by (1 - level) times the larger of the value spread and one, so a point
    whose unbiased value is exactly zero still lands inside the contour.
    """
    lowest = float(np.min(training_values))
    if lowest > 0:
        return level * lowest
    reach = max(float(np.max(np.abs(training_values))), 1.0)
    return lowest - (1.0 - level) * reach



def train_contour(d: Dataset, spec: KernelSpec, cfg: Optional[TrainConfig] = None) -> SvmModel:
    """One-class LS-SVM without the bias row: (K + I/γ) α = 1, then b = -ρ.

    With the bias row the one-class system always returns b = 1, α = 0, so the
    clustering contour is drawn from this model instead.
    """
    cfg = cfg or TrainConfig()
    K = kernel_matrix(spec, d)
    H = K + np.eye(d.m) / cfg.gamma
    alpha = _solve(H, np.ones(d.m), cfg, jitter_from=0, assume_a='pos')

    unbiased = SvmModel(bias=0.0, alpha=alpha, spec=spec, train_points=d, labels=np.ones(d.m, dtype=int),
                        sv_threshold=cfg.sv_threshold, gamma=cfg.gamma, kind="contour")
    rho = contour_offset(decision_values(unbiased, d.points), cfg.contour_level)
    logger.debug(f"Contour model on {d.m} points: rho={rho:.6g}, {int(unbiased.support_mask.sum())} support vectors")
    return SvmModel(bias=-rho, alpha=alpha, spec=spec, train_points=d, labels=unbiased.labels,
                    sv_threshold=cfg.sv_threshold, gamma=cfg.gamma, kind="contour")


def residual(m: SvmModel) -> float:
    """Relative residual of the linear system the model was trained from"""
    K = kernel_matrix(m.spec, m.train_points)
    if m.kind == "contour":
        H = K + np.eye(m.train_points.m) / m.gamma
        target = np.ones(m.train_points.m)
        return float(np.linalg.norm(H @ m.alpha - target) / np.linalg.norm(target))
    F = assemble_system(K, m.gamma)
    target = np.concatenate(([0.0], m.labels.astype(float)))
    z = np.concatenate(([m.bias], m.alpha))
    return float(np.linalg.norm(F @ z - target) / np.linalg.norm(target))


def decision_values(m: SvmModel, points: np.ndarray) -> np.ndarray:
    """Σ_{|α_i| > threshold} α_i K(x_i, x) + b for every row of points"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != m.train_points.n:
        raise InputError(f"dimension mismatch: model expects {m.train_points.n}, got {points.shape[1]}")
    support = m.support_mask
    if not support.any():
        return np.full(points.shape[0], m.bias)
    return cross_kernel(m.spec, points, m.train_points.points[support]) @ m.alpha[support] + m.bias


def decide(m: SvmModel, x) -> Tuple[int, float]:
    margin = float(decision_values(m, np.asarray(x, dtype=float)[None, :])[0])
    return (1 if margin >= 0 else -1), margin


def identify_bsv(m: SvmModel, d: Dataset) -> List[int]:
    """Bounded support vectors: training indices with a negative margin"""
    return [int(i) for i in np.flatnonzero(decision_values(m, d.points) < 0)]
