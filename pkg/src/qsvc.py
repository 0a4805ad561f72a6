"""
Quantum-emulated support vector clustering.

Kernel entries come from swap-test statistics, training inverts the trace
normalized LS-SVM operator spectrally, classification thresholds a calibrated
success probability at one half, and cluster identification
finds unvisited neighbours with Grover search while counting oracle queries.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Dataset
from .exceptions import InputError
from .kernels import kernel_matrix
from .lssvm import ModelKind, assemble_system, contour_offset
from .models import ClusterResult, KernelSpec, QTrainConfig, QueryStats
from .qsim import (
    IndexOracle, amplitude_encode, dot_from_overlap, dot_sensitivity, evolution_time,
    exhausted_schedule_cost, grover_query_model, grover_search, inner_product_estimate,
    overlap_test, required_samples, spectral_invert,
)
from .svc import AdjacencyMatrix, segment_adjacency, partition_result
from .utils import get_logger, make_rng

logger = get_logger(__name__)

# binomial draws beyond this count are numerically pointless
MAX_SAMPLES = 1 << 62


@dataclass(frozen=True)
class QSvmModel:
    """Trained quantum LS-SVM.

    solution_state is the unit output of the spectral inversion; scale and
    trace undo the normalizations so that bias and alpha are in the units of
    the classical model. Contour models solve for alpha alone and carry the
    contour offset as their bias.
    """
    solution_state: np.ndarray
    scale: float
    trace: float
    spec: KernelSpec
    train_points: Dataset
    config: QTrainConfig
    kind: ModelKind
    labels: np.ndarray
    bias: float
    alpha: np.ndarray
    margin_max: float = 1.0

    def __post_init__(self):
        state = np.array(self.solution_state, dtype=float)
        if abs(np.linalg.norm(state) - 1.0) > 1e-10:
            raise InputError(f"solution state is not normalized: norm {np.linalg.norm(state):.12f}")
        state.setflags(write=False)
        alpha = np.array(self.alpha, dtype=float)
        alpha.setflags(write=False)
        object.__setattr__(self, 'solution_state', state)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'bias', float(self.bias))

    @property
    def support_mask(self) -> np.ndarray:
        return np.abs(self.alpha) > self.config.sv_threshold

    def to_document(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "bias": self.bias,
            "alpha": self.alpha.tolist(),
            "kernel": self.spec.model_dump(),
            "zeta": self.config.zeta,
            "scale": self.scale,
            "trace": self.trace,
            "margin_max": self.margin_max,
            "solution_state": self.solution_state.tolist(),
            "train_ids": list(self.train_points.ids),
            "config": self.config.model_dump(),
        }


def q_kernel_matrix(spec: KernelSpec, a: np.ndarray, b: Optional[np.ndarray], cfg: QTrainConfig,
                    rng=None) -> np.ndarray:
    """Estimated kernel between rows of a and rows of b (b=None: a against itself).

    Every entry follows the ancilla statistics of inner_product_estimate in
    closed form. Zero rows have no amplitude encoding and contribute an exact
    zero inner product. The self-kernel diagonal uses the stored norms, and
    only its upper triangle is sampled.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    symmetric = b is None
    b = a if symmetric else np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise InputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")

    norm_i = np.linalg.norm(a, axis=1)[:, None]
    norm_j = np.linalg.norm(b, axis=1)[None, :]
    nonzero = (norm_i > 0) & (norm_j > 0)
    norm_i, norm_j = np.broadcast_arrays(norm_i, norm_j)
    gram = a @ b.T

    if cfg.exact:
        dots = gram
    else:
        safe_i = np.where(nonzero, norm_i, 1.0)
        safe_j = np.where(nonzero, norm_j, 1.0)
        cosines = gram / (safe_i * safe_j)
        t = evolution_time(safe_i, safe_j)
        weight_i = np.sin(safe_i * t)
        weight_j = np.sin(safe_j * t)
        weight_sq = weight_i ** 2 + weight_j ** 2
        overlap = (weight_sq - 2.0 * weight_i * weight_j * cosines) / (2.0 * weight_sq)

        p0 = np.clip(0.5 + 0.5 * overlap, 0.5, 1.0)
        sensitivity = dot_sensitivity(safe_i, safe_j, weight_i, weight_j)
        floor = max(cfg.shots, math.ceil(cfg.kernel_accuracy ** -2))
        samples = np.maximum(floor, np.ceil((3.0 * sensitivity / cfg.kernel_accuracy) ** 2))
        samples = np.minimum(samples, MAX_SAMPLES).astype(np.int64)
        p0_hat = make_rng(rng if rng is not None else cfg.seed).binomial(samples, p0) / samples
        overlap_hat = np.maximum(0.0, 2.0 * p0_hat - 1.0)
        dots = dot_from_overlap(safe_i, safe_j, weight_i, weight_j, overlap_hat)
        dots = np.where(nonzero, dots, 0.0)
        if symmetric:
            upper = np.triu(dots, 1)
            dots = upper + upper.T + np.diag(norm_i[:, 0] ** 2)

    if spec.kind == "linear":
        return dots
    if spec.kind == "polynomial":
        return dots ** spec.degree
    distance_sq = np.maximum(norm_i ** 2 + norm_j ** 2 - 2.0 * dots, 0.0)
    return np.exp(-spec.sigma * distance_sq)


def q_kernel_eval(spec: KernelSpec, x_i, x_j, cfg: QTrainConfig, rng=None) -> float:
    """One kernel entry through inner_product_estimate; zero vectors are rejected"""
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    rng = make_rng(rng if rng is not None else cfg.seed)
    dot, z = inner_product_estimate(x_i, x_j, shots=cfg.shots, eps=cfg.kernel_accuracy, rng=rng)

    if spec.kind == "linear":
        return dot
    if spec.kind == "polynomial":
        return dot ** spec.degree
    return float(np.exp(-spec.sigma * max(z - 2.0 * dot, 0.0)))


def success_probability(margin, margin_max: float):
    """P = ½(1 - margin/margin_max) clipped to [0, 1]; P < ½ exactly when margin > 0"""
    return np.clip(0.5 * (1.0 - np.asarray(margin) / margin_max), 0.0, 1.0)


def probability_label(probability: float) -> int:
    return 1 if probability < 0.5 else -1


def _margin_scale(training_margins: np.ndarray) -> float:
    largest = float(np.max(np.abs(training_margins)))
    return largest if largest > 0 else 1.0


def q_train(d: Dataset, labels: Sequence[int], spec: KernelSpec, cfg: Optional[QTrainConfig] = None,
            rng=None, kind: ModelKind = "binary") -> QSvmModel:
    """|b, α⟩ = F̂⁻¹|y⟩ with F̂ = F/tr F and y = (0, labels)"""
    cfg = cfg or QTrainConfig()
    y = np.asarray(labels, dtype=float)
    if y.shape != (d.m,):
        raise InputError(f"{y.size} labels for {d.m} points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InputError("labels must be +1 or -1")
    rng = make_rng(rng if rng is not None else cfg.seed)

    K = q_kernel_matrix(spec, d.points, None, cfg, rng)
    F = assemble_system(K, cfg.zeta)
    trace = float(np.trace(F))
    state, scale = spectral_invert(F / trace, np.concatenate(([0.0], y)), cfg.eig_floor)
    solution = scale * state / trace

    bias, alpha = solution[0], solution[1:]
    support = np.abs(alpha) > cfg.sv_threshold
    margins = K[:, support] @ alpha[support] + bias
    model = QSvmModel(solution_state=state, scale=scale, trace=trace, spec=spec, train_points=d, config=cfg,
                      kind=kind, labels=y.astype(int), bias=bias, alpha=alpha, margin_max=_margin_scale(margins))
    logger.debug(f"Quantum LS-SVM ({kind}) on {d.m} points: tr F={trace:.6g}, scale={scale:.6g}, b={bias:.6g}")
    return model


def q_train_one_class(d: Dataset, spec: KernelSpec, cfg: Optional[QTrainConfig] = None, rng=None) -> QSvmModel:
    return q_train(d, np.ones(d.m, dtype=int), spec, cfg, rng, kind="one_class")


def q_train_contour(d: Dataset, spec: KernelSpec, cfg: Optional[QTrainConfig] = None, rng=None) -> QSvmModel:
    """Spectral inversion of (K̂ + ζ⁻¹I)/tr against 1⃗, then the contour offset b = -ρ"""
    cfg = cfg or QTrainConfig()
    rng = make_rng(rng if rng is not None else cfg.seed)

    K = q_kernel_matrix(spec, d.points, None, cfg, rng)
    H = K + np.eye(d.m) / cfg.zeta
    trace = float(np.trace(H))
    state, scale = spectral_invert(H / trace, np.ones(d.m), cfg.eig_floor)
    alpha = scale * state / trace

    support = np.abs(alpha) > cfg.sv_threshold
    unbiased = K[:, support] @ alpha[support]
    rho = contour_offset(unbiased, cfg.contour_level)

    logger.debug(f"Quantum contour model on {d.m} points: rho={rho:.6g}, {int(support.sum())} support vectors")
    return QSvmModel(solution_state=state, scale=scale, trace=trace, spec=spec, train_points=d, config=cfg,
                     kind="contour", labels=np.ones(d.m, dtype=int), bias=-rho, alpha=alpha,
                     margin_max=_margin_scale(unbiased - rho))


def q_residual(m: QSvmModel) -> float:
    """Relative residual of the descaled solution against the exact system"""
    K = kernel_matrix(m.spec, m.train_points)
    if m.kind == "contour":
        H = K + np.eye(m.train_points.m) / m.config.zeta
        target = np.ones(m.train_points.m)
        return float(np.linalg.norm(H @ m.alpha - target) / np.linalg.norm(target))
    F = assemble_system(K, m.config.zeta)
    target = np.concatenate(([0.0], m.labels.astype(float)))
    return float(np.linalg.norm(F @ np.concatenate(([m.bias], m.alpha)) - target) / np.linalg.norm(target))


def q_margins(m: QSvmModel, points: np.ndarray, cfg: Optional[QTrainConfig] = None, rng=None) -> np.ndarray:
    """Decision margins for many points.

    Shots mode estimates the kernel rows and then samples the overlap test
    between (b, α) and (1, k(x)) in closed form, one draw per point.
    """
    cfg = cfg or m.config
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != m.train_points.n:
        raise InputError(f"dimension mismatch: model expects {m.train_points.n}, got {points.shape[1]}")
    support = m.support_mask
    if not support.any():
        return np.full(points.shape[0], m.bias)
    rng = make_rng(rng if rng is not None else cfg.seed)

    kernel_rows = q_kernel_matrix(m.spec, points, m.train_points.points[support], cfg, rng)
    margins = kernel_rows @ m.alpha[support] + m.bias
    if cfg.exact:
        return margins

    norm_u = math.hypot(m.bias, float(np.linalg.norm(m.alpha[support])))
    norm_v = np.sqrt(1.0 + np.sum(kernel_rows ** 2, axis=1))
    overlap = np.clip(margins / (norm_u * norm_v), -1.0, 1.0)
    floor = max(cfg.shots, math.ceil(cfg.kernel_accuracy ** -2))
    samples = np.maximum(floor, np.ceil((3.0 * norm_u * norm_v / cfg.kernel_accuracy) ** 2))
    samples = np.minimum(samples, MAX_SAMPLES).astype(np.int64)
    p0_hat = rng.binomial(samples, 0.5 * (1.0 + overlap)) / samples
    return (2.0 * p0_hat - 1.0) * norm_u * norm_v


def q_decide(m: QSvmModel, x, cfg: Optional[QTrainConfig] = None, rng=None) -> Tuple[int, float]:
    """Classify one point by its success probability; returns (label, P).

    The query state |1, k(x)⟩ is overlap-tested against |b, α⟩, the sign
    carrying overlap is descaled to a margin and mapped to P.
    """
    cfg = cfg or m.config
    x = np.asarray(x, dtype=float)
    if x.shape != (m.train_points.n,):
        raise InputError(f"dimension mismatch: model expects {m.train_points.n}, got {x.shape}")
    rng = make_rng(rng if rng is not None else cfg.seed)

    support = m.support_mask
    row = q_kernel_matrix(m.spec, x[None, :], m.train_points.points[support], cfg, rng)[0]
    u = np.concatenate(([m.bias], m.alpha[support]))
    v = np.concatenate(([1.0], row))
    if not np.any(u):
        margin = 0.0
    else:
        state_u, norm_u = amplitude_encode(u)
        state_v, norm_v = amplitude_encode(v, state_u.amplitudes.size)
        shots = None if cfg.exact else required_samples(norm_u * norm_v, cfg.kernel_accuracy, cfg.shots)
        p0 = overlap_test(state_u, state_v, shots=shots, rng=rng)
        margin = (2.0 * p0 - 1.0) * norm_u * norm_v

    probability = float(success_probability(margin, m.margin_max))
    return probability_label(probability), probability


def q_build_adjacency(m: QSvmModel, d: Dataset, n_samples: int = 10, cfg: Optional[QTrainConfig] = None,
                      rng=None) -> AdjacencyMatrix:
    cfg = cfg or m.config
    rng = make_rng(rng if rng is not None else cfg.seed)

    def inside(points: np.ndarray) -> np.ndarray:
        return success_probability(q_margins(m, points, cfg, rng), m.margin_max) < 0.5

    adjacency = segment_adjacency(d.points, n_samples, inside)
    logger.info(f"Built {adjacency.size}x{adjacency.size} quantum adjacency from {adjacency.segment_tests} segment tests")
    return adjacency


def _row_qubits(m: int) -> int:
    return max(1, math.ceil(math.log2(m)))


def find_neighbour(mask: np.ndarray, n_qubits: int, repetitions: int, counting: bool,
                   cfg: QTrainConfig, stats: QueryStats, rng: np.random.Generator) -> Optional[int]:
    """One "find an unvisited neighbour" step; None once the row is exhausted"""
    space = 1 << n_qubits
    marked = int(mask.sum())

    if counting:
        if marked:
            queries = math.ceil(grover_query_model(space, marked, k_known=False))
            stats.record(max(0, queries - 1), queries)
            return int(np.argmax(mask))
        iterations, queries = exhausted_schedule_cost(space)
        for _ in range(repetitions):
            stats.record(iterations, queries)
        return None

    oracle = IndexOracle(mask)
    for _ in range(repetitions):
        outcome = grover_search(oracle, n_qubits, None, rng, max_qubits=cfg.state_vector_qubits)
        stats.record(outcome.iterations, outcome.oracle_queries)
        if outcome.found_index is not None:
            return outcome.found_index
    if marked:
        stats.classical_fallback_scans += 1
        logger.debug(f"Grover missed {marked} unvisited neighbours; located one classically")
        return int(np.argmax(mask))
    logger.debug(f"No unvisited neighbour after {repetitions} search schedules")
    return None


def quantum_dfs(A: AdjacencyMatrix, start: int, marks: np.ndarray, cfg: Optional[QTrainConfig] = None,
                stats: Optional[QueryStats] = None, rng=None) -> List[int]:
    """Depth-first search whose neighbour lookups are Grover searches over the padded row"""
    cfg = cfg or QTrainConfig()
    stats = stats if stats is not None else QueryStats()
    if marks[start]:
        raise InputError(f"vertex {start} is already marked")
    rng = make_rng(rng if rng is not None else cfg.seed)

    n_qubits = _row_qubits(A.size)
    counting = cfg.counting_only or n_qubits > cfg.state_vector_qubits
    if counting and not stats.counting_only:
        if not cfg.counting_only:
            logger.warning(f"Row space 2^{n_qubits} exceeds state-vector reach; counting Grover queries analytically")
        stats.counting_only = True
    repetitions = max(1, math.ceil(math.log2(1.0 / cfg.grover_fail_prob)))
    padding = np.zeros((1 << n_qubits) - A.size, dtype=bool)

    marks[start] = True
    members = [start]
    stack = [start]
    while stack:
        v = stack[-1]
        mask = np.concatenate((A.bits[v] & ~marks, padding))
        j = find_neighbour(mask, n_qubits, repetitions, counting, cfg, stats, rng)
        if j is None:
            stack.pop()
            continue
        marks[j] = True
        members.append(j)
        stack.append(j)
    return members


def quantum_cluster_finding(A: AdjacencyMatrix, cfg: Optional[QTrainConfig] = None,
                            ids: Optional[Sequence[str]] = None, rng=None) -> Tuple[ClusterResult, QueryStats]:
    cfg = cfg or QTrainConfig()
    ids = list(ids) if ids is not None else [str(i) for i in range(A.size)]
    if len(ids) != A.size:
        raise InputError(f"{len(ids)} ids for a {A.size}x{A.size} adjacency")
    rng = make_rng(rng if rng is not None else cfg.seed)

    stats = QueryStats()
    marks = np.zeros(A.size, dtype=bool)
    components = []
    for vertex in range(A.size):
        if not marks[vertex]:
            components.append(quantum_dfs(A, vertex, marks, cfg, stats, rng))

    logger.info(f"Found {len(components)} clusters among {A.size} points with {stats.oracle_queries} oracle queries")
    return partition_result(components, ids), stats
