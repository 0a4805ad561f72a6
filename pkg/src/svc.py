"""
Classical support vector clustering: segment tests against the decision
function, the same-contour adjacency matrix, and connected components by
depth-first search.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .dataset import Dataset
from .exceptions import InputError
from .lssvm import SvmModel, decision_values
from .models import ClusterResult, ScanStats
from .utils import get_logger

logger = get_logger(__name__)

# pairs evaluated per vectorized block in segment_adjacency
PAIR_BLOCK = 2048


@dataclass(frozen=True)
class AdjacencyMatrix:
    bits: np.ndarray
    segment_tests: int = 0
    decision_evaluations: int = 0

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1] or bits.shape[0] < 1:
            raise InputError(f"adjacency must be a non-empty square matrix, got shape {bits.shape}")
        if not np.array_equal(bits, bits.T):
            raise InputError("adjacency matrix is not symmetric")
        if not bits.diagonal().all():
            raise InputError("adjacency matrix is not reflexive")
        bits.setflags(write=False)
        object.__setattr__(self, 'bits', bits)

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    @classmethod
    def identity(cls, m: int) -> "AdjacencyMatrix":
        return cls(bits=np.eye(m, dtype=bool))

    @classmethod
    def full(cls, m: int) -> "AdjacencyMatrix":
        return cls(bits=np.ones((m, m), dtype=bool))

    def with_edge(self, i: int, j: int) -> "AdjacencyMatrix":
        bits = self.bits.copy()
        bits[i, j] = bits[j, i] = True
        return AdjacencyMatrix(bits=bits, segment_tests=self.segment_tests,
                               decision_evaluations=self.decision_evaluations)

    def to_document(self) -> Dict:
        return {"size": self.size, "bits": self.bits.astype(int).tolist()}


def _segment_samples(n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise InputError(f"n_samples must be at least 2, got {n_samples}")
    return np.linspace(0.0, 1.0, n_samples)


def segment_points(points: np.ndarray, first: np.ndarray, second: np.ndarray, n_samples: int) -> np.ndarray:
    """(pairs, n_samples, N) points (1 - t) x_i + t x_j along each segment"""
    t = _segment_samples(n_samples)[None, :, None]
    return (1.0 - t) * points[first][:, None, :] + t * points[second][:, None, :]


def segment_adjacency(points: np.ndarray, n_samples: int,
                      inside: Callable[[np.ndarray], np.ndarray]) -> AdjacencyMatrix:
    """A_ij = 1 iff `inside` holds at every sample of the segment x_i -> x_j"""
    m = points.shape[0]
    first, second = np.triu_indices(m, 1)
    connected = np.empty(first.size, dtype=bool)

    for start in range(0, first.size, PAIR_BLOCK):
        stop = min(start + PAIR_BLOCK, first.size)
        samples = segment_points(points, first[start:stop], second[start:stop], n_samples)
        verdicts = inside(samples.reshape(-1, points.shape[1])).reshape(stop - start, n_samples)
        connected[start:stop] = verdicts.all(axis=1)

    bits = np.eye(m, dtype=bool)
    bits[first, second] = connected
    bits[second, first] = connected
    return AdjacencyMatrix(bits=bits, segment_tests=int(first.size),
                           decision_evaluations=int(first.size) * n_samples)


def segment_connected(m: SvmModel, x_i, x_j, n_samples: int = 10) -> bool:
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != (m.train_points.n,) or x_j.shape != (m.train_points.n,):
        raise InputError(f"segment endpoints must have dimension {m.train_points.n}")
    t = _segment_samples(n_samples)[:, None]
    samples = (1.0 - t) * x_i + t * x_j
    return bool(np.all(decision_values(m, samples) >= 0))


def build_adjacency(m: SvmModel, d: Dataset, n_samples: int = 10) -> AdjacencyMatrix:
    adjacency = segment_adjacency(d.points, n_samples, lambda pts: decision_values(m, pts) >= 0)
    logger.info(f"Built {adjacency.size}x{adjacency.size} adjacency from {adjacency.segment_tests} segment tests")
    return adjacency


def depth_first_search(A: AdjacencyMatrix, start: int, marks: np.ndarray,
                       stats: Optional[ScanStats] = None) -> List[int]:
    """Marks and returns the component of `start`.

    Explicit stack with a per-vertex scan pointer, so every visited vertex
    inspects each other entry of its row exactly once.
    """
    if marks[start]:
        raise InputError(f"vertex {start} is already marked")
    bits = A.bits
    m = A.size
    pointer = np.zeros(m, dtype=int)

    marks[start] = True
    members = [start]
    stack = [start]
    while stack:
        v = stack[-1]
        p = pointer[v]
        hits = bits[v, p:] & ~marks[p:]
        offset = int(hits.argmax()) if p < m else 0
        if p < m and hits[offset]:
            j = p + offset
            inspected = j - p + 1 - int(p <= v <= j)
            pointer[v] = j + 1
            marks[j] = True
            members.append(j)
            stack.append(j)
        else:
            inspected = m - p - int(v >= p)
            pointer[v] = m
            stack.pop()
        if stats is not None:
            stats.neighbour_scans += inspected
    return members


def partition_result(components: Sequence[Sequence[int]], ids: Sequence[str],
                     metadata: Optional[Dict] = None) -> ClusterResult:
    clusters = [[ids[i] for i in sorted(component)] for component in components]
    membership = {point_id: index for index, members in enumerate(clusters) for point_id in members}
    return ClusterResult(cluster_count=len(clusters), clusters=clusters, membership=membership,
                         metadata=metadata or {})


def cluster_finding(A: AdjacencyMatrix, ids: Optional[Sequence[str]] = None,
                    stats: Optional[ScanStats] = None) -> ClusterResult:
    """Connected components, ordered by smallest member index"""
    ids = list(ids) if ids is not None else [str(i) for i in range(A.size)]
    if len(ids) != A.size:
        raise InputError(f"{len(ids)} ids for a {A.size}x{A.size} adjacency")

    marks = np.zeros(A.size, dtype=bool)
    components = []
    for vertex in range(A.size):
        if not marks[vertex]:
            components.append(depth_first_search(A, vertex, marks, stats))

    logger.info(f"Found {len(components)} clusters among {A.size} points")
    return partition_result(components, ids)
