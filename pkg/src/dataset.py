"""
Input data for both backends: CSV ingestion, synthetic blobs, unit
normalization and PCA projection.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import config
from .exceptions import InputError
from .models import BlobSpec
from .utils import get_logger, make_rng

logger = get_logger(__name__)


@dataclass(frozen=True)
class Dataset:
    """M points of dimension N with optional ±1 labels and unique ids"""
    points: np.ndarray
    ids: Tuple[str, ...]
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise InputError(f"points must be a non-empty M x N array, got shape {points.shape}")
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

        ids = tuple(str(i) for i in self.ids)
        if len(ids) != points.shape[0]:
            raise InputError(f"{len(ids)} ids for {points.shape[0]} points")
        if len(set(ids)) != len(ids):
            raise InputError("ids must be unique")
        object.__setattr__(self, 'ids', ids)

        if self.labels is not None:
            labels = np.array(self.labels, dtype=int)
            if labels.shape != (points.shape[0],):
                raise InputError(f"{labels.size} labels for {points.shape[0]} points")
            if not np.all(np.isin(labels, (-1, 1))):
                raise InputError("labels must be +1 or -1")
            labels.setflags(write=False)
            object.__setattr__(self, 'labels', labels)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_points(cls, points, labels=None, ids: Optional[Sequence[str]] = None) -> "Dataset":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if ids is None:
            ids = [str(i) for i in range(points.shape[0])]
        return cls(points=points, ids=tuple(ids), labels=labels)

    def with_points(self, points: np.ndarray) -> "Dataset":
        return Dataset(points=points, ids=self.ids, labels=self.labels)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = list(indices)
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(points=self.points[indices], ids=tuple(self.ids[i] for i in indices), labels=labels)


@dataclass(frozen=True)
class PcaProjection:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    total_variance: float = field(default=0.0)

    @property
    def variance_ratio(self) -> np.ndarray:
        return self.explained_variance / self.total_variance if self.total_variance > 0 else self.explained_variance

    def project(self, d: "Dataset") -> "Dataset":
        """Centre with the fitted mean and map onto the kept components"""
        if d.n != self.mean.size:
            raise InputError(f"dimension mismatch: projection expects {self.mean.size}, got {d.n}")
        return d.with_points((d.points - self.mean) @ self.components)


def _parse_cell(cell: str) -> Optional[float]:
    try:
        value = float(cell.strip())
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def load_csv(path: Union[str, Path], has_labels: bool = False) -> Dataset:
    """Load a comma-separated numeric file; a fully non-numeric first row is a header.

    Rows are reported by their 1-based line number in the file.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")

    rows: List[List[float]] = []
    labels: List[int] = []
    width = None
    encoding = config.get_data_config()['encoding']

    with open(path, 'r', newline='', encoding=encoding) as csvfile:
        for line_number, row in enumerate(csv.reader(csvfile), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = [_parse_cell(cell) for cell in row]
            if line_number == 1 and all(v is None for v in values):
                logger.debug(f"Header detected in {path}: {row}")
                continue
            for column, value in enumerate(values, start=1):
                if value is None:
                    raise InputError(f"non-numeric cell at row {line_number} (column {column}): {row[column - 1]!r}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputError(f"ragged row {line_number}: {len(values)} columns, expected {width}")
            if has_labels:
                if width < 2:
                    raise InputError(f"row {line_number} has no feature columns besides the label")
                label = values[-1]
                if label not in (1.0, -1.0):
                    raise InputError(f"label not in {{+1, -1}} at row {line_number}: {row[-1]!r}")
                labels.append(int(label))
                values = values[:-1]
            rows.append(values)

    if not rows:
        raise InputError(f"no data rows in {path}")

    dataset = Dataset.from_points(np.array(rows), labels=np.array(labels) if has_labels else None)
    logger.info(f"Loaded {dataset.m} points of dimension {dataset.n} from {path}")
    return dataset


def save_csv(d: Dataset, path: Union[str, Path]) -> Path:
    """Write points (and labels as the last column) in the format load_csv reads"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding=config.get_data_config()['encoding']) as csvfile:
        writer = csv.writer(csvfile)
        for index, point in enumerate(d.points):
            row = [repr(float(v)) for v in point]
            if d.labels is not None:
                row.append(str(int(d.labels[index])))
            writer.writerow(row)
    return path


def synth_blobs(seed: int, blobs: Sequence[Union[BlobSpec, Tuple[Sequence[float], float, int]]]) -> Dataset:
    """Isotropic Gaussian blobs; ids are 'blob{b}-{i}' so ground truth survives any reordering"""
    specs = [b if isinstance(b, BlobSpec) else BlobSpec(center=list(b[0]), spread=b[1], count=b[2]) for b in blobs]
    dims = {len(b.center) for b in specs}
    if len(dims) != 1:
        raise InputError(f"blob centers have mismatched dimensions: {sorted(dims)}")

    rng = make_rng(seed)
    points, ids = [], []
    for blob_number, blob in enumerate(specs):
        center = np.asarray(blob.center, dtype=float)
        points.append(center + blob.spread * rng.standard_normal((blob.count, center.size)))
        ids.extend(f"blob{blob_number}-{i}" for i in range(blob.count))
    return Dataset(points=np.vstack(points), ids=tuple(ids))


def blob_index(d: Dataset) -> np.ndarray:
    """Generator ground truth recovered from synth_blobs ids"""
    try:
        return np.array([int(point_id.split('-', 1)[0][len('blob'):]) for point_id in d.ids])
    except ValueError as e:
        raise InputError(f"dataset ids do not come from synth_blobs: {e}") from e


def unit_normalize(d: Dataset) -> Tuple[Dataset, np.ndarray]:
    norms = np.linalg.norm(d.points, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise InputError(f"zero vector at index {int(zero[0])} cannot be normalized")
    return d.with_points(d.points / norms[:, None]), norms


def pca_components(d: Dataset, k: int) -> PcaProjection:
    """Covariance eigendecomposition of the mean-centred data.

    Features are centred but not scaled. Each component's largest-magnitude
    loading is made positive.
    """
    if not 1 <= k <= d.n:
        raise InputError(f"k must lie in [1, {d.n}], got {k}")
    mean = d.points.mean(axis=0)
    centred = d.points - mean
    if d.m > 1:
        covariance = centred.T @ centred / (d.m - 1)
    else:
        covariance = np.zeros((d.n, d.n))
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]

    pivots = np.argmax(np.abs(eigenvectors), axis=0)
    signs = np.sign(eigenvectors[pivots, np.arange(d.n)])
    signs[signs == 0] = 1.0
    eigenvectors = eigenvectors * signs

    return PcaProjection(
        mean=mean,
        components=eigenvectors[:, :k],
        explained_variance=eigenvalues[:k],
        total_variance=float(eigenvalues.sum()),
    )


def pca_project(d: Dataset, k: int) -> Dataset:
    projection = pca_components(d, k)
    logger.debug(f"PCA to {k} dims keeps {projection.variance_ratio.sum():.4f} of the variance")
    return projection.project(d)
