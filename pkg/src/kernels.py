from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .exceptions import InputError
from .models import KernelSpec


def _as_points(d: Union[Dataset, np.ndarray]) -> np.ndarray:
    if isinstance(d, Dataset):
        return d.points
    return np.atleast_2d(np.asarray(d, dtype=float))


def kernel_eval(spec: KernelSpec, x_i, x_j) -> float:
    """K(x_i, x_j); the polynomial kernel is homogeneous, (x_i·x_j)^d"""
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != x_j.shape:
        raise InputError(f"dimension mismatch: {x_i.shape} vs {x_j.shape}")

    if spec.kind == "linear":
        return float(x_i @ x_j)
    if spec.kind == "polynomial":
        return float((x_i @ x_j) ** spec.degree)
    diff = x_i - x_j
    return float(np.exp(-spec.sigma * (diff @ diff)))


def cross_kernel(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kernel values between every row of a and every row of b"""
    a = _as_points(a)
    b = _as_points(b)
    if a.shape[1] != b.shape[1]:
        raise InputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")

    if spec.kind == "gaussian":
        return np.exp(-spec.sigma * cdist(a, b, 'sqeuclidean'))
    gram = a @ b.T
    if spec.kind == "polynomial":
        return gram ** spec.degree
    return gram


def kernel_matrix(spec: KernelSpec, d: Union[Dataset, np.ndarray]) -> np.ndarray:
    points = _as_points(d)
    matrix = cross_kernel(spec, points, points)
    # BLAS may differ in the last bit between (i, j) and (j, i)
    return (matrix + matrix.T) / 2.0
