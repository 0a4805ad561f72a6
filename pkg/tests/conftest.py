import numpy as np
import pytest

from src.bench import default_recipe
from src.dataset import Dataset, save_csv, synth_blobs


def make_separable(seed: int, rows: int = 80, features: int = 30) -> Dataset:
    """Two classes at ±4 along a random unit direction with unit noise"""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(features)
    direction /= np.linalg.norm(direction)
    labels = np.where(np.arange(rows) % 2 == 0, 1, -1)
    points = rng.standard_normal((rows, features)) + 4.0 * labels[:, None] * direction
    return Dataset.from_points(points, labels=labels)


def union_find_partition(bits: np.ndarray):
    """Components of a boolean adjacency as sorted index lists, ordered by smallest member"""
    m = bits.shape[0]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(bits)):
        parent[find(int(i))] = find(int(j))
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda members: members[0])


def random_adjacency(rng: np.random.Generator, m: int, density: float) -> np.ndarray:
    upper = np.triu(rng.random((m, m)) < density, 1)
    return upper | upper.T | np.eye(m, dtype=bool)


@pytest.fixture(scope="session")
def two_blobs() -> Dataset:
    recipe = default_recipe(0)
    return synth_blobs(recipe.seed, recipe.blobs)


@pytest.fixture
def two_blob_csv(tmp_path, two_blobs):
    return save_csv(two_blobs, tmp_path / "two_blobs.csv")


@pytest.fixture
def separable_csv(tmp_path):
    return save_csv(make_separable(7), tmp_path / "separable.csv")
