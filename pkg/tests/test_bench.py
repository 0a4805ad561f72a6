import csv
import json

import numpy as np
import pytest

from conftest import make_separable
from src.bench import (
    SCALING_COLUMNS, analytic_series, cmd_cluster, cmd_scaling, cmd_sweep_sigma, cmd_synth, cmd_table1_analog,
    default_recipe, fit_slope, load_report,
)
from src.dataset import Dataset, load_csv, save_csv
from src.exceptions import InputError
from src.models import ExperimentConfig, KernelSpec
from src.utils import make_rng

SCALING_MS = [64, 128, 256, 512, 1024, 2048, 4096]


def experiment(path, out_dir, backend="classical", **kwargs):
    return ExperimentConfig(input_path=str(path), kernel=kwargs.pop("kernel", KernelSpec.gaussian(2.0)),
                            backend=backend, out_dir=str(out_dir), **kwargs)


class TestCluster:
    def test_classical_two_blobs(self, two_blob_csv, tmp_path):
        report = cmd_cluster(experiment(two_blob_csv, tmp_path / "out"))
        record = report.records[0]
        assert record.cluster_count == 2
        assert record.neighbour_scans == 60 * 59
        assert record.segment_tests == 60 * 59 // 2
        assert record.query_stats is None

        document = json.loads((tmp_path / "out" / "clusters.json").read_text())
        assert document["clusterCount"] == 2
        assert document["metadata"]["bounded_support_vectors"] == []
        assert {"clusters.json", "model.json", "report.json"} <= {p.name for p in (tmp_path / "out").iterdir()}

    def test_quantum_exact_matches_classical(self, two_blob_csv, tmp_path):
        cmd_cluster(experiment(two_blob_csv, tmp_path / "c"))
        report = cmd_cluster(experiment(two_blob_csv, tmp_path / "q", backend="quantum-exact"))
        classical = json.loads((tmp_path / "c" / "clusters.json").read_text())
        quantum = json.loads((tmp_path / "q" / "clusters.json").read_text())
        assert quantum["clusters"] == classical["clusters"]
        stats = report.records[0].query_stats
        assert stats.oracle_queries >= stats.grover_iterations > 0
        assert report.records[0].neighbour_scans is None

    def test_quantum_shots_is_reproducible(self, two_blob_csv, tmp_path):
        runs = [cmd_cluster(experiment(two_blob_csv, tmp_path / str(i), backend="quantum-shots", shots=2000, seed=5))
                for i in range(2)]
        first, second = (json.loads((tmp_path / str(i) / "clusters.json").read_text()) for i in range(2))
        assert first["clusters"] == second["clusters"]
        assert runs[0].records[0].query_stats == runs[1].records[0].query_stats

    def test_synthetic_input(self, tmp_path):
        config = ExperimentConfig(synthetic=default_recipe(0), kernel=KernelSpec.gaussian(2.0), out_dir=str(tmp_path))
        assert cmd_cluster(config).records[0].cluster_count == 2

    def test_missing_input(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            cmd_cluster(experiment(tmp_path / "missing.csv", tmp_path / "out"))
        assert not (tmp_path / "out").exists()

    def test_report_round_trip(self, two_blob_csv, tmp_path):
        report = cmd_cluster(experiment(two_blob_csv, tmp_path))
        reloaded = load_report(tmp_path / "report.json")
        assert reloaded.schema_version == "1"
        assert reloaded.records[0].cluster_count == report.records[0].cluster_count
        assert reloaded.metadata["aliases"] == {"gamma": ["Upsilon", "zeta"]}


class TestSweepSigma:
    def test_table(self, two_blob_csv, tmp_path):
        report = cmd_sweep_sigma(experiment(two_blob_csv, tmp_path), [0.01, 2.0])
        assert [row["cluster_count"] for row in report.metadata["sigma_table"]] == [1, 2]
        assert [r.extra["sigma"] for r in report.records] == [0.01, 2.0]

    def test_needs_two_values(self, two_blob_csv, tmp_path):
        with pytest.raises(InputError, match=">= 2 sigma"):
            cmd_sweep_sigma(experiment(two_blob_csv, tmp_path), [1.0])


class TestScaling:
    def test_slopes_and_artifacts(self, tmp_path):
        report = cmd_scaling(SCALING_MS, tmp_path)
        slopes = report.metadata["slopes"]
        assert slopes["classical_neighbour_scans"] == pytest.approx(2.0, abs=0.05)
        assert 1.3 <= slopes["quantum_oracle_queries"] <= 1.7

        with open(tmp_path / "scaling.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == SCALING_COLUMNS
        assert [int(r["neighbour_scans"]) for r in rows] == [m * (m - 1) for m in SCALING_MS]
        svg = (tmp_path / "scaling.svg").read_text()
        assert svg.lstrip().startswith("<?xml")
        assert 'id="axes_2"' in svg
        assert len(report.records) == 2 * len(SCALING_MS)

    @pytest.mark.parametrize("ms, message", [
        ([64, 128, 256], ">= 4"),
        ([64, 256, 128, 512], "ascending"),
        ([1, 2, 4, 8], "at least 2"),
    ])
    def test_rejects_bad_series(self, tmp_path, ms, message):
        with pytest.raises(InputError, match=message):
            cmd_scaling(ms, tmp_path)

    def test_analytic_series(self):
        series = analytic_series(16)
        assert series["classical_training_ops"] == 4096.0
        assert series["quantum_training_ops"] == 8.0
        assert series["classical_search_queries"] == 16.0
        assert series["grover_search_queries"] == 4.0

    def test_fit_slope(self):
        assert fit_slope([1, 10, 100], [3, 300, 30000]) == pytest.approx(2.0)


class TestClassificationComparison:
    def test_both_backends_separate_the_classes(self, separable_csv, tmp_path):
        report = cmd_table1_analog(separable_csv, train_count=20, seed=0, out_dir=tmp_path)
        classical, quantum = (r.extra["accuracy"] for r in report.records)
        assert classical >= 0.95
        assert quantum >= 0.95
        assert abs(classical - quantum) <= 0.05
        assert report.records[0].extra["test_count"] == 60
        assert report.metadata["pca"]["preprocessing"] == "mean-centred, unscaled"
        assert report.metadata["reference_accuracy"]["classical"] == 0.99

    def test_deterministic(self, separable_csv, tmp_path):
        first = cmd_table1_analog(separable_csv, seed=3, out_dir=tmp_path / "a")
        second = cmd_table1_analog(separable_csv, seed=3, out_dir=tmp_path / "b")
        assert [r.extra["accuracy"] for r in first.records] == [r.extra["accuracy"] for r in second.records]

    def test_too_few_rows(self, separable_csv, tmp_path):
        with pytest.raises(InputError, match="need at least 90 rows"):
            cmd_table1_analog(separable_csv, train_count=80, out_dir=tmp_path)

    def test_single_class(self, tmp_path):
        d = Dataset.from_points(np.random.default_rng(0).standard_normal((40, 3)), labels=np.ones(40, dtype=int))
        with pytest.raises(InputError, match="both classes"):
            cmd_table1_analog(save_csv(d, tmp_path / "one.csv"), out_dir=tmp_path)

    def test_train_count_floor(self, separable_csv, tmp_path):
        with pytest.raises(InputError, match="train_count"):
            cmd_table1_analog(separable_csv, train_count=1, out_dir=tmp_path)

    def test_projection_ignores_test_rows(self, tmp_path):
        d = make_separable(7)
        order = make_rng(0).permutation(d.m)
        shifted = d.points.copy()
        shifted[order[20:]] *= 50.0
        first = cmd_table1_analog(save_csv(d, tmp_path / "a.csv"), seed=0, out_dir=tmp_path / "a")
        second = cmd_table1_analog(save_csv(d.with_points(shifted), tmp_path / "b.csv"), seed=0, out_dir=tmp_path / "b")
        assert first.metadata["pca"]["fitted_on"] == "training rows"
        np.testing.assert_allclose(second.metadata["pca"]["variance_ratio"], first.metadata["pca"]["variance_ratio"])


def test_synth_writes_two_blobs(tmp_path):
    path = cmd_synth(tmp_path / "blobs.csv", seed=0)
    d = load_csv(path)
    assert (d.m, d.n) == (60, 2)
