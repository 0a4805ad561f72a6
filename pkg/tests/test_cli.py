import json

import pytest

from main import build_experiment, create_parser, main


def run(capsys, *argv):
    code = main(["--log-level", "ERROR", *argv])
    return code, capsys.readouterr().out


def test_cluster_prints_count(capsys, two_blob_csv, tmp_path):
    code, out = run(capsys, "cluster", "-i", str(two_blob_csv), "--sigma", "2", "-o", str(tmp_path))
    assert code == 0
    assert "clusterCount: 2" in out
    assert json.loads((tmp_path / "clusters.json").read_text())["clusterCount"] == 2


def test_missing_input_exits_2(capsys, tmp_path):
    code, out = run(capsys, "cluster", "-i", str(tmp_path / "nope.csv"), "--sigma", "2", "-o", str(tmp_path))
    assert code == 2
    assert "Error: Input file not found" in out


def test_gaussian_without_sigma_exits_2(capsys, two_blob_csv, tmp_path):
    code, out = run(capsys, "cluster", "-i", str(two_blob_csv), "-o", str(tmp_path))
    assert code == 2
    assert "sigma" in out


def test_unknown_kernel_is_a_usage_error(two_blob_csv):
    with pytest.raises(SystemExit) as excinfo:
        main(["cluster", "-i", str(two_blob_csv), "--kernel", "rbf"])
    assert excinfo.value.code == 2


def test_sweep_needs_two_sigmas(capsys, two_blob_csv, tmp_path):
    code, out = run(capsys, "sweep-sigma", "-i", str(two_blob_csv), "--sigmas", "2", "-o", str(tmp_path))
    assert code == 2
    assert ">= 2 sigma" in out


def test_sweep_prints_table(capsys, two_blob_csv, tmp_path):
    code, out = run(capsys, "sweep-sigma", "-i", str(two_blob_csv), "--sigmas", "0.01,2", "-o", str(tmp_path))
    assert code == 0
    assert "sigma=0.01: clusterCount 1" in out
    assert "sigma=2: clusterCount 2" in out


def test_scaling_rejects_short_series(capsys, tmp_path):
    code, out = run(capsys, "bench", "scaling", "--m", "64,128", "-o", str(tmp_path))
    assert code == 2
    assert ">= 4" in out


def test_synth(capsys, tmp_path):
    target = tmp_path / "blobs.csv"
    code, out = run(capsys, "synth", "-o", str(target), "--seed", "3")
    assert code == 0
    assert target.exists()
    assert str(target) in out


def test_quantum_shots_defaults_from_config(two_blob_csv):
    args = create_parser().parse_args(["cluster", "-i", str(two_blob_csv), "--sigma", "1", "--backend", "quantum-shots"])
    experiment = build_experiment(args)
    assert experiment.shots == 10000
    assert experiment.kernel.sigma == 1.0


def test_shots_rejected_for_classical(capsys, two_blob_csv, tmp_path):
    code, _ = run(capsys, "cluster", "-i", str(two_blob_csv), "--sigma", "2", "--shots", "100", "-o", str(tmp_path))
    assert code == 2
