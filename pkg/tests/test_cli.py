import json
import subprocess
import sys

import numpy as np
import pytest

from grasp_metrics import load_poses, load_stats, save_poses, synthesize_population, transform_pose
from grasp_metrics.cli import main
from grasp_metrics.poses import PosePopulation


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def pose_file(tmp_path):
    path = tmp_path / "ref.jsonl"
    save_poses(synthesize_population(50, 3, jitter_sigma=0.02), path)
    return str(path)


def test_gen_synthetic_writes_count(tmp_path, capsys):
    out_path = tmp_path / "a.jsonl"
    code, out, _ = run_cli(
        capsys, "gen-synthetic", "--count", "100", "--seed", "1", "--out", str(out_path)
    )
    assert code == 0
    assert json.loads(out)["written"] == 100
    assert sum(1 for _ in out_path.open()) == 100


def test_gen_synthetic_zero_count_is_usage_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "gen-synthetic", "--count", "0", "--out", str(tmp_path / "x.jsonl")
    )
    assert code == 1
    assert "count" in err


def test_gen_synthetic_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["gen-synthetic", "--count", "25", "--seed", "9", "--jitter-sigma", "0.01"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("name,dim", [("denset", 210), ("spectral", 462)])
def test_describe_dimensions(pose_file, tmp_path, capsys, name, dim):
    out_path = tmp_path / "desc.jsonl"
    code, _, _ = run_cli(
        capsys, "describe", "--descriptor", name, "--in", pose_file, "--out", str(out_path)
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert len(lines) == 50
    for line in lines:
        obj = json.loads(line)
        assert obj["descriptor"] == name
        assert len(obj["values"]) == dim


def test_describe_unknown_descriptor(pose_file, capsys):
    code, _, err = run_cli(capsys, "describe", "--descriptor", "foo", "--in", pose_file)
    assert code == 1
    assert "unknown descriptor" in err


def test_describe_bad_pose_line_cites_line(tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    good = json.dumps({"points": [[0.0, 0.0]] * 21})
    path.write_text(good + "\n" + json.dumps({"points": [[0.0, 0.0]] * 20}) + "\n")
    code, _, err = run_cli(capsys, "describe", "--descriptor", "identity", "--in", str(path))
    assert code == 2
    assert "line 2" in err


def test_precompute_cache_round_trip(pose_file, tmp_path, capsys):
    cache = tmp_path / "ref.stats.json"
    code, out, _ = run_cli(
        capsys, "precompute", "--descriptor", "denset", "--in", pose_file, "--out", str(cache)
    )
    assert code == 0
    info = json.loads(out)
    assert info["dim"] == 210 and info["count"] == 50
    assert info["precompute_seconds"] >= 0
    stats = load_stats(cache)
    assert stats.dim == 210
    assert stats.descriptor_id == "denset"


def test_precompute_empty_input(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code, _, err = run_cli(
        capsys, "precompute", "--descriptor", "identity", "--in", str(empty),
        "--out", str(tmp_path / "s.json"),
    )
    assert code == 2


def test_ffid_self_score_near_zero(pose_file, tmp_path, capsys):
    cache = tmp_path / "c.json"
    assert main(["precompute", "--descriptor", "identity", "--in", pose_file, "--out", str(cache)]) == 0
    capsys.readouterr()
    code, out, _ = run_cli(
        capsys, "ffid", "--ref", str(cache), "--gen", pose_file, "--descriptor", "identity"
    )
    assert code == 0
    report = json.loads(out)
    assert report["score"] < 1e-6
    assert report["n_ref"] == report["n_gen"] == 50


def test_ffid_translated_closed_form(tmp_path, capsys):
    pop = synthesize_population(200, 5, jitter_sigma=0.02)
    moved = PosePopulation(tuple(transform_pose(p, (0.1, 0.2), 0.0) for p in pop))
    ref, gen = tmp_path / "ref.jsonl", tmp_path / "gen.jsonl"
    save_poses(pop, ref)
    save_poses(moved, gen)
    code, out, _ = run_cli(
        capsys, "ffid", "--ref", str(ref), "--gen", str(gen), "--descriptor", "identity"
    )
    assert code == 0
    assert json.loads(out)["score"] == pytest.approx(1.05, abs=1e-6)


def test_ffid_cache_descriptor_mismatch(pose_file, tmp_path, capsys):
    cache = tmp_path / "c.json"
    assert main(["precompute", "--descriptor", "denset", "--in", pose_file, "--out", str(cache)]) == 0
    capsys.readouterr()
    code, _, err = run_cli(
        capsys, "ffid", "--ref", str(cache), "--gen", pose_file, "--descriptor", "geometric"
    )
    assert code == 1
    assert "denset" in err


def test_mmd_identical_files(pose_file, capsys):
    code, out, _ = run_cli(capsys, "mmd", "--in1", pose_file, "--in2", pose_file)
    assert code == 0
    assert json.loads(out)["score"] == 0.0


def test_mmd_singletons(tmp_path, capsys):
    a = synthesize_population(1, 1, jitter_sigma=0.05)
    b = synthesize_population(1, 2, jitter_sigma=0.05)
    fa, fb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_poses(a, fa)
    save_poses(b, fb)
    code, out, _ = run_cli(capsys, "mmd", "--in1", str(fa), "--in2", str(fb))
    assert code == 0
    expected = 2 * float(np.linalg.norm(a[0].points.ravel() - b[0].points.ravel()))
    assert json.loads(out)["score"] == pytest.approx(expected, rel=1e-12)


def test_mmd_empty_population(tmp_path, pose_file, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code, _, _ = run_cli(capsys, "mmd", "--in1", str(empty), "--in2", pose_file)
    assert code == 2


def test_loss_identical_files(pose_file, capsys):
    code, out, _ = run_cli(
        capsys, "loss", "--gt", pose_file, "--pred", pose_file, "--descriptor", "denset"
    )
    assert code == 0
    result = json.loads(out)
    assert result["mean_loss"] == 0.0
    assert result["count"] == 50


def test_loss_identity_uniform_shift(tmp_path, capsys):
    pop = synthesize_population(10, 1, jitter_sigma=0.02)
    moved = PosePopulation(tuple(transform_pose(p, (1.0, 0.0), 0.0) for p in pop))
    gt, pred = tmp_path / "gt.jsonl", tmp_path / "pred.jsonl"
    save_poses(pop, gt)
    save_poses(moved, pred)
    code, out, _ = run_cli(
        capsys, "loss", "--gt", str(gt), "--pred", str(pred), "--descriptor", "identity"
    )
    assert code == 0
    assert json.loads(out)["mean_loss"] == pytest.approx(21.0, rel=1e-9)


def test_loss_grad_emits_gradients(pose_file, capsys):
    code, out, _ = run_cli(
        capsys, "loss", "--gt", pose_file, "--pred", pose_file,
        "--descriptor", "geometric", "--grad",
    )
    assert code == 0
    grads = json.loads(out)["gradients"]
    assert len(grads) == 50 and len(grads[0]) == 42


def test_loss_grad_spectral_rejected(pose_file, capsys):
    code, _, _ = run_cli(
        capsys, "loss", "--gt", pose_file, "--pred", pose_file,
        "--descriptor", "spectral", "--grad",
    )
    assert code == 1


def test_loss_length_mismatch(tmp_path, pose_file, capsys):
    short = tmp_path / "short.jsonl"
    save_poses(synthesize_population(3, 1), short)
    code, _, _ = run_cli(
        capsys, "loss", "--gt", pose_file, "--pred", str(short), "--descriptor", "identity"
    )
    assert code == 2


def test_bench_row_shape(tmp_path, capsys):
    out_path = tmp_path / "bench.csv"
    code, _, _ = run_cli(
        capsys, "bench", "--sizes", "60,120", "--eval-size", "20",
        "--seed", "0", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "metric,phase,size,seconds"
    assert len(lines) == 1 + 15  # 5 metrics x (2 precompute + 1 evaluate)
    for line in lines[1:]:
        metric, phase, size, seconds = line.split(",")
        assert phase in ("precompute", "evaluate")
        assert int(size) in (60, 120, 20)
        assert float(seconds) >= 0.0
        assert np.isfinite(float(seconds))


def test_bench_single_size_rejected(capsys):
    code, _, _ = run_cli(capsys, "bench", "--sizes", "100", "--eval-size", "10")
    assert code == 1


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 1


def test_unknown_flag_is_usage_error(pose_file, capsys):
    assert main(["mmd", "--in1", pose_file, "--bogus"]) == 1


def test_threads_env_var_equivalent(pose_file, tmp_path, capsys, monkeypatch):
    c1, c2 = tmp_path / "s1.json", tmp_path / "s2.json"
    assert main(["precompute", "--descriptor", "spectral", "--in", pose_file,
                 "--out", str(c1), "--threads", "3"]) == 0
    monkeypatch.setenv("GRASP_METRICS_THREADS", "3")
    assert main(["precompute", "--descriptor", "spectral", "--in", pose_file,
                 "--out", str(c2)]) == 0
    capsys.readouterr()
    s1, s2 = load_stats(c1), load_stats(c2)
    np.testing.assert_array_equal(s1.mean, s2.mean)
    np.testing.assert_array_equal(s1.cov, s2.cov)


def test_console_script_entry_point(tmp_path):
    out_path = tmp_path / "p.jsonl"
    proc = subprocess.run(
        [sys.executable, "-m", "grasp_metrics.cli", "gen-synthetic",
         "--count", "5", "--seed", "2", "--out", str(out_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["written"] == 5
    assert len(load_poses(out_path)) == 5
