import io

import numpy as np
import pytest

from gnc_robust import bench
from gnc_robust.bench import Application, BenchSpec, Method, derive_seed, run_benchmark
from gnc_robust.cli import main
from gnc_robust.correspondences import load_registration, load_shape, save_correspondences
from gnc_robust.ply import save_ply_points
from gnc_robust.shape_alignment import quat_from_rotation
from gnc_robust.synthetic import (
    RegistrationInstanceSpec,
    ShapeInstanceSpec,
    generate_registration,
    generate_shape_alignment,
)


def strip_wall_time(csv_text):
    col = bench.CSV_HEADER.index("wall_time_ms")
    rows = [line.split(",") for line in csv_text.splitlines()]
    for row in rows:
        del row[col]
    return rows


def parse_solve_output(text):
    out = {}
    for line in text.strip().splitlines():
        key, _, value = line.partition(": ")
        out[key] = value
    return out


class TestBenchSpec:
    def test_defaults(self):
        spec = BenchSpec()
        assert spec.outlier_rates == pytest.approx([0.1 * k for k in range(10)])
        assert spec.runs_per_rate == 20 and spec.point_count == 100
        assert spec.noise_bound == pytest.approx(0.06)
        assert BenchSpec(application="shape").point_count == 50
        assert BenchSpec(application="shape").ransac_iterations == 100

    @pytest.mark.parametrize(
        "kwargs",
        [{"runs_per_rate": 0}, {"outlier_rates": (0.5, 0.4)}, {"outlier_rates": (0.2, 1.0)},
         {"outlier_rates": ()}, {"methods": ()}, {"methods": ("Magic",)}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            BenchSpec(**kwargs)


def test_derived_seed_depends_on_every_index():
    seeds = {derive_seed(0, i, k) for i in range(3) for k in range(3)}
    assert len(seeds) == 9
    assert derive_seed(1, 0, 0) != derive_seed(0, 0, 0)
    assert derive_seed(5, 2, 3) == derive_seed(5, 2, 3)


@pytest.mark.parametrize("app", ["registration", "shape"])
def test_noiseless_outlier_free_sweep_is_exact(app):
    spec = BenchSpec(application=app, outlier_rates=(0.0,), runs_per_rate=1, sigma=0.0,
                     ransac_max_iterations=20)
    records = run_benchmark(spec)
    assert [r.method for r in records] == [m.value for m in Method]
    for rec in records:
        assert rec.rotation_error_deg < 1e-4
        assert rec.translation_error < 1e-6
        assert rec.precision == 1.0 and rec.recall == 1.0
        if app == "shape":
            assert rec.scale_error < 1e-6
        else:
            assert rec.scale_error is None


def test_records_are_paired_and_ordered():
    spec = BenchSpec(methods=("GncTls", "NonRobustLs"), outlier_rates=(0.1, 0.5), runs_per_rate=3)
    records = run_benchmark(spec)
    keys = [(r.outlier_rate, r.run_index, r.method) for r in records]
    assert keys == [(rate, k, m) for rate in (0.1, 0.5) for k in range(3) for m in ("GncTls", "NonRobustLs")]


def test_csv_deterministic_and_parallel_equivalent():
    spec = BenchSpec(outlier_rates=(0.3, 0.8), runs_per_rate=3)
    a = bench.records_to_csv(run_benchmark(spec))
    b = bench.records_to_csv(run_benchmark(spec))
    c = bench.records_to_csv(run_benchmark(spec, jobs=2))
    assert strip_wall_time(a) == strip_wall_time(b) == strip_wall_time(c)


def test_csv_round_trip():
    spec = BenchSpec(application="shape", methods=("GncGm", "NonRobustLs"), outlier_rates=(0.2,),
                     runs_per_rate=2)
    records = run_benchmark(spec)
    text = bench.records_to_csv(records)
    assert text.splitlines()[0] == ",".join(bench.CSV_HEADER)
    assert bench.read_csv(io.StringIO(text)) == records


def test_read_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        bench.read_csv(io.StringIO("a,b,c\n"))


def test_solver_failure_becomes_sentinel_record(monkeypatch):
    from gnc_robust.errors import DegenerateConfiguration

    def broken(*args, **kwargs):
        raise DegenerateConfiguration("forced")

    monkeypatch.setattr(bench, "run_method", broken)
    records = run_benchmark(BenchSpec(methods=("GncTls",), outlier_rates=(0.0,), runs_per_rate=2))
    assert len(records) == 2
    for rec in records:
        assert rec.rotation_error_deg == rec.translation_error == bench.FAILED
        assert rec.converged is False
        assert rec.precision == rec.recall == 0.0


def test_summary_median_and_max():
    recs = [bench.BenchRecord("GncTls", 0.5, k, float(k), 0.0, None, 10, 1.0, True, 1.0, 1.0) for k in range(5)]
    (row,) = bench.summarize(recs)
    assert row.median_rotation_error_deg == 2.0 and row.max_rotation_error_deg == 4.0
    assert row.runs == 5 and row.median_scale_error is None


def test_gnc_tls_accurate_at_80_percent():
    spec = BenchSpec(methods=("GncTls",), outlier_rates=(0.8,), runs_per_rate=10)
    errs = [r.rotation_error_deg for r in run_benchmark(spec)]
    assert np.median(errs) < 5


class TestCli:
    def test_bench_then_summary(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        code = main(["bench", "--rates", "0.0,0.5", "--runs", "2", "--methods", "GncGm,Ransac", "--out", str(out)])
        assert code == 0
        capsys.readouterr()
        assert main(["summary", "--in", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("method,outlier_rate,runs,median_rotation_error_deg")
        assert len(lines) == 1 + 4

    def test_bench_to_stdout(self, capsys):
        assert main(["bench", "--rates", "0.1", "--runs", "1", "--methods", "NonRobustLs"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == ",".join(bench.CSV_HEADER) and len(lines) == 2

    def test_summary_missing_file(self, tmp_path):
        assert main(["summary", "--in", str(tmp_path / "none.csv")]) == 2

    def test_solve_noiseless_registration(self, tmp_path, capsys):
        inst = generate_registration(RegistrationInstanceSpec(sigma=0.0, outlier_rate=0.0, seed=1))
        path = tmp_path / "reg.txt"
        save_correspondences(path, inst.src, inst.dst, header="noiseless")
        assert main(["solve", "--input", str(path), "--cbar", "0.01"]) == 0
        out = parse_solve_output(capsys.readouterr().out)
        R = np.array(out["rotation_colmajor"].split(), float).reshape(3, 3, order="F")
        np.testing.assert_allclose(R, inst.ground_truth.R, atol=1e-9)
        np.testing.assert_allclose(np.array(out["translation"].split(), float), inst.ground_truth.t, atol=1e-9)
        q = np.array(out["quaternion_xyzw"].split(), float)
        np.testing.assert_allclose(q, quat_from_rotation(inst.ground_truth.R), atol=1e-9)
        assert out["inliers"] == "100" and out["converged"] == "true"

    def test_solve_noiseless_shape(self, tmp_path, capsys):
        inst = generate_shape_alignment(ShapeInstanceSpec(sigma=0.0, outlier_rate=0.0, seed=2))
        path = tmp_path / "shape.txt"
        save_correspondences(path, inst.z, inst.B)
        assert main(["solve", "--app", "shape", "--method", "GncGm", "--input", str(path), "--cbar", "0.01"]) == 0
        out = parse_solve_output(capsys.readouterr().out)
        assert float(out["scale"]) == pytest.approx(inst.ground_truth.s, rel=1e-6)
        R = np.array(out["rotation_colmajor"].split(), float).reshape(3, 3, order="F")
        np.testing.assert_allclose(R, inst.ground_truth.R, atol=1e-5)

    def test_solve_70_percent_outliers_counts_inliers(self, tmp_path, capsys):
        inst = generate_registration(RegistrationInstanceSpec(outlier_rate=0.7, seed=123))
        path = tmp_path / "reg.txt"
        save_correspondences(path, inst.src, inst.dst)
        assert main(["solve", "--method", "GncTls", "--input", str(path), "--cbar", "0.06"]) == 0
        out = parse_solve_output(capsys.readouterr().out)
        assert abs(int(out["inliers"]) - 30) <= 2

    def test_solve_from_ply_pair(self, tmp_path, capsys):
        inst = generate_registration(RegistrationInstanceSpec(sigma=0.0, outlier_rate=0.2, seed=7))
        save_ply_points(tmp_path / "a.ply", inst.src)
        # shuffle the target cloud so the index file carries the pairing
        perm = np.random.default_rng(0).permutation(100)
        save_ply_points(tmp_path / "b.ply", inst.dst[perm])
        inverse = np.argsort(perm)
        (tmp_path / "pairs.txt").write_text("".join(f"{i} {inverse[i]}\n" for i in range(100)))
        code = main(["solve", "--source", str(tmp_path / "a.ply"), "--target", str(tmp_path / "b.ply"),
                     "--input", str(tmp_path / "pairs.txt"), "--cbar", "0.01"])
        assert code == 0
        out = parse_solve_output(capsys.readouterr().out)
        R = np.array(out["rotation_colmajor"].split(), float).reshape(3, 3, order="F")
        np.testing.assert_allclose(R, inst.ground_truth.R, atol=1e-9)
        assert out["inliers"] == "80"

    def test_malformed_file_exits_2_naming_line(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("# header\n0 0 0 1 1 1\n0 0 0 1 1\n")
        assert main(["solve", "--input", str(path), "--cbar", "0.1"]) == 2
        assert f"{path}:3:" in capsys.readouterr().err

    def test_missing_input_exits_2(self, tmp_path):
        assert main(["solve", "--input", str(tmp_path / "none.txt"), "--cbar", "0.1"]) == 2

    def test_index_out_of_range_exits_2(self, tmp_path, capsys):
        save_ply_points(tmp_path / "a.ply", np.eye(3))
        (tmp_path / "pairs.txt").write_text("0 0\n1 7\n")
        code = main(["solve", "--source", str(tmp_path / "a.ply"), "--target", str(tmp_path / "a.ply"),
                     "--input", str(tmp_path / "pairs.txt"), "--cbar", "0.1"])
        assert code == 2
        assert "pairs.txt:2:" in capsys.readouterr().err

    def test_degenerate_input_exits_1(self, tmp_path):
        path = tmp_path / "line.txt"
        save_correspondences(path, np.zeros((4, 3)), np.zeros((4, 3)))
        assert main(["solve", "--input", str(path), "--cbar", "0.1", "--method", "NonRobustLs"]) == 1

    def test_unknown_method_is_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["bench", "--methods", "Magic"])
        assert info.value.code == 2


def test_correspondence_loaders_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
    save_correspondences(tmp_path / "r.txt", a, b, header="two\nlines")
    src, dst = load_registration(tmp_path / "r.txt")
    np.testing.assert_array_equal(src, a)
    np.testing.assert_array_equal(dst, b)
    z = rng.standard_normal((5, 2))
    save_correspondences(tmp_path / "s.txt", z, a)
    zz, bb = load_shape(tmp_path / "s.txt")
    np.testing.assert_array_equal(zz, z)
    np.testing.assert_array_equal(bb, a)
