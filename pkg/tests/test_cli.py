import csv
import json

import numpy as np
import pytest

from deconvreg import ExperimentConfig, generate_sample
from deconvreg.cli import config_from_dict, main

GOLDEN_SEED = 20240125


def write_data(path, n=25, seed=GOLDEN_SEED):
    s = generate_sample(ExperimentConfig(), n, np.random.default_rng(seed))
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for x, y in zip(s.grid.points, s.responses):
            fh.write(f"{x:.17g},{y:.17g}\n")
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def write_config(path, **kw):
    path.write_text(json.dumps(kw))
    return str(path)


class TestEstimate:
    def test_fixed_h(self, tmp_path):
        data = write_data(tmp_path / "d.csv")
        out = tmp_path / "out"
        assert main(["estimate", str(data), "--h", "0.8", "--out", str(out)]) == 0
        rows = read_csv(out / "estimate.csv")
        assert rows[0] == ["x", "theta_hat"] and len(rows) == 513
        assert len(read_csv(out / "residuals.csv")) == 52
        assert len(read_csv(out / "ecdf.csv")) == 52
        assert not (out / "objective_curve.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["outputs"]) == {"estimate.csv", "residuals.csv", "ecdf.csv"}

    def test_even_rows(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        data.write_text("x,y\n" + "".join(f"{-0.5 + j / 4},{j}\n" for j in range(4)))
        assert main(["estimate", str(data), "--h", "1", "--out", str(tmp_path / "o")]) == 2
        assert "odd number of rows" in capsys.readouterr().err

    def test_bad_header(self, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("a,b\n0,1\n")
        assert main(["estimate", str(data), "--h", "1", "--out", str(tmp_path / "o")]) == 2

    def test_golden_run_is_byte_identical(self, tmp_path):
        data = write_data(tmp_path / "d.csv")
        outs = []
        for i in range(2):
            out = tmp_path / f"run{i}"
            argv = ["estimate", str(data), "--select-bootstrap", "--bootstrap-reps", "50",
                    "--seed", str(GOLDEN_SEED), "--out", str(out)]
            assert main(argv) == 0
            outs.append(out)
        for name in ("estimate.csv", "residuals.csv", "ecdf.csv", "objective_curve.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        assert len(read_csv(outs[0] / "objective_curve.csv")) == 101

    def test_round_trip_digits(self, tmp_path):
        data = write_data(tmp_path / "d.csv", n=5)
        out = tmp_path / "o"
        main(["estimate", str(data), "--h", "0.8", "--out", str(out)])
        vals = [r[1] for r in read_csv(out / "estimate.csv")[1:]]
        assert all(float(repr(float(v))) == float(v) for v in vals)
        assert any(len(v.replace("-", "").replace(".", "").split("e")[0]) >= 15 for v in vals)


class TestConfig:
    def test_unknown_key(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", replications=1, colour="red")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "colour" in capsys.readouterr().err

    def test_unknown_nested_key(self):
        with pytest.raises(Exception, match="bootstrap"):
            config_from_dict({"bootstrap": {"B": 3}})

    def test_sections(self):
        c = config_from_dict({
            "signal": "theta2", "half_sizes": [10], "error_model": {"kind": "student_t", "df": 4},
            "bootstrap": {"replications_B": 7}, "risk_hull": {"alpha": 0.5},
        })
        assert c.signal.kind == "theta2" and c.half_sizes == (10,)
        assert c.bootstrap.replications_B == 7 and c.risk_hull.alpha == 0.5
        assert c.error_model.variance == pytest.approx(4 / 9)

    def test_bad_seed(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["simulate", "--seed", "-1", "--out", str(tmp_path)])


class TestSimulate:
    def test_minimal_run(self, tmp_path):
        import time

        cfg = write_config(tmp_path / "c.json", half_sizes=[10], replications=1,
                           selection_methods=["bootstrap", "ise_oracle"])
        out = tmp_path / "o"
        t0 = time.perf_counter()
        assert main(["simulate", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
        assert time.perf_counter() - t0 < 10
        manifest = json.loads((out / "manifest.json").read_text())
        expected = {"bias.csv", "variance.csv", "amse.csv", "summary.csv", "log_ratios.csv", "failures.csv"}
        assert set(manifest["outputs"]) == expected
        for name in expected | {"manifest.json"}:
            assert (out / name).exists()
        amse = read_csv(out / "amse.csv")
        assert amse[0] == ["method", "N", "t=-2", "t=-1", "t=0", "t=1", "t=2"]
        assert [r[:2] for r in amse[1:]] == [["bootstrap", "21"], ["ise_oracle", "21"]]

    def test_seed_recorded_and_replayable(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", half_sizes=[5], replications=2, selection_methods=["ise_oracle"])
        a = tmp_path / "a"
        assert main(["simulate", "--config", cfg, "--out", str(a)]) == 0
        seed = json.loads((a / "manifest.json").read_text())["master_seed"]
        assert isinstance(seed, int) and 0 <= seed < 2**64
        b = tmp_path / "b"
        assert main(["simulate", "--config", cfg, "--seed", str(seed), "--out", str(b)]) == 0
        for name in ("amse.csv", "summary.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", half_sizes=[8], replications=4,
                           selection_methods=["bootstrap", "risk_hull"], bootstrap={"replications_B": 20})
        for k in (1, 3):
            assert main(["simulate", "--config", cfg, "--seed", "9", "--threads", str(k),
                         "--out", str(tmp_path / f"t{k}")]) == 0
        for name in ("amse.csv", "summary.csv", "riskhull_log_ratios.csv"):
            assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t3" / name).read_bytes()

    @pytest.mark.slow
    def test_default_amse_at_51(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", half_sizes=[25], replications=100, selection_methods=["bootstrap"])
        out = tmp_path / "o"
        assert main(["simulate", "--config", cfg, "--seed", "1", "--threads", "4", "--out", str(out)]) == 0
        rows = read_csv(out / "amse.csv")
        t0 = rows[0].index("t=0")
        assert float(rows[1][t0]) == pytest.approx(0.086, abs=0.04)


class TestCompare:
    def test_single_method(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", selection_methods=["bootstrap"])
        assert main(["compare-riskhull", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "risk_hull" in capsys.readouterr().err

    def test_two_columns(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", half_sizes=[5, 8], replications=2,
                           selection_methods=["bootstrap", "risk_hull"], bootstrap={"replications_B": 10})
        out = tmp_path / "o"
        assert main(["compare-riskhull", "--config", cfg, "--seed", "1", "--out", str(out)]) == 0
        rows = read_csv(out / "imse_comparison.csv")
        assert rows[0] == ["N", "imse_bootstrap", "imse_risk_hull"]
        assert [r[0] for r in rows[1:]] == ["11", "17"]
        assert (out / "riskhull_log_ratios.csv").exists()

    @pytest.mark.slow
    def test_theta1_bootstrap_beats_risk_hull(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", half_sizes=[100, 150], replications=100,
                           selection_methods=["bootstrap", "risk_hull"])
        out = tmp_path / "o"
        assert main(["compare-riskhull", "--config", cfg, "--seed", "5", "--threads", "4", "--out", str(out)]) == 0
        for row in read_csv(out / "imse_comparison.csv")[1:]:
            assert float(row[1]) < float(row[2])


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == 3
