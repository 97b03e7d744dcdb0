"""Command line entry points, config layering, exit codes, reproducibility."""

import json

import numpy as np
import pytest

import kbemu.models
from kbemu.cli import PRESETS, build_parser, main, resolve_config
from kbemu.errors import ModelEvaluationError
from kbemu.kernel import corr_1d

SMALL = {"candidates": 100, "diag_candidates": 20, "n_diag": 30, "pool_size": 128}


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL))
    return str(path)


def _read_matrix(path):
    rows = [
        line for line in path.read_text().splitlines()
        if line and not line.startswith("#")
    ]
    return np.array([[float(v) for v in line.split(",")] for line in rows])


def _data_rows(path):
    return [
        line for line in path.read_text().splitlines()
        if line and not line.startswith("#") and not line[0].isalpha()
    ]


def _study_rows(path):
    lines = [
        line for line in path.read_text().splitlines()
        if line and not line.startswith("#")
    ]
    assert lines[0] == "design,boundaries,n_train,rmse,max_abs_s,n_large,frac_large"
    return lines[1:]


def _resolve(argv):
    return resolve_config(build_parser().parse_args(argv))


class TestDesignCommand:
    def test_writes_design_and_criterion_report(self, tmp_path, small_cfg, capsys):
        out = tmp_path / "d1"
        rc = main([
            "design", "--model", "toy2d", "--boundaries", "K", "--n", "6",
            "--method", "greedy-vopt", "--grid", "12",
            "--config", small_cfg, "--out", str(out),
        ])
        assert rc == 0
        text = (out / "design.csv").read_text()
        assert "# provenance: greedy-vopt" in text
        assert "# config_hash: " in text
        assert "# config_seed: 0" in text
        assert len(_data_rows(out / "design.csv")) == 6
        doc = json.loads((out / "criterion.json").read_text())
        assert doc["n"] == 6 and doc["grid_points"] == 144
        assert doc["v_with_boundaries"] < doc["v_without_boundaries"]
        printed = capsys.readouterr().out
        assert "v_criterion with boundaries" in printed

    def test_reruns_are_byte_identical(self, tmp_path, small_cfg):
        argv = [
            "design", "--model", "toy2d", "--boundaries", "K", "--n", "5",
            "--method", "greedy-vopt", "--grid", "10", "--config", small_cfg,
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        for name in ("design.csv", "criterion.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_warped_pool_provenance(self, tmp_path, small_cfg):
        out = tmp_path / "w"
        rc = main([
            "design", "--model", "toy2d", "--boundaries", "K", "--n", "4",
            "--method", "warped-greedy-vopt", "--grid", "10",
            "--config", small_cfg, "--out", str(out),
        ])
        assert rc == 0
        assert "# provenance: greedy-vopt(warped-pool)" in (out / "design.csv").read_text()


class TestEmulateCommand:
    def test_untrained_surfaces_match_closed_forms(self, tmp_path):
        out = tmp_path / "e"
        rc = main([
            "emulate", "--model", "toy2d", "--boundaries", "K", "--n", "0",
            "--grid", "5", "--theta", "0.4", "--out", str(out),
        ])
        assert rc == 0
        mean = _read_matrix(out / "mean.csv")
        sd = _read_matrix(out / "sd.csv")
        assert mean.shape == sd.shape == (5, 5)
        g = np.linspace(0.0, 1.0, 5)
        r = corr_1d(g, 0.4)
        expect_mean = np.outer(r, -1.9 * np.sin(2.0 * np.pi * g))
        expect_sd = np.sqrt(1.0 - r ** 2)[:, None] * np.ones((1, 5))
        np.testing.assert_allclose(mean, expect_mean, atol=1e-12)
        np.testing.assert_allclose(sd, expect_sd, atol=1e-12)
        assert np.all(sd[0] == 0.0)

    def test_preset_runs_and_writes_diagnostics(self, tmp_path):
        out = tmp_path / "p"
        rc = main(["emulate", "--preset", "toy-single", "--grid", "5", "--out", str(out)])
        assert rc == 0
        header = (out / "diagnostics.csv").read_text().splitlines()
        cols = next(line for line in header if not line.startswith("#"))
        assert cols == "x0,x1,mean,sd,truth,s"

    def test_crosstalk_slice_pins_both_boundary_edges(self, tmp_path):
        out = tmp_path / "a6"
        rc = main([
            "emulate", "--model", "arabidopsis", "--boundaries", "KL-perp",
            "--n", "0", "--grid", "4", "--out", str(out),
        ])
        assert rc == 0
        sd = _read_matrix(out / "sd.csv")
        assert sd.shape == (4, 4)
        assert np.all(sd[0, :] == 0.0)  # k6 axis at its known plane
        assert np.all(sd[:, 0] == 0.0)  # k8 axis at its known plane
        assert sd[-1, -1] > 0.1
        # no truth columns for the ODE model: sweeps stay simulator-free
        cols = next(
            line for line in (out / "diagnostics.csv").read_text().splitlines()
            if not line.startswith("#")
        )
        assert cols == "x1,x4,mean,sd"


class TestDiagnoseCommand:
    def test_report_files_and_table(self, tmp_path, small_cfg, capsys):
        out = tmp_path / "g"
        rc = main([
            "diagnose", "--model", "toy2d", "--boundaries", "K", "--n", "8",
            "--method", "maximin", "--config", small_cfg, "--out", str(out),
        ])
        assert rc == 0
        doc = json.loads((out / "summary.json").read_text())
        assert doc["n_train"] == 8 and doc["n_diag"] == 30
        assert doc["rmse"] > 0.0
        assert len(_data_rows(out / "diagnostics.csv")) == 30
        printed = capsys.readouterr().out
        assert "maximin" in printed and "rmse" in printed


class TestStudyCommand:
    def test_toy_study_rows_and_orderings(self, tmp_path, small_cfg):
        out = tmp_path / "s"
        rc = main([
            "study", "--model", "toy2d", "--n", "10", "--method", "maximin",
            "--config", small_cfg, "--out", str(out),
        ])
        assert rc == 0
        rows = {}
        for line in _study_rows(out / "study.csv"):
            label, level, n, rmse_s, *_ = line.split(",")
            rows[(label, level)] = float(rmse_s)
            assert int(n) == 10
        assert set(rows) == {
            ("maximin", "none"), ("maximin", "K"),
            ("warped-maximin", "none"), ("warped-maximin", "K"),
        }
        # knowing the boundary helps either design; warping helps under it
        assert rows[("maximin", "K")] < rows[("maximin", "none")]
        assert rows[("warped-maximin", "K")] < rows[("warped-maximin", "none")]
        assert rows[("warped-maximin", "K")] < rows[("maximin", "K")]

    def test_greedy_study_compares_blind_and_aware_selection(self, tmp_path, small_cfg):
        out = tmp_path / "sg"
        rc = main([
            "study", "--model", "toy2d", "--n", "5", "--method", "greedy-vopt",
            "--grid", "10", "--config", small_cfg, "--out", str(out),
        ])
        assert rc == 0
        labels = {line.split(",")[0] for line in _study_rows(out / "study.csv")}
        assert labels == {"greedy-vopt", "greedy-vopt+boundaries"}

    def test_study_reruns_identical(self, tmp_path, small_cfg):
        argv = [
            "study", "--model", "toy2d", "--n", "6", "--method", "lhc",
            "--config", small_cfg,
        ]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert (out1 / "study.csv").read_bytes() == (out2 / "study.csv").read_bytes()


class TestConfigResolution:
    def test_flags_override_config_overrides_preset(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 4}))
        preset_only = _resolve(["diagnose", "--preset", "toy-single-trained"])
        assert preset_only.n == 10 and preset_only.method == "maximin"
        with_cfg = _resolve(
            ["diagnose", "--preset", "toy-single-trained", "--config", str(cfg)]
        )
        assert with_cfg.n == 4
        with_flag = _resolve(
            ["diagnose", "--preset", "toy-single-trained", "--config", str(cfg),
             "--n", "6"]
        )
        assert with_flag.n == 6

    def test_theta_flag_forms(self):
        iso = _resolve(["emulate", "--model", "toy2d", "--theta", "0.7"])
        assert iso.prior.kernel.thetas == (0.7, 0.7)
        aniso = _resolve(["emulate", "--model", "toy2d", "--theta", "0.5,0.8"])
        assert aniso.prior.kernel.thetas == (0.5, 0.8)

    def test_model_defaults(self):
        toy = _resolve(["emulate", "--model", "toy2d"])
        assert toy.dim == 2 and toy.grid == 41
        assert toy.prior.kernel.thetas == (0.4, 0.4)
        ode = _resolve(["diagnose", "--model", "arabidopsis"])
        assert ode.dim == 6 and ode.prior.kernel.thetas == (0.7,) * 6
        assert ode.prior.beta != 0.0 and ode.prior.sigma2 > 0.0

    def test_study_resolves_none_to_full_boundaries(self):
        toy = _resolve(["study", "--model", "toy2d", "--n", "4"])
        assert toy.boundaries_name == "K"
        ode = _resolve(["study", "--model", "arabidopsis", "--n", "4"])
        assert ode.boundaries_name == "KL-perp"

    def test_hash_covers_statistics_but_not_output_dir(self):
        base = ["diagnose", "--model", "toy2d", "--boundaries", "K", "--n", "4"]
        a = _resolve(base + ["--out", "x"])
        b = _resolve(base + ["--out", "y"])
        c = _resolve(base + ["--seed", "5", "--out", "x"])
        assert a.config_hash == b.config_hash
        assert a.config_hash != c.config_hash


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["design", "--model", "toy2d", "--boundaries", "K"],  # n defaults to 0
            ["design", "--model", "arabidopsis", "--boundaries", "KL-par", "--n", "4"],
            ["diagnose", "--model", "external-table", "--n", "2"],  # no rate table
            ["emulate", "--model", "toy2d", "--boundaries", "none",
             "--method", "warped-maximin", "--n", "4"],
            ["study", "--model", "toy2d", "--n", "4", "--method", "warped-maximin"],
            ["emulate", "--preset", "no-such-preset"],
            ["emulate", "--model", "toy2d", "--theta", "0.4,abc"],
            ["emulate", "--model", "toy2d", "--boundaries", "KL-diag"],
            ["design", "--model", "toy2d", "--boundaries", "K", "--n", "3",
             "--method", "sobol"],
        ],
    )
    def test_config_errors_exit_2(self, argv, capsys, tmp_path):
        assert main(argv + ["--out", str(tmp_path / "o")]) == 2
        assert "kbemu: config error:" in capsys.readouterr().err

    def test_unknown_config_field_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"frobnicate": 1}))
        rc = main(["emulate", "--model", "toy2d", "--config", str(cfg),
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "frobnicate" in capsys.readouterr().err

    def test_out_of_range_jitter_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "jit.json"
        cfg.write_text(json.dumps({"jitter": 1.0}))
        rc = main(["emulate", "--model", "toy2d", "--config", str(cfg),
                   "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "jitter" in capsys.readouterr().err

    def test_simulator_failure_exits_3(self, tmp_path, monkeypatch, capsys):
        def broken_factory(base=None):
            def sim(x):
                raise ModelEvaluationError("synthetic integration blow-up")
            return sim

        monkeypatch.setattr(kbemu.models, "make_plsp_simulator", broken_factory)
        cfg = tmp_path / "small.json"
        cfg.write_text(json.dumps(SMALL))
        rc = main([
            "diagnose", "--model", "arabidopsis", "--boundaries", "K", "--n", "0",
            "--config", str(cfg), "--out", str(tmp_path / "o"),
        ])
        assert rc == 3
        assert "kbemu: numerical failure:" in capsys.readouterr().err

    def test_unknown_command_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
