import json

import numpy as np
import pytest
import yaml

from kirchfem.cli import main as cli_main
from kirchfem.errors import ConfigError
from kirchfem.experiments import (
    RunConfig,
    cmd_check,
    cmd_solve,
    cmd_sweep,
    cmd_theta_star,
    execute,
    render_table,
)

BUMP_CONFIG = {
    "format_version": 1,
    "seed": 11,
    "domain": {"dimension": 1, "cells": [48], "lengths": [1.0]},
    "law": {"kind": "affine", "a": 1.0, "b": 1.0},
    "nonlinearity": {"kind": "bump"},
    "perturbation": {"kind": "sin_t"},
    "hypotheses": {"points_per_decade": 50},
    "solve": {"lam": {"theta_multiple": 2.0}, "mu": 0.0},
    "sweep": {
        "lambdas": {"theta_multiples": [2.0]},
        "mu": {"values": [0.0, 1.0]},
    },
}


def write_config(tmp_path, cfg, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


class TestConfigValidation:
    def test_minimal_config_parses(self):
        cfg = RunConfig.from_dict(BUMP_CONFIG)
        assert cfg.dimension == 1 and cfg.cells == (48,)
        assert cfg.seed == 11
        assert cfg.perturbation is not None

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda c: c["domain"].update(dimension=3),
            lambda c: c["domain"].update(cells=[0]),
            lambda c: c["domain"].update(cells=[4, 4]),
            lambda c: c["domain"].update(lengths=[-1.0]),
            lambda c: c.pop("nonlinearity"),
            lambda c: c["law"].update(kind="unknown"),
            lambda c: c["law"].update(a=-1.0),
            lambda c: c.update(seed=-3),
            lambda c: c.update(format_version=99),
            lambda c: c["sweep"].update(lambdas=[]),
            lambda c: c["sweep"].update(mu={"bisect": {}}),
            lambda c: c.update(solver={"accept_tol": 0.0}),
            lambda c: c["solve"].update(mu=-0.5),
        ],
        ids=[
            "bad-dimension", "zero-cells", "cells-arity", "negative-length",
            "missing-source", "unknown-law", "negative-a", "negative-seed",
            "bad-version", "empty-lambdas", "empty-bisect", "zero-tol", "negative-mu",
        ],
    )
    def test_rejects_malformed(self, mutate):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        mutate(raw)
        with pytest.raises(ConfigError):
            RunConfig.from_dict(raw)

    def test_mu_without_perturbation(self):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        raw.pop("perturbation")
        raw["solve"]["mu"] = 0.1
        with pytest.raises(ConfigError):
            RunConfig.from_dict(raw)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.from_file(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("a: [unclosed")
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_seed_override_echoed(self, tmp_path):
        path = write_config(tmp_path, BUMP_CONFIG)
        cfg = RunConfig.from_file(path, seed_override=99)
        assert cfg.seed == 99
        assert cfg.raw["seed"] == 99


class TestCheckCommand:
    def test_specimen_passes(self):
        report, code = cmd_check(RunConfig.from_dict(BUMP_CONFIG))
        assert code == 0
        assert report["report"]["all_satisfied"]
        assert report["format_version"] == 1

    def test_decay_law_fails(self):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        raw["law"] = {"kind": "decay"}
        report, code = cmd_check(RunConfig.from_dict(raw))
        assert code == 1
        assert report["report"]["failures"] == ["a2"]
        assert report["report"]["conditions"]["a2"]["witness"]["K"] is not None

    def test_cli_exit_codes(self, tmp_path):
        good = write_config(tmp_path, BUMP_CONFIG, "good.yaml")
        assert cli_main(["check", "--config", str(good), "--out", str(tmp_path / "o1"), "--quiet"]) == 0
        bad_math = json.loads(json.dumps(BUMP_CONFIG))
        bad_math["law"] = {"kind": "decay"}
        badm = write_config(tmp_path, bad_math, "badmath.yaml")
        assert cli_main(["check", "--config", str(badm), "--out", str(tmp_path / "o2"), "--quiet"]) == 1
        bad_cfg = write_config(tmp_path, {"domain": {"dimension": 1, "cells": [0]}}, "badcfg.yaml")
        assert cli_main(["check", "--config", str(bad_cfg), "--quiet"]) == 2

    def test_report_file_written(self, tmp_path):
        path = write_config(tmp_path, BUMP_CONFIG)
        out = tmp_path / "out"
        assert cli_main(["check", "--config", str(path), "--out", str(out), "--quiet"]) == 0
        data = json.loads((out / "check_report.json").read_text())
        assert data["command"] == "check"
        assert data["config"]["seed"] == 11


class TestThetaStarCommand:
    EIGEN = {
        "format_version": 1,
        "seed": 5,
        "domain": {"dimension": 1, "cells": [128], "lengths": [1.0]},
        "law": {"kind": "constant", "value": 1.0},
        "nonlinearity": {"kind": "linear"},
    }

    def test_eigen_value(self):
        report, code = cmd_theta_star(RunConfig.from_dict(self.EIGEN))
        assert code == 0
        assert report["value"] == pytest.approx(np.pi**2, rel=0.01)
        assert len(report["minimizer_node_values"]) == 129

    def test_rerun_bit_identical(self, tmp_path):
        path = write_config(tmp_path, self.EIGEN)
        for d in ("r1", "r2"):
            assert cli_main(["theta-star", "--config", str(path), "--out", str(tmp_path / d), "--quiet"]) == 0
        b1 = (tmp_path / "r1" / "theta_star.json").read_bytes()
        b2 = (tmp_path / "r2" / "theta_star.json").read_bytes()
        assert b1 == b2

    def test_refinement_series_nonincreasing(self):
        values = []
        for n in (16, 32, 64):
            raw = json.loads(json.dumps(self.EIGEN))
            raw["domain"]["cells"] = [n]
            values.append(cmd_theta_star(RunConfig.from_dict(raw))[0]["value"])
        assert all(values[i + 1] <= values[i] for i in range(len(values) - 1))


class TestSolveCommand:
    def test_unforced_exactly_zero(self):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        raw["solve"] = {"lam": 0.0, "mu": 0.0}
        report, code = cmd_solve(RunConfig.from_dict(raw))
        assert code == 0
        assert report["solution_count"] == 1
        assert report["solutions"][0]["norm"] == 0.0
        assert report["theta_star_used"] is None

    def test_three_solutions_at_twice_threshold(self):
        report, code = cmd_solve(RunConfig.from_dict(BUMP_CONFIG))
        assert code == 0
        assert report["solution_count"] >= 3
        assert report["theta_star_used"] > 0
        assert all(s["residual_norm"] <= 1e-8 for s in report["solutions"])

    def test_linear_oracle_profile(self):
        raw = {
            "format_version": 1,
            "seed": 3,
            "domain": {"dimension": 1, "cells": [32], "lengths": [1.0]},
            "law": {"kind": "constant", "value": 1.0},
            "nonlinearity": {"kind": "sin_forcing"},
            "solve": {"lam": 1.0, "mu": 0.0},
        }
        report, code = cmd_solve(RunConfig.from_dict(raw))
        assert code == 0 and report["solution_count"] == 1
        xs = np.linspace(0, 1, 33)
        exact = np.sin(np.pi * xs) / np.pi**2
        got = np.asarray(report["solutions"][0]["node_values"])
        assert np.max(np.abs(got - exact)) < 1e-4

    def test_no_convergence_exits_one(self):
        raw = {
            "format_version": 1,
            "seed": 3,
            "domain": {"dimension": 1, "cells": [16], "lengths": [1.0]},
            "law": {"kind": "constant", "value": 1.0},
            "nonlinearity": {"kind": "sin_forcing"},
            "solver": {"accept_tol": 1e-30, "max_iter": 2},
            "solve": {"lam": 1.0, "mu": 0.0},
        }
        report, code = cmd_solve(RunConfig.from_dict(raw))
        assert code == 1
        assert report["solution_count"] == 0
        assert report["abandoned_starts"]


class TestSweepCommand:
    def test_mu_zero_column_matches_solve(self):
        # same absolute lambda and seed: the sweep's mu = 0 cell and the solve
        # command must produce identical numbers
        lam = 40.0
        base = {
            "format_version": 1,
            "seed": 17,
            "domain": {"dimension": 1, "cells": [48], "lengths": [1.0]},
            "law": {"kind": "affine", "a": 1.0, "b": 1.0},
            "nonlinearity": {"kind": "bump"},
            "perturbation": {"kind": "sin_t"},
        }
        solve_raw = {**base, "solve": {"lam": lam, "mu": 0.0}}
        sweep_raw = {**base, "sweep": {"lambdas": [lam], "mu": {"values": [0.0, 0.5]}}}
        solve_report, _ = cmd_solve(RunConfig.from_dict(solve_raw))
        sweep_report, _ = cmd_sweep(RunConfig.from_dict(sweep_raw))
        cell = sweep_report["rows"][0]["cells"][0]
        assert cell["mu"] == 0.0
        assert cell["solution_count"] == solve_report["solution_count"]
        assert cell["norms"] == [s["norm"] for s in solve_report["solutions"]]
        assert cell["residuals"] == [s["residual_norm"] for s in solve_report["solutions"]]

    def test_aggregates_and_table(self):
        report, code = cmd_sweep(RunConfig.from_dict(BUMP_CONFIG))
        assert code == 0
        cells = [c for row in report["rows"] for c in row["cells"]]
        qualifying = [c["max_norm"] for c in cells if c["solution_count"] >= 3]
        assert report["r_empirical"] == pytest.approx(1.1 * max(qualifying), rel=1e-14)
        assert all(c["max_norm"] <= report["r_empirical"] for c in cells if c["solution_count"] >= 3)
        text = render_table(report["table"])
        lines = text.strip().split("\n")
        assert lines[0] == (
            "format_version,lambda_index,lambda,mu,solution_count,"
            "max_norm,min_pairwise_distance,max_residual"
        )
        assert len(lines) == 1 + len(cells)
        assert report["delta_by_lambda"][0]["delta_empirical"] is not None

    def test_bisection_budget(self):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        raw["sweep"]["mu"] = {"bisect": {"max_lambda_fraction": 0.01, "tol_lambda_fraction": 1e-3}}
        report, code = cmd_sweep(RunConfig.from_dict(raw))
        assert code == 0
        row = report["rows"][0]
        delta = row["delta_empirical"]
        assert delta is not None and delta > 0
        counts = {c["mu"]: c["solution_count"] for c in row["cells"]}
        assert counts[0.0] >= 3
        assert counts[delta] >= 3
        assert counts[delta / 2.0] >= 3
        assert row["anomalies"] == []

    def test_exploratory_warning_below_threshold(self):
        raw = json.loads(json.dumps(BUMP_CONFIG))
        raw["sweep"] = {"lambdas": [1.0], "mu": {"values": [0.0]}}
        report, code = cmd_sweep(RunConfig.from_dict(raw))
        assert report["warnings"]
        assert code == 0  # zero is still a valid solution in every cell

    def test_rerun_bit_identical(self, tmp_path):
        path = write_config(tmp_path, BUMP_CONFIG)
        for d in ("s1", "s2"):
            assert cli_main(["sweep", "--config", str(path), "--out", str(tmp_path / d), "--quiet"]) == 0
        for name in ("sweep_report.json", "sweep_table.csv"):
            assert (tmp_path / "s1" / name).read_bytes() == (tmp_path / "s2" / name).read_bytes()

    def test_worker_pool_matches_sequential(self):
        raw = {
            "format_version": 1,
            "seed": 11,
            "domain": {"dimension": 1, "cells": [32], "lengths": [1.0]},
            "law": {"kind": "affine", "a": 1.0, "b": 1.0},
            "nonlinearity": {"kind": "bump"},
            "perturbation": {"kind": "sin_t"},
            "sweep": {"lambdas": {"theta_multiples": [1.5, 2.0]}, "mu": {"values": [0.0, 0.5]}},
        }
        sequential, _ = cmd_sweep(RunConfig.from_dict(raw))
        parallel_raw = json.loads(json.dumps(raw))
        parallel_raw["sweep"]["workers"] = 2
        parallel, _ = cmd_sweep(RunConfig.from_dict(parallel_raw))
        assert json.dumps(sequential["rows"], sort_keys=True) == json.dumps(
            parallel["rows"], sort_keys=True
        )


def test_execute_unknown_solve_section(tmp_path):
    raw = {k: v for k, v in BUMP_CONFIG.items() if k != "solve"}
    path = write_config(tmp_path, raw)
    assert cli_main(["solve", "--config", str(path), "--quiet"]) == 2


def test_execute_writes_requested_out_dir(tmp_path):
    path = write_config(tmp_path, BUMP_CONFIG)
    cfg = RunConfig.from_file(path)
    code = execute(cfg, "check", tmp_path / "alt")
    assert code == 0
    assert (tmp_path / "alt" / "check_report.json").exists()


def test_execute_surfaces_feasibility_error(tmp_path, monkeypatch):
    from kirchfem import experiments
    from kirchfem.errors import FeasibilityError

    def raise_feasibility(*args, **kwargs):
        raise FeasibilityError("no probe with positive source potential; refine the mesh")

    monkeypatch.setattr(experiments, "estimate_threshold", raise_feasibility)
    cfg = RunConfig.from_dict(BUMP_CONFIG)
    code = execute(cfg, "theta-star", tmp_path)
    assert code == 1
    report = json.loads((tmp_path / "theta_star.json").read_text())
    assert "refine the mesh" in report["error"]


def test_reports_serialize_booleans_and_blanks(tmp_path):
    path = write_config(tmp_path, BUMP_CONFIG)
    assert cli_main(["check", "--config", str(path), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    text = (tmp_path / "o" / "check_report.json").read_text()
    assert '"all_satisfied": true' in text
    raw = json.loads(json.dumps(BUMP_CONFIG))
    raw["solve"] = {"lam": 0.0, "mu": 0.0}  # single solution: no pairwise distance
    report, _ = cmd_solve(RunConfig.from_dict(raw))
    assert report["min_pairwise_distance"] is None
