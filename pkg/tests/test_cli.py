import json
from pathlib import Path

import pytest

from horizonrisk.cli import (EXIT_CONFIG, EXIT_NUMERICAL,
                             EXIT_REQUIRED_AXIOM, EXIT_OK, main, run_config,
                             validate_config)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

TWO_ATOM_MODEL = {
    "kind": "tree",
    "times": [0.0, 1.0],
    "nodes": [
        {"id": 0, "depth": 0, "parent": None, "p": 1.0},
        {"id": 1, "depth": 1, "parent": 0, "p": 0.5},
        {"id": 2, "depth": 1, "parent": 0, "p": 0.5},
    ],
}


def write_config(tmp_path, blob, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(blob))
    return path


def base_config(**overrides):
    cfg = {
        "model": dict(TWO_ATOM_MODEL),
        "seed": 1,
        "measure": {"kind": "entropic", "b": 1.0},
        "tasks": [{"kind": "evaluate", "t": 0.0, "u": 1.0,
                   "position": {"kind": "values", "values": [1.0, -1.0]}}],
    }
    cfg.update(overrides)
    return cfg


class TestValidation:
    def test_shipped_configs_validate(self):
        for path in sorted(CONFIGS.glob("*.json")):
            validate_config(path)

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = base_config()
        cfg["surprise"] = 1
        path = write_config(tmp_path, cfg)
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_unknown_nested_key_rejected(self, tmp_path):
        cfg = base_config()
        cfg["measure"]["gamma"] = 0.5
        path = write_config(tmp_path, cfg)
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_empty_task_list_rejected(self, tmp_path):
        cfg = base_config(tasks=[])
        path = write_config(tmp_path, cfg)
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_domains_rechecked_at_load(self, tmp_path):
        cfg = base_config(measure={"kind": "q_entropic", "q": 0.5,
                                   "alpha": -5.0})
        path = write_config(tmp_path, cfg)
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_valid_config_passes(self, tmp_path):
        path = write_config(tmp_path, base_config())
        assert main(["validate", str(path)]) == EXIT_OK


class TestRun:
    def test_evaluate_emits_documented_value(self, tmp_path):
        path = write_config(tmp_path, base_config())
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        rows = (out / "task00_evaluate.csv").read_text().splitlines()
        assert rows[0] == "node,value"
        assert rows[1] == "0,0.43378083"

    def test_axioms_profile_of_hq_measure(self, tmp_path):
        cfg = base_config(
            model={"kind": "random_tree", "depth": 3, "max_branching": 2},
            measure={"kind": "hq_entropic", "q": 0.5, "alpha": 0.0,
                     "beta": 0.0,
                     "a": {"breakpoints": [0.0], "values": [0.1]}},
            tasks=[{"kind": "axioms", "t": 0.0, "u": 1.0, "samples": 8,
                    "checks": ["cash_additive", "cash_subadditive",
                               "h_longevity"]}],
        )
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        reports = json.loads((out / "task00_axioms.json").read_text())
        verdicts = {r["axiom"]: r["passed"] for r in reports}
        assert verdicts == {"cash_additive": False, "cash_subadditive": True,
                            "h_longevity": True}
        failed = [r for r in reports if not r["passed"]]
        assert failed[0]["witness"] is not None

    def test_required_axiom_failure_exits_four(self, tmp_path):
        cfg = base_config(
            measure={"kind": "hq_entropic", "q": 0.5, "alpha": 0.0,
                     "beta": 0.0,
                     "a": {"breakpoints": [0.0], "values": [0.1]}},
            tasks=[{"kind": "axioms", "checks": ["cash_additive"],
                    "required": ["cash_additive"], "samples": 6}],
        )
        path = write_config(tmp_path, cfg)
        assert run_config(path, out_dir=tmp_path / "out") == \
            EXIT_REQUIRED_AXIOM

    def test_numerical_error_exits_three(self, tmp_path):
        # quadratic driver outside its domain: terminal -X below 1/(q-1)
        cfg = base_config(
            model={"kind": "lattice", "steps": 4, "horizon": 1.0},
            measure={"kind": "bsde", "driver": {"kind": "quadratic_q",
                                                "q": 0.5}},
            tasks=[{"kind": "evaluate", "t": 0.0, "u": 1.0,
                    "position": {"kind": "constant", "value": 5.0}}],
        )
        path = write_config(tmp_path, cfg)
        assert run_config(path, out_dir=tmp_path / "out") == EXIT_NUMERICAL

    def test_duality_task_needs_shortfall_measure(self, tmp_path):
        cfg = base_config(tasks=[{"kind": "duality", "u": 1.0,
                                  "position": {"kind": "values",
                                               "values": [1.0, -1.0]}}])
        path = write_config(tmp_path, cfg)
        assert run_config(path, out_dir=tmp_path / "out") == EXIT_CONFIG

    def test_convergence_task_errors_decrease(self, tmp_path):
        cfg = base_config(
            model={"kind": "lattice", "steps": 8, "horizon": 1.0},
            measure={"kind": "bsde", "driver": {"kind": "entropic"}},
            tasks=[{"kind": "bsde-convergence", "grid": [8, 16, 32],
                    "payoff": {"kind": "two_valued", "threshold": 0.1,
                               "lo": -0.75, "hi": 0.75}}],
        )
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        rows = (out / "task00_convergence.csv").read_text().splitlines()[1:]
        errs = [float(r.split(",")[2]) for r in rows]
        assert errs == sorted(errs, reverse=True)

    def test_zero_driver_convergence_is_exact(self, tmp_path):
        cfg = base_config(
            model={"kind": "lattice", "steps": 8, "horizon": 1.0},
            measure={"kind": "bsde", "driver": {"kind": "zero"}},
            tasks=[{"kind": "bsde-convergence", "grid": [8, 16],
                    "payoff": {"kind": "two_valued", "threshold": 0.1,
                               "lo": -1.0, "hi": 1.0}}],
        )
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        rows = (out / "task00_convergence.csv").read_text().splitlines()[1:]
        assert all(float(r.split(",")[2]) <= 1e-12 for r in rows)

    def test_quadratic_driver_convergence_vs_transform(self, tmp_path):
        cfg = base_config(
            model={"kind": "lattice", "steps": 8, "horizon": 1.0},
            measure={"kind": "bsde",
                     "driver": {"kind": "quadratic_q", "q": 0.5,
                                "a": {"breakpoints": [0.0],
                                      "values": [0.1]}}},
            tasks=[{"kind": "bsde-convergence", "grid": [8, 16, 32],
                    "payoff": {"kind": "two_valued", "threshold": 0.0,
                               "lo": -1.0, "hi": 0.0}}],
        )
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        rows = (out / "task00_convergence.csv").read_text().splitlines()[1:]
        errs = [float(r.split(",")[2]) for r in rows]
        assert errs[-1] <= 1e-2  # N = 32 row

    def test_linear_driver_has_no_reference(self, tmp_path):
        cfg = base_config(
            model={"kind": "lattice", "steps": 8, "horizon": 1.0},
            measure={"kind": "bsde",
                     "driver": {"kind": "linear",
                                "c": {"breakpoints": [0.0],
                                      "values": [0.1]}}},
            tasks=[{"kind": "bsde-convergence", "grid": [8, 16]}],
        )
        path = write_config(tmp_path, cfg)
        assert run_config(path, out_dir=tmp_path / "out") == EXIT_CONFIG

    def test_longevity_task_emits_formula_column_for_linear(self, tmp_path):
        cfg = base_config(
            model={"kind": "lattice", "steps": 8, "horizon": 1.0},
            measure={"kind": "bsde",
                     "driver": {"kind": "linear",
                                "c": {"breakpoints": [0.0],
                                      "values": [0.4]}}},
            tasks=[{"kind": "longevity", "t": 0.0, "u": 0.5, "v": 1.0,
                    "position": {"kind": "two_valued", "threshold": 0.0,
                                 "lo": -1.0, "hi": 1.0}}],
        )
        path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        rows = (out / "task00_longevity.csv").read_text().splitlines()
        assert rows[0] == "node,gamma,gamma_formula"
        _, gamma, formula = rows[1].split(",")
        assert float(gamma) == pytest.approx(0.2, abs=1e-9)
        assert float(formula) == pytest.approx(0.2, abs=1e-12)


class TestDeterminism:
    def _run_twice(self, path, tmp_path, jobs=1):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_config(path, out_dir=out1, jobs=jobs) == EXIT_OK
        assert run_config(path, out_dir=out2, jobs=jobs) == EXIT_OK
        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2
        for name in files1:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_same_seed_byte_identical(self, tmp_path):
        cfg = base_config(
            model={"kind": "random_tree", "depth": 3, "max_branching": 3},
            tasks=[
                {"kind": "evaluate", "t": 0.0, "u": 1.0,
                 "position": {"kind": "uniform"}},
                {"kind": "axioms", "checks": ["cash_additive", "monotone"],
                 "samples": 6},
            ],
        )
        self._run_twice(write_config(tmp_path, cfg), tmp_path)

    def test_parallel_jobs_match_serial(self, tmp_path):
        cfg = base_config(
            tasks=[
                {"kind": "evaluate", "t": 0.0, "u": 1.0,
                 "position": {"kind": "values", "values": [1.0, -1.0]}},
                {"kind": "axioms", "checks": ["convex"], "samples": 5},
            ],
        )
        path = write_config(tmp_path, cfg)
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        assert run_config(path, out_dir=out1, jobs=1) == EXIT_OK
        assert run_config(path, out_dir=out2, jobs=2) == EXIT_OK
        for name in sorted(p.name for p in out1.iterdir()):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_override_changes_sampled_positions(self, tmp_path):
        cfg = base_config(
            model={"kind": "random_tree", "depth": 2, "max_branching": 2},
            tasks=[{"kind": "evaluate", "t": 0.0, "u": 1.0,
                    "position": {"kind": "uniform"}}],
        )
        path = write_config(tmp_path, cfg)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert run_config(path, out_dir=out1, seed=1) == EXIT_OK
        assert run_config(path, out_dir=out2, seed=2) == EXIT_OK
        assert (out1 / "task00_evaluate.csv").read_text() != \
            (out2 / "task00_evaluate.csv").read_text()

    def test_no_leftover_temp_files(self, tmp_path):
        path = write_config(tmp_path, base_config())
        out = tmp_path / "out"
        assert run_config(path, out_dir=out) == EXIT_OK
        assert not list(out.glob("*.tmp"))
