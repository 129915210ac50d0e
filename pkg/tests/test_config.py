"""설정 모델 / YAML 로더 / 환경 설정"""

import numpy as np
import pytest
from pydantic import ValidationError

from bqr.config.config_loader import ConfigLoader, merge_overrides
from bqr.config.fit_config import (
    DiagnoseConfig,
    FitConfig,
    KdeSpec,
    PriorSpec,
    ProbRule,
    RunManifest,
    ScenarioSpec,
    validate_tau_list,
)
from bqr.config.settings import BQRSettings


class TestFitConfig:
    def test_defaults(self):
        config = FitConfig()
        assert (config.iterations, config.burn_in, config.thin) == (3000, 1000, 1)
        assert config.retained == 2000
        assert config.quantile.tau == 0.5

    def test_retained_uses_floor_division(self):
        assert FitConfig(iterations=1000, burn_in=299, thin=7).retained == 100

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tau": 0.0},
            {"tau": 1.0},
            {"iterations": 500, "burn_in": 500},
            {"iterations": 150, "burn_in": 100},
            {"iterations": 1000, "burn_in": 0, "thin": 20},
            {"thin": 0},
            {"seed": -1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            FitConfig(**kwargs)

    def test_for_tau_keeps_other_fields(self):
        config = FitConfig(iterations=800, burn_in=300, seed=9)
        moved = config.for_tau(0.9, stream_id=4)
        assert (moved.tau, moved.stream_id, moved.seed, moved.iterations) == (0.9, 4, 9, 800)
        assert config.tau == 0.5


class TestPriorSpec:
    def test_isotropic_default(self):
        b0, B0 = PriorSpec().resolve(3)
        np.testing.assert_array_equal(b0, np.zeros(3))
        np.testing.assert_array_equal(B0, 100.0 * np.eye(3))

    def test_explicit_mean_and_covariance(self):
        prior = PriorSpec(beta_mean=[1.0, -1.0], beta_cov=[[2.0, 0.5], [0.5, 1.0]])
        b0, B0 = prior.resolve(2)
        np.testing.assert_array_equal(b0, [1.0, -1.0])
        assert B0[0, 1] == 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            PriorSpec(beta_mean=[1.0, 2.0]).resolve(3)
        with pytest.raises(ValueError, match="shape"):
            PriorSpec(beta_cov=[[1.0]]).resolve(2)

    @pytest.mark.parametrize(
        "cov",
        [[[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.2], [0.1, 1.0]], [[1.0, 0.0, 0.0]]],
    )
    def test_covariance_must_be_positive_definite(self, cov):
        with pytest.raises(ValidationError):
            PriorSpec(beta_cov=cov)

    def test_sigma_hyperparameters_positive(self):
        with pytest.raises(ValidationError):
            PriorSpec(sigma_shape=0.0)
        with pytest.raises(ValidationError):
            PriorSpec(sigma_rate=-0.05)


class TestTauList:
    def test_valid(self):
        assert validate_tau_list([0.1, 0.5]) == [0.1, 0.5]

    @pytest.mark.parametrize("taus", [[], [0.5, 0.5], [0.0, 0.5], [1.2]])
    def test_invalid(self, taus):
        with pytest.raises(ValueError):
            validate_tau_list(taus)

    def test_manifest_rejects_bad_taus(self):
        with pytest.raises(ValidationError):
            RunManifest(command="fit", taus=[0.5, 1.0])


class TestStudySpecs:
    def test_scenario_flags(self):
        spec = ScenarioSpec.for_scenario(2)
        assert (spec.include_ast, spec.include_star) == (False, True)
        assert spec.prob_rule == ProbRule.MAXRULE
        assert spec.taus == [0.1, 0.5, 0.9]

    def test_betas_need_four_values(self):
        with pytest.raises(ValidationError):
            ScenarioSpec(betas=[1.0, 2.0])

    def test_manifest_rejects_unknown_scenario(self):
        with pytest.raises(ValidationError):
            RunManifest(command="simulate", scenarios=[5])

    def test_fixed_bandwidth_requires_value(self):
        with pytest.raises(ValidationError):
            KdeSpec(bandwidth_rule="fixed")

    def test_diagnose_threshold_range(self):
        assert DiagnoseConfig().flag_threshold == 0.10
        with pytest.raises(ValidationError):
            DiagnoseConfig(flag_threshold=1.5)


class TestConfigLoader:
    def test_env_vars_resolved(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BQR_TEST_SEED", "42")
        monkeypatch.delenv("BQR_TEST_MISSING", raising=False)
        path = tmp_path / "run.yaml"
        path.write_text(
            "run:\n"
            "  command: fit\n"
            "  response: ${BQR_TEST_RESPONSE:gini}\n"
            "  output_dir: ${BQR_TEST_MISSING}out\n"
            "  fit:\n"
            "    seed: ${BQR_TEST_SEED:0}\n",
            encoding="utf-8",
        )
        manifest = ConfigLoader().load_manifest(path)
        assert manifest.response == "gini"
        assert manifest.fit.seed == 42
        assert str(manifest.output_dir) == "out"

    def test_top_level_config(self, tmp_path):
        path = tmp_path / "flat.yaml"
        path.write_text("command: curve\ntaus: [0.25, 0.75]\n", encoding="utf-8")
        assert ConfigLoader().load_manifest(path).taus == [0.25, 0.75]

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "run:\n  command: fit\n  fit:\n    iterations: 5000\n    burn_in: 1000\n",
            encoding="utf-8",
        )
        manifest = ConfigLoader().load_manifest(path, {"fit": {"burn_in": 2000}})
        assert (manifest.fit.iterations, manifest.fit.burn_in) == (5000, 2000)

    def test_bundled_templates_load(self, monkeypatch):
        monkeypatch.delenv("BQR_REPS", raising=False)
        loader = ConfigLoader()
        templates = loader.list_templates()
        assert {p.name for p in templates} >= {
            "gini_fit.yaml", "desk_simulation.yaml", "desk_calibration.yaml"
        }
        for path in templates:
            manifest = loader.load_manifest(path)
            assert manifest.fit.retained >= 100
        simulation = loader.load_manifest(loader.config_dir / "desk_simulation.yaml")
        assert simulation.replications == 20
        assert simulation.diagnose.prob_rule == ProbRule.MAXRULE

    def test_merge_overrides_is_nested(self):
        merged = merge_overrides({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"c": 9}})
        assert merged == {"a": {"b": 1, "c": 9}, "d": 3}


class TestSettings:
    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("BQR_THREADS", "2")
        settings = BQRSettings()
        assert settings.threads == 2
        assert settings.worker_count(9) == 2
        assert settings.worker_count(1) == 1

    def test_one_worker_per_task_without_cap(self, monkeypatch):
        monkeypatch.delenv("BQR_THREADS", raising=False)
        settings = BQRSettings(_env_file=None)
        assert settings.worker_count(5) == 5
