"""이상치 확률 / KDE-KL 진단"""

import numpy as np
import pytest
from conftest import linear_dataset, make_chains

from bqr.common.gibbs import run_gibbs
from bqr.common.outliers import (
    ChainDensity,
    all_exceedance_probabilities,
    build_report,
    default_reference,
    exceedance_probability_maxrule,
    exceedance_probability_pairwise,
    kl_divergence_kde,
    kl_divergence_samples,
    mean_kl,
    pair_divergences,
    pairwise_exceedance,
    relative_kl,
    silverman_bandwidth,
    top_outliers,
)
from bqr.config.fit_config import FitConfig, KdeSpec, KlMode, ProbRule
from bqr.errors import DegenerateChainError


class TestExceedance:
    def test_toy_pairwise_enumeration(self, toy_chains):
        assert exceedance_probability_pairwise(toy_chains, 0) == pytest.approx(0.75)
        assert exceedance_probability_pairwise(toy_chains, 1) == pytest.approx(0.75)
        assert exceedance_probability_pairwise(toy_chains, 2) == 0.0

    def test_toy_maxrule_enumeration(self, toy_chains):
        assert exceedance_probability_maxrule(toy_chains, 0, 1) == pytest.approx(0.25)
        assert exceedance_probability_maxrule(toy_chains, 0, 2) == pytest.approx(0.75)
        assert exceedance_probability_maxrule(toy_chains, 1, 0) == 0.0
        assert exceedance_probability_maxrule(toy_chains, 1, 2) == pytest.approx(0.75)

    def test_vectorized_matches_scalar(self, toy_chains):
        np.testing.assert_allclose(
            all_exceedance_probabilities(toy_chains, ProbRule.PAIRWISE), [0.75, 0.75, 0.0]
        )
        np.testing.assert_allclose(
            all_exceedance_probabilities(toy_chains, ProbRule.MAXRULE), [0.5, 0.375, 0.0]
        )

    def test_dominant_chain(self):
        gen = np.random.default_rng(0)
        v = gen.uniform(0.0, 1.0, size=(50, 6))
        v[:, 2] += 1.0
        chains = make_chains(v)
        assert exceedance_probability_pairwise(chains, 2) == 1.0
        assert all_exceedance_probabilities(chains, ProbRule.MAXRULE)[2] == 1.0

    def test_identical_constant_chains(self):
        chains = make_chains(np.ones((10, 2)))
        assert exceedance_probability_pairwise(chains, 0) == 0.0
        assert exceedance_probability_maxrule(chains, 0, 1) == 0.0

    def test_single_observation_rejected(self):
        chains = make_chains(np.ones((10, 1)))
        with pytest.raises(ValueError):
            exceedance_probability_pairwise(chains, 0)

    def test_maxrule_never_exceeds_pairwise(self):
        gen = np.random.default_rng(1)
        chains = make_chains(gen.gamma(2.0, size=(200, 5)))
        for i in range(5):
            for j in range(5):
                if i != j:
                    assert exceedance_probability_maxrule(chains, i, j) <= pairwise_exceedance(
                        chains, i, j
                    )

    def test_pairwise_antisymmetry_without_ties(self):
        gen = np.random.default_rng(2)
        chains = make_chains(gen.exponential(size=(300, 3)))
        total = pairwise_exceedance(chains, 0, 1) + pairwise_exceedance(chains, 1, 0)
        assert total == pytest.approx(1.0)

    def test_probabilities_in_unit_interval(self):
        gen = np.random.default_rng(3)
        chains = make_chains(gen.exponential(size=(100, 8)))
        for rule in ProbRule:
            prob = all_exceedance_probabilities(chains, rule)
            assert np.all((prob >= 0) & (prob <= 1))


class TestKullbackLeibler:
    def test_identical_draws_have_zero_divergence(self):
        gen = np.random.default_rng(4)
        draws = gen.gamma(2.0, size=2000)
        chains = make_chains(np.column_stack([draws, draws]))
        assert kl_divergence_kde(chains, 0, 1) < 1e-10

    @pytest.mark.parametrize(
        "loc, scale, expected",
        [(1.0, 1.0, 0.5), (0.0, 2.0, 0.5 * (0.25 + np.log(4.0) - 1.0))],
    )
    def test_gaussian_oracle(self, loc, scale, expected):
        gen = np.random.default_rng(5)
        a = gen.normal(0.0, 1.0, size=100_000)
        b = gen.normal(loc, scale, size=100_000)
        assert kl_divergence_samples(a, b, KdeSpec()) == pytest.approx(expected, abs=0.05)

    def test_degenerate_chain_is_named(self):
        chains = make_chains(np.column_stack([np.ones(50), np.linspace(1, 2, 50)]))
        with pytest.raises(DegenerateChainError, match="v_0"):
            kl_divergence_kde(chains, 0, 1)

    def test_same_index_rejected(self, toy_chains):
        with pytest.raises(ValueError):
            kl_divergence_kde(toy_chains, 1, 1)

    def test_nonnegative(self):
        gen = np.random.default_rng(6)
        chains = make_chains(gen.gamma(3.0, size=(500, 4)))
        for j in (1, 2, 3):
            assert kl_divergence_kde(chains, 0, j) >= 0.0

    def test_mean_kl_two_observations(self):
        gen = np.random.default_rng(7)
        chains = make_chains(gen.gamma(2.0, size=(400, 2)))
        assert mean_kl(chains, 0) == pytest.approx(kl_divergence_kde(chains, 0, 1))

    def test_mean_kl_three_observations(self):
        gen = np.random.default_rng(8)
        chains = make_chains(gen.gamma(2.0, size=(400, 3)))
        spec = KdeSpec()
        expected = 0.5 * (kl_divergence_kde(chains, 1, 0, spec) + kl_divergence_kde(chains, 1, 2, spec))
        assert mean_kl(chains, 1, spec=spec) == pytest.approx(expected)
        assert mean_kl(chains, 1, KlMode.SINGLE, reference=2, spec=spec) == pytest.approx(
            kl_divergence_kde(chains, 1, 2, spec)
        )

    def test_identically_distributed_chains_near_zero(self):
        gen = np.random.default_rng(9)
        chains = make_chains(gen.gamma(2.0, size=(20_000, 3)))
        assert mean_kl(chains, 0) < 0.05

    def test_fixed_bandwidth(self):
        gen = np.random.default_rng(10)
        a, b = gen.normal(size=5000), gen.normal(1.0, 1.0, size=5000)
        spec = KdeSpec(bandwidth_rule="fixed", bandwidth=0.2)
        assert kl_divergence_samples(a, b, spec) == pytest.approx(0.5, abs=0.1)

    def test_silverman_bandwidth(self):
        draws = np.random.default_rng(11).normal(size=10_000)
        assert silverman_bandwidth(draws) == pytest.approx(0.9 * 10_000 ** (-0.2), rel=0.05)


class TestReport:
    def test_relative_kl(self):
        kl = np.array([1.0, 1.0, 1.0, 10.0])
        np.testing.assert_allclose(relative_kl(kl, [3]), [1.0, 1.0, 1.0, 10.0])
        np.testing.assert_allclose(
            relative_kl(np.array([0.0, 2.0, 2.0, 8.0]), [3], exclude=[0]), [0.0, 1.0, 1.0, 4.0]
        )

    def test_relative_kl_zero_baseline(self):
        assert np.all(np.isnan(relative_kl(np.zeros(3), [])))

    def test_default_reference_is_median_row(self):
        assert default_reference(np.array([0.1, 0.5, 0.3])) == 2

    def test_identical_chains_maxrule_all_zero(self):
        column = np.random.default_rng(12).gamma(2.0, size=300)
        chains = make_chains(np.tile(column[:, None], (1, 4)))
        report = build_report(chains, prob_rule=ProbRule.MAXRULE)
        np.testing.assert_array_equal(report.prob, np.zeros(4))
        assert not report.flagged.any()

    def test_report_frame_and_flags(self):
        gen = np.random.default_rng(13)
        v = gen.gamma(2.0, size=(300, 5))
        v[:, 4] += 20.0
        report = build_report(make_chains(v), flag_threshold=0.5)
        frame = report.to_frame()
        assert frame.columns.tolist() == [
            "row_index", "probability", "mean_kl", "relative_kl", "flagged"
        ]
        assert frame["flagged"].tolist() == [False, False, False, False, True]
        assert report.kl_reference is None
        assert np.all(report.kl >= 0)
        assert top_outliers(report, k=1)["row_index"].tolist() == [4]

    def test_threshold_one_never_flags(self):
        v = np.random.default_rng(14).gamma(2.0, size=(200, 4))
        v[:, 0] += 50.0
        report = build_report(make_chains(v), flag_threshold=1.0)
        assert not report.flagged.any()

    def test_single_reference_mode(self):
        v = np.random.default_rng(15).gamma(2.0, size=(200, 4))
        report = build_report(make_chains(v), kl_mode=KlMode.SINGLE, kl_reference=1)
        assert report.kl_reference == 1
        assert report.kl[1] == 0.0
        assert np.isnan(report.relative_kl[1]) or report.relative_kl[1] == 0.0

    def test_report_kl_matches_mean_kl(self):
        chains = make_chains(np.random.default_rng(17).gamma(2.0, size=(300, 4)))
        report = build_report(chains)
        expected = [mean_kl(chains, i) for i in range(4)]
        np.testing.assert_array_equal(report.kl, expected)

    def test_pair_divergences_cover_both_directions(self):
        gen = np.random.default_rng(18)
        a, b = gen.gamma(2.0, size=500), gen.gamma(3.0, size=500)
        spec = KdeSpec()
        forward, backward = pair_divergences(
            ChainDensity.build(a, spec, "a"), ChainDensity.build(b, spec, "b"), spec
        )
        assert forward == kl_divergence_samples(a, b, spec)
        assert backward == kl_divergence_samples(b, a, spec)
        assert forward != backward

    def test_workers_do_not_change_report(self):
        v = np.random.default_rng(16).gamma(2.0, size=(200, 5))
        chains = make_chains(v)
        serial = build_report(chains, workers=1)
        threaded = build_report(chains, workers=3)
        np.testing.assert_array_equal(serial.kl, threaded.kl)

    def test_contamination_increases_probability(self):
        base = linear_dataset(60, seed=40)
        config = FitConfig(iterations=1500, burn_in=500, seed=8)
        probabilities = []
        for scale in (2.0, 4.0, 8.0):
            x_row = np.array([[1.0, 0.0]])
            data = base.with_rows(np.array([1.0 + scale]), x_row, {"spike": base.n})
            chains = run_gibbs(data, config)
            prob = all_exceedance_probabilities(chains, ProbRule.PAIRWISE)
            probabilities.append(prob[base.n])
        assert probabilities[0] < probabilities[1]
        assert probabilities[1] < probabilities[2]
        assert probabilities[2] > 0.9
