"""Normal quantile accuracy, correlated sampling, and dataset generation."""

import numpy as np
import pytest
from scipy.special import ndtri

from cuimet import (
    ScenarioSpec,
    builtin_scenario,
    inverse_normal_cdf,
    parse_dataset,
    raw_event_rate,
    read_scenario,
    realized_rates,
    sample_mvn,
    simulate_dataset,
    write_scenario,
)
from cuimet.errors import (
    InvalidScenario,
    NotPositiveSemiDefinite,
    OutOfDomain,
    ScenarioFormatError,
)
from cuimet.simulation import _dose_rng

from oracles import normal_cdf_series


class TestInverseNormalCdf:
    def test_median(self):
        assert inverse_normal_cdf(0.5) == pytest.approx(0.0, abs=1e-12)

    def test_upper_tail_value(self):
        # reference value of the 97.5% quantile
        assert inverse_normal_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-9)

    def test_against_scipy_reference(self):
        for p in np.linspace(0.0005, 0.9995, 1999):
            assert inverse_normal_cdf(p) == pytest.approx(ndtri(p), abs=1e-9)

    def test_round_trip_through_series_oracle(self):
        for p in np.arange(0.001, 0.9995, 0.001):
            x = inverse_normal_cdf(p)
            assert normal_cdf_series(x) == pytest.approx(p, abs=1e-9)

    def test_symmetry(self):
        for p in (0.01, 0.2, 0.4):
            assert inverse_normal_cdf(p) == pytest.approx(-inverse_normal_cdf(1 - p),
                                                          abs=1e-11)

    def test_out_of_domain(self):
        for p in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(OutOfDomain):
                inverse_normal_cdf(p)


class TestSampleMvn:
    def test_independent_columns_calibrate(self):
        draws = sample_mvn(np.eye(3), 10_000, _dose_rng(1, 0))
        corr = np.corrcoef(draws, rowvar=False)
        off = corr[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) < 0.05)
        assert np.all(np.abs(draws.mean(axis=0)) < 0.05)

    def test_perfect_correlation_duplicates_columns(self):
        draws = sample_mvn([[1.0, 1.0], [1.0, 1.0]], 1000, _dose_rng(2, 0))
        assert np.allclose(draws[:, 0], draws[:, 1], atol=1e-12)

    def test_not_psd_rejected(self):
        bad = [[1.0, 2.0], [2.0, 1.0]]
        with pytest.raises(NotPositiveSemiDefinite):
            sample_mvn(bad, 10, _dose_rng(0, 0))

    def test_asymmetric_rejected(self):
        with pytest.raises(NotPositiveSemiDefinite):
            sample_mvn([[1.0, 0.5], [0.2, 1.0]], 10, _dose_rng(0, 0))

    def test_target_correlation_recovered(self):
        corr = [[1.0, 0.7], [0.7, 1.0]]
        draws = sample_mvn(corr, 20_000, _dose_rng(3, 0))
        sample_corr = np.corrcoef(draws, rowvar=False)[0, 1]
        assert sample_corr == pytest.approx(0.7, abs=0.03)


class TestSimulateDataset:
    def test_marginal_calibration_at_half(self):
        spec = ScenarioSpec(
            doses=(1, 2), n_per_dose=10_000,
            endpoint_names=("Toxicity", "Efficacy"),
            target_probs=((0.5, 0.5), (0.5, 0.5)),
            correlation=((1.0, 0.0), (0.0, 1.0)),
            seed=13,
        )
        ds = simulate_dataset(spec)
        for dose in (1, 2):
            for k in range(2):
                assert 0.485 <= raw_event_rate(ds, k, dose) <= 0.515

    def test_builtin_shape(self):
        ds = simulate_dataset(builtin_scenario("example1", seed=7))
        assert ds.n_total == 150
        assert ds.per_dose_counts == (30,) * 5
        assert ds.endpoint_names() == ("Toxicity", "Efficacy", "Tolerability")

    def test_seed_determinism(self):
        a = simulate_dataset(builtin_scenario("example2", seed=5))
        b = simulate_dataset(builtin_scenario("example2", seed=5))
        assert a == b
        assert a.to_csv() == b.to_csv()
        c = simulate_dataset(builtin_scenario("example2", seed=6))
        assert c != a

    def test_generated_dataset_passes_parsing(self):
        ds = simulate_dataset(builtin_scenario("example3", seed=21))
        assert parse_dataset(ds.to_csv()) == ds

    def test_realized_rates_on_event_scale(self):
        spec = ScenarioSpec(
            doses=(1, 2), n_per_dose=4000,
            endpoint_names=("Toxicity", "Efficacy"),
            target_probs=((0.2, 0.6), (0.2, 0.6)),
            correlation=((1.0, 0.0), (0.0, 1.0)),
            seed=4,
        )
        rates = realized_rates(simulate_dataset(spec))
        assert rates["Toxicity"][0] == pytest.approx(0.2, abs=0.03)
        assert rates["Efficacy"][0] == pytest.approx(0.6, abs=0.03)

    def test_correlated_endpoints_show_binary_association(self):
        spec = ScenarioSpec(
            doses=(1, 2), n_per_dose=5000,
            endpoint_names=("Toxicity", "Efficacy"),
            target_probs=((0.4, 0.4), (0.4, 0.4)),
            correlation=((1.0, 0.9), (0.9, 1.0)),
            seed=6,
        )
        ds = simulate_dataset(spec)
        mat = ds._dose_matrices()[0]
        phi = np.corrcoef(mat, rowvar=False)[0, 1]
        # stored toxicity is flipped, so a positive latent correlation
        # appears as a negative association with the other endpoint
        assert phi < -0.4

    def test_invalid_scenarios_rejected(self):
        good = builtin_scenario("example1")
        from dataclasses import replace
        with pytest.raises(InvalidScenario):
            simulate_dataset(replace(good, n_per_dose=0))
        with pytest.raises(InvalidScenario):
            simulate_dataset(replace(good, doses=(1,)))
        with pytest.raises(InvalidScenario):
            simulate_dataset(replace(good, target_probs=((0.0, 0.5, 0.5),) * 5))
        with pytest.raises(InvalidScenario):
            simulate_dataset(replace(good, endpoint_names=("Toxicity", "Dup", "Dup")))
        with pytest.raises(InvalidScenario):
            simulate_dataset(replace(good, endpoint_names=("A", "B", "C")))

    def test_unknown_builtin(self):
        with pytest.raises(InvalidScenario):
            builtin_scenario("example9")


class TestScenarioFiles:
    def test_round_trip(self):
        spec = builtin_scenario("example2", seed=99)
        assert read_scenario(write_scenario(spec)) == spec

    def test_round_trip_preserves_floats_exactly(self):
        spec = ScenarioSpec(
            doses=(1, 3, 9), n_per_dose=17,
            endpoint_names=("Toxicity", "Efficacy"),
            target_probs=((0.1234567890123, 0.5), (0.2, 0.6), (0.3, 0.7)),
            correlation=((1.0, 0.25), (0.25, 1.0)),
            seed=31,
        )
        assert read_scenario(write_scenario(spec)) == spec

    def test_missing_pieces_rejected(self):
        spec = builtin_scenario("example1")
        text = write_scenario(spec)
        with pytest.raises(ScenarioFormatError, match="n_per_dose"):
            read_scenario(text.replace("n_per_dose = 30", ""))
        with pytest.raises(ScenarioFormatError, match="correlation"):
            read_scenario(text.split("[correlation]")[0])

    def test_bad_rows_rejected(self):
        text = write_scenario(builtin_scenario("example1"))
        with pytest.raises(ScenarioFormatError):
            read_scenario(text.replace("[target_probs]", "[target_probs]\nnot numbers"))

    def test_non_psd_matrix_rejected_at_read(self):
        spec = builtin_scenario("example1")
        text = write_scenario(spec).replace(
            "1.0 0.0 0.0", "1.0 2.0 0.0", 1
        ).replace("0.0 1.0 0.0", "2.0 1.0 0.0", 1)
        with pytest.raises(NotPositiveSemiDefinite):
            read_scenario(text)
