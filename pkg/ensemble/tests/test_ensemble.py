"""
StockFlow · Ensemble Tests
Percentile bands, seed determinism, endpoint bracketing and ν₀ sensitivity.
Run with: pytest ensemble/tests/ -v
"""

import numpy as np
import pytest


def _sharp():
    from depletion.kinetics import ExtractionProbability
    return ExtractionProbability(kind="sharp")


def _linear_prices(start, slope, n, dt):
    from depletion.kinetics import TimeSeries
    return TimeSeries(0.0, dt, start + slope * dt * np.arange(n))


def _constant(value, n, dt):
    from depletion.kinetics import TimeSeries
    return TimeSeries(0.0, dt, np.full(n, float(value)))


def _two_hump_endowment():
    """High estimate adds a second hump on top of the low one, so high >= low in every bin."""
    from depletion.distribution import UncertainEndowment, humped_distribution
    edges = np.linspace(0.0, 12.0, 241)
    low = humped_distribution(edges, [(5.0, 1.5, 100.0)])
    high = humped_distribution(edges, [(5.0, 1.5, 100.0), (6.0, 1.5, 100.0)])
    return UncertainEndowment(low=low, high=high)


def _uniform_endowment(low_density=10.0, high_density=20.0):
    from depletion.distribution import UncertainEndowment, from_bins
    edges = np.linspace(1.0, 10.0, 46)
    return UncertainEndowment(
        low=from_bins(edges, np.full(45, low_density)),
        high=from_bins(edges, np.full(45, high_density)),
    )


# ── Spec & Samplers ───────────────────────────────────────────────────────────

class TestEnsembleSpec:
    def test_defaults(self):
        from ensemble.monte_carlo import EnsembleSpec
        spec = EnsembleSpec(runs=10)
        assert spec.percentiles == (0.02, 0.50, 0.98)
        assert spec.mode == "forward"

    @pytest.mark.parametrize("kwargs", [
        {"runs": 0},
        {"runs": 5, "percentiles": (0.5, 0.2)},
        {"runs": 5, "percentiles": (0.0, 0.5)},
        {"runs": 5, "percentiles": (0.5, 1.0)},
        {"runs": 5, "mode": "coupled"},
    ])
    def test_rejects_invalid(self, kwargs):
        from ensemble.monte_carlo import EnsembleSpec
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            EnsembleSpec(**kwargs)

    def test_fixed_fraction_out_of_range(self):
        from ensemble.monte_carlo import fixed_fraction
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            fixed_fraction(1.5)

    def test_samplers_stay_in_unit_interval(self):
        from ensemble.monte_carlo import EnsembleSpec, beta_fraction, sample_fractions
        fractions = sample_fractions(EnsembleSpec(runs=200, seed=3, sampler=beta_fraction(0.5, 0.5)))
        assert fractions.shape == (200,)
        assert np.all((fractions >= 0) & (fractions <= 1))

    def test_fractions_depend_only_on_seed(self):
        from ensemble.monte_carlo import EnsembleSpec, sample_fractions
        a = sample_fractions(EnsembleSpec(runs=50, seed=11))
        b = sample_fractions(EnsembleSpec(runs=50, seed=11))
        c = sample_fractions(EnsembleSpec(runs=50, seed=12))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_more_runs_extend_the_same_stream(self):
        from ensemble.monte_carlo import EnsembleSpec, sample_fractions
        short = sample_fractions(EnsembleSpec(runs=10, seed=5))
        long = sample_fractions(EnsembleSpec(runs=20, seed=5))
        assert np.array_equal(short, long[:10])

    def test_percentile_labels(self):
        from ensemble.monte_carlo import percentile_label
        assert percentile_label(0.02) == "p02"
        assert percentile_label(0.5) == "p50"
        assert percentile_label(0.98) == "p98"
        assert percentile_label(0.975) == "p97.5"


# ── Bands ─────────────────────────────────────────────────────────────────────

class TestRunEnsemble:
    def test_single_run_collapses_bands(self):
        from depletion.distribution import sample_endowment
        from ensemble.monte_carlo import EnsembleSpec, fixed_fraction, run_ensemble, simulate
        endowment = _uniform_endowment()
        prices = _linear_prices(1.0, 0.2, 60, 0.5)
        spec = EnsembleSpec(runs=1, seed=0, sampler=fixed_fraction(0.5))
        result = run_ensemble(endowment, spec, _sharp(), 0.05, prices, threads=1)
        single, _ = simulate(sample_endowment(endowment, 0.5), 0.05, _sharp(), prices, "forward")
        for band in result.bands.values():
            np.testing.assert_allclose(band.values, single, rtol=1e-12)

    def test_certain_endowment_has_zero_width(self):
        from depletion.distribution import UncertainEndowment
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        endowment = UncertainEndowment.certain(_uniform_endowment().low)
        result = run_ensemble(endowment, EnsembleSpec(runs=30, seed=1), _sharp(), 0.05,
                              _linear_prices(1.0, 0.2, 40, 0.5), threads=2)
        np.testing.assert_allclose(result.bands[0.98].values, result.bands[0.02].values, rtol=1e-12)

    def test_bands_are_ordered_and_bracketed(self):
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        prices = _linear_prices(0.0, 0.1, 240, 0.5)
        result = run_ensemble(_two_hump_endowment(), EnsembleSpec(runs=500, seed=7), _sharp(), 0.05, prices)
        p02, p50, p98 = (result.bands[q].values for q in (0.02, 0.50, 0.98))
        assert np.all(p02 <= p50)
        assert np.all(p50 <= p98)

        slack = 1e-9 * result.high.values.max()
        assert np.all(result.runs >= result.low.values - slack)
        assert np.all(result.runs <= result.high.values + slack)
        assert result.divergence_fraction is None

    def test_median_peak_between_endpoint_peaks(self):
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        prices = _linear_prices(0.0, 0.1, 240, 0.5)
        result = run_ensemble(_two_hump_endowment(), EnsembleSpec(runs=200, seed=2), _sharp(), 0.05, prices)
        times = prices.times
        peak_low = times[np.argmax(result.low.values)]
        peak_high = times[np.argmax(result.high.values)]
        peak_median = times[np.argmax(result.bands[0.50].values)]
        assert min(peak_low, peak_high) <= peak_median <= max(peak_low, peak_high)

    def test_identical_for_any_thread_count(self):
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        prices = _linear_prices(0.0, 0.1, 120, 0.5)
        spec = EnsembleSpec(runs=60, seed=42)
        serial = run_ensemble(_two_hump_endowment(), spec, _sharp(), 0.05, prices, threads=1)
        parallel = run_ensemble(_two_hump_endowment(), spec, _sharp(), 0.05, prices, threads=4)
        for q in spec.percentiles:
            assert np.array_equal(serial.bands[q].values, parallel.bands[q].values)
        assert np.array_equal(serial.runs, parallel.runs)

    def test_reverse_larger_endowment_means_lower_price(self):
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        demand = _constant(1.0, 40, 1.0)
        result = run_ensemble(_uniform_endowment(), EnsembleSpec(runs=25, seed=9, mode="reverse"),
                              _sharp(), 0.05, demand, threads=2)
        assert np.all(result.low.values >= result.high.values - 1e-6)
        order = np.argsort(result.fractions)
        by_fraction = result.runs[order]
        assert np.all(np.diff(by_fraction, axis=0) <= 1e-4)
        assert result.divergence_fraction is not None
        assert result.divergence_fraction.shape == (40,)
        assert np.all(result.divergence_fraction == 0.0)

    def test_reverse_divergence_fraction(self):
        from ensemble.monte_carlo import EnsembleSpec, run_ensemble
        # ν₀·total is 4.5 EJ/y on the low and 9 EJ/y on the high estimate; 6 EJ/y
        # is beyond the low estimate from the first step.
        demand = _constant(6.0, 10, 1.0)
        result = run_ensemble(_uniform_endowment(), EnsembleSpec(runs=40, seed=4, mode="reverse"),
                              _sharp(), 0.05, demand, threads=2)
        assert result.divergence_fraction[0] > 0.0
        assert np.all(result.divergence_fraction <= 1.0)
        assert np.all(np.diff(result.divergence_fraction) >= 0)


# ── Sensitivity ───────────────────────────────────────────────────────────────

def _oil_like():
    """Single Gaussian hump in cost, centred at 60 $/GJ."""
    from depletion.distribution import humped_distribution
    return humped_distribution(np.linspace(0.0, 120.0, 481), [(60.0, 15.0, 376.0)])


class TestSensitivitySweep:
    def test_forward_peak_shifts_later(self):
        from ensemble.sensitivity import sensitivity_sweep, summarize
        prices = _linear_prices(0.0, 1.0, 600, 0.25)
        runs = sensitivity_sweep(_oil_like(), [1 / 34, 1 / 44, 1 / 54], _sharp(), prices)
        peaks = [run.peak_time for run in runs]
        assert peaks[0] < peaks[1] < peaks[2]
        assert 1.0 <= peaks[2] - peaks[0] <= 10.0

        table = summarize(runs)
        assert list(table.columns) == ["nu0_inverse", "nu0", "peak_year", "peak_flow"]
        assert table["nu0_inverse"].tolist() == pytest.approx([34.0, 44.0, 54.0])

    def test_reverse_price_rises_with_nu0_inverse(self):
        from ensemble.sensitivity import sensitivity_sweep, summarize
        demand = _constant(2.0, 100, 1.0)
        runs = sensitivity_sweep(_oil_like(), [1 / 34, 1 / 44, 1 / 54], _sharp(), demand, mode="reverse")
        means = [run.mean_value for run in runs]
        assert means[0] < means[1] < means[2]
        table = summarize(runs, mode="reverse")
        assert table["diverged_steps"].tolist() == [0, 0, 0]
        assert "max_price" in table.columns

    def test_single_value_matches_plain_run(self):
        from depletion.kinetics import initial_state, run_forward
        from ensemble.sensitivity import sensitivity_sweep
        prices = _linear_prices(0.0, 1.0, 200, 0.25)
        (run,) = sensitivity_sweep(_oil_like(), [1 / 44], _sharp(), prices)
        plain = run_forward(initial_state(_oil_like(), 1 / 44), _sharp(), prices)
        np.testing.assert_array_equal(run.output.values, plain.flows.values)

    @pytest.mark.parametrize("values", [[], [0.02, 0.0], [-0.01]])
    def test_rejects_bad_values(self, values):
        from ensemble.sensitivity import sensitivity_sweep
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            sensitivity_sweep(_oil_like(), values, _sharp(), _linear_prices(0.0, 1.0, 10, 1.0))
