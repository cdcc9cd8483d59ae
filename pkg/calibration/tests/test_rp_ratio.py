"""
StockFlow · Calibration · Tests
Run with: pytest calibration/tests/ -v
"""

import numpy as np
import pytest

YEARS = list(range(1990, 2000))


def _single(reserves=1320.0, production=30.0):
    from calibration.rp_ratio import RpSeries
    return RpSeries.from_arrays(
        YEARS, {"world": [reserves] * len(YEARS)}, {"world": [production] * len(YEARS)}
    )


def _two_regions():
    from calibration.rp_ratio import RpSeries
    n = len(YEARS)
    return RpSeries.from_arrays(
        YEARS,
        {"east": [1000.0] * n, "west": [320.0] * n},
        {"east": [20.0] * n, "west": [10.0] * n},
    )


# ── Ratios ────────────────────────────────────────────────────────────────────

class TestRpRatio:
    def test_constant_single_region(self):
        from calibration.rp_ratio import rp_ratio
        ratios = rp_ratio(_single())
        assert ratios.t0 == 1990.0
        assert list(ratios.values) == [44.0] * len(YEARS)

    def test_ratio_of_sums(self):
        from calibration.rp_ratio import mean_of_ratios, rp_ratio
        series = _two_regions()
        assert rp_ratio(series).values == pytest.approx(44.0)
        assert mean_of_ratios(series).values == pytest.approx(41.0)

    def test_regional_scope(self):
        from calibration.rp_ratio import rp_ratio
        assert rp_ratio(_two_regions(), ["east"]).values == pytest.approx(50.0)
        assert rp_ratio(_two_regions(), ["west"]).values == pytest.approx(32.0)

    def test_single_region_global_equals_regional(self):
        from calibration.rp_ratio import rp_ratio
        series = _single(1234.0, 17.0)
        assert np.array_equal(rp_ratio(series).values, rp_ratio(series, ["world"]).values)

    def test_zero_production_names_year(self):
        from calibration.rp_ratio import RpSeries, rp_ratio
        from scripts.errors import ValidationError
        production = [30.0] * len(YEARS)
        production[3] = 0.0
        series = RpSeries.from_arrays(YEARS, {"world": [1320.0] * len(YEARS)}, {"world": production})
        with pytest.raises(ValidationError, match="1993"):
            rp_ratio(series)

    def test_empty_scope(self):
        from calibration.rp_ratio import rp_ratio
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            rp_ratio(_single(), [])


# ── ν₀ Estimates ──────────────────────────────────────────────────────────────

class TestEstimateNu0:
    def test_constant_series(self):
        from calibration.rp_ratio import estimate_nu0, rp_ratio
        estimate = estimate_nu0(rp_ratio(_single()), (1992, 1998))
        assert estimate.inverse_mean == 44.0
        assert estimate.inverse_std == 0.0
        assert estimate.nu0 == pytest.approx(1.0 / 44.0)

    def test_alternating_series(self):
        from calibration.rp_ratio import estimate_nu0
        from depletion.kinetics import TimeSeries
        ratios = TimeSeries(1990.0, 1.0, [40.0, 48.0] * 8)
        estimate = estimate_nu0(ratios, (1990, 2005))
        assert estimate.inverse_mean == pytest.approx(44.0)
        assert estimate.inverse_std == pytest.approx(4.131, abs=1e-3)

    def test_window_changes_estimate(self):
        from calibration.rp_ratio import estimate_nu0
        from depletion.kinetics import TimeSeries
        ratios = TimeSeries(1980.0, 1.0, [30.0] * 7 + [44.0] * 20)
        full = estimate_nu0(ratios, (1980, 2006))
        stable = estimate_nu0(ratios, (1987, 2006))
        assert stable.inverse_mean == 44.0
        assert full.inverse_mean < stable.inverse_mean

    def test_empty_window(self):
        from calibration.rp_ratio import estimate_nu0, rp_ratio
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            estimate_nu0(rp_ratio(_single()), (2050, 2060))

    def test_noise_scale_recovered(self):
        from calibration.rp_ratio import RpSeries, estimate_nu0, rp_ratio
        rng = np.random.default_rng(7)
        years = list(range(1800, 2000))
        eps = 0.05
        reserves = 1320.0 * (1.0 + eps * rng.standard_normal(len(years)))
        series = RpSeries.from_arrays(years, {"world": reserves}, {"world": [30.0] * len(years)})
        estimate = estimate_nu0(rp_ratio(series), (1800, 1999))
        relative = estimate.inverse_std / estimate.inverse_mean
        assert 0.5 * eps <= relative <= 1.5 * eps

    def test_default_table(self):
        from calibration.rp_ratio import default_nu0
        assert default_nu0("oil").inverse_mean == 44.0
        assert default_nu0("Gas").inverse_mean == 56.0
        assert default_nu0("uranium").inverse_std == 1.0


# ── Category Exclusion ────────────────────────────────────────────────────────

class TestExcludeCategory:
    def test_zero_adjustment_is_identity(self):
        from calibration.rp_ratio import exclude_category
        series = _single()
        adjusted = exclude_category(series, {year: 0.0 for year in YEARS})
        assert adjusted.frame.equals(series.frame)

    def test_constant_subtraction(self):
        from calibration.rp_ratio import exclude_category, rp_ratio
        adjusted = exclude_category(_single(), {year: 100.0 for year in YEARS})
        assert rp_ratio(adjusted).values == pytest.approx(1220.0 / 30.0)
        assert rp_ratio(adjusted).values[0] == pytest.approx(40.67, abs=5e-3)

    def test_adjustment_exceeding_reserves(self):
        from calibration.rp_ratio import exclude_category
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError, match="exceeds"):
            exclude_category(_single(), {1990: 2000.0})

    def test_multi_region_needs_region(self):
        from calibration.rp_ratio import exclude_category, rp_ratio
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            exclude_category(_two_regions(), {1990: 10.0})
        adjusted = exclude_category(_two_regions(), {1990: 120.0}, region="west")
        assert rp_ratio(adjusted).values[0] == pytest.approx(1200.0 / 30.0)


# ── CSV ───────────────────────────────────────────────────────────────────────

class TestReadRpCsv:
    def test_reads_long_format(self, tmp_path):
        from calibration.rp_ratio import read_rp_csv, rp_ratio
        path = tmp_path / "rp.csv"
        path.write_text(
            "year,region,reserves,production\n"
            "2000,east,1000,20\n2000,west,320,10\n"
            "2001,east,1000,20\n2001,west,320,10\n"
        )
        assert rp_ratio(read_rp_csv(path)).values == pytest.approx(44.0)

    def test_unit_factor_cancels_in_ratio(self, tmp_path):
        from calibration.rp_ratio import read_rp_csv, rp_ratio
        path = tmp_path / "rp.csv"
        path.write_text("year,region,reserves,production\n2000,world,1320,30\n")
        series = read_rp_csv(path, unit_factor=0.041868)
        assert series.frame["reserves"].iloc[0] == pytest.approx(1320.0 * 0.041868)
        assert rp_ratio(series).values == pytest.approx(44.0)

    def test_bad_row(self, tmp_path):
        from calibration.rp_ratio import read_rp_csv
        from scripts.errors import ValidationError
        path = tmp_path / "rp.csv"
        path.write_text("year,region,reserves,production\n2000,world,1320,30\n2001,world,n/a,30\n")
        with pytest.raises(ValidationError, match="row 2"):
            read_rp_csv(path)

    def test_bad_header(self, tmp_path):
        from calibration.rp_ratio import read_rp_csv
        from scripts.errors import ValidationError
        path = tmp_path / "rp.csv"
        path.write_text("yr,reserves\n2000,1\n")
        with pytest.raises(ValidationError, match="header"):
            read_rp_csv(path)
