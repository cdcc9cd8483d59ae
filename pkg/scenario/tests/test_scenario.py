"""
StockFlow · Scenario Tests
Assumption paths, unit conversion and config validation.
Run with: pytest scenario/tests/ -v
"""

import copy

import numpy as np
import pytest


def _horizon(start=2010.0, end=2020.0, dt=1.0):
    from scenario.paths import Horizon
    return Horizon(start, end, dt)


def _forward_config(**changes):
    cfg = {
        "name": "minimal",
        "mode": "forward",
        "horizon": {"start": 2010, "end": 2030, "dt": 0.5},
        "resources": {
            "oil": {
                "endowment": {"uniform": {"low": 1.0, "high": 10.0, "bins": 90, "density": 10.0}},
                "nu0_inverse": 20,
                "probability": {"kind": "sharp"},
                "price": {"linear": {"start": 5.0, "slope": 0.1}},
            }
        },
    }
    cfg.update(changes)
    return cfg


def _reverse_config():
    cfg = _forward_config(mode="reverse")
    oil = cfg["resources"]["oil"]
    del oil["price"]
    oil["demand"] = {"linear": {"start": 2.0, "slope": 0.0}}
    return cfg


# ── Paths ─────────────────────────────────────────────────────────────────────

class TestHorizon:
    def test_steps_and_times(self):
        h = _horizon(2010.0, 2012.0, 0.5)
        assert h.n_steps == 4
        np.testing.assert_allclose(h.times, [2010.0, 2010.5, 2011.0, 2011.5])

    def test_dt_must_divide(self):
        from scenario.paths import Horizon
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError, match="does not divide"):
            Horizon(2010.0, 2020.0, 3.0)


class TestLinearPath:
    def test_constant(self):
        from scenario.paths import linear_path
        np.testing.assert_array_equal(linear_path(5.0, 0.0, _horizon()).values, np.full(10, 5.0))

    def test_slope(self):
        from scenario.paths import linear_path
        path = linear_path(5.0, 0.1, _horizon(2010.0, 2030.0))
        assert path.values[10] == pytest.approx(6.0)

    def test_negative_slope_allowed(self):
        from scenario.paths import linear_path
        path = linear_path(5.0, -0.2, _horizon())
        assert np.all(np.diff(path.values) < 0)


class TestPiecewisePath:
    def test_interpolates_and_holds(self):
        from scenario.paths import piecewise_path
        path = piecewise_path([[2012, 2.0], [2016, 6.0]], _horizon())
        np.testing.assert_allclose(path.values, [2, 2, 2, 3, 4, 5, 6, 6, 6, 6])

    def test_years_must_increase(self):
        from scenario.paths import piecewise_path
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            piecewise_path([[2016, 1.0], [2012, 2.0]], _horizon())


class TestExplicitPaths:
    def test_length_must_match(self):
        from scenario.paths import explicit_path
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError, match="10 steps"):
            explicit_path([1.0, 2.0], _horizon())

    def test_csv_is_cut_to_horizon(self, tmp_path):
        from scenario.paths import read_path_csv
        path = tmp_path / "demand.csv"
        path.write_text("year,value\n" + "".join(f"{y},{y - 2000}\n" for y in range(2000, 2031)))
        ts = read_path_csv(path, _horizon())
        assert ts.t0 == 2010.0
        np.testing.assert_allclose(ts.values, np.arange(10, 20))

    def test_csv_must_cover_horizon(self, tmp_path):
        from scenario.paths import read_path_csv
        from scripts.errors import ValidationError
        path = tmp_path / "short.csv"
        path.write_text("year,value\n2010,1\n2011,2\n")
        with pytest.raises(ValidationError, match="do not cover"):
            read_path_csv(path, _horizon())


class TestFixedShareDemand:
    def test_nuclear_share(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import fixed_share_demand
        total = TimeSeries(2010.0, 1.0, np.full(5, 494.0))
        parts = fixed_share_demand(total, {"uranium": 10 / 494, "rest": 484 / 494})
        np.testing.assert_allclose(parts["uranium"].values, 10.0, rtol=1e-12)

    def test_single_resource_identity(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import fixed_share_demand
        total = TimeSeries(2010.0, 1.0, [3.0, 4.0, 5.0])
        np.testing.assert_array_equal(fixed_share_demand(total, {"oil": 1.0})["oil"].values, total.values)

    def test_shares_must_sum_to_one(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import fixed_share_demand
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError, match="sum"):
            fixed_share_demand(TimeSeries(0.0, 1.0, [1.0]), {"a": 0.6, "b": 0.5})

    def test_parts_add_up_to_total(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import fixed_share_demand
        total = TimeSeries(2010.0, 1.0, np.linspace(400.0, 700.0, 91))
        parts = fixed_share_demand(total, {"coal": 0.29, "oil": 0.33, "gas": 0.24, "uranium": 0.14 + 5e-10})
        summed = sum(p.values for p in parts.values())
        np.testing.assert_allclose(summed, total.values, rtol=1e-12)


class TestUnits:
    def test_boe_to_gj(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import convert_price
        ts = convert_price(TimeSeries(0.0, 1.0, [61.178632]), "$/boe")
        assert ts.values[0] == pytest.approx(10.0, rel=1e-12)

    def test_mtoe_to_ej(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import convert_flow
        assert convert_flow(TimeSeries(0.0, 1.0, [1000.0]), "Mtoe/y").values[0] == pytest.approx(41.868)

    def test_unknown_unit(self):
        from depletion.kinetics import TimeSeries
        from scenario.paths import convert_flow
        from scripts.errors import ValidationError
        with pytest.raises(ValidationError):
            convert_flow(TimeSeries(0.0, 1.0, [1.0]), "TWh")


# ── Validation ────────────────────────────────────────────────────────────────

class TestValidate:
    def test_minimal_forward(self):
        from scenario.builder import validate
        scenario = validate(_forward_config())
        oil = scenario.resources["oil"]
        assert scenario.mode == "forward"
        assert scenario.horizon.n_steps == 40
        assert oil.nu0 == pytest.approx(0.05)
        assert oil.fraction == 0.5
        assert len(oil.path) == 40
        assert oil.path.values[0] == 5.0

    def test_default_table_for_oil(self):
        from scenario.builder import validate
        cfg = _forward_config()
        oil = cfg["resources"]["oil"]
        del oil["nu0_inverse"]
        oil["calibration"] = "default"
        assert 1.0 / validate(cfg).resources["oil"].nu0 == pytest.approx(44.0)

    def test_demand_length_names_resource(self):
        from scenario.builder import validate
        from scripts.errors import ValidationError
        cfg = _reverse_config()
        cfg["resources"]["oil"]["demand"] = {"values": [1.0, 2.0, 3.0]}
        with pytest.raises(ValidationError) as exc:
            validate(cfg)
        assert any(msg.startswith("resources.oil.demand") for msg in exc.value.errors)

    def test_reports_every_error(self, tmp_path):
        from scenario.builder import validate
        from scripts.errors import ValidationError
        cfg = _forward_config()
        oil = cfg["resources"]["oil"]
        oil["endowment"] = {"csv": "missing.csv"}
        oil["nu0_inverse"] = -5
        with pytest.raises(ValidationError) as exc:
            validate(cfg, base_dir=tmp_path)
        joined = "\n".join(exc.value.errors)
        assert "resources.oil.endowment.csv" in joined
        assert "resources.oil.nu0_inverse" in joined

    def test_wrong_mode_assumptions(self):
        from scenario.builder import validate
        from scripts.errors import ValidationError
        cfg = _forward_config()
        cfg["resources"]["oil"]["demand"] = {"linear": {"start": 1.0}}
        with pytest.raises(ValidationError, match="not used in forward mode"):
            validate(cfg)

    def test_missing_path_for_mode(self):
        from scenario.builder import validate
        from scripts.errors import ValidationError
        cfg = _forward_config()
        del cfg["resources"]["oil"]["price"]
        with pytest.raises(ValidationError, match="needs a price path"):
            validate(cfg)

    def test_idempotent(self):
        from scenario.builder import validate
        cfg = _reverse_config()
        cfg["ensemble"] = {"runs": 20, "sampler": {"beta": [2, 2]}}
        first = validate(cfg)
        second = validate(copy.deepcopy(first.normalized))
        assert second.normalized == first.normalized
        np.testing.assert_array_equal(second.resources["oil"].path.values, first.resources["oil"].path.values)
        assert second.ensemble.runs == 20

    def test_price_units_converted(self):
        from scenario.builder import validate
        cfg = _forward_config()
        cfg["resources"]["oil"]["price"] = {"linear": {"start": 61.178632, "slope": 0.0}, "unit": "$/boe"}
        assert validate(cfg).resources["oil"].path.values[0] == pytest.approx(10.0)

    def test_start_flow_solves_price(self):
        from scenario.builder import validate
        cfg = _forward_config()
        cfg["resources"]["oil"]["price"] = {"start_flow": 2.0, "slope": 0.1}
        path = validate(cfg).resources["oil"].path
        # ν₀ = 0.05 and 10 EJ per $/GJ above 1 $/GJ: 2 EJ/y needs 40 EJ exposed
        assert path.values[0] == pytest.approx(5.0, abs=1e-4)
        assert path.values[2] - path.values[0] == pytest.approx(0.1)

    def test_fixed_shares_split(self):
        from scenario.builder import validate
        cfg = _reverse_config()
        cfg["resources"]["gas"] = copy.deepcopy(cfg["resources"]["oil"])
        for r in ("oil", "gas"):
            del cfg["resources"][r]["demand"]
        cfg["fixed_shares"] = {"total": {"linear": {"start": 100.0}, "unit": "Mtoe/y"},
                               "shares": {"oil": 0.75, "gas": 0.25}}
        scenario = validate(cfg)
        assert scenario.resources["oil"].path.values[0] == pytest.approx(3.1401)
        assert scenario.resources["gas"].path.values[0] == pytest.approx(1.0467)

    def test_coupled_config(self):
        from scenario.builder import validate
        cfg = _forward_config(mode="coupled")
        del cfg["resources"]["oil"]["price"]
        cfg["demand"] = {"linear": {"start": 3.0}}
        cfg["technologies"] = [
            {"name": "oil_plant", "resource": "oil", "share": 0.5},
            {"name": "backstop", "offset": 4.0, "share": 0.5},
        ]
        cfg["substitution"] = {"turnover": 0.5}
        scenario = validate(cfg)
        assert [t.name for t in scenario.technologies] == ["oil_plant", "backstop"]
        assert scenario.substitution.turnover == 0.5
        assert scenario.substitution.width == 1.0
        assert len(scenario.total_demand) == 40

    def test_coupled_rejects_unknown_resource(self):
        from scenario.builder import validate
        from scripts.errors import ValidationError
        cfg = _forward_config(mode="coupled")
        del cfg["resources"]["oil"]["price"]
        cfg["demand"] = {"linear": {"start": 3.0}}
        cfg["technologies"] = [{"name": "gas_plant", "resource": "gas", "share": 1.0}]
        with pytest.raises(ValidationError, match=r"technologies\[0\].resource"):
            validate(cfg)

    def test_calibration_from_csv(self, tmp_path):
        from scenario.builder import validate
        rows = "".join(f"{y},world,{1320 + (y % 2) * 240},30\n" for y in range(1980, 2000))
        (tmp_path / "rp.csv").write_text("year,region,reserves,production\n" + rows)
        cfg = _forward_config()
        oil = cfg["resources"]["oil"]
        del oil["nu0_inverse"]
        oil["calibration"] = {"csv": "rp.csv", "window": [1990, 1999]}
        assert 1.0 / validate(cfg, base_dir=tmp_path).resources["oil"].nu0 == pytest.approx(48.0)

    def test_sensitivity_block(self):
        from scenario.builder import validate
        cfg = _forward_config(sensitivity={"nu0_inverse": [34, 44, 54]})
        spec = validate(cfg).sensitivity
        assert spec.resource == "oil"
        assert spec.nu0_values == pytest.approx((1 / 34, 1 / 44, 1 / 54))

    def test_build_from_file(self, tmp_path):
        import yaml
        from depletion.distribution import from_bins
        from depletion.io import write_endowment_csv
        from scenario.builder import build_scenario
        write_endowment_csv(tmp_path / "data" / "oil.csv", from_bins(np.linspace(1, 10, 10), np.full(9, 5.0)))
        cfg = _forward_config()
        cfg["resources"]["oil"]["endowment"] = {"csv": "data/oil.csv"}
        (tmp_path / "scenario.yaml").write_text(yaml.safe_dump(cfg))
        scenario = build_scenario(tmp_path / "scenario.yaml", overrides={"seed": 9})
        assert scenario.seed == 9
        assert scenario.resources["oil"].distribution.grid.n_bins == 9

    def test_rejects_non_mapping_file(self, tmp_path):
        from scenario.builder import load_config
        from scripts.errors import ValidationError
        path = tmp_path / "bad.yaml"
        path.write_text("- just\n- a list\n")
        with pytest.raises(ValidationError, match="mapping"):
            load_config(path)
