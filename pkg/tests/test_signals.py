import numpy as np
import pytest

from hesccd.model import TurbineSpec
from hesccd.signals import (HOURS_PER_YEAR, Signal, SignalError, covering, load_signal_csv, periodic_extend,
                            resample_to_mesh, synthetic_week, turbine_power, wind_speed_to_availability,
                            write_signal_csv)
from hesccd.transcription import build_mesh

TURBINE = TurbineSpec(c_p=0.55, rho_air=1.225, rotor_d=125.0, p_rated=2.8, v_cutout=25.0)


def test_minimal_price_file(tmp_path):
    p = tmp_path / "price.csv"
    p.write_text("hour,usd_per_mwh\n0,30\n1,50\n")
    s = load_signal_csv(p, "$/MWh")
    assert s.values.tolist() == [30.0, 50.0]
    assert s.unit == "$/MWh"
    assert s.period_hours == 2


def test_duplicate_hour_reports_line(tmp_path):
    p = tmp_path / "price.csv"
    p.write_text("hour,price\n1,30\n1,40\n")
    with pytest.raises(SignalError, match="non-monotone hour at line 3"):
        load_signal_csv(p, "$/MWh")


@pytest.mark.parametrize("body,msg", [("0,abc\n", "parse failure at line 2"), ("0,nan\n", "non-finite"),
                                      ("0,1,2\n", "line 2")])
def test_bad_rows(tmp_path, body, msg):
    p = tmp_path / "s.csv"
    p.write_text("hour,value\n" + body)
    with pytest.raises(SignalError, match=msg):
        load_signal_csv(p, "MW")


def test_header_unit_mismatch(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("hour,usd_per_kg\n0,1\n")
    with pytest.raises(SignalError, match="unit tag mismatch"):
        load_signal_csv(p, "$/MWh")


def test_missing_file(tmp_path):
    with pytest.raises(SignalError, match="No such file"):
        load_signal_csv(tmp_path / "absent.csv", "MW")


def test_year_file_period(tmp_path):
    s = Signal.hourly("p", "$/MWh", np.arange(HOURS_PER_YEAR, dtype=float))
    p = tmp_path / "year.csv"
    write_signal_csv(s, p, "usd_per_mwh")
    back = load_signal_csv(p, "$/MWh")
    assert back.period_hours == 8766
    assert np.array_equal(back.values, s.values)


def test_periodic_extension():
    s = Signal.hourly("p", "$/MWh", np.arange(24, dtype=float))
    two = periodic_extend(s, 2)
    assert two.period_hours == 48
    assert two.value_at(30) == two.value_at(6) == 6.0
    assert periodic_extend(s, 1) is s
    year = Signal.hourly("p", "$/MWh", np.zeros(HOURS_PER_YEAR))
    assert periodic_extend(year, 30).period_hours == 262980


def test_extension_overflow_reported():
    s = Signal.hourly("p", "$/MWh", np.zeros(24))
    with pytest.raises(SignalError, match="exceeds mesh horizon"):
        periodic_extend(s, 3, horizon=48)


def test_turbine_curve():
    assert float(turbine_power(8.0, TURBINE)) == pytest.approx(2.1167, rel=1e-3)
    assert float(turbine_power(12.0, TURBINE)) == 2.8
    assert float(turbine_power(26.0, TURBINE)) == 0.0
    assert float(turbine_power(25.0, TURBINE)) == 2.8
    unclamped = 0.55 * 0.5 * 1.225 * np.pi * 125.0**2 / 4 * 12.0**3 / 1e6
    assert unclamped == pytest.approx(7.14, abs=0.01)
    with pytest.raises(SignalError, match="negative wind speed"):
        turbine_power(-1.0, TURBINE)


def test_farm_availability_capped():
    v = Signal.hourly("wind_speed", "m/s", [0.0, 8.0, 12.0, 30.0])
    farm = wind_speed_to_availability(v, TurbineSpec(count=71), cap=180.0)
    assert farm.values[0] == 0.0
    assert farm.values[1] == pytest.approx(71 * float(turbine_power(8.0, TURBINE)))
    assert farm.values[2] == 180.0
    assert farm.values[3] == 0.0


def test_resample_identity_and_monthly():
    s = Signal.hourly("p", "$/MWh", np.arange(24, dtype=float))
    mesh = build_mesh(0, 24, 1)
    assert np.array_equal(resample_to_mesh(s, mesh), s.values)
    month = Signal("fuel", "$/kg", np.array([0, 730, 1460]), np.array([1.0, 2.0, 3.0]), 2190)
    vals = resample_to_mesh(month, build_mesh(0, 2190, 1))
    assert np.all(vals[:730] == 1.0) and np.all(vals[730:1460] == 2.0) and np.all(vals[1460:] == 3.0)


def test_resample_coverage_gap():
    s = Signal.hourly("p", "$/MWh", np.zeros(10))
    with pytest.raises(SignalError, match="coverage gap"):
        resample_to_mesh(s, build_mesh(0, 24, 1))


def test_covering_extends_just_enough():
    s = Signal.hourly("p", "$/MWh", np.zeros(24))
    assert covering(s, build_mesh(0, 50, 1)).period_hours == 72


def test_synthetic_week_deterministic():
    a, b = synthetic_week(), synthetic_week()
    assert set(a) >= {"electricity_price", "fuel_price", "wind_speed"}
    for k in a:
        assert a[k].period_hours == 168
        assert np.array_equal(a[k].values, b[k].values)
