"""Exogenous time series: loading, periodic extension, wind conversion, resampling."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import TurbineSpec

HOURS_PER_YEAR = 8766

# header annotations recognised in the value column of a signal CSV
_HEADER_UNITS = {
    "usd_per_mwh": "$/MWh",
    "usd_per_kg": "$/kg",
    "usd_per_kg_fuel": "$/kg",
    "m_per_s": "m/s",
    "mps": "m/s",
    "mw": "MW",
}


class SignalError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Signal:
    """Piecewise-constant series sampled at integer hours over one period.

    The value at hour ``t`` is the last sample with ``hour <= t`` (hold-last).
    """

    name: str
    unit: str
    hours: np.ndarray
    values: np.ndarray
    period_hours: int

    def __post_init__(self):
        hours = np.asarray(self.hours, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "hours", hours)
        object.__setattr__(self, "values", values)
        if hours.shape != values.shape or hours.ndim != 1 or hours.size == 0:
            raise SignalError(f"signal '{self.name}': hours and values must be equal-length 1-d")
        if np.any(np.diff(hours) <= 0):
            raise SignalError(f"signal '{self.name}': hour indices must be strictly increasing")
        if hours[0] < 0:
            raise SignalError(f"signal '{self.name}': negative hour index")
        if not np.all(np.isfinite(values)):
            raise SignalError(f"signal '{self.name}': non-finite value")
        if self.period_hours <= hours[-1]:
            raise SignalError(f"signal '{self.name}': period_hours shorter than sample span")

    @classmethod
    def hourly(cls, name, unit, values, period_hours=None) -> "Signal":
        values = np.asarray(values, dtype=float)
        return cls(name, unit, np.arange(values.size), values, period_hours or values.size)

    @classmethod
    def constant(cls, name, unit, value, period_hours=1) -> "Signal":
        return cls(name, unit, np.array([0]), np.array([float(value)]), period_hours)

    def value_at(self, t) -> np.ndarray:
        """Hold-last lookup at (possibly fractional) hours within one period."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.hours, np.floor(t + 1e-9), side="right") - 1
        if np.any(idx < 0) or np.any(t >= self.period_hours) or np.any(t < 0):
            raise SignalError(f"signal '{self.name}': coverage gap for requested hours")
        return self.values[idx]

    def dense(self) -> np.ndarray:
        """Hourly values over one full period."""
        return self.value_at(np.arange(self.period_hours))


def load_signal_csv(path, unit: str, name: str = None) -> Signal:
    """Read a two-column ``hour,value`` CSV with a one-line header."""
    path = Path(path)
    name = name or path.stem
    hours, values = [], []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) != 2:
                raise SignalError(f"{path}: line 1: expected a two-column header")
            tag = _HEADER_UNITS.get(header[1].strip().lower())
            if tag is not None and tag != unit:
                raise SignalError(f"{path}: unit tag mismatch: header says {tag}, expected {unit}")
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise SignalError(f"{path}: parse failure at line {lineno}: expected 2 fields")
                try:
                    hour = int(row[0])
                    value = float(row[1])
                except ValueError:
                    raise SignalError(f"{path}: parse failure at line {lineno}") from None
                if hour < 0:
                    raise SignalError(f"{path}: negative hour at line {lineno}")
                if hours and hour <= hours[-1]:
                    raise SignalError(f"{path}: non-monotone hour at line {lineno}")
                if not math.isfinite(value):
                    raise SignalError(f"{path}: non-finite value at line {lineno}")
                hours.append(hour)
                values.append(value)
    except OSError as exc:
        raise SignalError(f"{path}: {exc.strerror}") from exc
    if not hours:
        raise SignalError(f"{path}: no samples")
    return Signal(name, unit, np.array(hours), np.array(values), hours[-1] + 1)


def write_signal_csv(signal: Signal, path, header: str = "value"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"hour,{header}\n")
        for h, v in zip(signal.hours, signal.values):
            fh.write(f"{int(h)},{float(v)!r}\n")


def periodic_extend(signal: Signal, n_periods: int, horizon: float = None) -> Signal:
    """Repeat ``signal`` ``n_periods`` times.

    When ``horizon`` is given, a total span exceeding it raises instead of
    being silently truncated.
    """
    if n_periods < 1:
        raise SignalError("n_periods must be >= 1")
    if n_periods == 1:
        return signal
    span = n_periods * signal.period_hours
    if horizon is not None and span > horizon:
        raise SignalError(
            f"signal '{signal.name}': extended span {span} h exceeds mesh horizon {horizon} h"
        )
    offsets = np.repeat(np.arange(n_periods) * signal.period_hours, signal.hours.size)
    hours = np.tile(signal.hours, n_periods) + offsets
    values = np.tile(signal.values, n_periods)
    return Signal(signal.name, signal.unit, hours, values, span)


def turbine_power(v, turbine: TurbineSpec) -> np.ndarray:
    """Power of one turbine [MW] at wind speed ``v`` [m/s]."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise SignalError("negative wind speed")
    area = math.pi * turbine.rotor_d**2 / 4.0
    p = turbine.c_p * 0.5 * turbine.rho_air * area * v**3 / 1e6
    p = np.clip(p, 0.0, turbine.p_rated)
    # the cut-out discontinuity sits strictly above v_cutout
    return np.where(v > turbine.v_cutout, 0.0, p)


def wind_speed_to_availability(v: Signal, turbine: TurbineSpec, cap: float) -> Signal:
    if v.unit != "m/s":
        raise SignalError(f"wind signal '{v.name}' has unit {v.unit}, expected m/s")
    farm = np.minimum(turbine.count * turbine_power(v.values, turbine), cap)
    return Signal(f"{v.name}_availability", "MW", v.hours, farm, v.period_hours)


def resample_to_mesh(signal: Signal, mesh, at: str = "intervals") -> np.ndarray:
    """Hold-last values at mesh interval left endpoints (or at every node).

    At the final node the last interval value is held.
    """
    times = mesh.t0 + mesh.h * np.arange(mesh.n_nodes - 1)
    if mesh.tf > signal.period_hours + 1e-9:
        raise SignalError(
            f"signal '{signal.name}': coverage gap: span {signal.period_hours} h < mesh end {mesh.tf} h"
        )
    vals = signal.value_at(times)
    if at == "nodes":
        vals = np.append(vals, vals[-1])
    elif at != "intervals":
        raise ValueError("at must be 'intervals' or 'nodes'")
    return vals


def covering(signal: Signal, mesh) -> Signal:
    """Periodically extend ``signal`` just far enough to cover ``mesh``."""
    n = max(1, math.ceil((mesh.tf - 1e-9) / signal.period_hours))
    return periodic_extend(signal, n)


def synthetic_week(seed: int = 7):
    """Deterministic one-week hourly signals, clearly synthetic.

    Returns a dict of electricity price [$/MWh], fuel price [$/kg] and wind
    speed [m/s] signals with a daily rhythm, a mid-week price spike and
    reproducible noise.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(168)
    hod = t % 24
    day = t // 24
    base = 32.0 + 9.0 * np.sin(2 * np.pi * (hod - 9) / 24) + 14.0 * np.exp(-((hod - 17.5) ** 2) / 4.0)
    trend = 5.0 * np.sin(2 * np.pi * day / 7.0)
    price = np.round(base + trend + rng.normal(0.0, 2.5, t.size), 2)
    price[(day == 3) & (hod >= 16) & (hod <= 19)] += 60.0
    fuel = np.where(day < 4, 0.21, 0.26)
    wind = 7.5 + 3.0 * np.sin(2 * np.pi * (hod + 3) / 24) + 2.0 * np.sin(2 * np.pi * t / 61.0)
    wind = np.round(np.clip(wind + rng.normal(0.0, 1.2, t.size), 0.0, None), 3)
    return {
        "electricity_price": Signal.hourly("electricity_price", "$/MWh", price),
        "fuel_price": Signal.hourly("fuel_price", "$/kg", fuel),
        "wind_speed": Signal.hourly("wind_speed", "m/s", wind),
    }
