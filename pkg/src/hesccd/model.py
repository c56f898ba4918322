"""Domain types for a hybrid generator/storage plant and the node algebra.

The node expressions describe how generator power is drawn down along the
plant's energy path: primary charging, primary loads, conversion to
electricity, electrical charging, electrical loads, tertiary charging and,
finally, electricity recovered by combusting the tertiary commodity.  They
are written once, generically, so the same function evaluates numbers,
numpy arrays, or :class:`Affine` expressions used to assemble LP rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Optional, Union

import numpy as np

DOMAINS = ("P", "E", "T")

# fixed unit tags for signal roles
SIGNAL_UNITS = {
    "electricity_price": "$/MWh",
    "primary_price": "$/MWh",
    "tertiary_price": "$/kg",
    "fuel_price": "$/kg",
    "wind_speed": "m/s",
}


class Affine:
    """Sparse affine expression ``sum(coef[j] * x_j) + const``.

    Keys are arbitrary hashables (LP column indices during assembly).
    """

    __slots__ = ("coef", "const")

    def __init__(self, coef: Optional[Mapping[Any, float]] = None, const: float = 0.0):
        self.coef = dict(coef) if coef else {}
        self.const = float(const)

    @classmethod
    def var(cls, key, scale: float = 1.0) -> "Affine":
        return cls({key: scale})

    def _combine(self, other, sign: float) -> "Affine":
        out = Affine(self.coef, self.const)
        if isinstance(other, Affine):
            for k, v in other.coef.items():
                out.coef[k] = out.coef.get(k, 0.0) + sign * v
            out.const += sign * other.const
        else:
            out.const += sign * float(other)
        return out

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return (-self)._combine(other, 1.0)

    def __neg__(self):
        return Affine({k: -v for k, v in self.coef.items()}, -self.const)

    def __mul__(self, scalar):
        if isinstance(scalar, Affine):
            raise TypeError("Affine expressions only scale by constants")
        s = float(scalar)
        return Affine({k: s * v for k, v in self.coef.items()}, s * self.const)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def items(self):
        """Nonzero (key, coefficient) pairs in insertion order."""
        return [(k, v) for k, v in self.coef.items() if v != 0.0]

    def evaluate(self, values: Mapping[Any, float]) -> float:
        return self.const + sum(v * values[k] for k, v in self.coef.items())

    def __repr__(self):
        terms = " + ".join(f"{v:g}*{k}" for k, v in self.items())
        return f"Affine({terms or '0'} + {self.const:g})"


@dataclass(frozen=True)
class TurbineSpec:
    c_p: float = 0.55
    rho_air: float = 1.225
    rotor_d: float = 125.0
    p_rated: float = 2.8
    v_cutout: float = 25.0
    count: int = 1


@dataclass(frozen=True)
class GeneratorSpec:
    """Generator parameters (units: MW, h, kg, ton).

    ``x_g_min``/``x_g_max`` are either constants or the name of a signal in
    :attr:`HesConfig.signals`.  A non-dispatchable generator with a
    ``turbine`` derives its upper bound from the ``wind_speed`` signal.
    """

    nominal_capacity: float
    tau: float = 0.0
    eta_g: float = 1.0
    rho_fuel: float = 0.0
    alpha_co2: float = 0.0
    beta_backend: float = 0.0
    u_g_min: float = 0.0
    u_g_max: Optional[float] = None
    x_g_min: Union[float, str] = 0.0
    x_g_max: Union[float, str, None] = None
    x0: float = 0.0
    dispatchable: bool = True
    turbine: Optional[TurbineSpec] = None

    @property
    def u_max(self) -> float:
        return self.nominal_capacity if self.u_g_max is None else self.u_g_max


@dataclass(frozen=True)
class StorageSpec:
    """One storage unit.  Rates are MW, except ``u_out_max`` of tertiary
    storage (kg/h); amounts are MWh (kg for tertiary)."""

    enabled: bool = False
    eta_in: float = 1.0
    eta_out: float = 1.0
    u_in_max: float = 0.0
    u_out_max: float = 0.0
    x0: float = 0.0
    enforce_terminal: bool = True
    sigma_max: Optional[float] = None
    direct_sale_allowed: bool = False
    e2h: Optional[float] = None
    h2e: float = 0.0


@dataclass(frozen=True)
class LoadModel:
    l_p: float = 0.0
    l_e: float = 0.0
    l_pt: float = 0.0


@dataclass(frozen=True)
class NodeValues:
    n1: Any
    n2: Any
    n3: Any
    n4: Any
    n5: Any
    n6: Any
    n7: Any
    n8: Any
    n9: Any
    l_gp: Any
    l_gpt: Any
    l_ge: Any

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class HesConfig:
    generator: GeneratorSpec
    storage_p: StorageSpec = field(default_factory=StorageSpec)
    storage_e: StorageSpec = field(default_factory=StorageSpec)
    storage_t: StorageSpec = field(default_factory=StorageSpec)
    loads: LoadModel = field(default_factory=LoadModel)
    economics: Any = None
    horizon: Any = None
    scenario: Any = None
    signals: Mapping[str, Any] = field(default_factory=dict)
    pure_generator: bool = False
    name: str = ""

    def storage(self, domain: str) -> StorageSpec:
        return {"P": self.storage_p, "E": self.storage_e, "T": self.storage_t}[domain]

    @property
    def enabled_domains(self) -> tuple:
        return tuple(d for d in DOMAINS if self.storage(d).enabled)

    def with_storage(self, domain: str, **changes) -> "HesConfig":
        key = {"P": "storage_p", "E": "storage_e", "T": "storage_t"}[domain]
        return replace(self, **{key: replace(self.storage(domain), **changes)})


def control_keys(domain: str) -> tuple:
    return (f"u_in_{domain}", f"u_out_{domain}", f"u_R_{domain}")


def eval_nodes(x_g, u: Mapping[str, Any], config: HesConfig) -> NodeValues:
    """Evaluate the node signals for generator power ``x_g`` and controls ``u``.

    ``u`` maps control names (``u_in_P``, ``u_out_E``, ``u_R_T``, ...) to
    values; disabled domains and absent keys contribute zero.  Works on
    floats, numpy arrays and :class:`Affine` expressions alike.
    """

    def ctl(name, domain):
        if not config.storage(domain).enabled:
            return 0.0
        return u.get(name, 0.0)

    sp, se, st = config.storage_p, config.storage_e, config.storage_t
    loads = config.loads
    eta_g = config.generator.eta_g

    l_gp = loads.l_p * x_g - sp.eta_out * (ctl("u_out_P", "P") - ctl("u_R_P", "P"))
    l_gpt = loads.l_pt * ctl("u_in_T", "T")
    l_ge = loads.l_e * x_g - se.eta_out * (ctl("u_out_E", "E") - ctl("u_R_E", "E"))

    n1 = x_g
    n2 = n1 - ctl("u_in_P", "P")
    n3 = n2 - l_gp
    n4 = n3 - l_gpt
    n5 = eta_g * n4
    n6 = n5 - ctl("u_in_E", "E")
    n7 = n6 - l_ge
    n8 = n7 - ctl("u_in_T", "T")
    n9 = n8 + st.h2e * st.eta_out * (ctl("u_out_T", "T") - ctl("u_R_T", "T"))
    return NodeValues(n1, n2, n3, n4, n5, n6, n7, n8, n9, l_gp, l_gpt, l_ge)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str):
        self.violations.append(f"{path}: {message}")

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(self.violations)


def _signal_or_const(config, value, path, report, unit="MW"):
    """Return the value array/constant for a bound, recording bad references."""
    if isinstance(value, str):
        sig = config.signals.get(value)
        if sig is None:
            report.add(path, f"missing signal reference '{value}'")
            return None
        if sig.unit != unit:
            report.add(path, f"unit mismatch: signal '{value}' has {sig.unit}, expected {unit}")
            return None
        return np.asarray(sig.values, dtype=float)
    return value


def validate_config(config: HesConfig) -> ValidationReport:
    """Check every invariant of the configuration; never raises."""
    rep = ValidationReport()
    g = config.generator
    cap = g.nominal_capacity

    if not (cap >= 0 and math.isfinite(cap)):
        rep.add("generator.nominal_capacity", "must be finite and >= 0")
    if g.tau < 0:
        rep.add("generator.tau", "must be >= 0")
    if not (0 < g.eta_g <= 1):
        rep.add("generator.eta_g", "must lie in (0, 1]")
    for name in ("rho_fuel", "alpha_co2", "beta_backend"):
        if getattr(g, name) < 0:
            rep.add(f"generator.{name}", "must be >= 0")
    if g.u_g_min > g.u_max:
        rep.add("generator.u_g_min", "bound inversion on u_G (u_g_min > u_g_max)")
    elif g.u_g_min < 0:
        rep.add("generator.u_g_min", "must be >= 0")
    elif g.u_max > cap:
        rep.add("generator.u_g_max", "exceeds nominal capacity")

    if g.turbine is not None:
        t = g.turbine
        if not (0 < t.c_p < 1):
            rep.add("generator.turbine.c_p", "must lie in (0, 1)")
        for name in ("rho_air", "rotor_d", "p_rated"):
            if getattr(t, name) <= 0:
                rep.add(f"generator.turbine.{name}", "must be > 0")
        if t.count < 1:
            rep.add("generator.turbine.count", "must be >= 1")
        if "wind_speed" not in config.signals:
            rep.add("signals.wind_speed", "missing signal reference 'wind_speed' required by turbine")
        elif config.signals["wind_speed"].unit != "m/s":
            rep.add("signals.wind_speed", "unit mismatch: expected m/s")

    lo = _signal_or_const(config, g.x_g_min, "generator.x_g_min", rep)
    hi = cap if g.x_g_max is None else _signal_or_const(config, g.x_g_max, "generator.x_g_max", rep)
    if lo is not None and hi is not None:
        lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if np.any(lo_a < 0):
            rep.add("generator.x_g_min", "must be >= 0")
        if lo_a.shape == hi_a.shape or lo_a.ndim == 0 or hi_a.ndim == 0:
            if np.any(lo_a > hi_a):
                rep.add("generator.x_g_min", "bound inversion on x_G (x_g_min > x_g_max)")
        if np.any(hi_a > cap + 1e-12):
            rep.add("generator.x_g_max", "exceeds nominal capacity")

    for d in DOMAINS:
        s = config.storage(d)
        path = f"storage_{d.lower()}"
        if not s.enabled:
            continue
        if not (0 < s.eta_in <= 1):
            rep.add(f"{path}.eta_in", "must lie in (0, 1]")
        if not (0 < s.eta_out <= 1):
            rep.add(f"{path}.eta_out", "must lie in (0, 1]")
        for name in ("u_in_max", "u_out_max", "x0"):
            if getattr(s, name) < 0:
                rep.add(f"{path}.{name}", "must be >= 0")
        if s.sigma_max is not None and s.sigma_max < 0:
            rep.add(f"{path}.sigma_max", "must be >= 0")
        if s.sigma_max is not None and s.x0 > s.sigma_max:
            rep.add(f"{path}.x0", "bound inversion on x_S (x0 > sigma_max)")
        if d == "T":
            if s.e2h is None:
                rep.add(f"{path}.e2h", "tertiary requires e2h")
            elif s.e2h <= 0:
                rep.add(f"{path}.e2h", "must be > 0")
            if s.h2e < 0:
                rep.add(f"{path}.h2e", "must be >= 0")

    for name in ("l_p", "l_e", "l_pt"):
        v = getattr(config.loads, name)
        if not (0 <= v < 1):
            rep.add(f"loads.{name}", "must lie in [0, 1)")

    if not config.enabled_domains and not config.pure_generator:
        rep.add("storage", "no storage enabled and run not flagged pure_generator")

    if "electricity_price" not in config.signals:
        rep.add("signals.electricity_price", "missing signal reference 'electricity_price'")
    for role, unit in SIGNAL_UNITS.items():
        sig = config.signals.get(role)
        if sig is not None and sig.unit != unit:
            rep.add(f"signals.{role}", f"unit mismatch: {sig.unit}, expected {unit}")
    if g.rho_fuel > 0 and "fuel_price" not in config.signals:
        rep.add("signals.fuel_price", "missing signal reference 'fuel_price' (rho_fuel > 0)")
    if config.storage_p.enabled and config.storage_p.direct_sale_allowed and "primary_price" not in config.signals:
        rep.add("signals.primary_price", "missing signal reference 'primary_price'")
    if config.storage_t.enabled and config.storage_t.direct_sale_allowed and "tertiary_price" not in config.signals:
        rep.add("signals.tertiary_price", "missing signal reference 'tertiary_price'")

    if config.economics is not None:
        from .economics import validate_economics

        validate_economics(config.economics, rep)
    if config.scenario is not None:
        from .transcription import validate_overlay

        validate_overlay(config.scenario, rep, config)
    return rep
