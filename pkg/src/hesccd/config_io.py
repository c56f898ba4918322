"""JSON configuration files.

Signals are given per role as ``{"path": "prices.csv"}``, ``{"values": [...]}``
or ``{"constant": 7.0}`` (optionally with ``"unit"``); relative paths
resolve against ``signals_dir`` or the config file's directory.  Named
scenario overlays live under ``"overlays"`` and are selected by name.
"""
from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

from .economics import EconomicParams
from .model import SIGNAL_UNITS, GeneratorSpec, HesConfig, LoadModel, StorageSpec, TurbineSpec
from .signals import Signal, load_signal_csv
from .transcription import Override, ScenarioOverlay, build_mesh

TOP_LEVEL = {"name", "generator", "storage_p", "storage_e", "storage_t", "loads", "economics", "horizon",
             "signals", "scenario", "overlays", "pure_generator", "sweep"}


class ConfigFileError(ValueError):
    pass


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: expected an object")
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigFileError(f"{path}: unknown field(s) {', '.join(sorted(extra))}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigFileError(f"{path}: {exc}") from None


def parse_overlay(data, path="scenario") -> ScenarioOverlay:
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: expected an object")
    extra = set(data) - {"peak_window", "sale_windows", "overrides", "peak_mode"}
    if extra:
        raise ConfigFileError(f"{path}: unknown field(s) {', '.join(sorted(extra))}")
    overrides = tuple(_build(Override, o, f"{path}.overrides[{i}]") for i, o in enumerate(data.get("overrides", [])))
    return ScenarioOverlay(
        peak_window=tuple(data.get("peak_window", ())),
        sale_windows={d: tuple(h) for d, h in data.get("sale_windows", {}).items()},
        overrides=overrides,
        peak_mode=data.get("peak_mode", "auto"),
    )


def _signal(role, spec, base_dir: Path, used: list) -> Signal:
    unit = spec.get("unit", SIGNAL_UNITS.get(role, "MW"))
    if "path" in spec:
        p = Path(spec["path"])
        if not p.is_absolute():
            p = base_dir / p
        used.append(p)
        return load_signal_csv(p, unit, name=role)
    if "values" in spec:
        return Signal.hourly(role, unit, spec["values"])
    if "constant" in spec:
        return Signal.constant(role, unit, spec["constant"])
    raise ConfigFileError(f"signals.{role}: give one of path, values or constant")


def load_config(path, signals_dir=None, overlay: str = None):
    """Read a JSON config; returns ``(config, raw_dict, signal_files)``."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: invalid JSON: {exc}") from None
    extra = set(raw) - TOP_LEVEL
    if extra:
        raise ConfigFileError(f"{path}: unknown field(s) {', '.join(sorted(extra))}")
    base_dir = Path(signals_dir) if signals_dir else path.parent
    gen = dict(raw.get("generator", {}))
    if "turbine" in gen and gen["turbine"] is not None:
        gen["turbine"] = _build(TurbineSpec, gen["turbine"], "generator.turbine")
    kw = {"generator": _build(GeneratorSpec, gen, "generator")}
    for key in ("storage_p", "storage_e", "storage_t"):
        if key in raw:
            kw[key] = _build(StorageSpec, raw[key], key)
    if "loads" in raw:
        kw["loads"] = _build(LoadModel, raw["loads"], "loads")
    if "economics" in raw:
        kw["economics"] = _build(EconomicParams, raw["economics"], "economics")
    if "horizon" in raw:
        hz = raw["horizon"]
        kw["horizon"] = build_mesh(hz.get("t0", 0), hz["tf"], hz.get("h", 1))
    used = []
    kw["signals"] = {role: _signal(role, spec, base_dir, used) for role, spec in raw.get("signals", {}).items()}
    scenario = parse_overlay(raw.get("scenario"))
    if overlay:
        overlays = raw.get("overlays", {})
        if overlay not in overlays:
            raise ConfigFileError(f"unknown overlay '{overlay}' (available: {', '.join(sorted(overlays)) or 'none'})")
        scenario = parse_overlay(overlays[overlay], f"overlays.{overlay}")
    kw["scenario"] = scenario
    kw["pure_generator"] = bool(raw.get("pure_generator", False))
    kw["name"] = raw.get("name", path.stem)
    return HesConfig(**kw), raw, used
