"""Ready-made configurations: the arbitrage toy, random small instances and
three reference plants populated with the bundled synthetic signals."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .economics import EconomicParams
from .model import GeneratorSpec, HesConfig, LoadModel, StorageSpec, TurbineSpec
from .signals import Signal, synthetic_week
from .transcription import ScenarioOverlay, build_mesh, hour_window


def arbitrage_config(storage: bool = True) -> HesConfig:
    """Two hours at 10 and 50 $/MWh, a fixed 1 MW generator and a 1 MW / 1 MW store."""
    prices = Signal.hourly("electricity_price", "$/MWh", [10.0, 50.0])
    return HesConfig(
        generator=GeneratorSpec(1.0, x_g_min=1.0, x_g_max=1.0),
        storage_e=StorageSpec(enabled=storage, u_in_max=1.0, u_out_max=1.0, direct_sale_allowed=True),
        signals={"electricity_price": prices},
        horizon=build_mesh(0, 2, 1),
        pure_generator=not storage,
        name="arbitrage",
    )


def random_oracle_config(rng: np.random.Generator, n_nodes: int = 3) -> HesConfig:
    """Random instance small enough for the exhaustive oracle at 0.01 resolution.

    At most three storage controls, control ranges of at most 0.1 and unit
    efficiencies on stores with a terminal condition, so rounding a schedule
    to the grid keeps it feasible.
    """
    n_int = n_nodes - 1
    prices = Signal.hourly("electricity_price", "$/MWh", np.round(rng.uniform(5, 60, n_int), 2))
    fuel = Signal.hourly("fuel_price", "$/kg", np.round(rng.uniform(0.0, 0.05, n_int), 4))
    domain = str(rng.choice(["P", "E"]))
    cap = float(np.round(rng.uniform(0.2, 1.0), 2))
    lo = float(np.round(rng.uniform(0.0, 0.6) * cap, 2))
    gen = GeneratorSpec(cap, u_g_min=0.0, x_g_min=lo, x_g_max=min(cap, lo + 0.1),
                        rho_fuel=float(np.round(rng.uniform(0, 100), 1)))
    rate = float(np.round(rng.uniform(0.03, 0.1), 2))
    store = StorageSpec(enabled=True, u_in_max=rate, u_out_max=rate, x0=float(np.round(rng.uniform(0, 0.1), 2)),
                        direct_sale_allowed=True, enforce_terminal=bool(rng.random() < 0.5))
    econ = EconomicParams(**{f"c_occ_{domain.lower()}": float(np.round(rng.uniform(0, 20), 1)),
                             f"c_vom_{domain.lower()}": float(np.round(rng.uniform(0, 2), 2)),
                             "r": float(np.round(rng.uniform(0, 0.1), 3))})
    signals = {"electricity_price": prices, "fuel_price": fuel}
    if domain == "P":
        signals["primary_price"] = Signal.hourly("primary_price", "$/MWh", np.round(rng.uniform(5, 60, n_int), 2))
    loads = LoadModel(l_p=float(np.round(rng.uniform(0, 0.2), 2)) if domain == "P" else 0.0,
                      l_e=float(np.round(rng.uniform(0, 0.2), 2)))
    cfg = HesConfig(generator=gen, loads=loads, economics=econ, signals=signals,
                    horizon=build_mesh(0, n_int, 1), name="random-oracle")
    return cfg.with_storage(domain, **{f.name: getattr(store, f.name) for f in store.__dataclass_fields__.values()})


def random_config(rng: np.random.Generator, n_nodes: int = None) -> HesConfig:
    """Random well-posed instance with up to three stores and up to 25 nodes."""
    if n_nodes is None:
        n_nodes = int(rng.integers(2, 26))
    n_int = n_nodes - 1
    h = float(rng.choice([0.5, 1.0, 2.0]))
    horizon = n_int * h
    nsig = int(np.ceil(horizon)) + 1
    cap = float(rng.uniform(50, 500))
    tau = float(rng.choice([0.0, rng.uniform(0.05, 3.0)]))
    gen = GeneratorSpec(cap, tau=tau, eta_g=float(rng.uniform(0.35, 1.0)),
                        rho_fuel=float(rng.uniform(0, 200)), alpha_co2=float(rng.uniform(0, 0.003)),
                        beta_backend=float(rng.uniform(0, 0.1)), u_g_min=0.0,
                        x_g_min=float(rng.uniform(0, 0.3) * cap), x_g_max=cap,
                        x0=float(rng.uniform(0.3, 1.0) * cap) if tau > 0 else 0.0)
    doms = [d for d in "PET" if rng.random() < 0.6] or [str(rng.choice(list("PET")))]
    signals = {
        "electricity_price": Signal.hourly("electricity_price", "$/MWh", rng.uniform(-5, 80, nsig)),
        "fuel_price": Signal.hourly("fuel_price", "$/kg", rng.uniform(0.0, 0.3, nsig)),
        "primary_price": Signal.hourly("primary_price", "$/MWh", rng.uniform(0, 60, nsig)),
        "tertiary_price": Signal.hourly("tertiary_price", "$/kg", rng.uniform(0, 8, nsig)),
    }
    loads = LoadModel(l_p=float(rng.uniform(0, 0.3)), l_e=float(rng.uniform(0, 0.3)),
                      l_pt=float(rng.uniform(0, 0.2)) if "T" in doms else 0.0)
    econ = EconomicParams(
        c_occ_g=float(rng.uniform(0, 1e6)), c_occ_p=float(rng.uniform(0, 2000)),
        c_occ_e=float(rng.uniform(0, 2000)), c_occ_t=float(rng.uniform(0, 5)),
        c_fom_g=float(rng.uniform(0, 1e5)), c_fom_p=float(rng.uniform(0, 1)), c_fom_e=float(rng.uniform(0, 1)),
        c_fom_t=float(rng.uniform(0, 0.01)), c_vom_g=float(rng.uniform(0, 3)),
        c_vom_p=float(rng.uniform(0, 1)), c_vom_e=float(rng.uniform(0, 1)), c_vom_t=float(rng.uniform(0, 0.3)),
        c_co2=float(rng.uniform(0, 50)), r=float(rng.uniform(0, 0.1)), t_con=float(rng.uniform(0, 5)),
    )
    cfg = HesConfig(generator=gen, loads=loads, economics=econ, signals=signals,
                    horizon=build_mesh(0, horizon, h), name="random")
    for d in doms:
        rate = float(rng.uniform(0.05, 0.5) * cap)
        changes = dict(enabled=True, eta_in=float(rng.uniform(0.6, 1.0)), eta_out=float(rng.uniform(0.6, 1.0)),
                       u_in_max=rate, u_out_max=rate, x0=float(rng.uniform(0, 2) * rate),
                       enforce_terminal=bool(rng.random() < 0.7), direct_sale_allowed=bool(rng.random() < 0.5))
        if rng.random() < 0.3:
            changes["sigma_max"] = float(rng.uniform(2.0, 6.0) * rate)
        if d == "T":
            e2h = float(rng.uniform(0.03, 0.06))
            changes.update(e2h=e2h, h2e=float(rng.uniform(0.0, 0.9) * e2h), u_out_max=rate / e2h,
                           x0=float(rng.uniform(0, 2) * rate / e2h))
            if "sigma_max" in changes:
                changes["sigma_max"] = changes["sigma_max"] / e2h
        cfg = cfg.with_storage(d, **changes)
    return cfg


# -- three reference plants (fixed plant parameters, synthetic prices) ----------

def _case1_economics(**kw) -> EconomicParams:
    base = dict(c_occ_g=0.0, c_fom_g=12200.0 * 1083, c_vom_g=1.87, c_occ_p=1048947.0, c_fom_p=4.7897,
                c_vom_p=0.75, r=0.075, t_con=3.0)
    base.update(kw)
    return EconomicParams(**base)


def case1_config(hours: int = 168, signals: dict = None, peak_window: tuple = ()) -> HesConfig:
    """Combined-cycle plant with thermal storage, 1083 MW."""
    sig = dict(signals or synthetic_week())
    gen = GeneratorSpec(1083.0, tau=0.1389, eta_g=1.0, rho_fuel=146.952, alpha_co2=0.0029,
                        u_g_min=0.0, x_g_min=0.0, x_g_max=1083.0, x0=1083.0)
    tes = StorageSpec(enabled=True, u_in_max=200.0, u_out_max=200.0, x0=25.0, enforce_terminal=True)
    return HesConfig(generator=gen, storage_p=tes, loads=LoadModel(l_p=0.1, l_e=0.2),
                     economics=_case1_economics(),
                     signals={k: sig[k] for k in ("electricity_price", "fuel_price")},
                     horizon=build_mesh(0, hours, 1),
                     scenario=ScenarioOverlay(peak_window=tuple(peak_window)) if peak_window else None,
                     name="case1")


def case1_small_config(hours: int = 168, signals: dict = None, peak_window: tuple = ()) -> HesConfig:
    """The combined-cycle plant with storage costs scaled to a one-week horizon.

    Overnight cost is annualised-and-scaled so that short synthetic runs
    still face a real capacity trade-off.
    """
    cfg = case1_config(hours, signals, peak_window)
    week_share = hours / 8766.0 / 30.0
    return replace(cfg, economics=_case1_economics(c_occ_p=1048947.0 * week_share), name="case1-week")


def case2_config(hours: int = 168, signals: dict = None, c_occ_e: float = 173500.0) -> HesConfig:
    """Wind farm (71 turbines, 200 MW) with a battery."""
    sig = dict(signals or synthetic_week())
    turbine = TurbineSpec(c_p=0.55, rho_air=1.225, rotor_d=125.0, p_rated=2.8, v_cutout=25.0, count=71)
    gen = GeneratorSpec(200.0, tau=0.0, u_g_min=0.0, x_g_min=0.0, x_g_max=200.0, dispatchable=False,
                        turbine=turbine)
    bess = StorageSpec(enabled=True, u_in_max=50.0, u_out_max=50.0, x0=0.0, direct_sale_allowed=True)
    econ = EconomicParams(c_occ_g=1265000.0 * 200, c_fom_g=26340.0 * 200, c_occ_e=c_occ_e, c_fom_e=0.7178,
                          r=0.075, t_con=5.0)
    return HesConfig(generator=gen, storage_e=bess, loads=LoadModel(l_e=0.1), economics=econ,
                     signals={k: sig[k] for k in ("electricity_price", "wind_speed")},
                     horizon=build_mesh(0, hours, 1), name="case2")


def case3_config(hours: int = 72, signals: dict = None, sale_window=(8, 9), h2_price: float = 7.0) -> HesConfig:
    """Nuclear plant with hydrogen production and storage, 2156 MW."""
    sig = dict(signals or synthetic_week())
    gen = GeneratorSpec(2156.0, tau=1.79 / 3600.0, eta_g=1.0, rho_fuel=0.001, u_g_min=0.0,
                        x_g_min=0.0, x_g_max=2156.0, x0=2156.0)
    h2 = StorageSpec(enabled=True, u_in_max=1065.0, u_out_max=27990.0, x0=50.0, enforce_terminal=True,
                     direct_sale_allowed=True, e2h=0.0377, h2e=1.0 / 29.762)
    econ = EconomicParams(c_occ_g=6041000.0 * 2156, c_fom_g=121640.0 * 2156, c_vom_g=2.37, c_occ_t=600.074,
                          c_vom_t=0.2884, r=0.075, t_con=7.0)
    signals = {"electricity_price": sig["electricity_price"], "fuel_price": sig["fuel_price"],
               "tertiary_price": Signal.constant("tertiary_price", "$/kg", h2_price)}
    return HesConfig(generator=gen, storage_t=h2, loads=LoadModel(l_e=0.1, l_pt=0.1), economics=econ,
                     signals=signals, horizon=build_mesh(0, hours, 1),
                     scenario=ScenarioOverlay(sale_windows={"T": hour_window(*sale_window)}),
                     name="case3")
