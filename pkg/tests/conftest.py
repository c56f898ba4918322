import numpy as np
import pytest

from hesccd.analysis import constraint_residuals
from hesccd.instances import arbitrage_config
from hesccd.pipeline import run_config


def full_config(n_nodes=25, tau=0.1389):
    """Generator plus all three stores, hourly mesh."""
    from hesccd.instances import random_config

    rng = np.random.default_rng(11)
    cfg = random_config(rng, n_nodes=n_nodes)
    from dataclasses import replace

    from hesccd.transcription import build_mesh

    cfg = replace(cfg, generator=replace(cfg.generator, tau=tau, x0=cfg.generator.nominal_capacity),
                  horizon=build_mesh(0, n_nodes - 1, 1))
    for d in "PET":
        if not cfg.storage(d).enabled:
            extra = dict(e2h=0.04, u_out_max=10.0 / 0.04) if d == "T" else {}
            cfg = cfg.with_storage(d, enabled=True, u_in_max=10.0, u_out_max=10.0, x0=0.0,
                                   enforce_terminal=True, **extra)
        else:
            cfg = cfg.with_storage(d, enforce_terminal=True)
    return cfg


def check_invariants(result, config, tol=1e-9):
    """Assert the invariants every solved instance must satisfy; returns the worst figures."""
    traj = result.trajectory
    res = constraint_residuals(traj, config)
    for d in config.enabled_domains:
        x = traj.states[f"x_{d}"]
        if config.storage(d).enforce_terminal:
            assert abs(x[-1] - x[0]) <= 1e-6
        assert np.all(traj.controls[f"u_R_{d}"] <= traj.controls[f"u_out_{d}"] + 1e-9)
    scale = 1.0 + max(1.0, max((np.max(np.abs(v)) for v in traj.states.values()), default=1.0))
    path = {k: v for k, v in res.items() if not k.startswith("periodic")}
    worst_path = max(path.values(), default=0.0)
    assert worst_path <= 1e-7 * scale, path
    sums = result.accounting.split_sums()
    for name, s in sums.items():
        assert abs(s - 1.0) <= 1e-9, (name, s)
    obj = result.report.objective
    rel = abs(result.npv.npv - obj) / max(1.0, abs(obj))
    assert rel <= 1e-6, (result.npv.npv, obj)
    return {"path": worst_path, "npv_rel": rel}


@pytest.fixture(scope="session")
def arbitrage_result():
    return run_config(arbitrage_config(), objective_scale=1.0)


ACCEPTANCE_LINES = []


class criterion:
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:>2} {verdict}: {self.title}"
        if self.detail:
            line += f" ({self.detail})"
        if exc_type is not None:
            line += f" -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
