"""
Price arbitrage with one battery
================================

Two hours of prices, 10 then 50 $/MWh, a generator pinned at 1 MW and a
lossless 1 MW battery.  Cheap energy is stored in hour one and sold with
hour two's output, so the plant earns 10*0 + 50*2 = 100 $.
"""

import numpy as np

from hesccd.analysis import brute_force_oracle
from hesccd.instances import arbitrage_config
from hesccd.pipeline import config_mesh, run_config
from hesccd.solver import verify_optimality

cfg = arbitrage_config()
res = run_config(cfg, objective_scale=1.0)
print(f"status {res.report.status}, NPV {res.report.objective:.6f} $, capacity {res.sigma['E']:.6f} MWh")

# The decoded schedule: charge in hour 0, discharge and sell in hour 1
traj = res.trajectory
for k in range(traj.mesh.n_intervals):
    print(f"hour {k}: charge {traj.controls['u_in_E'][k]:.2f} MW, discharge {traj.controls['u_out_E'][k]:.2f} MW,"
          f" grid {traj.grid_power[k]:.2f} MW")
print("stored energy at nodes", np.round(traj.states["x_E"], 6))

# The optimum is certified by its own dual solution ...
print("certificate:", verify_optimality(res.lp, res.report))

# ... and independently by exhaustive search over a 0.01 MW control grid
oracle = brute_force_oracle(cfg, config_mesh(cfg), resolution=0.01)
print(f"grid search best {oracle.best:.6f} $ after {oracle.evaluated} evaluations")

# Without the battery nothing can be shifted: 10 + 50 = 60 $
print(f"no storage: {run_config(arbitrage_config(storage=False), objective_scale=1.0).report.objective:.6f} $")
