"""
When does a battery stop paying for itself?
===========================================

A 200 MW wind farm on a synthetic week of wind and prices may add a
battery.  Sweeping the battery's overnight cost shows the chosen capacity
falling to zero once storage no longer pays; among equally good plans the
sweep reports the largest capacity.
"""

import numpy as np

from hesccd.analysis import run_sweep
from hesccd.instances import case2_config

costs = [50.0, 100.0, 150.0, 200.0, 300.0]
sweep = run_sweep(case2_config(168), [("economics.c_occ_e", costs)], parallelism=2, sigma_mode="max")
for cost, npv, sig in zip(costs, sweep.npv, sweep.sigma["E"]):
    print(f"overnight cost {cost:6.1f} $/MWh  ->  capacity {sig:8.3f} MWh, NPV {npv:16.2f} $")

# the surface is monotone: cheaper storage never hurts
assert np.all(np.diff(sweep.npv) <= 1e-9 * np.abs(sweep.npv[:-1]))
