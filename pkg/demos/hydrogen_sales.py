"""
Hydrogen sold only in a morning window
======================================

A 2156 MW nuclear plant feeds an electrolyzer and a hydrogen tank.  Stored
hydrogen may be sold directly only between 8 and 9 AM; outside that hour
it can only be turned back into electricity.
"""

import numpy as np

from hesccd.instances import case3_config
from hesccd.pipeline import run_config

res = run_config(case3_config(hours=72, sale_window=(8, 9)))
traj = res.trajectory
hours = np.mod(traj.mesh.times[:-1], 24)
sales = traj.controls["u_R_T"]
print(f"NPV {res.report.objective:.4g} $, tank {res.sigma['T']:.1f} kg")
print("direct sales by hour of day (kg/h):")
for h in np.unique(hours[sales > 0]):
    print(f"  {int(h):02d}:00  {sales[hours == h].round(1).tolist()}")
print("largest sale outside the window:", float(np.max(sales[hours != 8])))
