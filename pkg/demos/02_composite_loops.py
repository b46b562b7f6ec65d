"""Splitting a NOT gate into several shorter loops.

Each composite NOT repeats an elementary loop N times.  Longer sequences are
slower, yet the drift error shrinks with N.  The quadratic coefficient of the
infidelity is fitted on small drifts for every family.
"""

import numpy as np

from geomgate import harness as hs
from geomgate.pathdesign import not_gate

families = {"dynamical": not_gate("dyn"), "N=1": not_gate("geoB", 1),
            "N=2": not_gate("geoB", 2), "N=3": not_gate("geoB", 3)}
axis = np.linspace(0.005, 0.1, 20)

print(f"{'gate':>10} {'time*Omega':>11} {'1-F at 0.1':>12} {'c':>8} {'slope':>6}")
for name, spec in families.items():
    res = hs.sweep_1d(hs.ideal_config(spec), axis)
    fit = hs.fit_scaling(res)
    print(f"{name:>10} {res.gate_time:11.4f} {res.infidelity[-1]:12.3e} "
          f"{fit.coefficient:8.4f} {fit.slope:6.2f}")

# a slowly varying drift, zero at both gate edges
print("\nsinusoidal drift, delta0 = 0.1")
for name, spec in families.items():
    r = hs.run_point(hs.ideal_config(spec, drift="sin"), 0.1, 0.0)
    print(f"  {name:>10}: infidelity {r.infidelity:.3e}")
