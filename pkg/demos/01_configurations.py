"""Two ways to close the same orange-slice loop.

Both configurations apply the three segments (chi, pi, pi - chi) and produce
the same gate when the qubit frequency is exact.  They differ in the phase
of the middle segment, which decides how a frequency drift accumulates.
"""

import math

import numpy as np

from geomgate import harness as hs
from geomgate.pathdesign import design, rotation_gate_params

drifts = np.linspace(-0.1, 0.1, 5)

for axis in ("x", "y"):
    print(f"R{axis}(pi/2)")
    for config in ("A", "B"):
        spec = rotation_gate_params(axis, math.pi / 2, config)
        phases = ", ".join(f"{s.phase:+.3f}" for s in design(spec).segments)
        res = hs.sweep_1d(hs.ideal_config(spec), drifts)
        print(f"  config {config}: segment phases [{phases}]")
        for d, inf in zip(drifts, res.infidelity):
            print(f"    delta0 = {d:+.2f}   infidelity = {inf:.3e}")
