"""Composite NOT on a four-level transmon.

The drive is a DRAG-corrected sin^2 pulse with a 60 MHz peak; leakage to
the second excited level competes with the drift and the decoherence.
"""

import numpy as np

from geomgate import harness as hs
from geomgate.pathdesign import not_gate

cfg = hs.transmon_config(not_gate("geoB", 2))
print(f"gate time {hs.build_sequence(cfg).total_duration * 1e3:.1f} ns")

for kappa_khz, delta_mhz in [(0, 0), (1, 0.2), (4, 1.0), (8, 2.0)]:
    r = hs.run_point(cfg, hs.mhz(delta_mhz), hs.khz(kappa_khz))
    print(f"kappa = {kappa_khz} kHz, delta = {delta_mhz} MHz:  F = {r.value:.5f}  "
          f"leakage = {r.metadata['leakage']:.1e}")

grid = hs.sweep_2d(cfg, hs.khz(np.linspace(0, 8, 5)), hs.mhz(np.linspace(-2, 2, 5)))
print(f"\n{grid.metadata['region_points']} of {grid.fidelity.size} grid points reach 99.90%")
print(np.array2string(grid.fidelity, precision=5))
