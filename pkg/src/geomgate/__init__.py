"""Simulation of noise-resilient geometric quantum gates.

Modules
-------
qlinalg     small dense linear algebra helpers
pathdesign  gate specs, orange-slice pulse sequences, phase bookkeeping
physmodel   qubit, transmon and coupled-pair Hamiltonians
evolve      unitary and Lindblad propagation
metrics     trace and state-averaged fidelities
harness     experiment configs, sweeps, scaling fits
reproduce   regeneration of the figure and table data
"""

from .pathdesign import (Family, GateSpec, PulseSequence, ShapeKind, compute_phases, design,
                         not_gate, rotation_gate_params, target_unitary)
from .physmodel import CouplerParams, DriftKind, NoiseModel, TransmonParams
from .evolve import EvolutionConfig, lindblad_evolve, propagate_unitary
from .metrics import FidelityReport, state_averaged_fidelity, trace_fidelity
from .harness import (ExperimentConfig, Mode, fit_scaling, ideal_config, iswap_config,
                      run_point, sweep_1d, sweep_2d, transmon_config)

__version__ = "0.1.0"

__all__ = [
    "Family", "GateSpec", "PulseSequence", "ShapeKind", "compute_phases", "design",
    "not_gate", "rotation_gate_params", "target_unitary",
    "CouplerParams", "DriftKind", "NoiseModel", "TransmonParams",
    "EvolutionConfig", "lindblad_evolve", "propagate_unitary",
    "FidelityReport", "state_averaged_fidelity", "trace_fidelity",
    "ExperimentConfig", "Mode", "fit_scaling", "ideal_config", "iswap_config",
    "run_point", "sweep_1d", "sweep_2d", "transmon_config",
]
