"""``geomgate design|simulate|sweep|reproduce``.

Exit codes: 0 success, 2 invalid configuration, 3 solver convergence failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import evolve as ev
from . import harness as hs
from .pathdesign import (Family, GateSpec, design, dynamical_rotation_params, not_gate,
                         rotation_gate_params, target_unitary)
from .physmodel import NoiseModel
from .reproduce import FIGURES, grid_sizes, reproduce

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class ConfigError(ValueError):
    pass


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--gate", choices=["rx", "ry", "not", "iswap"])
    p.add_argument("--angle", type=float, help="rotation angle in rad (rx, ry); default pi/2")
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("--loops", type=int)
    p.add_argument("--mode", choices=[m.value for m in hs.Mode])
    p.add_argument("--delta0", type=float, help="drift as a fraction of the drive amplitude")
    p.add_argument("--delta", type=float, help="drift in MHz (physical modes; overrides --delta0)")
    p.add_argument("--drift", choices=["static", "sin"])
    p.add_argument("--kappa", type=float,
                   help="decay = dephasing rate; 2pi x kHz in physical modes, kappa/Omega in the ideal mode")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--coarse", action="store_true", help="21-point axes instead of 41")
    p.add_argument("--dt-div", type=int, help="time steps per gate")
    p.add_argument("--check", action="store_true", help="repeat at half the step and compare")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geomgate", description="Noise-resilient geometric gate simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [("design", "print the pulse sequence"),
                       ("simulate", "fidelity at one noise point"),
                       ("sweep", "fidelity over a drift axis or a rate-by-drift grid")]:
        sp = sub.add_parser(name, help=text)
        _shared(sp)
        if name == "sweep":
            sp.add_argument("--grid", choices=["1d", "2d"], default="1d")
    rp = sub.add_parser("reproduce", help="regenerate the data behind a figure or the table")
    rp.add_argument("figure", choices=sorted(FIGURES) + ["all"])
    rp.add_argument("--out", default="results")
    rp.add_argument("--workers", type=int, default=1)
    rp.add_argument("--coarse", action="store_true")
    return p


def _gate_from_args(args, base: Optional[GateSpec]) -> GateSpec:
    if args.gate is None:
        if base is None:
            raise ConfigError("give --gate or a config file with a gate")
        if args.family is None and args.loops is None:
            return base
        gate = base.label or "not"
    else:
        gate = args.gate
    family = args.family or ("geoB" if base is None else base.family.value)
    loops = args.loops or 1
    angle = math.pi / 2 if args.angle is None else args.angle
    if gate == "not":
        return not_gate(family, loops if family != "dyn" else 1)
    if gate == "iswap":
        spec = hs.iswap_gate(family)
        return replace(spec, loops=loops) if family != "dyn" else spec
    if gate in ("rx", "ry"):
        if family == "dyn":
            return dynamical_rotation_params(gate[1], angle)
        return rotation_gate_params(gate[1], angle, config=family[-1], loops=loops)
    raise ConfigError(f"unknown gate {gate!r}")


def config_from_args(args) -> hs.ExperimentConfig:
    base = None
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = hs.ExperimentConfig.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    gate = _gate_from_args(args, None if base is None else base.gate)
    two_qubit = gate.label == "iswap"
    mode = hs.Mode(args.mode) if args.mode else (base.mode if base else
                                                  hs.Mode.INTERACTION if two_qubit else hs.Mode.IDEAL)
    if two_qubit != mode.two_qubit:
        raise ConfigError(f"gate {gate.label or 'custom'} does not fit mode {mode.value}")
    drift = args.drift or (base.noise.drift.value if base else "static")
    if base is not None and base.mode is mode:
        cfg = replace(base, gate=gate)
    elif mode is hs.Mode.IDEAL:
        cfg = hs.ideal_config(gate)
    elif mode is hs.Mode.TRANSMON:
        cfg = hs.transmon_config(gate)
    else:
        cfg = hs.iswap_config(gate.family.value, mode)
        cfg = replace(cfg, gate=gate)
    physical = mode is not hs.Mode.IDEAL
    noise = cfg.noise
    delta0 = noise.delta0
    if args.delta is not None:
        if not physical:
            raise ConfigError("--delta (MHz) applies to physical modes; use --delta0")
        delta0 = hs.mhz(args.delta)
    elif args.delta0 is not None:
        delta0 = args.delta0 * (cfg.omega if physical else 1.0)
    km, kz = noise.kappa_minus, noise.kappa_z
    if args.kappa is not None:
        km = kz = hs.khz(args.kappa) if physical else args.kappa
    cfg = replace(cfg, noise=NoiseModel(drift=drift, delta0=delta0, kappa_minus=km, kappa_z=kz))
    if args.dt_div is not None:
        cfg = replace(cfg, dt_div=args.dt_div)
    if args.check:
        cfg = replace(cfg, check=True)
    if args.out:
        cfg = replace(cfg, output=args.out)
    return cfg


def _default_axes(cfg: hs.ExperimentConfig, coarse: bool):
    n1, n2 = grid_sizes(coarse)
    if cfg.mode is hs.Mode.IDEAL:
        return np.linspace(-0.1, 0.1, n1), np.linspace(0, 8e-4, n2), np.linspace(-0.1, 0.1, n2)
    return (hs.mhz(np.linspace(-2, 2, n1)), hs.khz(np.linspace(0, 8, n2)),
            hs.mhz(np.linspace(-2, 2, n2)))


def _emit(obj, out: Optional[str], name: str) -> None:
    text = hs.to_json(obj)
    sys.stdout.write(text)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_design(cfg):
    seq = hs.build_sequence(cfg)
    u = target_unitary(cfg.gate)
    segs = [{"duration": s.duration, "amplitude": s.amplitude, "phase": s.phase,
             "shape": s.shape.value} for s in seq.segments]
    _emit({"gate": cfg.gate.label, "family": cfg.gate.family.value, "loops": cfg.gate.loops,
           "total_duration": seq.total_duration, "segments": segs,
           "target_real": u.real, "target_imag": u.imag}, cfg.output, "design.json")


def _cmd_simulate(cfg):
    r = hs.run_point(cfg)
    _emit({"fidelity": r.value, "infidelity": r.infidelity, "kind": r.kind.value,
           "label": r.label, **r.metadata}, cfg.output, "simulate.json")


def _cmd_sweep(cfg, args):
    d1, kap, d2 = _default_axes(cfg, args.coarse)
    if args.grid == "1d":
        axis = cfg.delta_axis or d1
        r = hs.sweep_1d(cfg, axis, workers=args.workers)
    else:
        r = hs.sweep_2d(cfg, cfg.kappa_axis or kap, cfg.delta_axis or d2, workers=args.workers)
    out = cfg.output or "."
    os.makedirs(out, exist_ok=True)
    name = f"sweep_{args.grid}_{cfg.gate.label or 'gate'}_{cfg.gate.family.value}"
    hs.write_csv(r, os.path.join(out, name + ".csv"))
    meta = {k: v for k, v in r.metadata.items() if k != "contour"}
    _emit({"csv": name + ".csv", "gate_time": r.gate_time, **meta,
           "max_fidelity": float(np.nanmax(r.fidelity))}, out, name + ".json")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reproduce":
            ids = sorted(FIGURES) if args.figure == "all" else [args.figure]
            for fid in ids:
                summary = reproduce(fid, args.out, coarse=args.coarse, workers=args.workers)
                sys.stdout.write(hs.to_json(summary))
            return EXIT_OK
        cfg = config_from_args(args)
        if args.command == "design":
            _cmd_design(cfg)
        elif args.command == "simulate":
            _cmd_simulate(cfg)
        else:
            _cmd_sweep(cfg, args)
    except (ev.ConvergenceError, ev.InstabilityError) as exc:
        print(f"geomgate: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError, TypeError) as exc:
        print(f"geomgate: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
