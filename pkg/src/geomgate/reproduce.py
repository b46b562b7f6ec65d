"""Figure and table regeneration from the built-in parameter presets.

Every figure id writes one CSV per curve or grid plus ``<id>_summary.json``
with the quantities worth checking by eye (point fidelities, fitted
coefficients, threshold regions).
"""

from __future__ import annotations

import math
import os
from dataclasses import replace
from typing import Callable

import numpy as np

from . import harness as hs
from .physmodel import NoiseModel
from .pathdesign import not_gate, rotation_gate_params

__all__ = ["FIGURES", "reproduce", "grid_sizes"]


def grid_sizes(coarse: bool) -> tuple[int, int]:
    """Points per axis for 1-D and 2-D sweeps."""
    return (21, 21) if coarse else (41, 41)


def _delta_ratio_axis(n):
    return np.linspace(-0.1, 0.1, n)


def _not_family(name: str):
    if name == "dyn":
        return not_gate("dyn")
    return not_gate("geoB", int(name[1:]))


_NOT_FAMILIES = ("dyn", "N1", "N2", "N3")


def _save(out, name, result):
    path = os.path.join(out, f"{name}.csv")
    hs.write_csv(result, path)
    return os.path.basename(path)


def _at(result, x):
    i = int(np.argmin(np.abs(result.axis1 - x)))
    return float(result.infidelity[i])


def fig1(out, coarse=False, workers=1):
    n1, _ = grid_sizes(coarse)
    axis = _delta_ratio_axis(n1)
    summary = {"files": [], "infidelity": {}, "B_below_A": {}}
    for gate in ("x", "y"):
        per = {}
        for config in ("A", "B"):
            spec = rotation_gate_params(gate, math.pi / 2, config)
            r = hs.sweep_1d(hs.ideal_config(spec), axis, workers=workers)
            name = f"fig1_r{gate}_geo{config}"
            summary["files"].append(_save(out, name, r))
            per[config] = {"-0.1": _at(r, -0.1), "+0.1": _at(r, 0.1)}
        summary["infidelity"][f"r{gate}"] = per
        summary["B_below_A"][f"r{gate}"] = all(per["B"][k] < per["A"][k] for k in ("-0.1", "+0.1"))
    return summary


def _not_sweeps(out, prefix, axis, drift, workers):
    res, files = {}, []
    for fam in _NOT_FAMILIES:
        r = hs.sweep_1d(hs.ideal_config(_not_family(fam), drift=drift), axis, workers=workers)
        files.append(_save(out, f"{prefix}_{fam}", r))
        res[fam] = r
    return res, files


def fig2(out, coarse=False, workers=1):
    n1, _ = grid_sizes(coarse)
    res, files = _not_sweeps(out, "fig2", _delta_ratio_axis(n1), "static", workers)
    axis = res["N1"].axis1
    big = np.abs(axis) >= 0.05 - 1e-12
    inf = {k: r.infidelity for k, r in res.items()}
    ordered = bool(np.all(inf["N3"][big] <= inf["N2"][big]) and np.all(inf["N2"][big] <= inf["N1"][big]))
    return {"files": files, "ordering_N3_N2_N1": ordered,
            "infidelity_at_0.1": {k: _at(r, 0.1) for k, r in res.items()}}


def fig3(out, coarse=False, workers=1):
    n1, n2 = grid_sizes(coarse)
    summary = {"files": [], "region_fraction": {}, "corner_fidelity": {}}
    kappas = np.linspace(0.0, 8e-4, n2)
    deltas = _delta_ratio_axis(n2)
    for fam in _NOT_FAMILIES:
        r = hs.sweep_2d(hs.ideal_config(_not_family(fam)), kappas, deltas, level=0.9990,
                        workers=workers)
        summary["files"].append(_save(out, f"fig3_{fam}", r))
        summary["region_fraction"][fam] = r.metadata["region_fraction"]
        summary["corner_fidelity"][fam] = float(r.fidelity[0, np.argmin(np.abs(deltas))])
    return summary


def fig5(out, coarse=False, workers=1):
    n1, n2 = grid_sizes(coarse)
    summary = {"files": []}
    # (a) composite N=2 NOT on a transmon
    cfg = hs.transmon_config(not_gate("geoB", 2))
    r = hs.sweep_2d(cfg, hs.khz(np.linspace(0, 8, n2)), hs.mhz(np.linspace(-2, 2, n2)),
                    level=0.9990, workers=workers)
    summary["files"].append(_save(out, "fig5a_transmon_N2", r))
    summary["transmon"] = {
        "point_kappa1kHz_delta0.2MHz": hs.run_point(cfg, hs.mhz(0.2), hs.khz(1)).value,
        "region_points": r.metadata["region_points"],
        "region_fraction": r.metadata["region_fraction"],
    }
    # (b) fidelity during the geometric iSWAP, with and without noise and off-resonant terms
    dyn = {}
    for mode in (hs.Mode.EFFECTIVE, hs.Mode.INTERACTION):
        for kap in (0.0, 4.0):
            t, f = hs.fidelity_dynamics(hs.iswap_config("geoB", mode), 0.0, hs.khz(kap))
            res = hs.SweepResult("time", t, f, np.zeros_like(f), t[-1])
            tag = f"fig5b_{'eff' if mode is hs.Mode.EFFECTIVE else 'int'}_kappa{kap:g}kHz"
            summary["files"].append(_save(out, tag, res))
            dyn[tag] = float(f[-1])
    summary["iswap_final"] = dyn
    summary["iswap_hot_infidelity"] = dyn["fig5b_eff_kappa0kHz"] - dyn["fig5b_int_kappa0kHz"]
    # (c) geometric iSWAP under decoherence and drift
    r = hs.sweep_2d(hs.iswap_config("geoB"), hs.khz(np.linspace(0, 8, n2)),
                    hs.mhz(np.linspace(-2, 2, n2)), level=0.9940, workers=workers)
    summary["files"].append(_save(out, "fig5c_iswap", r))
    summary["iswap_region"] = {k: r.metadata[k] for k in
                               ("origin_in_region", "origin_region_points", "region_fraction")}
    return summary


def fig6(out, coarse=False, workers=1):
    n1, _ = grid_sizes(coarse)
    axis = hs.mhz(np.linspace(-2, 2, n1))
    res = {}
    summary = {"files": []}
    for fam in ("geoB", "dyn"):
        cfg = hs.iswap_config(fam)
        cfg = replace(cfg, noise=NoiseModel(drift="static", kappa_minus=hs.khz(4), kappa_z=hs.khz(4)))
        r = hs.sweep_1d(cfg, axis, workers=workers)
        summary["files"].append(_save(out, f"fig6_iswap_{fam}", r))
        res[fam] = r
    nz = np.abs(axis) > 1e-12
    worse = [float(x) for x, g, d in zip(axis[nz], res["geoB"].fidelity[nz], res["dyn"].fidelity[nz])
             if g < d]
    summary["geometric_not_below_dynamical"] = not worse
    summary["points_where_dynamical_wins_rad_per_us"] = worse
    return summary


def fig7(out, coarse=False, workers=1):
    n1, _ = grid_sizes(coarse)
    res, files = _not_sweeps(out, "fig7", _delta_ratio_axis(n1), "sin", workers)
    at = {k: _at(r, 0.1) for k, r in res.items()}
    ok = all(at[n] < at["dyn"] and at[n] < at["N1"] for n in ("N2", "N3"))
    return {"files": files, "infidelity_at_0.1": at, "composite_below_dyn_and_N1": ok}


def table1(out, coarse=False, workers=1):
    axis = np.linspace(0.005, 0.1, 20)
    summary = {"files": [], "coefficient": {}, "slope": {}, "gate_time_over_pi": {}}
    for fam in _NOT_FAMILIES:
        cfg = hs.ideal_config(_not_family(fam))
        r = hs.sweep_1d(cfg, axis, workers=workers)
        fit = hs.fit_scaling(r)
        summary["files"].append(_save(out, f"table1_{fam}", r))
        summary["coefficient"][fam] = fit.coefficient
        summary["slope"][fam] = fit.slope
        summary["gate_time_over_pi"][fam] = r.gate_time / math.pi
    summary["reference"] = {"pi/6": math.pi / 6, "pi/7": math.pi / 7}
    return summary


FIGURES: dict[str, Callable] = {
    "fig1": fig1, "fig2": fig2, "fig3": fig3, "fig5": fig5,
    "fig6": fig6, "fig7": fig7, "table1": table1,
}


def reproduce(figure_id: str, out_dir: str, coarse: bool = False, workers: int = 1) -> dict:
    """Write the CSVs and the JSON summary for ``figure_id``; returns the summary."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {figure_id!r}; choose from {sorted(FIGURES)}")
    os.makedirs(out_dir, exist_ok=True)
    summary = FIGURES[figure_id](out_dir, coarse=coarse, workers=workers)
    summary = {"figure": figure_id, "coarse": coarse, **summary}
    with open(os.path.join(out_dir, f"{figure_id}_summary.json"), "w", encoding="utf-8",
              newline="") as fh:
        fh.write(hs.to_json(summary))
    return summary
