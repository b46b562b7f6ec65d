"""Experiment configurations, single-point runs, sweeps and scaling fits.

An :class:`ExperimentConfig` pins down the gate, the physical model and the
noise.  :func:`run_point` simulates one noise point; :func:`sweep_1d` and
:func:`sweep_2d` evaluate grids.  Grids are cut into fixed chunks along the
drift axis, and each chunk propagates all of its points as one batch.  The chunks
do not depend on the worker count, so serial and parallel sweeps return
identical numbers.

Noise units follow the model.  In ``IdealTwoLevel`` mode the drift is the
ratio ``delta0`` (the drift is ``delta0 * omega``) and rates are in units of
``omega``.  In the physical modes drifts and rates are in rad/us.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional, Sequence

import numpy as np
from scipy import ndimage

from . import evolve as ev
from . import metrics as mt
from . import physmodel as pm
from .pathdesign import (Family, GateSpec, PulseSequence, ShapeKind, Trajectory,
                         bloch_angles, design, target_unitary)

__all__ = [
    "Mode",
    "Metric",
    "ExperimentConfig",
    "SweepResult",
    "ScalingFit",
    "TWO_PI",
    "mhz",
    "khz",
    "iswap_gate",
    "ideal_config",
    "transmon_config",
    "iswap_config",
    "build_sequence",
    "run_point",
    "evaluate_grid",
    "sweep_1d",
    "sweep_2d",
    "fit_scaling",
    "dressed_trajectory",
    "fidelity_dynamics",
    "write_csv",
    "to_json",
    "CSV_HEADER",
]

TWO_PI = 2 * math.pi
CSV_HEADER = ("axis1", "axis2", "fidelity", "infidelity", "gate_time", "leakage")
CHUNK = 8


def mhz(x: float) -> float:
    """``2 pi x`` MHz in rad/us."""
    return TWO_PI * x


def khz(x: float) -> float:
    """``2 pi x`` kHz in rad/us."""
    return TWO_PI * x * 1e-3


class Mode(str, enum.Enum):
    IDEAL = "IdealTwoLevel"
    TRANSMON = "TransmonSingleQubit"
    EFFECTIVE = "TwoQubitEffective"
    INTERACTION = "TwoQubitInteractionFrame"
    LAB = "TwoQubitLabFrame"

    @property
    def two_qubit(self) -> bool:
        return self in (Mode.EFFECTIVE, Mode.INTERACTION, Mode.LAB)


class Metric(str, enum.Enum):
    AUTO = "auto"
    TRACE = "trace"
    AVERAGED = "averaged"


_DEFAULT_DT_DIV = {
    Mode.IDEAL: 4000,
    Mode.TRANSMON: 4000,
    Mode.EFFECTIVE: 4000,
    Mode.INTERACTION: 20000,
    Mode.LAB: 160000,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to simulate one gate under one noise model.

    ``omega`` is the drive amplitude of the pulse design: the Rabi rate in
    ``IdealTwoLevel`` mode, the sin² peak in ``TransmonSingleQubit`` mode and
    ``2 g_eff`` in the two-qubit modes.  ``noise.delta0`` and the rates are
    the defaults used by :func:`run_point` when no point is given.
    """

    gate: GateSpec
    mode: Mode = Mode.IDEAL
    noise: pm.NoiseModel = field(default_factory=pm.NoiseModel)
    omega: float = 1.0
    shape: ShapeKind = ShapeKind.SQUARE
    drag: bool = False
    transmon: Optional[pm.TransmonParams] = None
    transmon2: Optional[pm.TransmonParams] = None
    coupler: Optional[pm.CouplerParams] = None
    metric: Metric = Metric.AUTO
    dt_div: Optional[int] = None
    check: bool = False
    tol: float = 1e-6
    delta_axis: tuple[float, ...] = ()
    kappa_axis: tuple[float, ...] = ()
    output: Optional[str] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "shape", ShapeKind(self.shape))
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "delta_axis", tuple(float(x) for x in self.delta_axis))
        object.__setattr__(self, "kappa_axis", tuple(float(x) for x in self.kappa_axis))
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.dt_div is not None and self.dt_div < 500:
            raise ValueError("dt_div must be at least 500 steps per gate")
        if self.mode is Mode.TRANSMON and self.transmon is None:
            raise ValueError("TransmonSingleQubit mode needs transmon parameters")
        if self.mode.two_qubit:
            if self.coupler is None or self.transmon is None or self.transmon2 is None:
                raise ValueError(f"{self.mode.value} needs two transmons and coupler parameters")
        if self.drag and self.mode is not Mode.TRANSMON:
            raise ValueError("DRAG applies to the transmon drive only")
        if self.mode is Mode.TRANSMON and not (self.drag and self.shape is ShapeKind.SIN_SQUARED):
            raise ValueError("the transmon drive uses sin^2 pulses with DRAG")

    @property
    def steps(self) -> int:
        return self.dt_div or _DEFAULT_DT_DIV[self.mode]

    # --- JSON round trip -----------------------------------------------------

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if hasattr(v, "__dataclass_fields__"):
                v = {k: (x.value if isinstance(x, enum.Enum) else x) for k, x in asdict(v).items()}
            elif isinstance(v, enum.Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "gate" not in d:
            raise ValueError("config needs a gate")
        kw = dict(d)
        kw["gate"] = GateSpec(**d["gate"])
        if d.get("noise") is not None:
            kw["noise"] = pm.NoiseModel(**d["noise"])
        for name in ("transmon", "transmon2"):
            if d.get(name) is not None:
                kw[name] = pm.TransmonParams(**d[name])
        if d.get("coupler") is not None:
            kw["coupler"] = pm.CouplerParams(**d["coupler"])
        return cls(**kw)


# --- presets -------------------------------------------------------------------

def iswap_gate(family: str = "geoB") -> GateSpec:
    """iSWAP-type gate on ``{|10>, |01>}``: geometric or dynamical preset."""
    family = Family(family)
    if family is Family.DYNAMICAL:
        # coupling phase pi/2, i.e. drive phase pi in the qubit convention
        return GateSpec(family, theta_d=math.pi / 2, phi_d=math.pi, label="iswap")
    return GateSpec(family, chi=math.pi / 2, xi1=math.pi, gamma=math.pi / 2, label="iswap")


def ideal_config(gate: GateSpec, drift: str = "static", **kw) -> ExperimentConfig:
    return ExperimentConfig(gate=gate, mode=Mode.IDEAL, noise=pm.NoiseModel(drift=drift), **kw)


def transmon_config(gate: GateSpec, drift: str = "static", levels: int = 4, **kw) -> ExperimentConfig:
    """Single transmon: 60 MHz sin² peak, 320 MHz anharmonicity, DRAG on."""
    q = pm.TransmonParams(omega=mhz(5000), alpha=mhz(320), levels=levels)
    return ExperimentConfig(gate=gate, mode=Mode.TRANSMON, noise=pm.NoiseModel(drift=drift),
                            omega=mhz(60), shape=ShapeKind.SIN_SQUARED, drag=True,
                            transmon=q, **kw)


def iswap_config(family: str = "geoB", mode: Mode = Mode.INTERACTION, g_eff: float = mhz(4),
                 levels: int = 3, drift: str = "static", **kw) -> ExperimentConfig:
    """Parametrically coupled pair driven at the difference frequency."""
    q1 = pm.TransmonParams(omega=mhz(5000), alpha=mhz(320), levels=levels)
    q2 = pm.TransmonParams(omega=mhz(4500), alpha=mhz(300), levels=levels)
    c = pm.CouplerParams.resonant(g12=mhz(10), delta1=mhz(500), g_eff=g_eff)
    return ExperimentConfig(gate=iswap_gate(family), mode=Mode(mode),
                            noise=pm.NoiseModel(drift=drift), omega=2 * c.g_eff,
                            transmon=q1, transmon2=q2, coupler=c, **kw)


# --- model assembly ---------------------------------------------------------------

def build_sequence(cfg: ExperimentConfig) -> PulseSequence:
    alpha = cfg.transmon.alpha if cfg.drag else None
    return design(cfg.gate, cfg.omega, cfg.shape, alpha)


@dataclass
class _Problem:
    h: Any
    edges: np.ndarray
    support: tuple[int, int]
    computational: np.ndarray
    target: np.ndarray
    jumps: list
    idx: np.ndarray
    kicks: Optional[list] = None
    frame0: Optional[np.ndarray] = None
    frame1: Optional[np.ndarray] = None
    gate_time: float = 0.0


def _pair_index(q2: pm.TransmonParams, n1: int, n2: int) -> int:
    return n1 * q2.levels + n2


def _problem(cfg: ExperimentConfig, deltas: np.ndarray) -> _Problem:
    seq = build_sequence(cfg)
    edges = seq.breakpoints
    target = target_unitary(cfg.gate)
    drift = cfg.noise.drift if cfg.noise.drift is not pm.DriftKind.NONE else pm.DriftKind.STATIC
    md = cfg.mode
    if md is Mode.IDEAL:
        h = pm.TwoLevelModel(seq, deltas * cfg.omega, drift)
        jumps = [np.array([[0, 1], [0, 0]], complex), np.diag([0, 1]).astype(complex)]
        return _Problem(h, edges, (0, 1), np.array([0, 1]), target, jumps, np.arange(2),
                        gate_time=edges[-1])
    if md is Mode.TRANSMON:
        q = cfg.transmon
        h = pm.TransmonModel(seq, q, deltas, drift)
        jumps = [pm.lowering(q.levels), pm.number(q.levels)]
        return _Problem(h, edges, (0, 1), np.array([0, 1]), target, jumps, np.arange(q.levels),
                        gate_time=edges[-1])

    q1, q2, c = cfg.transmon, cfg.transmon2, cfg.coupler
    cls = {Mode.EFFECTIVE: pm.EffectiveModel, Mode.INTERACTION: pm.InteractionFrameModel,
           Mode.LAB: pm.CoupledLabModel}[md]
    h = cls(q1, q2, c, seq, deltas, drift)
    i1, i2 = np.eye(q1.levels), np.eye(q2.levels)
    jumps = [np.kron(pm.lowering(q1.levels), i2), np.kron(pm.number(q1.levels), i2),
             np.kron(i1, pm.lowering(q2.levels)), np.kron(i1, pm.number(q2.levels))]
    full_support = (_pair_index(q2, 1, 0), _pair_index(q2, 0, 1))
    comp = [_pair_index(q2, a, b) for a in (0, 1) for b in (0, 1)]
    probe = cls(q1, q2, c, seq)(np.linspace(edges[0], edges[-1], 7))
    idx = ev.reachable_subspace([probe], full_support, jumps)
    pos = {int(j): i for i, j in enumerate(idx)}
    prob = _Problem(ev.restrict(h, idx), edges, (pos[full_support[0]], pos[full_support[1]]),
                    np.array([pos[j] for j in comp if j in pos]), target,
                    [j[np.ix_(idx, idx)] for j in jumps], idx, gate_time=edges[-1])
    if md is Mode.LAB:
        sub = lambda m: m[np.ix_(idx, idx)]
        prob.kicks = [sub(k) for k in h.boundary_kicks()]
        prob.frame0 = sub(h.frame(edges[0], 0))
        prob.frame1 = sub(h.frame(edges[-1], len(seq.segments) - 1))
    return prob


def _resolve_metric(cfg: ExperimentConfig, dissipative: bool) -> Metric:
    if cfg.metric is Metric.AUTO:
        return Metric.TRACE if cfg.mode is Mode.IDEAL and not dissipative else Metric.AVERAGED
    if cfg.metric is Metric.TRACE and dissipative:
        raise ValueError("trace fidelity needs a closed system (all rates zero)")
    return cfg.metric


def evaluate_grid(cfg: ExperimentConfig, deltas: Sequence[float], kappas: Sequence[float] = (0.0,),
                  kappa_z: Optional[Sequence[float]] = None, metric: Optional[Metric] = None):
    """Fidelity and leakage on the grid ``kappas x deltas`` as one batch.

    ``kappas`` sets the decay rate and, unless ``kappa_z`` is given, the
    dephasing rate as well.  Returns ``(fidelity, leakage, metric)`` with
    arrays of shape ``(len(kappas), len(deltas))``.
    """
    deltas = np.asarray(deltas, dtype=float).ravel()
    km = np.asarray(kappas, dtype=float).ravel()
    kz = km if kappa_z is None else np.asarray(kappa_z, dtype=float).ravel()
    if km.shape != kz.shape:
        raise ValueError("decay and dephasing axes must have equal length")
    if np.any(km < 0) or np.any(kz < 0):
        raise ValueError("rates must be non-negative")
    scale = cfg.omega if cfg.mode is Mode.IDEAL else 1.0
    dissipative = bool(np.any(km > 0) or np.any(kz > 0))
    metric = _resolve_metric(cfg if metric is None else replace(cfg, metric=metric), dissipative)
    p = _problem(cfg, deltas)
    ecfg = ev.EvolutionConfig(dt_div=cfg.steps, check=cfg.check, tol=cfg.tol)
    shape = (len(km), len(deltas))

    if not dissipative:
        u = ev.propagate_unitary(p.h, p.edges, ecfg, p.kicks)
        if p.frame0 is not None:
            u = np.conj(p.frame1).T @ u @ p.frame0
        if metric is Metric.TRACE:
            fid = mt.trace_fidelity_values(p.target, mt.project(u, p.support))
            comp = p.computational
            leak = 1.0 - np.sum(np.abs(u[..., comp[:, None], list(p.support)]) ** 2, axis=(-2, -1)) / 2
        else:
            fid, leak = mt.state_averaged_values(mt.images_from_unitary(u, p.support), p.target,
                                                 p.support, computational=p.computational)
        return (np.broadcast_to(fid, shape).copy(), np.broadcast_to(leak, shape).copy(), metric)

    d = len(p.idx)
    ops = mt.input_operators(d, p.support)
    if p.frame0 is not None:
        ops = p.frame0 @ ops @ np.conj(p.frame0).T
    rates = [km * scale, kz * scale] * (len(p.jumps) // 2)
    channels = [ev.CollapseChannel(a, r[:, None]) for a, r in zip(p.jumps, rates)]
    images = ev.lindblad_map(p.h, ops, channels, p.edges, ecfg, p.kicks)
    if p.frame1 is not None:
        images = np.conj(p.frame1).T @ images @ p.frame1
    fid, leak = mt.state_averaged_values(images, p.target, p.support, computational=p.computational)
    return np.asarray(fid).reshape(shape), np.asarray(leak).reshape(shape), metric


def run_point(cfg: ExperimentConfig, delta: Optional[float] = None,
              kappa: Optional[float] = None) -> mt.FidelityReport:
    """Fidelity at one noise point (defaults taken from ``cfg.noise``)."""
    delta = cfg.noise.delta0 if delta is None else float(delta)
    km = cfg.noise.kappa_minus if kappa is None else float(kappa)
    kz = cfg.noise.kappa_z if kappa is None else float(kappa)
    fid, leak, metric = evaluate_grid(cfg, [delta], [km], [kz])
    meta = {"mode": cfg.mode.value, "delta": delta, "kappa_minus": km, "kappa_z": kz,
            "drift": cfg.noise.drift.value, "gate_time": build_sequence(cfg).total_duration,
            "leakage": float(leak[0, 0])}
    if cfg.mode.two_qubit and km == 0 and kz == 0:
        meta["trace_fidelity_subspace"] = _computational_trace_fidelity(cfg, delta)
    kind = mt.FidelityKind.TRACE if metric is Metric.TRACE else mt.FidelityKind.STATE_AVERAGED
    return mt.FidelityReport(float(np.clip(fid[0, 0], 0.0, 1.0 + 1e-12)), kind,
                             cfg.label or cfg.gate.label, meta)


def _computational_trace_fidelity(cfg: ExperimentConfig, delta: float) -> float:
    """Trace fidelity of the two-qubit propagator on ``{|00>,|01>,|10>,|11>}``."""
    q1, q2, c = cfg.transmon, cfg.transmon2, cfg.coupler
    seq = build_sequence(cfg)
    cls = {Mode.EFFECTIVE: pm.EffectiveModel, Mode.INTERACTION: pm.InteractionFrameModel,
           Mode.LAB: pm.CoupledLabModel}[cfg.mode]
    drift = cfg.noise.drift if cfg.noise.drift is not pm.DriftKind.NONE else pm.DriftKind.STATIC
    h = cls(q1, q2, c, seq, delta, drift)
    ecfg = ev.EvolutionConfig(dt_div=cfg.steps)
    edges = seq.breakpoints
    if cfg.mode is Mode.LAB:
        u = ev.propagate_unitary(h, edges, ecfg, h.boundary_kicks())
        u = np.conj(h.frame(edges[-1], len(seq.segments) - 1)).T @ u @ h.frame(0.0, 0)
    else:
        u = ev.propagate_unitary(h, edges, ecfg)
    comp = [_pair_index(q2, a, b) for a in (0, 1) for b in (0, 1)]
    # the sign of the block on (|10>, |01>) is physical once it is embedded, so
    # the reference is the noise-free two-level evolution of the same sequence
    t2 = ev.propagate_unitary(pm.TwoLevelModel(seq), edges, ev.EvolutionConfig(dt_div=4000))
    t4 = np.eye(4, dtype=complex)
    # order |00>, |01>, |10>, |11>
    t4[np.ix_([2, 1], [2, 1])] = t2
    return float(mt.trace_fidelity_values(t4, mt.project(u, comp)))


# --- sweeps ----------------------------------------------------------------------

@dataclass
class SweepResult:
    """Fidelity grid over one or two axes.

    For 2-D sweeps ``axis1`` is the rate axis and ``axis2`` the drift axis;
    ``fidelity`` then has shape ``(len(axis1), len(axis2))``.
    """

    axis1_name: str
    axis1: np.ndarray
    fidelity: np.ndarray
    leakage: np.ndarray
    gate_time: float
    axis2_name: Optional[str] = None
    axis2: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        want = (len(self.axis1),) if self.axis2 is None else (len(self.axis1), len(self.axis2))
        if self.fidelity.shape != want or self.leakage.shape != want:
            raise ValueError(f"grid shape {self.fidelity.shape} does not match axes {want}")

    @property
    def infidelity(self) -> np.ndarray:
        return 1.0 - self.fidelity

    def rows(self):
        if self.axis2 is None:
            for i, x in enumerate(self.axis1):
                yield x, None, self.fidelity[i], self.leakage[i]
        else:
            for i, x in enumerate(self.axis1):
                for j, y in enumerate(self.axis2):
                    yield x, y, self.fidelity[i, j], self.leakage[i, j]


def _fmt(x) -> str:
    return "" if x is None else "%.12e" % x


def write_csv(result: SweepResult, path) -> None:
    """CSV with the fixed header; UTF-8, LF line endings, ``%.12e`` numbers."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for x, y, f, leak in result.rows():
        w.writerow([_fmt(x), _fmt(y), _fmt(f), _fmt(1.0 - f), _fmt(result.gate_time), _fmt(leak)])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _chunk_task(args):
    cfg, deltas, kappas = args
    try:
        fid, leak, _ = evaluate_grid(cfg, deltas, kappas)
        return fid, leak, []
    except (ev.ConvergenceError, ev.InstabilityError, FloatingPointError, np.linalg.LinAlgError):
        pass
    # fall back to single points so one failure does not void the chunk
    fid = np.full((len(kappas), len(deltas)), np.nan)
    leak = np.full_like(fid, np.nan)
    errors = []
    for i, k in enumerate(kappas):
        for j, d in enumerate(deltas):
            try:
                f, l, _ = evaluate_grid(cfg, [d], [k])
                fid[i, j], leak[i, j] = f[0, 0], l[0, 0]
            except (ev.ConvergenceError, ev.InstabilityError, FloatingPointError,
                    np.linalg.LinAlgError) as exc:
                errors.append({"delta": float(d), "kappa": float(k), "error": str(exc)})
    return fid, leak, errors


def _grid(cfg: ExperimentConfig, deltas, kappas, workers: int = 1):
    deltas = np.asarray(deltas, dtype=float)
    kappas = np.asarray(kappas, dtype=float)
    # the metric is fixed for the whole grid so every chunk reports the same quantity
    metric = _resolve_metric(cfg, bool(np.any(kappas > 0)))
    cfg = replace(cfg, metric=metric)
    tasks = [(cfg, deltas[s:s + CHUNK], kappas) for s in range(0, len(deltas), CHUNK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_task, tasks))
    else:
        parts = [_chunk_task(t) for t in tasks]
    fid = np.concatenate([p[0] for p in parts], axis=1)
    leak = np.concatenate([p[1] for p in parts], axis=1)
    errors = [e for p in parts for e in p[2]]
    return fid, leak, errors, metric


def _check_axis(values, name):
    values = np.asarray(values, dtype=float).ravel()
    if len(values) < 3:
        raise ValueError(f"the {name} axis needs at least 3 points")
    return values


def sweep_1d(cfg: ExperimentConfig, axis: Optional[Sequence[float]] = None, name: str = "delta",
             workers: int = 1) -> SweepResult:
    """Sweep the drift (``name='delta'``) or the common rate (``name='kappa'``)."""
    if name == "delta":
        values = _check_axis(cfg.delta_axis if axis is None else axis, name)
        k = cfg.noise.kappa_minus
        if cfg.noise.kappa_z != k:
            raise ValueError("sweeps use equal decay and dephasing rates")
        fid, leak, errors, metric = _grid(cfg, values, [k], workers)
        fid, leak = fid[0], leak[0]
    elif name == "kappa":
        values = _check_axis(cfg.kappa_axis if axis is None else axis, name)
        fid, leak, errors, metric = _grid(cfg, [cfg.noise.delta0], values, workers)
        fid, leak = fid[:, 0], leak[:, 0]
    else:
        raise ValueError("axis name must be 'delta' or 'kappa'")
    meta = {"label": cfg.label or cfg.gate.label, "mode": cfg.mode.value, "metric": metric.value,
            "errors": errors}
    return SweepResult(name, values, fid, leak, build_sequence(cfg).total_duration, metadata=meta)


def sweep_2d(cfg: ExperimentConfig, kappas: Optional[Sequence[float]] = None,
             deltas: Optional[Sequence[float]] = None, level: Optional[float] = None,
             workers: int = 1) -> SweepResult:
    """Rate-by-drift grid with the ``level`` contour and the region around the origin.

    ``level`` defaults to 0.9990 for single-qubit modes and 0.9940 for
    two-qubit modes.
    """
    import contourpy

    kappas = _check_axis(cfg.kappa_axis if kappas is None else kappas, "kappa")
    deltas = _check_axis(cfg.delta_axis if deltas is None else deltas, "delta")
    if level is None:
        level = 0.9940 if cfg.mode.two_qubit else 0.9990
    fid, leak, errors, metric = _grid(cfg, deltas, kappas, workers)

    lines = contourpy.contour_generator(x=deltas, y=kappas, z=np.nan_to_num(fid, nan=0.0)).lines(level)
    mask = np.nan_to_num(fid, nan=0.0) >= level
    labels, _ = ndimage.label(mask)
    i0 = int(np.argmin(np.abs(kappas)))
    j0 = int(np.argmin(np.abs(deltas)))
    origin_label = labels[i0, j0]
    region = labels == origin_label if origin_label else np.zeros_like(mask)
    meta = {
        "label": cfg.label or cfg.gate.label,
        "mode": cfg.mode.value,
        "metric": metric.value,
        "level": level,
        "contour": [np.asarray(l).tolist() for l in lines],
        "region_points": int(mask.sum()),
        "origin_region_points": int(region.sum()),
        "origin_in_region": bool(origin_label),
        "region_fraction": float(mask.mean()),
        "errors": errors,
    }
    return SweepResult("kappa", kappas, fid, leak, build_sequence(cfg).total_duration,
                       axis2_name="delta", axis2=deltas, metadata=meta)


# --- scaling --------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    coefficient: float
    slope: float
    points: int


def fit_scaling(result_or_x, infidelity: Optional[Sequence[float]] = None) -> ScalingFit:
    """Least-squares ``c`` in ``1 - F = c delta^2`` and the log-log slope.

    Accepts a 1-D :class:`SweepResult` or explicit ``(delta, infidelity)``
    arrays.  Non-positive infidelities are left out of the slope fit.
    """
    if isinstance(result_or_x, SweepResult):
        if result_or_x.axis2 is not None:
            raise ValueError("fit_scaling needs a 1-D sweep")
        x, y = result_or_x.axis1, result_or_x.infidelity
    else:
        x = np.asarray(result_or_x, dtype=float)
        y = np.asarray(infidelity, dtype=float)
    x = np.abs(x)
    keep = np.isfinite(y) & (x > 0)
    x, y = x[keep], y[keep]
    if len(x) < 8:
        raise ValueError("need at least 8 drift samples for a scaling fit")
    c = float(np.sum(y * x ** 2) / np.sum(x ** 4))
    pos = y > 0
    slope = float(np.polyfit(np.log(x[pos]), np.log(y[pos]), 1)[0]) if pos.sum() >= 2 else math.nan
    return ScalingFit(c, slope, int(pos.sum()))


# --- dressed-state path ---------------------------------------------------------------

def dressed_trajectory(spec: GateSpec, stride: int = 10, steps: int = 4000,
                       pole_tol: float = 1e-6) -> Trajectory:
    """Bloch path of the dressed state ``cos(chi/2)|0> + sin(chi/2) e^{i xi1}|1>``.

    The noise-free sequence is sampled every ``stride`` steps.  Segment
    endpoints that sit on a pole take the longitude of the neighbouring
    samples of their own segment, and each boundary at a pole becomes a
    two-sample longitude jump.
    """
    if spec.family is Family.DYNAMICAL:
        raise ValueError("dressed-state paths are defined for geometric gates")
    seq = design(spec)
    h = pm.TwoLevelModel(seq)
    times, us = ev.unitary_trajectory(h, seq.breakpoints,
                                      ev.EvolutionConfig(dt_div=steps, sample_stride=stride))
    psi0 = np.array([math.cos(spec.chi / 2), math.sin(spec.chi / 2) * np.exp(1j * spec.xi1)])
    chi, xi = bloch_angles(us @ psi0)
    edges = seq.breakpoints
    t_out, c_out, x_out = [], [], []
    for k in range(len(seq.segments)):
        lo, hi = edges[k], edges[k + 1]
        sel = np.flatnonzero((times >= lo - 1e-12) & (times <= hi + 1e-12))
        ts, cs, xs = times[sel], chi[sel].copy(), xi[sel].copy()
        at_pole = np.abs(np.sin(cs)) < pole_tol
        good = np.flatnonzero(~at_pole)
        if len(good) == 0:
            raise ValueError("segment stays on a pole; sample more densely")
        xs[at_pole] = np.interp(ts[at_pole], ts[good], np.unwrap(xs[good]))
        xs = np.unwrap(xs)
        if t_out and not at_pole[0]:
            # smooth junction: drop the repeated endpoint
            ts, cs, xs = ts[1:], cs[1:], xs[1:]
            xs = xs + 2 * math.pi * np.round((x_out[-1][-1] - xs[0]) / (2 * math.pi)) if len(xs) else xs
        t_out.append(ts)
        c_out.append(cs)
        x_out.append(xs)
    return Trajectory(np.concatenate(t_out), np.concatenate(c_out), np.concatenate(x_out))


# --- time-resolved fidelity ------------------------------------------------------

def fidelity_dynamics(cfg: ExperimentConfig, delta: float = 0.0, kappa: float = 0.0,
                      stride: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Averaged fidelity against the ideal evolution at every sampled time.

    On the input pair every mode reduces, without noise and without
    off-resonant terms, to the two-level model of the same pulse sequence;
    that evolution up to ``t`` is the reference at time ``t``, so the curve
    ends at the gate fidelity.
    """
    if cfg.mode is Mode.LAB:
        raise ValueError("fidelity dynamics are computed in a rotating frame")
    p = _problem(cfg, np.array([delta]))
    ecfg = ev.EvolutionConfig(dt_div=cfg.steps, sample_stride=stride)
    ref = pm.TwoLevelModel(build_sequence(cfg))
    rt, ru = ev.unitary_trajectory(ref, p.edges, ecfg)
    scale = cfg.omega if cfg.mode is Mode.IDEAL else 1.0
    channels = [ev.CollapseChannel(a, kappa * scale) for a in p.jumps]
    ops = mt.input_operators(len(p.idx), p.support)
    _, times, stack = ev.lindblad_map(p.h, ops, channels, p.edges, ecfg, record=True)
    if len(rt) != len(times) or not np.allclose(rt, times):
        raise RuntimeError("reference and noisy time grids differ")
    fids = np.array([float(np.ravel(mt.state_averaged_values(
        stack[n], ru[n], p.support, computational=p.computational)[0])[0])
        for n in range(len(times))])
    return times, fids


def to_json(obj) -> str:
    """Deterministic JSON (sorted keys, plain floats)."""
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, enum.Enum):
            return o.value
        raise TypeError(f"cannot serialise {type(o)}")
    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"
