"""Pulse sequences for orange-slice geometric gates and their dynamical twins.

A single geometric loop on the Bloch sphere takes the dressed state at polar
angle ``chi`` along the longitude ``xi1`` up to the north pole, jumps to the
longitude ``xi2``, travels over to the south pole and returns along ``xi1``.
On resonance this is produced by three drive segments with pulse areas
``(chi, pi, pi - chi)``.  The loop encloses a solid angle ``2 * (xi2 - xi1)``
and the gate acquires exactly that half-angle as a pure geometric phase.

Two longitudes realise the same operator: configuration A uses
``xi2 - xi1 = gamma`` and configuration B uses ``xi2 - xi1 = gamma - pi``.
They differ only by a global sign but respond very differently to a qubit
frequency drift.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .qlinalg import I2

__all__ = [
    "Family",
    "Config",
    "ShapeKind",
    "GateSpec",
    "PulseSegment",
    "PulseSequence",
    "PhasePair",
    "Trajectory",
    "segment_duration",
    "design_geometric_single_loop",
    "design_composite",
    "design_dynamical",
    "design",
    "target_unitary_geometric",
    "target_unitary_dynamical",
    "target_unitary",
    "rotation_gate_params",
    "dynamical_rotation_params",
    "not_gate",
    "bloch_angles",
    "compute_phases",
]


class Family(str, enum.Enum):
    GEOMETRIC_A = "geoA"
    GEOMETRIC_B = "geoB"
    DYNAMICAL = "dyn"


class Config(str, enum.Enum):
    A = "A"
    B = "B"


class ShapeKind(str, enum.Enum):
    SQUARE = "square"
    SIN_SQUARED = "sin2"


@dataclass(frozen=True)
class GateSpec:
    """Abstract gate request.

    Geometric families use ``chi``, ``xi1``, ``gamma`` and ``loops``;
    the dynamical family uses ``theta_d`` and ``phi_d`` only.
    """

    family: Family
    chi: float = 0.0
    xi1: float = 0.0
    gamma: float = 0.0
    loops: int = 1
    theta_d: float = 0.0
    phi_d: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.loops) != self.loops or self.loops < 1:
            raise ValueError("loops must be a positive integer")
        for name in ("chi", "xi1", "gamma", "theta_d", "phi_d"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.family is Family.DYNAMICAL and self.loops != 1:
            raise ValueError("dynamical gates have a single segment (loops=1)")

    @property
    def config(self) -> Optional[Config]:
        if self.family is Family.GEOMETRIC_A:
            return Config.A
        if self.family is Family.GEOMETRIC_B:
            return Config.B
        return None

    @property
    def per_loop_phase(self) -> float:
        """Geometric phase ``xi2 - xi1`` enclosed by each elementary loop."""
        if self.config is None:
            raise ValueError("dynamical gates have no loop phase")
        return _loop_phase(self.gamma, self.loops, self.config)


@dataclass(frozen=True)
class PulseSegment:
    """One constant-phase, resonant-by-default drive interval.

    ``amplitude`` is the square-pulse Rabi rate or the sin² peak.  ``drag_alpha``
    (the transmon anharmonicity) switches on the derivative correction in the
    multilevel model and is ignored by the two-level model.
    """

    duration: float
    amplitude: float
    phase: float
    shape: ShapeKind = ShapeKind.SQUARE
    detuning: float = 0.0
    drag_alpha: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "shape", ShapeKind(self.shape))
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")
        if not self.amplitude > 0:
            raise ValueError("segment amplitude must be positive")

    def envelope(self, t_local):
        """Real (uncorrected) Rabi rate at local time ``t_local``."""
        t_local = np.asarray(t_local, dtype=float)
        if self.shape is ShapeKind.SQUARE:
            return np.full_like(t_local, self.amplitude)
        return self.amplitude * np.sin(np.pi * t_local / self.duration) ** 2

    def envelope_derivative(self, t_local):
        t_local = np.asarray(t_local, dtype=float)
        if self.shape is ShapeKind.SQUARE:
            return np.zeros_like(t_local)
        w = np.pi / self.duration
        return self.amplitude * w * np.sin(2 * w * t_local)

    @property
    def area(self) -> float:
        if self.shape is ShapeKind.SQUARE:
            return self.amplitude * self.duration
        return 0.5 * self.amplitude * self.duration


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[PulseSegment, ...]
    label: str = ""
    # designed longitude jumps at each segment boundary (len(segments) - 1)
    phase_jumps: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a pulse sequence needs at least one segment")

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def total_area(self) -> float:
        return math.fsum(s.area for s in self.segments)

    @property
    def breakpoints(self) -> np.ndarray:
        """Segment boundaries ``[0, t1, ..., T]``."""
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def locate(self, t: float) -> tuple[int, float]:
        """Index of the segment containing ``t`` and the local time within it."""
        edges = self.breakpoints
        if t < -1e-12 * edges[-1] or t > edges[-1] * (1 + 1e-12):
            raise ValueError(f"t={t} outside the sequence [0, {edges[-1]}]")
        k = int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self.segments) - 1))
        return k, t - edges[k]

    def then(self, other: "PulseSequence") -> "PulseSequence":
        """Concatenate; consecutive loops meet on the same longitude (no jump)."""
        return PulseSequence(self.segments + other.segments, self.label,
                             self.phase_jumps + (0.0,) + other.phase_jumps)

    def with_shape(self, shape: ShapeKind, peak: Optional[float] = None,
                   drag_alpha: Optional[float] = None) -> "PulseSequence":
        """Same pulse areas and phases, rebuilt with another envelope."""
        segs = []
        for s in self.segments:
            amp = s.amplitude if peak is None else peak
            segs.append(replace(s, shape=ShapeKind(shape), amplitude=amp,
                                duration=segment_duration(s.area, amp, shape),
                                drag_alpha=drag_alpha))
        return replace(self, segments=tuple(segs))


@dataclass(frozen=True)
class PhasePair:
    gamma_d: float
    gamma_g: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled dressed-state angles.

    A longitude jump at a pole is two consecutive samples with the same
    timestamp and different ``xi``.
    """

    times: np.ndarray
    chi: np.ndarray
    xi: np.ndarray
    detuning: Optional[np.ndarray] = None


def _loop_phase(gamma: float, loops: int, config: Config) -> float:
    base = gamma / loops
    return base - math.pi if Config(config) is Config.B else base


def segment_duration(area: float, amplitude: float, shape=ShapeKind.SQUARE) -> float:
    """Duration giving pulse area ``area`` for the envelope ``shape``."""
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    if ShapeKind(shape) is ShapeKind.SQUARE:
        return area / amplitude
    return 2.0 * area / amplitude


def _loop(chi, xi1, loop_phase, omega, shape, drag_alpha) -> PulseSequence:
    if not omega > 0:
        raise ValueError("omega must be positive")
    if not 0.0 < chi < math.pi:
        raise ValueError("chi must lie in (0, pi) so all three segments have positive area")
    areas = (chi, math.pi, math.pi - chi)
    phases = (xi1 - math.pi / 2, xi1 + loop_phase + math.pi / 2, xi1 - math.pi / 2)
    segs = tuple(
        PulseSegment(segment_duration(a, omega, shape), omega, p, shape, 0.0, drag_alpha)
        for a, p in zip(areas, phases)
    )
    return PulseSequence(segs, phase_jumps=(loop_phase, -loop_phase))


def design_geometric_single_loop(chi: float, xi1: float, gamma: float, config="B",
                                 omega: float = 1.0, shape=ShapeKind.SQUARE,
                                 drag_alpha: Optional[float] = None) -> PulseSequence:
    """Three-segment orange-slice loop for the geometric gate ``(chi, xi1, gamma)``.

    Segment phases are ``xi1 - pi/2``, ``xi1 + gamma + pi/2`` (A) or
    ``xi1 + gamma - pi/2`` (B), and ``xi1 - pi/2``.
    """
    config = Config(config)
    seq = _loop(chi, xi1, _loop_phase(gamma, 1, config), omega, shape, drag_alpha)
    return replace(seq, label=f"geo{config.value}")


def design_composite(chi: float, xi1: float, gamma: float, loops: int, config="B",
                     omega: float = 1.0, shape=ShapeKind.SQUARE,
                     drag_alpha: Optional[float] = None) -> PulseSequence:
    """``loops`` identical elementary loops, each enclosing ``gamma/loops - pi`` (B).

    The product of the loops reproduces the target up to a global sign.
    """
    if int(loops) != loops or loops < 1:
        raise ValueError("loops must be a positive integer")
    config = Config(config)
    elem = _loop(chi, xi1, _loop_phase(gamma, loops, config), omega, shape, drag_alpha)
    seq = elem
    for _ in range(int(loops) - 1):
        seq = seq.then(elem)
    return replace(seq, label=f"geo{config.value}N{loops}")


def design_dynamical(theta_d: float, phi_d: float, omega: float = 1.0,
                     shape=ShapeKind.SQUARE, drag_alpha: Optional[float] = None) -> PulseSequence:
    """Single resonant pulse of area ``2 * theta_d`` at constant phase ``phi_d``."""
    if not theta_d > 0:
        raise ValueError("theta_d must be positive")
    seg = PulseSegment(segment_duration(2 * theta_d, omega, shape), omega, phi_d,
                       shape, 0.0, drag_alpha)
    return PulseSequence((seg,), label="dyn")


def design(spec: GateSpec, omega: float = 1.0, shape=ShapeKind.SQUARE,
           drag_alpha: Optional[float] = None) -> PulseSequence:
    """Pulse sequence for any :class:`GateSpec`."""
    if spec.family is Family.DYNAMICAL:
        return design_dynamical(spec.theta_d, spec.phi_d, omega, shape, drag_alpha)
    return design_composite(spec.chi, spec.xi1, spec.gamma, spec.loops, spec.config,
                            omega, shape, drag_alpha)


def target_unitary_geometric(chi: float, xi1: float, gamma_g: float) -> np.ndarray:
    n = np.array([[math.cos(chi), math.sin(chi) * np.exp(-1j * xi1)],
                  [math.sin(chi) * np.exp(1j * xi1), -math.cos(chi)]])
    return math.cos(gamma_g) * I2 + 1j * math.sin(gamma_g) * n


def target_unitary_dynamical(theta_d: float, phi_d: float) -> np.ndarray:
    c, s = math.cos(theta_d), math.sin(theta_d)
    return np.array([[c, -1j * s * np.exp(-1j * phi_d)],
                     [-1j * s * np.exp(1j * phi_d), c]])


def target_unitary(spec: GateSpec) -> np.ndarray:
    """Error-free operator the designed sequence should implement."""
    if spec.family is Family.DYNAMICAL:
        return target_unitary_dynamical(spec.theta_d, spec.phi_d)
    return target_unitary_geometric(spec.chi, spec.xi1, spec.gamma)


def rotation_gate_params(axis: str, angle: float, config="B", loops: int = 1) -> GateSpec:
    """Geometric spec for ``R_x(angle)`` or ``R_y(angle)``.

    Uses ``chi = pi/2``, ``gamma = angle/2`` and ``xi1 = pi`` (X) or ``-pi/2`` (Y).
    """
    axis = axis.lower()
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    if not 0.0 < angle < 2 * math.pi:
        raise ValueError("rotation angle must lie in (0, 2pi)")
    xi1 = math.pi if axis == "x" else -math.pi / 2
    fam = Family.GEOMETRIC_A if Config(config) is Config.A else Family.GEOMETRIC_B
    return GateSpec(fam, chi=math.pi / 2, xi1=xi1, gamma=angle / 2, loops=loops,
                    label=f"r{axis}")


def dynamical_rotation_params(axis: str, angle: float) -> GateSpec:
    axis = axis.lower()
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    return GateSpec(Family.DYNAMICAL, theta_d=angle / 2,
                    phi_d=0.0 if axis == "x" else math.pi / 2, label=f"r{axis}")


def not_gate(family="geoB", loops: int = 1) -> GateSpec:
    """NOT gate: ``chi = gamma = pi/2``, ``xi1 = 0`` or ``theta_d = pi/2``."""
    family = Family(family)
    if family is Family.DYNAMICAL:
        return GateSpec(family, theta_d=math.pi / 2, phi_d=0.0, label="not")
    return GateSpec(family, chi=math.pi / 2, xi1=0.0, gamma=math.pi / 2, loops=loops,
                    label="not")


def bloch_angles(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar and azimuthal angles of qubit states ``a|0> + b|1>`` (rows).

    Global phases are removed; the azimuth is the relative phase of ``b``.
    """
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    a, b = states[:, 0], states[:, 1]
    chi = 2 * np.arctan2(np.abs(b), np.abs(a))
    xi = np.angle(b * np.conj(a))
    return chi, xi


def _weighted_trapezoid(y, t):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def compute_phases(traj: Trajectory, pole_tol: float = 1e-9) -> PhasePair:
    """Dynamical and geometric phase integrals along a sampled path.

    Smooth stretches use the trapezoid rule with finite-difference ``xi``
    rates.  Zero-length steps are longitude jumps and add
    ``-(d_xi / 2) * (1 - cos chi)`` to the geometric phase; they carry no
    dynamical phase because ``sin chi`` vanishes at the poles.  Where
    ``cos chi`` vanishes the dynamical integrand takes its resonant limit of 0.
    """
    t = np.asarray(traj.times, dtype=float)
    chi = np.asarray(traj.chi, dtype=float)
    xi = np.asarray(traj.xi, dtype=float)
    if not (t.shape == chi.shape == xi.shape) or t.ndim != 1:
        raise ValueError("trajectory arrays must be 1-D and of equal length")
    dts = np.diff(t)
    if np.any(dts < 0):
        raise ValueError("trajectory timestamps must be non-decreasing")
    det = np.zeros_like(t) if traj.detuning is None else np.asarray(traj.detuning, float)

    gamma_g = 0.0
    gamma_d = 0.0
    jumps = np.flatnonzero(dts == 0)
    starts = np.concatenate([[0], jumps + 1])
    stops = np.concatenate([jumps + 1, [len(t)]])
    for j in jumps:
        dxi = xi[j + 1] - xi[j]
        gamma_g -= 0.5 * dxi * (1.0 - 0.5 * (math.cos(chi[j]) + math.cos(chi[j + 1])))
    for a, b in zip(starts, stops):
        if b - a < 2:
            continue
        ts, cs, xs, ds = t[a:b], chi[a:b], xi[a:b], det[a:b]
        xdot = np.gradient(xs, ts)
        cos = np.cos(cs)
        gamma_g += _weighted_trapezoid(-0.5 * xdot * (1.0 - cos), ts)
        num = xdot * np.sin(cs) ** 2 + ds
        integrand = np.divide(num, cos, out=np.zeros_like(num), where=np.abs(cos) > pole_tol)
        gamma_d += 0.5 * _weighted_trapezoid(integrand, ts)
    return PhasePair(gamma_d=gamma_d, gamma_g=gamma_g)
