"""Time-dependent Hamiltonians: ideal qubit, DRAG-driven transmon, coupled pair.

Units: angular frequencies in rad/us and times in us for the physical models.
The ideal two-level model is usually run with ``omega_ref = 1`` so that
times are in units of ``1/Omega``.

Every model is a callable ``h(t)`` accepting a scalar or a 1-D array of times.
For scalar ``t`` it returns ``(*batch, d, d)``; for an array it returns
``(len(t), *batch, d, d)``.  ``batch`` is the shape of the ``deltas`` array
(qubit-frequency drifts), which lets a whole sweep axis propagate together.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .pathdesign import PulseSegment, PulseSequence, ShapeKind
from .qlinalg import dag, kron

__all__ = [
    "DriftKind",
    "NoiseModel",
    "TransmonParams",
    "CouplerParams",
    "bessel_j",
    "J1_PEAK",
    "solve_beta",
    "two_level_h",
    "transmon_h",
    "coupled_lab_h",
    "coupled_interaction_h",
    "effective_two_qubit_h",
    "frame_transform",
    "lowering",
    "number",
    "TwoLevelModel",
    "TransmonModel",
    "TransmonLabModel",
    "InteractionFrameModel",
    "EffectiveModel",
    "CoupledLabModel",
]


class DriftKind(str, enum.Enum):
    NONE = "none"
    STATIC = "static"
    SIN = "sin"


@dataclass(frozen=True)
class NoiseModel:
    """Qubit-frequency drift ``delta0 * omega_ref`` plus Lindblad rates."""

    drift: DriftKind = DriftKind.NONE
    delta0: float = 0.0
    kappa_minus: float = 0.0
    kappa_z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "drift", DriftKind(self.drift))
        if self.kappa_minus < 0 or self.kappa_z < 0:
            raise ValueError("decoherence rates must be non-negative")

    def drift_at(self, t, omega_ref: float, gate_duration: float):
        t = np.asarray(t, dtype=float)
        if self.drift is DriftKind.NONE:
            return np.zeros_like(t)
        return self.delta0 * omega_ref * drift_profile(self.drift, t, gate_duration)


def drift_profile(kind, t, gate_duration: float):
    """Unit drift envelope: 1 (static) or ``sin(pi t / T)`` over the whole gate."""
    kind = DriftKind(kind)
    t = np.asarray(t, dtype=float)
    if kind is DriftKind.STATIC:
        return np.ones_like(t)
    if kind is DriftKind.SIN:
        return np.sin(np.pi * t / gate_duration)
    return np.zeros_like(t)


@dataclass(frozen=True)
class TransmonParams:
    omega: float
    alpha: float
    levels: int = 4

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("anharmonicity must be positive")
        if self.levels < 3:
            raise ValueError("need at least 3 levels to describe leakage")

    def energies(self, omega: Optional[float] = None) -> np.ndarray:
        """Bare level energies ``n w - n(n-1) a / 2``."""
        w = self.omega if omega is None else omega
        n = np.arange(self.levels)
        return n * w - 0.5 * n * (n - 1) * self.alpha


@dataclass(frozen=True)
class CouplerParams:
    """Capacitive coupling ``g12`` with parametric flux modulation of qubit 1."""

    g12: float
    delta1: float
    eps_mod: float
    nu: float
    phi_mod: float = 0.0
    m_max: int = 10

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("modulation frequency must be positive")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if not math.isfinite(self.eps_mod / self.nu):
            raise ValueError("beta = eps/nu must be finite")

    @property
    def beta(self) -> float:
        return self.eps_mod / self.nu

    @property
    def g_eff(self) -> float:
        return bessel_j(1, self.beta) * self.g12

    @classmethod
    def resonant(cls, g12: float, delta1: float, g_eff: float, phi_mod: float = 0.0,
                 m_max: int = 10) -> "CouplerParams":
        """Modulate at ``nu = delta1`` with the depth that gives ``g_eff``."""
        beta = solve_beta(g_eff, g12)
        return cls(g12=g12, delta1=delta1, eps_mod=beta * delta1, nu=delta1,
                   phi_mod=phi_mod, m_max=m_max)


# --- Bessel functions -------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _bessel_series(m: int, beta: float) -> float:
    # exact rational partial sums; the float result is then correctly rounded
    # apart from the truncated tail, which is kept below 1e-18
    x = Fraction(beta) / 2
    x2 = x * x
    term = x ** m / math.factorial(m)
    total = term
    k = 0
    while True:
        k += 1
        term = -term * x2 / (k * (k + m))
        total += term
        if k > abs(beta) and abs(term) < Fraction(1, 10 ** 18):
            break
    return float(total)


def bessel_j(m: int, beta: float) -> float:
    """Bessel function of the first kind ``J_m(beta)`` for ``|m|, |beta| <= 20``."""
    if int(m) != m or abs(m) > 20:
        raise ValueError("order must be an integer with |m| <= 20")
    if not abs(beta) <= 20:
        raise ValueError("|beta| must be <= 20")
    m = int(m)
    if m < 0:
        return (-1) ** (-m) * _bessel_series(-m, float(beta))
    return _bessel_series(m, float(beta))


def _j1_slope(beta: float) -> float:
    return bessel_j(0, beta) - bessel_j(2, beta)


J1_PEAK = brentq(_j1_slope, 1.0, 2.5, xtol=1e-15)


def solve_beta(g_eff: float, g12: float) -> float:
    """Smallest modulation index with ``J_1(beta) g12 = g_eff``."""
    ratio = g_eff / g12
    peak = bessel_j(1, J1_PEAK)
    if not 0 < ratio <= peak:
        raise ValueError(f"g_eff/g12 = {ratio:.4f} not reachable (max {peak:.4f})")
    if ratio == peak:
        return J1_PEAK
    return brentq(lambda b: bessel_j(1, b) - ratio, 0.0, J1_PEAK, xtol=1e-15)


# --- operators ---------------------------------------------------------------

def lowering(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), 1).astype(complex)


def number(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels)).astype(complex)


def _hermitize(h):
    return h + dag(h)


# --- scalar constructors -------------------------------------------------------

def two_level_h(t: float, segment: PulseSegment, noise: NoiseModel, omega_ref: float,
                gate_duration: float, t_start: float = 0.0) -> np.ndarray:
    """Resonant-frame qubit Hamiltonian for one segment plus drift on ``|1><1|``."""
    if not omega_ref > 0:
        raise ValueError("omega_ref must be positive")
    tl = t - t_start
    if tl < -1e-12 * segment.duration or tl > segment.duration * (1 + 1e-12):
        raise ValueError("t outside the segment")
    om = float(segment.envelope(tl))
    d = segment.detuning
    h = 0.5 * np.array([[-d, om * np.exp(-1j * segment.phase)],
                        [om * np.exp(1j * segment.phase), d]])
    h[1, 1] += float(noise.drift_at(t, omega_ref, gate_duration))
    return h


def _drag_amplitude(segment: PulseSegment, t_local, require_drag: bool):
    if require_drag:
        if segment.shape is not ShapeKind.SIN_SQUARED or segment.drag_alpha is None:
            raise ValueError("physical transmon drive needs a sin^2 pulse with DRAG")
    om = segment.envelope(t_local).astype(complex)
    if segment.drag_alpha is not None:
        om = om - 1j * segment.envelope_derivative(t_local) / (2 * segment.drag_alpha)
    return om


def transmon_h(t: float, params: TransmonParams, segment: PulseSegment, drive_freq: float,
               t_start: float = 0.0, drift: float = 0.0, require_drag: bool = True) -> np.ndarray:
    """Lab-frame driven transmon; ``drift`` shifts the qubit frequency only."""
    n_levels = params.levels
    a = lowering(n_levels)
    om = complex(_drag_amplitude(segment, t - t_start, require_drag))
    h = np.diag(params.energies(params.omega + drift)).astype(complex)
    h += 0.5 * _hermitize(om * np.exp(1j * (drive_freq * t - segment.phase)) * a)
    return h


def _pair_ops(q1: TransmonParams, q2: TransmonParams):
    s1 = kron(lowering(q1.levels), np.eye(q2.levels))
    s2 = kron(np.eye(q1.levels), lowering(q2.levels))
    return s1, s2


def coupled_lab_h(t: float, q1: TransmonParams, q2: TransmonParams, c: CouplerParams,
                  drift: float = 0.0) -> np.ndarray:
    """Two capacitively coupled transmons with ``w1(t) = w1 + eps sin(nu t + phi)``."""
    w1 = q1.omega + drift + c.eps_mod * math.sin(c.nu * t + c.phi_mod)
    diag = np.add.outer(q1.energies(w1), q2.energies()).ravel()
    s1, s2 = _pair_ops(q1, q2)
    return np.diag(diag).astype(complex) + c.g12 * _hermitize(s1 @ dag(s2))


def frame_transform(t: float, q1: TransmonParams, q2: TransmonParams, c: CouplerParams) -> np.ndarray:
    """``U_a U_b``: free evolution at the bare frequencies times the modulation phase."""
    e = np.add.outer(q1.energies(), q2.energies()).ravel()
    n1 = np.repeat(np.arange(q1.levels), q2.levels)
    phase = -e * t + n1 * c.beta * math.cos(c.nu * t + c.phi_mod)
    return np.diag(np.exp(1j * phase))


def coupled_interaction_h(t: float, q1: TransmonParams, q2: TransmonParams,
                          c: CouplerParams) -> np.ndarray:
    """Interaction-frame coupling expanded in Bessel sidebands up to ``|m| <= m_max``."""
    model = InteractionFrameModel(q1, q2, c)
    return model(t)


def effective_two_qubit_h(c: CouplerParams, rtol: float = 1e-9) -> np.ndarray:
    """Resonant sideband Hamiltonian on ``{|10>, |01>}``."""
    if abs(c.delta1 - c.nu) > rtol * abs(c.nu):
        raise ValueError("effective Hamiltonian requires nu == delta1")
    v = c.g_eff * np.exp(-1j * (c.phi_mod + math.pi / 2))
    return np.array([[0, v], [np.conj(v), 0]], dtype=complex)


# --- vectorized models ---------------------------------------------------------

class _DriftedModel:
    """``H(t) = H_ctrl(t) + profile(t) * deltas * D`` with piecewise segments."""

    vectorized = True

    def __init__(self, seq: PulseSequence, drift_op: np.ndarray, deltas=0.0,
                 drift=DriftKind.STATIC):
        self.seq = seq
        self.edges = seq.breakpoints
        self.gate_duration = float(self.edges[-1])
        self.drift_op = np.asarray(drift_op, dtype=complex)
        self.dim = self.drift_op.shape[-1]
        self.deltas = np.asarray(deltas, dtype=float)
        self.drift = DriftKind(drift)

    @property
    def batch_shape(self) -> tuple:
        return self.deltas.shape

    def _segment_index(self, ts):
        k = np.searchsorted(self.edges, ts, side="right") - 1
        return np.clip(k, 0, len(self.seq.segments) - 1)

    def control(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        hc = self.control(ts)                   # (n, d, d)
        prof = drift_profile(self.drift, ts, self.gate_duration)  # (n,)
        bshape = self.deltas.shape
        hc = hc.reshape(hc.shape[:1] + (1,) * len(bshape) + hc.shape[1:])
        coeff = prof.reshape((-1,) + (1,) * len(bshape)) * self.deltas
        h = hc + coeff[..., None, None] * self.drift_op
        return h[0] if scalar else h


class TwoLevelModel(_DriftedModel):
    """Ideal resonant qubit driven by ``seq``; drift ``deltas`` on ``|1><1|``."""

    def __init__(self, seq: PulseSequence, deltas=0.0, drift=DriftKind.STATIC):
        super().__init__(seq, np.diag([0.0, 1.0]), deltas, drift)
        self._amp = np.array([s.amplitude for s in seq.segments])
        self._phase = np.array([s.phase for s in seq.segments])
        self._det = np.array([s.detuning for s in seq.segments])
        self._sin2 = np.array([s.shape is ShapeKind.SIN_SQUARED for s in seq.segments])
        self._dur = np.diff(self.edges)

    @classmethod
    def from_noise(cls, seq: PulseSequence, noise: NoiseModel, omega_ref: float = 1.0):
        return cls(seq, noise.delta0 * omega_ref, noise.drift)

    def envelope(self, ts):
        k = self._segment_index(ts)
        tl = ts - self.edges[k]
        om = np.where(self._sin2[k], self._amp[k] * np.sin(np.pi * tl / self._dur[k]) ** 2,
                      self._amp[k])
        return k, om

    def control(self, ts):
        k, om = self.envelope(ts)
        h = np.zeros((len(ts), 2, 2), dtype=complex)
        off = 0.5 * om * np.exp(-1j * self._phase[k])
        h[:, 0, 1] = off
        h[:, 1, 0] = np.conj(off)
        h[:, 0, 0] = -0.5 * self._det[k]
        h[:, 1, 1] = 0.5 * self._det[k]
        return h


class TransmonModel(_DriftedModel):
    """Driven transmon in the frame rotating at the calibrated drive frequency.

    The drive term of the lab Hamiltonian carries only co-rotating
    exponentials, so moving to this frame is exact: the drive becomes
    ``0.5 * sqrt(n) * Omega(t) exp(-i phi)`` and the qubit-frequency drift is
    ``delta * n`` on level ``n``.
    """

    def __init__(self, seq: PulseSequence, params: TransmonParams, deltas=0.0,
                 drift=DriftKind.STATIC, require_drag: bool = True):
        n = params.levels
        super().__init__(seq, number(n), deltas, drift)
        self.params = params
        self.require_drag = require_drag
        for s in seq.segments:
            _drag_amplitude(s, 0.0, require_drag)
        self._static = np.diag(-0.5 * np.arange(n) * (np.arange(n) - 1) * params.alpha).astype(complex)
        self._a = lowering(n)

    def drive(self, ts):
        k = self._segment_index(ts)
        out = np.empty(len(ts), dtype=complex)
        for j in np.unique(k):
            sel = k == j
            seg = self.seq.segments[j]
            out[sel] = _drag_amplitude(seg, ts[sel] - self.edges[j], self.require_drag) \
                * np.exp(-1j * seg.phase)
        return out

    def control(self, ts):
        om = self.drive(ts)
        up = 0.5 * om[:, None, None] * self._a
        return self._static + up + dag(up)


class TransmonLabModel(TransmonModel):
    """Same transmon in the lab frame, drive at ``drive_freq`` (reference model)."""

    def __init__(self, seq, params, drive_freq: float, deltas=0.0, drift=DriftKind.STATIC,
                 require_drag: bool = True):
        super().__init__(seq, params, deltas, drift, require_drag)
        self.drive_freq = drive_freq
        self._static = np.diag(params.energies()).astype(complex)

    def control(self, ts):
        om = self.drive(ts) * np.exp(1j * self.drive_freq * ts)
        up = 0.5 * om[:, None, None] * self._a
        return self._static + up + dag(up)


def _pair_transitions(q1: TransmonParams, q2: TransmonParams, g12: float):
    """Coupling matrix elements ``<a|V|b>`` where ``a`` holds one more qubit-1 quantum."""
    s1, s2 = _pair_ops(q1, q2)
    v = g12 * dag(s1) @ s2
    rows, cols = np.nonzero(np.abs(v) > 0)
    e = np.add.outer(q1.energies(), q2.energies()).ravel()
    return rows, cols, v[rows, cols], e[rows] - e[cols]


def _segment_mod_phases(seq: Optional[PulseSequence], c: CouplerParams):
    # sideband phase = drive phase - pi/2 so that H_eff matches the qubit drive form
    if seq is None:
        return np.array([c.phi_mod])
    return np.array([s.phase - math.pi / 2 for s in seq.segments])


def _open_ended(seq: Optional[PulseSequence], c: CouplerParams):
    """Sideband phases per segment; without a sequence, one endless segment at ``c.phi_mod``."""
    phis = _segment_mod_phases(seq, c)
    if seq is None:
        seq = PulseSequence((PulseSegment(math.inf, 1.0, c.phi_mod + math.pi / 2),))
    return seq, phis


class InteractionFrameModel(_DriftedModel):
    """Coupled pair in the frame of the bare levels and the modulation phase.

    Each coupling element oscillates as ``exp(i (E_a - E_b) t)`` times the
    truncated Jacobi-Anger sum ``sum_m J_m(beta) exp(-i m (nu t + phi + pi/2))``.
    A drift ``delta`` of qubit 1 adds ``delta * n_1``.  When ``seq`` is given
    the sideband phase follows the drive phase of each segment.
    """

    def __init__(self, q1: TransmonParams, q2: TransmonParams, c: CouplerParams,
                 seq: Optional[PulseSequence] = None, deltas=0.0, drift=DriftKind.STATIC):
        seq, self._phi = _open_ended(seq, c)
        n1 = np.repeat(np.arange(q1.levels), q2.levels)
        super().__init__(seq, np.diag(n1), deltas, drift)
        self.q1, self.q2, self.c = q1, q2, c
        self._rows, self._cols, self._v, self._w = _pair_transitions(q1, q2, c.g12)
        ms = np.arange(-c.m_max, c.m_max + 1)
        self._ms = ms
        self._jm = np.array([bessel_j(m, c.beta) for m in ms])

    def sideband_sum(self, ts):
        k = self._segment_index(ts)
        x = self.c.nu * ts + self._phi[k] + math.pi / 2
        return np.exp(-1j * np.outer(x, self._ms)) @ self._jm

    def control(self, ts):
        s = self.sideband_sum(ts)
        vals = self._v[None, :] * np.exp(1j * np.outer(ts, self._w)) * s[:, None]
        h = np.zeros((len(ts), self.dim, self.dim), dtype=complex)
        h[:, self._rows, self._cols] = vals
        return h + dag(h)


class EffectiveModel(_DriftedModel):
    """Resonant sideband model embedded in the pair space (zero elsewhere)."""

    def __init__(self, q1: TransmonParams, q2: TransmonParams, c: CouplerParams,
                 seq: Optional[PulseSequence] = None, deltas=0.0, drift=DriftKind.STATIC):
        effective_two_qubit_h(c)
        seq, self._phi = _open_ended(seq, c)
        n1 = np.repeat(np.arange(q1.levels), q2.levels)
        super().__init__(seq, np.diag(n1), deltas, drift)
        self.c = c
        self._i10 = q2.levels
        self._i01 = 1

    def control(self, ts):
        k = self._segment_index(ts)
        v = self.c.g_eff * np.exp(-1j * (self._phi[k] + math.pi / 2))
        h = np.zeros((len(ts), self.dim, self.dim), dtype=complex)
        h[:, self._i10, self._i01] = v
        h[:, self._i01, self._i10] = np.conj(v)
        return h


class CoupledLabModel(_DriftedModel):
    """Lab-frame coupled pair with a segment-wise modulation phase.

    When the modulation phase changes between segments, the accumulated
    qubit-1 phase ``beta cos(nu t + phi)`` changes abruptly too; the matching
    instantaneous qubit-1 phase kicks are returned by :meth:`boundary_kicks`
    so that the lab and interaction frames describe the same protocol.
    """

    def __init__(self, q1: TransmonParams, q2: TransmonParams, c: CouplerParams,
                 seq: Optional[PulseSequence] = None, deltas=0.0, drift=DriftKind.STATIC):
        seq, self._phi = _open_ended(seq, c)
        self.q1, self.q2, self.c = q1, q2, c
        self._n1 = np.repeat(np.arange(q1.levels), q2.levels).astype(float)
        super().__init__(seq, np.diag(self._n1), deltas, drift)
        self._e0 = np.add.outer(q1.energies(), q2.energies()).ravel()
        s1, s2 = _pair_ops(q1, q2)
        self._v = c.g12 * _hermitize(s1 @ dag(s2))

    def control(self, ts):
        k = self._segment_index(ts)
        mod = self.c.eps_mod * np.sin(self.c.nu * ts + self._phi[k])
        diag = self._e0[None, :] + mod[:, None] * self._n1[None, :]
        h = np.zeros((len(ts), self.dim, self.dim), dtype=complex)
        idx = np.arange(self.dim)
        h[:, idx, idx] = diag
        return h + self._v

    def frame(self, t: float, segment: Optional[int] = None) -> np.ndarray:
        """``U_t`` at time ``t`` using the modulation phase of ``segment``."""
        k = int(self._segment_index(np.array([t]))[0]) if segment is None else segment
        phase = -self._e0 * t + self._n1 * self.c.beta * math.cos(self.c.nu * t + self._phi[k])
        return np.diag(np.exp(1j * phase))

    def boundary_kicks(self) -> list[np.ndarray]:
        """Diagonal unitaries applied at each interior segment boundary."""
        kicks = []
        for k, t in enumerate(self.edges[1:-1]):
            before = math.cos(self.c.nu * t + self._phi[k])
            after = math.cos(self.c.nu * t + self._phi[k + 1])
            kicks.append(np.diag(np.exp(1j * self.c.beta * (after - before) * self._n1)))
        return kicks
