"""Time-ordered propagation of unitaries and Lindblad evolution of density matrices.

Both solvers step on a fixed grid that never straddles a breakpoint (the
segment boundaries of a pulse sequence, where the drive phase jumps).

Unitaries use the exponential of the Hamiltonian sampled at each step
midpoint, which is exactly unitary per step and second order in ``dt``.
Density matrices use classical RK4 on

    drho/dt = -i[H, rho] + sum_k kappa_k / 2 * (2 A rho A^+ - A^+A rho - rho A^+A).

Hamiltonian callables follow the convention of :mod:`geomgate.physmodel`:
``h(ts)`` for an array of times returns ``(n, *batch, d, d)``.  Plain
functions of a scalar time also work (they are sampled one by one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .qlinalg import check_density_matrix, dag, is_hermitian

__all__ = [
    "EvolutionConfig",
    "CollapseChannel",
    "ConvergenceError",
    "InstabilityError",
    "time_grid",
    "propagate_unitary",
    "unitary_trajectory",
    "lindblad_evolve",
    "lindblad_map",
    "reachable_subspace",
    "restrict",
]

_CHUNK_ELEMENTS = 1 << 21


class ConvergenceError(RuntimeError):
    """Halving the step changed the result by more than the tolerance."""

    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class InstabilityError(RuntimeError):
    """The density matrix lost positivity; the step is too large."""


@dataclass(frozen=True)
class EvolutionConfig:
    """Fixed-step settings.

    ``dt`` wins when given; otherwise the step is ``duration / dt_div``.
    ``check`` repeats the run at half the step and compares with ``tol``.
    """

    dt: Optional[float] = None
    dt_div: int = 4000
    sample_stride: int = 0
    check: bool = False
    tol: float = 1e-8

    def step_for(self, duration: float) -> float:
        if self.dt is not None:
            if not self.dt > 0:
                raise ValueError("dt must be positive")
            return self.dt
        if self.dt_div < 1:
            raise ValueError("dt_div must be >= 1")
        return duration / self.dt_div

    def halved(self, duration: float) -> "EvolutionConfig":
        return EvolutionConfig(dt=self.step_for(duration) / 2, sample_stride=self.sample_stride,
                               check=False, tol=self.tol)


@dataclass(frozen=True)
class CollapseChannel:
    operator: np.ndarray
    rate: float | np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "operator", np.asarray(self.operator, dtype=complex))
        if np.any(np.asarray(self.rate) < 0):
            raise ValueError("collapse rates must be non-negative")


def _breakpoints(tspan) -> np.ndarray:
    edges = np.asarray(tspan, dtype=float).ravel()
    if edges.size < 2:
        raise ValueError("need at least a start and an end time")
    if np.any(np.diff(edges) < 0):
        raise ValueError("breakpoints must be non-decreasing")
    return edges


def time_grid(tspan, dt: float) -> list[tuple[float, float, int]]:
    """Per-interval ``(start, step, count)``; zero-length intervals are skipped."""
    grid = []
    edges = _breakpoints(tspan)
    for a, b in zip(edges[:-1], edges[1:]):
        length = b - a
        if length <= 0:
            grid.append((a, 0.0, 0))
            continue
        n = max(1, math.ceil(length / dt - 1e-9))
        grid.append((a, length / n, n))
    return grid


def _sample(h: Callable, ts: np.ndarray) -> np.ndarray:
    if getattr(h, "vectorized", False):
        return np.asarray(h(ts), dtype=complex)
    return np.stack([np.asarray(h(float(t)), dtype=complex) for t in ts])


def _chunk_len(h: Callable, t0: float) -> int:
    probe = _sample(h, np.array([t0]))
    return max(1, _CHUNK_ELEMENTS // max(probe[0].size, 1))


def _tree_product(steps: np.ndarray) -> np.ndarray:
    """Time-ordered product ``steps[n-1] @ ... @ steps[0]`` by pairwise reduction."""
    while steps.shape[0] > 1:
        if steps.shape[0] % 2:
            last = steps[-1:]
            steps = np.concatenate([steps[1:-1:2] @ steps[0:-1:2], last])
        else:
            steps = steps[1::2] @ steps[0::2]
    return steps[0]


def _step_unitaries(hs: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(hs)
    return (v * np.exp(-1j * w * dt)[..., None, :]) @ dag(v)


def _check_hermitian_sample(hs: np.ndarray):
    if not is_hermitian(hs[: min(len(hs), 4)], rtol=1e-10):
        raise ValueError("Hamiltonian must be Hermitian")


def _propagate(h, edges, dt, kicks=None) -> np.ndarray:
    u = None
    grid = time_grid(edges, dt)
    for j, (t0, step, n) in enumerate(grid):
        if n:
            chunk = _chunk_len(h, t0)
            for s in range(0, n, chunk):
                ts = t0 + (np.arange(s, min(n, s + chunk)) + 0.5) * step
                hs = _sample(h, ts)
                _check_hermitian_sample(hs)
                p = _tree_product(_step_unitaries(hs, step))
                u = p if u is None else p @ u
        if kicks is not None and j < len(grid) - 1:
            u = kicks[j] if u is None else kicks[j] @ u
    return u


def propagate_unitary(h: Callable, tspan, cfg: EvolutionConfig = EvolutionConfig(),
                      kicks: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """Propagator ``U(t_end, t_start)`` as a product of midpoint exponentials.

    ``tspan`` is ``(t0, t1)`` or the full list of breakpoints.  ``kicks``
    (one unitary per interior breakpoint) are applied instantaneously there.
    """
    edges = _breakpoints(tspan)
    duration = edges[-1] - edges[0]
    dt = cfg.step_for(duration)
    u = _propagate(h, edges, dt, kicks)
    if u is None:
        d = _sample(h, edges[:1])[0].shape
        return np.broadcast_to(np.eye(d[-1], dtype=complex), d).copy()
    if cfg.check:
        fine = _propagate(h, edges, dt / 2, kicks)
        err = float(np.max(np.abs(fine - u)))
        if err > cfg.tol:
            raise ConvergenceError(f"step halving changed the propagator by {err:.3e}",
                                   coarse=u, fine=fine)
        return fine
    return u


def unitary_trajectory(h: Callable, tspan, cfg: EvolutionConfig = EvolutionConfig(),
                       kicks: Optional[Sequence[np.ndarray]] = None):
    """Propagators sampled every ``cfg.sample_stride`` steps and at every breakpoint.

    Returns ``(times, unitaries)``.  A breakpoint carrying a kick appears twice
    (before and after the kick).
    """
    edges = _breakpoints(tspan)
    dt = cfg.step_for(edges[-1] - edges[0])
    stride = max(1, cfg.sample_stride)
    grid = time_grid(edges, dt)
    d = _sample(h, edges[:1])[0].shape
    u = np.broadcast_to(np.eye(d[-1], dtype=complex), d).copy()
    times, out = [edges[0]], [u]
    for j, (t0, step, n) in enumerate(grid):
        if n:
            ts = t0 + (np.arange(n) + 0.5) * step
            steps = _step_unitaries(_sample(h, ts), step)
            for i in range(n):
                u = steps[i] @ u
                if (i + 1) % stride == 0 or i == n - 1:
                    times.append(t0 + (i + 1) * step)
                    out.append(u)
        if kicks is not None and j < len(grid) - 1:
            u = kicks[j] @ u
            times.append(edges[j + 1])
            out.append(u)
    return np.array(times), np.stack(out)


# --- Lindblad ------------------------------------------------------------------

def _prepare_channels(channels: Sequence[CollapseChannel], batch_shape):
    ops = []
    for ch in channels:
        rate = np.asarray(ch.rate, dtype=float)
        if not np.any(rate):
            continue
        rate = np.broadcast_to(rate, batch_shape) if rate.ndim else rate
        a = ch.operator
        ops.append((a, dag(a), dag(a) @ a, rate))
    return ops


def _rates(rate, ndim_extra):
    rate = np.asarray(rate)
    return rate.reshape(rate.shape + (1,) * ndim_extra)


def _lindblad_run(h, rho, channels, edges, dt, kicks=None, record_stride=0):
    """RK4 on a stack ``rho`` of shape ``(*batch, k, d, d)``."""
    batch = rho.shape[:-3]
    ops = _prepare_channels(channels, batch)
    nodiss = sum(0.5 * _rates(r, 3) * ada[None] if np.ndim(r) else 0.5 * float(r) * ada
                 for _, _, ada, r in ops) if ops else 0.0
    recorded = []

    def rhs(hm, r):
        g = -1j * hm[..., None, :, :] - nodiss
        out = g @ r + r @ dag(g)
        for a, ad, _, rate in ops:
            jump = a @ r @ ad
            out = out + (_rates(rate, 3) * jump if np.ndim(rate) else float(rate) * jump)
        return out

    grid = time_grid(edges, dt)
    for j, (t0, step, n) in enumerate(grid):
        if n:
            chunk = max(1, _chunk_len(h, t0) // 2)
            for s in range(0, n, chunk):
                idx = np.arange(s, min(n, s + chunk))
                ends = (idx + 1) * step
                if idx[-1] == n - 1:
                    # the breakpoint itself belongs to the next segment
                    ends[-1] -= 1e-9 * step
                ts = t0 + np.concatenate([idx * step, idx * step + 0.5 * step, ends])
                hs = _sample(h, ts)
                m = len(idx)
                h0, hm, h1 = hs[:m], hs[m:2 * m], hs[2 * m:]
                for i in range(m):
                    k1 = rhs(h0[i], rho)
                    k2 = rhs(hm[i], rho + 0.5 * step * k1)
                    k3 = rhs(hm[i], rho + 0.5 * step * k2)
                    k4 = rhs(h1[i], rho + step * k3)
                    rho = rho + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                    if record_stride and ((idx[i] + 1) % record_stride == 0 or idx[i] == n - 1):
                        recorded.append((t0 + (idx[i] + 1) * step, rho))
        if kicks is not None and j < len(grid) - 1:
            k = kicks[j]
            rho = k @ rho @ dag(k)
            if record_stride:
                recorded.append((edges[j + 1], rho))
    return rho, recorded


def lindblad_map(h: Callable, operators: np.ndarray, channels: Sequence[CollapseChannel],
                 tspan, cfg: EvolutionConfig = EvolutionConfig(),
                 kicks: Optional[Sequence[np.ndarray]] = None, record: bool = False):
    """Apply the (linear) master-equation map to a stack of operators.

    ``operators`` has shape ``(k, d, d)`` or ``(*batch, k, d, d)``; the
    Hamiltonian and rates may carry the same ``batch`` shape.  No positivity
    checks are made because the inputs need not be states.  With ``record``
    the result is ``(final, times, stack)`` sampled every ``cfg.sample_stride``
    steps and at every breakpoint.
    """
    edges = _breakpoints(tspan)
    dt = cfg.step_for(edges[-1] - edges[0])
    probe = _sample(h, edges[:1])[0]
    batch = probe.shape[:-2]
    for ch in channels:
        batch = np.broadcast_shapes(batch, np.shape(ch.rate))
    rho = np.asarray(operators, dtype=complex)
    rho = np.broadcast_to(rho, batch + rho.shape[-3:]).copy()
    stride = max(1, cfg.sample_stride) if record else 0
    out, rec = _lindblad_run(h, rho, channels, edges, dt, kicks, stride)
    if record:
        times = np.array([edges[0]] + [t for t, _ in rec])
        return out, times, np.stack([rho] + [r for _, r in rec])
    if cfg.check:
        fine, _ = _lindblad_run(h, rho, channels, edges, dt / 2, kicks)
        err = float(np.max(np.abs(fine - out)))
        if err > cfg.tol:
            raise ConvergenceError(f"step halving changed the state by {err:.3e}",
                                   coarse=out, fine=fine)
        return fine
    return out


def lindblad_evolve(h: Callable, rho0: np.ndarray, channels: Sequence[CollapseChannel],
                    tspan, cfg: EvolutionConfig = EvolutionConfig(),
                    kicks: Optional[Sequence[np.ndarray]] = None, record: bool = False):
    """Evolve one density matrix; returns ``rho`` or ``(rho, times, states)``.

    Raises :class:`InstabilityError` if the final state has an eigenvalue
    below ``-1e-5``.
    """
    rho0 = check_density_matrix(rho0)
    edges = _breakpoints(tspan)
    dt = cfg.step_for(edges[-1] - edges[0])
    stride = max(1, cfg.sample_stride) if record else 0
    rho, rec = _lindblad_run(h, rho0[None], channels, edges, dt, kicks, stride)
    final = rho[0]
    if cfg.check:
        fine, _ = _lindblad_run(h, rho0[None], channels, edges, dt / 2, kicks)
        err = float(np.max(np.abs(fine[0] - final)))
        if err > cfg.tol:
            raise ConvergenceError(f"step halving changed the state by {err:.3e}",
                                   coarse=final, fine=fine[0])
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (final + dag(final)))))
    if lo < -1e-5:
        raise InstabilityError(f"density matrix eigenvalue {lo:.3e}; reduce the step")
    if not record:
        return final
    times = np.array([edges[0]] + [t for t, _ in rec])
    states = np.stack([rho0] + [r[0] for _, r in rec])
    return final, times, states


# --- invariant subspaces ---------------------------------------------------------

def reachable_subspace(hamiltonians: Sequence[np.ndarray], support: Sequence[int],
                       jumps: Sequence[np.ndarray] = (), atol: float = 0.0) -> np.ndarray:
    """Basis indices reachable from ``support`` under the given dynamics.

    Hamiltonian couplings are followed both ways; a jump operator ``A`` only
    moves population from ``j`` to ``i`` where ``A[i, j] != 0`` (and ``A^+A``
    is followed both ways).  The span of the result contains the support of
    every operator evolved from ``|a><b|`` with ``a, b`` in ``support``, so the
    dynamics may be restricted to it without approximation.
    """
    def pattern(op, symmetric):
        mask = np.abs(np.asarray(op)) > atol
        mask = mask.reshape((-1,) + mask.shape[-2:]).any(axis=0)
        return mask | mask.T if symmetric else mask

    masks = [pattern(h, True) for h in hamiltonians]
    for a in jumps:
        a = np.asarray(a)
        masks.append(pattern(a, False))
        masks.append(pattern(dag(a) @ a, True))
    if not masks:
        raise ValueError("need at least one operator")
    reach = np.logical_or.reduce(masks)
    seen = set(int(i) for i in support)
    frontier = list(seen)
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(reach[:, i]):
            if int(j) not in seen:
                seen.add(int(j))
                frontier.append(int(j))
    return np.array(sorted(seen))


class restrict:
    """Hamiltonian callable restricted to the basis indices ``idx``."""

    def __init__(self, h: Callable, idx: np.ndarray):
        self.h = h
        self.idx = np.asarray(idx)
        self.vectorized = getattr(h, "vectorized", False)

    def __call__(self, t):
        full = np.asarray(self.h(t))
        return full[..., self.idx[:, None], self.idx[None, :]]
