"""Gate figures of merit.

Two numbers are used throughout:

* the trace fidelity ``|Tr(U^+ V)| / d`` between a target and a realised
  unitary, insensitive to global phase;
* the state-averaged fidelity: the mean of ``<psi_f|rho|psi_f>`` over input
  states ``cos(t)|a> + sin(t)|b>``, where ``rho`` is the evolved input and
  ``psi_f`` its ideal image.

The averaged fidelity is linear in the evolved operator, so it only needs the
images of the four operators ``|a><a|, |a><b|, |b><a|, |b><b|``; every input
state is a combination of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .qlinalg import dag

__all__ = [
    "FidelityKind",
    "FidelityReport",
    "N_THETA",
    "theta_grid",
    "trace_fidelity",
    "trace_fidelity_values",
    "project",
    "input_operators",
    "images_from_unitary",
    "state_averaged_values",
    "state_averaged_fidelity",
]

N_THETA = 1001
_SLACK = 1e-9


class FidelityKind(str, enum.Enum):
    TRACE = "TraceFidelityMagnitude"
    STATE_AVERAGED = "StateAveraged"


@dataclass(frozen=True)
class FidelityReport:
    value: float
    kind: FidelityKind
    label: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", FidelityKind(self.kind))
        v = float(self.value)
        if not -_SLACK <= v <= 1 + _SLACK:
            raise ValueError(f"fidelity {v} outside [0, 1]")
        object.__setattr__(self, "value", v)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.value


def theta_grid(n: int = N_THETA) -> np.ndarray:
    """``n`` equally spaced angles covering one period ``[0, 2 pi)``.

    On this half-open grid the sample mean of any trigonometric polynomial
    of degree below ``n`` equals its average over the period.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    return np.linspace(0.0, 2 * np.pi, n, endpoint=False)


def _square(a, name):
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def trace_fidelity_values(u_target, u_actual) -> np.ndarray:
    """``|Tr(U_target^+ U_actual)| / d``; ``u_actual`` may be a stack."""
    ut = _square(u_target, "u_target")
    ua = _square(u_actual, "u_actual")
    if ut.shape[-1] != ua.shape[-1]:
        raise ValueError(f"dimension mismatch: {ut.shape} vs {ua.shape}")
    d = ut.shape[-1]
    overlap = np.einsum("...ji,...ji->...", np.conj(ut), ua)
    return np.abs(overlap) / d


def trace_fidelity(u_target, u_actual, label: str = "", **metadata) -> FidelityReport:
    """Trace fidelity of a single realised unitary."""
    ut = _square(u_target, "u_target")
    if not np.allclose(dag(ut) @ ut, np.eye(ut.shape[-1]), atol=1e-9):
        raise ValueError("u_target must be unitary")
    v = trace_fidelity_values(ut, u_actual)
    if np.ndim(v):
        raise ValueError("use trace_fidelity_values for stacks of unitaries")
    return FidelityReport(float(v), FidelityKind.TRACE, label, dict(metadata))


def project(u: np.ndarray, idx: Sequence[int]) -> np.ndarray:
    """Block of ``u`` on the basis states ``idx`` (rows and columns)."""
    idx = np.asarray(idx)
    return np.asarray(u)[..., idx[:, None], idx[None, :]]


def input_operators(dim: int, support: Sequence[int]) -> np.ndarray:
    """``|a><a|, |a><b|, |b><a|, |b><b|`` for ``support = (a, b)``."""
    a, b = support
    ops = np.zeros((4, dim, dim), dtype=complex)
    ops[0, a, a] = ops[1, a, b] = ops[2, b, a] = ops[3, b, b] = 1.0
    return ops


def images_from_unitary(u: np.ndarray, support: Sequence[int]) -> np.ndarray:
    """Images ``U |i><j| U^+`` of the four input operators (closed system)."""
    u = np.asarray(u, dtype=complex)
    a, b = support
    ca, cb = u[..., :, a], u[..., :, b]
    outer = lambda x, y: x[..., :, None] * np.conj(y)[..., None, :]
    return np.stack([outer(ca, ca), outer(ca, cb), outer(cb, ca), outer(cb, cb)], axis=-3)


def state_averaged_values(images: np.ndarray, target: np.ndarray, support: Sequence[int],
                          n_theta: int = N_THETA, computational: Sequence[int] | None = None):
    """Averaged fidelity and leakage from the four operator images.

    Parameters
    ----------
    images : array, shape (..., 4, d, d)
        Evolved ``|a><a|, |a><b|, |b><a|, |b><b|``.
    target : array, shape (2, 2)
        Ideal gate on ``span(|a>, |b>)``.
    support : (a, b)
        Basis indices of the two input states.
    computational : indices, optional
        Subspace whose complement counts as leakage; defaults to ``support``.

    Returns
    -------
    fidelity, leakage : arrays of shape ``images.shape[:-3]``
    """
    images = np.asarray(images, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if images.shape[-3] != 4:
        raise ValueError("expected the images of four input operators")
    if target.shape != (2, 2):
        raise ValueError("target must act on the two-dimensional input span")
    a, b = support
    th = theta_grid(n_theta)
    c, s = np.cos(th), np.sin(th)
    # rho(theta) = c^2 R_aa + cs (R_ab + R_ba) + s^2 R_bb
    weights = np.stack([c * c, c * s, c * s, s * s], axis=1)          # (n, 4)
    f_amp = np.stack([c, s], axis=1) @ target.T                        # (n, 2)
    d = images.shape[-1]
    psi_f = np.zeros((len(th), d), dtype=complex)
    psi_f[:, a], psi_f[:, b] = f_amp[:, 0], f_amp[:, 1]
    # <psi_f| R_k |psi_f> for every theta and every image k
    expv = np.einsum("ni,...kij,nj->...nk", np.conj(psi_f), images, psi_f)
    fid = np.real(np.einsum("...nk,nk->...n", expv, weights)).mean(axis=-1)

    comp = np.asarray(support if computational is None else computational)
    pops = np.real(np.einsum("...kii->...k", images[..., :, comp[:, None], comp[None, :]]))
    inside = (pops @ weights.T).mean(axis=-1)
    return fid, 1.0 - inside


def state_averaged_fidelity(images: np.ndarray, target: np.ndarray, support: Sequence[int] = (0, 1),
                            n_theta: int = N_THETA, computational: Sequence[int] | None = None,
                            label: str = "", **metadata) -> FidelityReport:
    """:class:`FidelityReport` for a single evolution (see :func:`state_averaged_values`)."""
    fid, leak = state_averaged_values(images, target, support, n_theta, computational)
    if np.ndim(fid):
        raise ValueError("use state_averaged_values for batches")
    meta = {"leakage": float(leak), "n_theta": n_theta, **metadata}
    return FidelityReport(float(fid), FidelityKind.STATE_AVERAGED, label, meta)
