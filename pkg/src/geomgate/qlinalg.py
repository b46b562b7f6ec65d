"""Small dense complex linear algebra used throughout the package.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. Every
Hilbert space here is tiny (at most a few dozen levels), so nothing is sparse
and exponentials are taken through the Hermitian spectral decomposition,
which keeps propagators unitary to round-off.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "I2",
    "SX",
    "SY",
    "SZ",
    "P0",
    "P1",
    "basis",
    "projector",
    "dag",
    "is_hermitian",
    "matmul",
    "kron",
    "eigh",
    "expm_skew",
    "is_density_matrix",
    "check_density_matrix",
]

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square operator(s), got shape {a.shape}")
    return a


def basis(dim: int, index: int) -> np.ndarray:
    """Column basis vector ``|index>`` of a ``dim``-level space."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(dim: int, index: int) -> np.ndarray:
    """``|index><index|``."""
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, rtol: float = 1e-12) -> bool:
    """True if ``a`` equals its adjoint to ``rtol`` times its largest entry."""
    a = _as_operator(a)
    scale = max(float(np.max(np.abs(a), initial=0.0)), 1.0)
    return bool(np.max(np.abs(a - dag(a)), initial=0.0) <= rtol * scale)


def matmul(a, b) -> np.ndarray:
    a = _as_operator(a)
    b = _as_operator(b)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the outer (slow) index.

    ``kron(|m><m|, |n><n|)`` is the projector on index ``m * dim_b + n``.
    """
    return np.kron(_as_operator(a), _as_operator(b))


def eigh(h, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of ``h``.

    Works on stacks of matrices (leading batch axes) as well.
    """
    h = _as_operator(h)
    if check and not is_hermitian(h):
        raise ValueError("eigh requires a Hermitian operator")
    return np.linalg.eigh(h)


def expm_skew(h, dt: float, check: bool = True) -> np.ndarray:
    """Return ``exp(-1j * h * dt)`` for Hermitian ``h`` (or a stack of them)."""
    h = _as_operator(h)
    w, v = eigh(h, check=check)
    phases = np.exp(-1j * w * dt)
    return (v * phases[..., None, :]) @ dag(v)


def is_density_matrix(rho, herm_tol: float = 1e-10, trace_tol: float = 1e-9,
                      pos_tol: float = 1e-9) -> bool:
    rho = _as_operator(rho)
    if np.max(np.abs(rho - dag(rho))) > herm_tol:
        return False
    if abs(np.trace(rho) - 1.0) > trace_tol:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -pos_tol)


def check_density_matrix(rho) -> np.ndarray:
    """Validate ``rho`` and return it as a complex array."""
    rho = _as_operator(rho)
    if rho.ndim != 2 or not is_density_matrix(rho):
        raise ValueError("not a valid density matrix (Hermitian, unit trace, PSD)")
    return rho
