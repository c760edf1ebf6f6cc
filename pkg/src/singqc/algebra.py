"""Dense complex linear algebra shared by the simulator.

Basis ordering is |0> = index 0, |1> = index 1. The Pauli matrices are the
standard ones, so ``SIGMA_Z = |0><0| - |1><1|`` and the Bloch vector of
``cos(t/2)|0> + sin(t/2) e^{ip}|1>`` is ``(sin t cos p, sin t sin p, cos t)``.
"""

from __future__ import annotations

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0><1| lowers |1> -> |0>
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def ket(index: int, dim: int = 2) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a``'s index varying slowest."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) < tol)


def is_unitary(a: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(dagger(a) @ a - eye)) < tol)


def is_density_matrix(rho: np.ndarray, tol: float = 1e-8) -> bool:
    if not is_hermitian(rho, 1e-10):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + dagger(rho))).min() >= -tol)


def bloch_axis(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def pauli_dot(n: np.ndarray) -> np.ndarray:
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def rotation_unitary(gamma: float, n) -> np.ndarray:
    """Return ``exp(i gamma n.sigma) = cos(gamma) I + i sin(gamma) n.sigma``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-10:
        raise ValueError(f"rotation axis must be a unit 3-vector, got {n!r}")
    return np.cos(gamma) * IDENTITY + 1j * np.sin(gamma) * pauli_dot(n)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs distance between ``a`` and ``b`` after the best global phase."""
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a - phase * b)))


def bloch_angles(psi: np.ndarray) -> tuple[float, float]:
    """Polar and azimuthal angle of a qubit state, azimuth in [0, 2pi)."""
    c0, c1 = psi[0], psi[1]
    x = 2.0 * np.real(np.conj(c0) * c1)
    y = 2.0 * np.imag(np.conj(c0) * c1)
    z = abs(c0) ** 2 - abs(c1) ** 2
    r = np.sqrt(x * x + y * y + z * z)
    theta = float(np.arccos(np.clip(z / r, -1.0, 1.0)))
    phi = float(np.mod(np.arctan2(y, x), 2 * np.pi))
    # mod can round a tiny negative angle up to exactly 2pi
    return theta, 0.0 if phi >= 2 * np.pi else phi
