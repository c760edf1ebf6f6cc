"""Fixed-step RK4 evolution of density matrices and pure states.

The master equation is integrated in its vectorised (row-major) form

    d vec(rho)/dt = L(t) vec(rho),
    L = -i (H x 1 - 1 x H^T) + sum_j rate_j (A x A* - 1/2 A^dag A x 1 - 1/2 1 x (A^dag A)^T),

i.e. ``rho' = -i[H, rho] + 1/2 sum_j rate_j (2 A rho A^dag - A^dag A rho - rho A^dag A)``.
Hamiltonians are linear combinations ``sum_k f_k(t) A_k`` of fixed operators,
so ``L(t)`` is assembled by rescaling precomputed sparse data each stage.
Several initial states are evolved together as columns of one array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import SIGMA_Z
from .paths import PulseSchedule

TRACE_DRIFT_LIMIT = 1e-6
NORM_DRIFT_LIMIT = 1e-6
# dt = fraction / ||H||; 0.05 is the loosest allowed, 0.02 keeps dt-halving shifts below 1e-7
DEFAULT_STEP_FRACTION = 0.02


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ErrorModel:
    epsilon: float = 0.0
    eta: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.epsilon, self.eta, self.chi)):
            raise ValueError("error fractions must be finite")


@dataclass(frozen=True)
class CollapseChannel:
    """Lindblad channel ``rate * (A rho A^dag - {A^dag A, rho}/2)``.

    With ``jump=False`` only the anticommutator is kept: the decayed population
    leaves the modelled space (decay into an untracked level).
    """

    operator: object
    rate: float
    jump: bool = True

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("collapse rate must be non-negative")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    convergence_tol: float = 1e-7

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def for_bound(cls, norm_bound: float, rates: float = 0.0, fraction: float = DEFAULT_STEP_FRACTION):
        """Step rule ``dt = fraction / (||H|| bound + sum of rates)``."""
        return cls(fraction / (norm_bound + rates))

    def halved(self) -> "EvolutionConfig":
        return EvolutionConfig(self.dt / 2, self.convergence_tol)


def perturbed_hamiltonian(h_ideal: np.ndarray, omega: float, phase: float,
                          errors: ErrorModel) -> np.ndarray:
    """Inject phase, control and detuning errors into a 2x2 drive Hamiltonian.

    ``phase`` is the drive phase at this instant, so ``h_ideal[0, 1] = a e^{-i phase}``.
    """
    h = np.asarray(h_ideal, dtype=complex)
    amplitude = h[0, 1] * np.exp(1j * phase)
    drive = amplitude * np.exp(-1j * (1 + errors.chi) * phase)
    rebuilt = np.array([[h[0, 0], drive], [np.conj(drive), h[1, 1]]], dtype=complex)
    return (1 + errors.epsilon) * rebuilt + 0.5 * errors.eta * omega * SIGMA_Z


class LinearCombination:
    """Sparse matrices ``sum_k c_k M_k`` sharing one precomputed sparsity pattern."""

    def __init__(self, matrices: Sequence):
        mats = [sp.coo_matrix(m) for m in matrices]
        self.shape = mats[0].shape
        n = self.shape[1]
        keys = [m.row.astype(np.int64) * n + m.col for m in mats]
        union = np.unique(np.concatenate(keys)) if keys else np.zeros(0, np.int64)
        self.table = np.zeros((len(mats), union.size), dtype=complex)
        for k, (m, key) in enumerate(zip(mats, keys)):
            np.add.at(self.table[k], np.searchsorted(union, key), m.data)
        rows = union // n
        indptr = np.zeros(self.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=self.shape[0]), out=indptr[1:])
        self._matrix = sp.csr_matrix(
            (np.zeros(union.size, dtype=complex), (union % n).astype(np.int32), indptr),
            shape=self.shape,
        )

    def at(self, coeffs) -> sp.csr_matrix:
        self._matrix.data = np.asarray(coeffs, dtype=complex) @ self.table
        return self._matrix


class TermHamiltonian:
    """Piecewise-smooth ``H(t) = sum_k f_k(t) A_k``.

    ``coefficients(t, tag)`` returns the ``f_k`` for time ``t`` inside the piece
    labelled ``tag``; pieces are ``(t_start, t_end, tag)`` and right-closed.
    """

    def __init__(self, operators: Sequence, coefficients: Callable, pieces, norm_bound: float):
        self.operators = list(operators)
        self.coefficients = coefficients
        self.pieces = [(float(a), float(b), tag) for a, b, tag in pieces if b > a]
        self.norm_bound = float(norm_bound)
        self.dim = self.operators[0].shape[0]
        self._dense = not any(sp.issparse(a) for a in self.operators)

    def _tag(self, t: float):
        if not self.pieces:
            return None
        for a, b, tag in self.pieces:
            if t <= b:
                return tag
        return self.pieces[-1][2]

    def __call__(self, t: float):
        coeffs = self.coefficients(t, self._tag(t))
        if self._dense:
            return sum(c * np.asarray(a, dtype=complex) for c, a in zip(coeffs, self.operators))
        return sp.csr_matrix(sum(c * sp.csr_matrix(a) for c, a in zip(coeffs, self.operators)))


class CallableHamiltonian(TermHamiltonian):
    """Wrap an arbitrary ``t -> H(t)`` as a single-term source."""

    def __init__(self, fn: Callable, t_span=None, norm_bound: float | None = None):
        self.fn = fn
        self.pieces = [] if t_span is None else [(float(t_span[0]), float(t_span[1]), None)]
        self.norm_bound = norm_bound if norm_bound is not None else np.inf
        self.operators = None
        self.dim = np.shape(fn(0.0 if t_span is None else t_span[0]))[0]

    def __call__(self, t: float):
        return self.fn(t)


def as_source(hamiltonian) -> TermHamiltonian:
    if isinstance(hamiltonian, TermHamiltonian):
        return hamiltonian
    if callable(hamiltonian):
        return CallableHamiltonian(hamiltonian)
    h = np.asarray(hamiltonian, dtype=complex)
    return TermHamiltonian([h], lambda t, tag: (1.0,), [], float(np.linalg.norm(h, 2)))


def _identity(n: int):
    return sp.identity(n, dtype=complex, format="csr")


def commutator_superop(h) -> sp.csr_matrix:
    h = sp.csr_matrix(h)
    eye = _identity(h.shape[0])
    return -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))


def dissipator_superop(channels: Sequence[CollapseChannel], dim: int) -> sp.csr_matrix:
    eye = _identity(dim)
    out = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for ch in channels:
        if ch.rate == 0:
            continue
        a = sp.csr_matrix(ch.operator)
        ada = (a.conj().T @ a).tocsr()
        term = -0.5 * (sp.kron(ada, eye) + sp.kron(eye, ada.T))
        if ch.jump:
            term = term + sp.kron(a, a.conj())
        out = out + ch.rate * term
    return out.tocsr()


def liouvillian(h, channels: Sequence[CollapseChannel] = ()) -> sp.csr_matrix:
    return (commutator_superop(h) + dissipator_superop(channels, h.shape[0])).tocsr()


def _intervals(source: TermHamiltonian, t_span):
    t0, t1 = map(float, t_span)
    if not source.pieces:
        return [(t0, t1, None)]
    out = []
    for a, b, tag in source.pieces:
        lo, hi = max(a, t0), min(b, t1)
        if hi > lo:
            out.append((lo, hi, tag))
    return out


class _Generator:
    """Evaluates ``L(t)`` (or ``-iH(t)``) for a source, reusing precomputed data."""

    def __init__(self, source: TermHamiltonian, channels, density: bool):
        self.source = source
        self.density = density
        self.channels = list(channels)
        dim = source.dim
        if source.operators is not None:
            if density:
                mats = [dissipator_superop(self.channels, dim)]
                mats += [commutator_superop(a) for a in source.operators]
            else:
                mats = [sp.csr_matrix((dim, dim), dtype=complex)]
                mats += [-1j * sp.csr_matrix(a) for a in source.operators]
            self.combo = LinearCombination(mats)
        else:
            self.combo = None
            self.diss = dissipator_superop(self.channels, dim) if density else None

    def __call__(self, t: float, tag):
        if self.combo is not None:
            coeffs = self.source.coefficients(t, tag)
            return self.combo.at(np.concatenate(([1.0], coeffs)))
        h = sp.csr_matrix(self.source(t))
        if self.density:
            return commutator_superop(h) + self.diss
        return -1j * h


def _rk4(gen: _Generator, y: np.ndarray, t_span, dt: float, after_step, source):
    for a, b, tag in _intervals(source, t_span):
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / n
        for i in range(n):
            t = a + i * h
            l0 = gen(t, tag)
            k1 = l0 @ y
            lm = gen(t + 0.5 * h, tag)
            k2 = lm @ (y + 0.5 * h * k1)
            k3 = lm @ (y + 0.5 * h * k2)
            l1 = gen(t + h, tag)
            k4 = l1 @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            y = after_step(y)
    return y


def evolve_density(rho0, hamiltonian, channels: Sequence[CollapseChannel] = (),
                   t_span=(0.0, 1.0), cfg: EvolutionConfig | None = None) -> np.ndarray:
    """Integrate the master equation from ``t_span[0]`` to ``t_span[1]``.

    ``rho0`` is one ``(d, d)`` matrix or a stack ``(B, d, d)``; the result has the
    same shape. Hermiticity is restored after every step.
    """
    source = as_source(hamiltonian)
    if cfg is None:
        if not np.isfinite(source.norm_bound):
            raise ValueError("cfg is required when the Hamiltonian has no norm bound")
        cfg = EvolutionConfig.for_bound(source.norm_bound, sum(c.rate for c in channels))
    rho0 = np.asarray(rho0, dtype=complex)
    single = rho0.ndim == 2
    stack = rho0[None] if single else rho0
    b, d, _ = stack.shape
    y = np.ascontiguousarray(stack.reshape(b, d * d).T)
    transpose = np.arange(d * d).reshape(d, d).T.ravel()
    diag = np.arange(d) * (d + 1)
    trace0 = y[diag].sum(axis=0).real
    lossy = any(not c.jump and c.rate > 0 for c in channels)

    def after_step(v):
        v = 0.5 * (v + v[transpose].conj())
        tr = v[diag].sum(axis=0).real
        bad = (tr > trace0 + TRACE_DRIFT_LIMIT) | (tr < -TRACE_DRIFT_LIMIT)
        if not lossy:
            bad |= np.abs(tr - trace0) > TRACE_DRIFT_LIMIT
        # RK4 conserves the trace even while diverging; purity catches that
        bad |= np.einsum("ij,ij->j", v.real, v.real) + np.einsum("ij,ij->j", v.imag, v.imag) \
            > trace0 ** 2 + TRACE_DRIFT_LIMIT
        if bad.any() or not np.isfinite(v).all():
            raise IntegrationError(
                f"trace or purity drift beyond {TRACE_DRIFT_LIMIT} "
                f"(trace error {np.max(np.abs(tr - trace0)):.3e}); "
                f"reduce dt (currently {cfg.dt:.3e})")
        return v

    gen = _Generator(source, channels, density=True)
    y = _rk4(gen, y, t_span, cfg.dt, after_step, source)
    out = y.T.reshape(b, d, d)
    return out[0] if single else out


def evolve_pure(psi0, hamiltonian, t_span=(0.0, 1.0), cfg: EvolutionConfig | None = None):
    """Integrate ``i psi' = H psi``; ``psi0`` is ``(d,)`` or a stack ``(B, d)``."""
    source = as_source(hamiltonian)
    if cfg is None:
        if not np.isfinite(source.norm_bound):
            raise ValueError("cfg is required when the Hamiltonian has no norm bound")
        cfg = EvolutionConfig.for_bound(source.norm_bound)
    psi0 = np.asarray(psi0, dtype=complex)
    single = psi0.ndim == 1
    y = np.ascontiguousarray((psi0[None] if single else psi0).T)

    def after_step(v):
        norms = np.linalg.norm(v, axis=0)
        if np.any(np.abs(norms - 1.0) > NORM_DRIFT_LIMIT) or not np.isfinite(norms).all():
            raise IntegrationError(f"norm drift {np.max(np.abs(norms - 1)):.3e}; reduce dt")
        return v / norms

    gen = _Generator(source, (), density=False)
    y = _rk4(gen, y, t_span, cfg.dt, after_step, source)
    return y[:, 0] if single else y.T


def propagator(hamiltonian, t_span, cfg: EvolutionConfig | None = None) -> np.ndarray:
    """Closed-system propagator, built column by column from the basis states."""
    source = as_source(hamiltonian)
    basis = np.eye(source.dim, dtype=complex)
    return evolve_pure(basis, source, t_span, cfg).T


# schedule-driven single-qubit sources ------------------------------------------

_RAISE = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
_LOWER = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


def schedule_hamiltonian(schedule: PulseSchedule, errors: ErrorModel = ErrorModel()) -> TermHamiltonian:
    """Error-injected Hamiltonian source for a single-qubit schedule.

    Equivalent at every instant to ``perturbed_hamiltonian(hamiltonian_at(...))``.
    """
    eps, eta, chi = errors.epsilon, errors.eta, errors.chi
    omega = schedule.omega
    pieces = [(t0, t1, (seg, t0)) for _, t0, t1, seg in schedule.intervals()]

    def coefficients(t, tag):
        seg, t0 = tag
        phase = (1 + chi) * seg.phase_law.value(t - t0)
        c = (1 + eps) * seg.amplitude * np.exp(-1j * phase)
        return (c, np.conj(c), (1 + eps) * seg.detuning + 0.5 * eta * omega)

    bound = max(
        math.hypot((1 + abs(eps)) * abs(seg.amplitude), (1 + abs(eps)) * abs(seg.detuning)
                   + 0.5 * abs(eta) * omega)
        for _, _, _, seg in schedule.intervals()
    )
    return TermHamiltonian([_RAISE, _LOWER, SIGMA_Z], coefficients, pieces, bound)


def qubit_channels(gamma_minus: float = 0.0, gamma_z: float = 0.0) -> list[CollapseChannel]:
    """Amplitude damping ``|0><1|`` and dephasing ``sigma_z`` channels."""
    from .algebra import SIGMA_MINUS

    return [CollapseChannel(SIGMA_MINUS, gamma_minus), CollapseChannel(SIGMA_Z, gamma_z)]
