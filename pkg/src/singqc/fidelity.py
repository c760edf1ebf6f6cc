"""State-averaged gate fidelities for single- and multi-qubit runs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lindblad import (CollapseChannel, ErrorModel, EvolutionConfig, evolve_density,
                       schedule_hamiltonian)
from .paths import PulseSchedule

SQ2 = math.sqrt(2.0)
SIX_STATES = np.array([
    [1, 0],
    [0, 1],
    [1 / SQ2, 1 / SQ2],
    [1 / SQ2, -1 / SQ2],
    [1 / SQ2, 1j / SQ2],
    [1 / SQ2, -1j / SQ2],
], dtype=complex)

# per-atom inputs for the multi-qubit average
ATOM_STATES = np.array([
    [1, 0],
    [0, 1],
    [1 / SQ2, 1 / SQ2],
    [1 / SQ2, -1j / SQ2],
], dtype=complex)


@dataclass(frozen=True)
class FidelityReport:
    value: float
    n_states: int
    sampled: bool = False
    seed: int | None = None
    stderr: float = 0.0
    population: int | None = None


def overlaps(rhos: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """``<t_j| rho_j |t_j>`` for each pair, real part."""
    return np.real(np.einsum("bi,bij,bj->b", targets.conj(), rhos, targets))


def single_qubit_fidelity(schedule: PulseSchedule, errors: ErrorModel = ErrorModel(),
                          channels: Sequence[CollapseChannel] = (), target=None,
                          cfg: EvolutionConfig | None = None) -> FidelityReport:
    """Average over the six axis states of ``<U psi| rho |U psi>``."""
    target = np.asarray(target, dtype=complex)
    source = schedule_hamiltonian(schedule, errors)
    rho0 = np.einsum("bi,bj->bij", SIX_STATES, SIX_STATES.conj())
    rhos = evolve_density(rho0, source, channels, (0.0, schedule.total_duration), cfg)
    ideal = SIX_STATES @ target.T
    vals = overlaps(rhos, ideal)
    return FidelityReport(float(np.mean(vals)), len(SIX_STATES))


def product_state(indices: Sequence[int]) -> np.ndarray:
    """Tensor product of per-atom input states on the qubit space ``2^(N+1)``."""
    psi = np.ones(1, dtype=complex)
    for i in indices:
        psi = np.kron(psi, ATOM_STATES[i])
    return psi


def product_state_indices(n_atoms: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(len(ATOM_STATES)), repeat=n_atoms))


def choose_states(n_atoms: int, sample: int | None, seed: int = 0) -> list[int]:
    """Sorted state labels: all of them, or a seeded sample without replacement."""
    population = len(ATOM_STATES) ** n_atoms
    if sample is None:
        return list(range(population))
    if sample > population or sample < 1:
        raise ValueError(f"sample size {sample} not in [1, {population}]")
    rng = np.random.default_rng(seed)
    return sorted(int(i) for i in rng.choice(population, size=sample, replace=False))


def summarize(values: np.ndarray, population: int, sampled: bool, seed) -> FidelityReport:
    """Mean with the finite-population standard error of a sample without replacement."""
    k = len(values)
    mean = float(np.sum(values) / k)
    stderr = 0.0
    if sampled and k > 1 and population > 1:
        fpc = (population - k) / (population - 1)
        stderr = float(np.std(values, ddof=1) / math.sqrt(k) * math.sqrt(fpc))
    return FidelityReport(mean, k, sampled, seed if sampled else None, stderr, population)


def multiqubit_fidelity(system, schedule: PulseSchedule, errors=None, channels=None,
                        target=None, sample: int | None = None, seed: int = 0,
                        cfg: EvolutionConfig | None = None, jobs: int = 1,
                        levels: int = 3) -> FidelityReport:
    """Average of ``<U' psi| rho' |U' psi>`` over product inputs of the Rydberg register.

    See :func:`singqc.rydberg.gate_fidelity`; this wrapper keeps the fidelity
    entry points in one module.
    """
    from .rydberg import gate_fidelity

    return gate_fidelity(system, schedule, errors=errors, channels=channels, target=target,
                         sample=sample, seed=seed, cfg=cfg, jobs=jobs, levels=levels)
