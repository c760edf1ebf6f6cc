"""Rydberg-blockade register: N control atoms plus one target atom.

Each atom carries the levels |0>, |1>, |r>, |2> (indices 0..3); controls come
first in the tensor ordering and the target is last. The control atoms are
driven on |0> <-> |r> with ``omega_c_bar cos(omega t)``; the target atom runs
the single-qubit schedule on its |1> <-> |r> pair, so the |1...11>, |1...1r>
doublet follows the two-level geometric loop while every other input is
blockaded.

The target drive is written in the frame where the schedule's detuning is a
phase factor on the coupling: ``c(t) e^{i D(t)} |1><r|_t + h.c.`` with
``D(t) = int 2 * detuning``. The geometric loop runs in the frame rotated by
``exp(-i int h dt)``, ``h = D'/2 (|1..1r><1..1r| - |1..11><1..11|)``; fidelities
compare against the target gate expressed in the simulation frame.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .fidelity import ATOM_STATES, FidelityReport, choose_states, product_state_indices, summarize
from .lindblad import (CollapseChannel, EvolutionConfig, TermHamiltonian, evolve_density,
                       evolve_pure, schedule_hamiltonian)
from .paths import GateParams, PhaseLaw, PulseSchedule, Segment, hamiltonian_at, synthesize

TWO_PI = 2 * math.pi
LEVEL_0, LEVEL_1, LEVEL_R, LEVEL_2 = 0, 1, 2, 3
MAX_CONTROLS = 4
# converged to ~1e-8 in F' at the default point; 0.02 costs 2.5x for no visible gain
STEP_FRACTION = 0.05
# the computational phase flip of C_N Z on the |11>, |1r> doublet
CZ_PARAMS = GateParams(0.0, 0.0, math.pi)


@dataclass(frozen=True)
class RydbergSpec:
    n_controls: int = 1
    omega_c_bar: float = TWO_PI * 36e6
    omega: float = TWO_PI * 400e6
    omega_t_amp: float = TWO_PI * 0.75e6
    v_c: float = TWO_PI * 400e6 / 7
    v_t: float = TWO_PI * 400e6
    tau_r: float = 200e-6

    def __post_init__(self):
        if self.n_controls < 1:
            raise ValueError("at least one control atom is required")
        if self.n_controls > MAX_CONTROLS:
            raise ValueError(f"n_controls > {MAX_CONTROLS} exceeds the dense-state budget")
        if self.tau_r <= 0:
            raise ValueError("Rydberg lifetime must be positive")

    @property
    def n_atoms(self) -> int:
        return self.n_controls + 1

    @property
    def decay_rate(self) -> float:
        return 1.0 / self.tau_r if math.isfinite(self.tau_r) else 0.0

    def check_regime(self, ratio: float = 10.0) -> None:
        """Strong-interaction and strong-control-drive conditions of the blockade."""
        if self.v_t < ratio * max(self.omega_c_bar, self.omega_t_amp):
            raise ValueError("v_t must dominate both drive amplitudes")
        if self.omega_c_bar < ratio * self.omega_t_amp:
            raise ValueError("omega_c_bar must dominate the target amplitude")


@dataclass(frozen=True)
class RydbergErrors:
    epsilon_c: float = 0.0
    epsilon_t: float = 0.0
    eta_prime: float = 0.0


def _single(levels: int, i: int, j: int) -> sp.csr_matrix:
    m = sp.lil_matrix((levels, levels), dtype=complex)
    m[i, j] = 1.0
    return m.tocsr()


def embed(op, atom: int, n_atoms: int, levels: int = 4) -> sp.csr_matrix:
    """Place a single-atom operator on ``atom`` of an ``n_atoms`` register."""
    left = sp.identity(levels ** atom, dtype=complex, format="csr")
    right = sp.identity(levels ** (n_atoms - atom - 1), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


@dataclass
class RegisterOperators:
    control_drive: sp.csr_matrix  # sum_k |r><0|_k + h.c.
    target_raise: sp.csr_matrix  # |1><r|_t, the image of |0><1|
    target_lower: sp.csr_matrix  # |r><1|_t
    interaction: sp.csr_matrix  # H_V
    rydberg_number: sp.csr_matrix  # sum over all atoms of |r><r|
    levels: int = 4
    dim: int = field(init=False)

    def __post_init__(self):
        self.dim = self.control_drive.shape[0]


def register_operators(spec: RydbergSpec, levels: int = 4) -> RegisterOperators:
    if levels not in (3, 4):
        raise ValueError("levels must be 3 (|2> pruned) or 4")
    n = spec.n_atoms
    target = n - 1
    pr = [embed(_single(levels, LEVEL_R, LEVEL_R), k, n, levels) for k in range(n)]
    drive = sum(embed(_single(levels, LEVEL_R, LEVEL_0) + _single(levels, LEVEL_0, LEVEL_R),
                      k, n, levels) for k in range(spec.n_controls))
    interaction = sp.csr_matrix((levels ** n, levels ** n), dtype=complex)
    for j in range(spec.n_controls):
        for k in range(j + 1, spec.n_controls):
            interaction = interaction + spec.v_c * (pr[j] @ pr[k])
        interaction = interaction + spec.v_t * (pr[j] @ pr[target])
    return RegisterOperators(
        control_drive=sp.csr_matrix(drive),
        target_raise=embed(_single(levels, LEVEL_1, LEVEL_R), target, n, levels),
        target_lower=embed(_single(levels, LEVEL_R, LEVEL_1), target, n, levels),
        interaction=interaction.tocsr(),
        rydberg_number=sp.csr_matrix(sum(pr)),
        levels=levels,
    )


def target_schedule(spec: RydbergSpec, scheme: str = "singqc",
                    params: GateParams = CZ_PARAMS, pad: bool = True) -> PulseSchedule:
    """Target-atom schedule; ``dg`` is one resonant pulse of area pi (a 2pi Rabi cycle).

    With ``pad`` the schedule gets an idle tail so the control drive stops on a
    whole number of half periods of ``omega``; this cancels the micromotion
    population that ``cos(omega t)`` otherwise leaves in |r> of idle controls.
    """
    if scheme == "singqc":
        sched = synthesize(params, spec.omega_t_amp)
    elif scheme == "dg":
        w = spec.omega_t_amp
        sched = PulseSchedule((Segment(math.pi / w, w, PhaseLaw("constant", 0.0)),), w, None, "dg")
    else:
        raise ValueError(f"unknown target scheme {scheme!r}")
    return pad_to_drive_period(spec, sched) if pad else sched


def pad_to_drive_period(spec: RydbergSpec, schedule: PulseSchedule) -> PulseSchedule:
    half = math.pi / spec.omega
    total = schedule.total_duration
    extra = math.ceil(total / half - 1e-9) * half - total
    if extra <= 0:
        return schedule
    idle = Segment(extra, 0.0, PhaseLaw("constant", 0.0))
    return replace(schedule, segments=tuple(schedule.segments) + (idle,))


def frame_phase(schedule: PulseSchedule, t: float) -> float:
    """``D(t) = int_0^t 2 * detuning`` along the schedule."""
    total = 0.0
    for _, t0, t1, seg in schedule.intervals():
        total += 2.0 * seg.detuning * (min(t, t1) - t0)
        if t <= t1:
            break
    return total


def _locate_segment(schedule: PulseSchedule):
    pieces = []
    acc = 0.0
    for _, t0, t1, seg in schedule.intervals():
        pieces.append((t0, t1, (seg, t0, acc)))
        acc += 2.0 * seg.detuning * seg.duration
    return pieces


def rydberg_hamiltonian(spec: RydbergSpec, schedule: PulseSchedule,
                        errors: RydbergErrors = RydbergErrors(), levels: int = 4) -> TermHamiltonian:
    """Full register Hamiltonian as a time-dependent source."""
    ops = register_operators(spec, levels)
    static = (ops.interaction + errors.eta_prime * spec.omega_t_amp * ops.rydberg_number).tocsr()
    amp_c = (1 + errors.epsilon_c) * spec.omega_c_bar
    scale_t = 1 + errors.epsilon_t

    def coefficients(t, tag):
        seg, t0, acc = tag
        el = t - t0
        c = scale_t * seg.drive(el) * np.exp(1j * (acc + 2.0 * seg.detuning * el))
        return (1.0, amp_c * math.cos(spec.omega * t), c, np.conj(c))

    max_t = max((abs(s.amplitude) for s in schedule.segments), default=0.0)
    bound_matrix = (abs(static) + abs(amp_c) * abs(ops.control_drive)
                    + abs(scale_t) * max_t * (abs(ops.target_raise) + abs(ops.target_lower)))
    bound = float(np.max(np.asarray(abs(bound_matrix).sum(axis=1)))) if bound_matrix.nnz else 0.0
    return TermHamiltonian(
        [static, ops.control_drive, ops.target_raise, ops.target_lower],
        coefficients, _locate_segment(schedule), bound,
    )


def total_hamiltonian(spec: RydbergSpec, schedule: PulseSchedule,
                      errors: RydbergErrors = RydbergErrors(), t: float = 0.0,
                      levels: int = 4) -> sp.csr_matrix:
    return rydberg_hamiltonian(spec, schedule, errors, levels)(t)


def effective_hamiltonian(spec: RydbergSpec, schedule: PulseSchedule, t: float) -> np.ndarray:
    """Two-level model on (|1..11>, |1..1r>) in the rotated frame.

    The drive of ``schedule`` maps onto the doublet and ``D'/2 = detuning`` gives
    the diagonal ``(D'/2)(|11><11| - |1r><1r|)``.
    """
    return hamiltonian_at(schedule, t)


def collapse_channels(spec: RydbergSpec, levels: int = 4) -> list[CollapseChannel]:
    """Rydberg decay of every atom into |0>, |1> (rate G/8 each) and |2> (3G/4)."""
    n = spec.n_atoms
    g = spec.decay_rate
    out = []
    for k in range(n):
        out.append(CollapseChannel(embed(_single(levels, LEVEL_0, LEVEL_R), k, n, levels), g / 8))
        out.append(CollapseChannel(embed(_single(levels, LEVEL_1, LEVEL_R), k, n, levels), g / 8))
        if levels == 4:
            out.append(CollapseChannel(embed(_single(levels, LEVEL_2, LEVEL_R), k, n, levels),
                                       3 * g / 4))
        else:
            # |2> is never coupled back, so decay into it is pure loss
            out.append(CollapseChannel(embed(_single(levels, LEVEL_R, LEVEL_R), k, n, levels),
                                       3 * g / 4, jump=False))
    return out


def computational_indices(n_atoms: int, levels: int) -> np.ndarray:
    """Register index of each qubit basis state, qubit label order."""
    out = []
    for q in range(2 ** n_atoms):
        bits = [(q >> (n_atoms - 1 - k)) & 1 for k in range(n_atoms)]
        out.append(reduce(lambda acc, b: acc * levels + b, bits, 0))
    return np.array(out)


def cz_target(n_atoms: int) -> np.ndarray:
    d = np.ones(2 ** n_atoms, dtype=complex)
    d[-1] = -1.0
    return np.diag(d)


def frame_correction(schedule: PulseSchedule, n_atoms: int) -> np.ndarray:
    """Rotated-to-simulation frame map ``exp(-i int h)`` on the qubit space."""
    d = np.ones(2 ** n_atoms, dtype=complex)
    d[-1] = np.exp(0.5j * frame_phase(schedule, schedule.total_duration))
    return np.diag(d)


def _embed_states(qubit_states: np.ndarray, n_atoms: int, levels: int) -> np.ndarray:
    out = np.zeros((qubit_states.shape[0], levels ** n_atoms), dtype=complex)
    out[:, computational_indices(n_atoms, levels)] = qubit_states
    return out


def _evolve_chunk(args):
    spec, schedule, errors, channels_on, psi, cfg, levels = args
    source = rydberg_hamiltonian(spec, schedule, errors, levels)
    channels = collapse_channels(spec, levels) if channels_on else []
    if cfg is None:
        cfg = EvolutionConfig.for_bound(source.norm_bound, sum(c.rate for c in channels),
                                       fraction=STEP_FRACTION)
    rho0 = np.einsum("bi,bj->bij", psi, psi.conj())
    return evolve_density(rho0, source, channels, (0.0, schedule.total_duration), cfg)


def gate_fidelity(spec: RydbergSpec, schedule: PulseSchedule, errors=None, channels=None,
                  target=None, sample: int | None = None, seed: int = 0,
                  cfg: EvolutionConfig | None = None, jobs: int = 1, levels: int = 3):
    """Product-state averaged fidelity of the register against ``target``.

    ``target`` acts on the qubit space (default C_N Z). It is mapped into the
    simulation frame before the overlaps are taken; population left in |r> or
    |2> counts as loss. ``channels`` is True/False for Rydberg decay on/off.
    """
    errors = errors or RydbergErrors()
    channels_on = True if channels is None else bool(channels)
    n = spec.n_atoms
    target = cz_target(n) if target is None else np.asarray(target, dtype=complex)
    target = frame_correction(schedule, n) @ target
    labels = product_state_indices(n)
    chosen = choose_states(n, sample, seed)
    qubit_in = np.array([_product(labels[j]) for j in chosen])
    psi = _embed_states(qubit_in, n, levels)
    ideal = _embed_states(qubit_in @ target.T, n, levels)

    chunks = np.array_split(np.arange(len(chosen)), max(1, min(jobs, len(chosen))))
    tasks = [(spec, schedule, errors, channels_on, psi[c], cfg, levels) for c in chunks]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evolve_chunk, tasks))
    else:
        results = [_evolve_chunk(t) for t in tasks]
    rhos = np.concatenate(results, axis=0)
    vals = np.real(np.einsum("bi,bij,bj->b", ideal.conj(), rhos, ideal))
    return summarize(vals, len(labels), sample is not None, seed)


def _product(indices) -> np.ndarray:
    psi = np.ones(1, dtype=complex)
    for i in indices:
        psi = np.kron(psi, ATOM_STATES[i])
    return psi


@dataclass(frozen=True)
class Comparison:
    max_population_deviation: float
    final_population_full: float
    final_population_effective: float
    phase_full: float
    phase_effective: float

    @property
    def phase_difference(self) -> float:
        """Wrapped into (-pi, pi]."""
        d = (self.phase_full - self.phase_effective) % (2 * math.pi)
        return d - 2 * math.pi if d > math.pi else d


def compare_full_vs_effective(spec: RydbergSpec, bits, schedule: PulseSchedule,
                              samples: int = 101, errors: RydbergErrors = RydbergErrors(),
                              cfg: EvolutionConfig | None = None, levels: int = 3) -> Comparison:
    """Closed-system populations of computational state ``bits`` in both models.

    The effective model evolves only the all-ones input; every other input is
    frozen by the blockade. Phases are compared in the rotated frame at the end.
    """
    n = spec.n_atoms
    bits = tuple(int(b) for b in bits)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be {n} zeros/ones")
    q = int("".join(map(str, bits)), 2)
    idx = computational_indices(n, levels)[q]
    full_src = rydberg_hamiltonian(spec, schedule, errors, levels)
    full_cfg = cfg or EvolutionConfig.for_bound(full_src.norm_bound, fraction=STEP_FRACTION)
    all_ones = all(bits)
    eff_src = schedule_hamiltonian(schedule)
    eff_cfg = EvolutionConfig.for_bound(max(eff_src.norm_bound, 1e-300))

    psi_full = np.zeros(full_src.dim, dtype=complex)
    psi_full[idx] = 1.0
    psi_eff = np.array([1.0, 0.0], dtype=complex)
    times = np.linspace(0.0, schedule.total_duration, samples)
    worst = 0.0
    for a, b in zip(times[:-1], times[1:]):
        psi_full = evolve_pure(psi_full, full_src, (a, b), full_cfg)
        if all_ones:
            psi_eff = evolve_pure(psi_eff, eff_src, (a, b), eff_cfg)
        worst = max(worst, abs(abs(psi_full[idx]) ** 2 - abs(psi_eff[0]) ** 2))
    rotated = psi_full[idx] * np.exp(-0.5j * frame_phase(schedule, schedule.total_duration)) \
        if all_ones else psi_full[idx]
    return Comparison(worst, float(abs(psi_full[idx]) ** 2), float(abs(psi_eff[0]) ** 2),
                      float(np.angle(rotated)), float(np.angle(psi_eff[0])))
