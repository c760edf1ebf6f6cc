"""Resonant-pulse baselines: dynamical gates and single-loop geometric gates.

Both are sequences of square resonant pulses ``H = W e^{-i p}|0><1| + h.c.``
whose propagator after area ``Theta = W t`` is
``cos(Theta) I - i sin(Theta)(cos p sigma_x + sin p sigma_y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .algebra import IDENTITY, SIGMA_X, SIGMA_Y
from .paths import PhaseLaw, PulseSchedule, Segment

PI = math.pi

# pulses listed in time order as (area, phase)
DG_SEQUENCES = {
    "S": [(PI / 4, 0.0), (PI / 4, 3 * PI / 2), (PI / 4, PI)],
    "H": [(PI / 2, 0.0), (PI / 4, 3 * PI / 2)],
}
SLNGQC_SEQUENCES = {
    "S": [(PI / 2, -PI / 2), (PI / 2, 3 * PI / 4)],
    "H": [(PI / 8, -PI / 2), (PI / 2, PI), (3 * PI / 8, -PI / 2)],
}

S_MATRIX = np.diag([1.0, 1j])
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
TARGETS = {"S": S_MATRIX, "H": H_MATRIX}


@dataclass(frozen=True)
class ResonantPulse:
    theta: float
    phase: float
    amplitude: float = 1.0

    @property
    def duration(self) -> float:
        return self.theta / self.amplitude


def resonant_unitary(p: ResonantPulse) -> np.ndarray:
    return (math.cos(p.theta) * IDENTITY
            - 1j * math.sin(p.theta) * (math.cos(p.phase) * SIGMA_X + math.sin(p.phase) * SIGMA_Y))


def _sequence(table: dict, gate: str, omega: float, scheme: str) -> PulseSchedule:
    if gate not in table:
        raise ValueError(f"unknown gate {gate!r}; baselines exist for {sorted(table)}")
    if not omega > 0:
        raise ValueError("omega must be positive")
    segs = tuple(Segment(area / omega, omega, PhaseLaw("constant", phase))
                 for area, phase in table[gate])
    return PulseSchedule(segs, omega, None, scheme, {"gate": gate})


def dg_sequence(gate: str, omega: float) -> PulseSchedule:
    return _sequence(DG_SEQUENCES, gate, omega, "dg")


def slngqc_sequence(gate: str, omega: float) -> PulseSchedule:
    return _sequence(SLNGQC_SEQUENCES, gate, omega, "slngqc")


def composed_unitary(schedule: PulseSchedule) -> np.ndarray:
    """Product of the resonant propagators, later pulses on the left."""
    pulses = [resonant_unitary(ResonantPulse(s.amplitude * s.duration, s.phase_law.offset))
              for s in schedule.segments]
    return reduce(lambda acc, u: u @ acc, pulses, IDENTITY.copy())
