"""Pulse schedules for state-independent geometric single-qubit gates.

A schedule is a list of square-amplitude segments. Each segment drives

    H(t) = a e^{-i phase(t)} |0><1| + h.c. + detuning * sigma_z

with a signed amplitude ``a`` (``|a|`` is the common Rabi frequency) and
either a constant phase or a linear phase ramp. Path 1 and Path 2 are the two
loop families; both close the auxiliary vectors after four segments.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath

import numpy as np
from scipy.integrate import simpson

from .algebra import SIGMA_Z, bloch_angles, bloch_axis, rotation_unitary

DEFAULT_QUAD_STEPS = 4096


class Path(str, enum.Enum):
    PATH1 = "path1"
    PATH2 = "path2"


@dataclass(frozen=True)
class GateParams:
    """Geometric gate triple; the realised rotation is ``exp(-i gamma n.sigma)``."""

    theta0: float
    phi0: float
    gamma: float
    path: Path = Path.PATH1

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        if not 0.0 <= self.theta0 <= math.pi:
            raise ValueError(f"theta0 must lie in [0, pi], got {self.theta0}")
        if self.gamma < 0:
            raise ValueError("negative gamma is not supported")

    @property
    def axis(self) -> np.ndarray:
        return bloch_axis(self.theta0, self.phi0)

    def target_unitary(self) -> np.ndarray:
        # the auxiliary vector |mu_1> picks up the phase -gamma around the loop
        return rotation_unitary(-self.gamma, self.axis)


S_GATE = GateParams(0.0, 0.0, math.pi / 4)
T_GATE = GateParams(0.0, 0.0, math.pi / 8)
H_GATE = GateParams(math.pi / 4, 0.0, math.pi / 2)
X_LIKE_GATE = GateParams(math.pi / 2, 0.0, math.pi / 2)
NAMED_GATES = {"S": S_GATE, "T": T_GATE, "H": H_GATE, "X": X_LIKE_GATE}


@dataclass(frozen=True)
class PhaseLaw:
    kind: str = "constant"  # "constant" or "linear"
    offset: float = 0.0
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown phase law {self.kind!r}")

    def value(self, elapsed: float) -> float:
        if self.kind == "constant":
            return self.offset
        return self.offset + self.slope * elapsed

    @property
    def rate(self) -> float:
        return self.slope if self.kind == "linear" else 0.0


@dataclass(frozen=True)
class Segment:
    duration: float
    amplitude: float
    phase_law: PhaseLaw
    detuning: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("segment duration must be non-negative")

    def drive(self, elapsed: float) -> complex:
        """Coefficient of |0><1| at ``elapsed`` time into the segment."""
        return self.amplitude * np.exp(-1j * self.phase_law.value(elapsed))

    def hamiltonian(self, elapsed: float) -> np.ndarray:
        c = self.drive(elapsed)
        return np.array([[0.0, c], [np.conj(c), 0.0]], dtype=complex) + self.detuning * SIGMA_Z


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...]
    omega: float
    params: GateParams | None = None
    scheme: str = "singqc"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self) -> list[float]:
        return [0.0] + list(np.cumsum([s.duration for s in self.segments]))

    def intervals(self):
        """Yield ``(index, t_start, t_end, segment)`` for non-empty segments."""
        t = 0.0
        for i, seg in enumerate(self.segments):
            if seg.duration > 0:
                yield i, t, t + seg.duration, seg
            t += seg.duration

    def locate(self, t: float) -> tuple[int, float]:
        """Index of the active segment at ``t`` and its start time.

        Segments are right-closed; ``t = 0`` belongs to the first non-empty one.
        """
        tau = self.total_duration
        if t < 0 or t > tau * (1 + 1e-12) + 1e-300:
            raise ValueError(f"t={t} outside [0, {tau}]")
        last = None
        for i, t0, t1, _ in self.intervals():
            last = (i, t0)
            if t <= t1:
                return last
        if last is None:
            raise ValueError("schedule has no non-empty segment")
        return last


def derive_theta1(gamma: float) -> float:
    """Polar angle of the latitude loop for half rotation angle ``gamma``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return math.acos(math.pi / (gamma + math.pi))


def synthesize(params: GateParams, omega: float) -> PulseSchedule:
    if not omega > 0:
        raise ValueError("omega must be positive")
    theta0, phi0 = params.theta0, params.phi0
    theta1 = derive_theta1(params.gamma)
    cos1 = math.cos(theta1)

    if params.path is Path.PATH1:
        area1 = (theta1 - theta0) / 2
        amp2 = -omega
        area3 = -theta1 / 2
    else:
        area1 = (2 * math.pi - theta1 - theta0) / 2
        amp2 = omega
        area3 = -(2 * math.pi - theta1) / 2

    t2 = math.pi * math.sin(theta1) / omega
    slope = 2 * math.pi / (cos1 * t2) if t2 > 0 else 0.0
    phi_end = 2 * math.pi / cos1 + phi0

    segments = (
        Segment(abs(area1) / omega, math.copysign(omega, area1) if area1 else omega,
                PhaseLaw("constant", math.pi / 2 + phi0)),
        Segment(t2, amp2, PhaseLaw("linear", phi0, slope), omega * math.tan(theta1)),
        Segment(abs(area3) / omega, -omega, PhaseLaw("constant", math.pi / 2 + phi_end)),
        Segment(theta0 / (2 * omega), omega, PhaseLaw("constant", math.pi / 2 + phi0)),
    )
    return PulseSchedule(segments, omega, params, "singqc", {"theta1": theta1})


def hamiltonian_at(schedule: PulseSchedule, t: float) -> np.ndarray:
    i, t0 = schedule.locate(t)
    return schedule.segments[i].hamiltonian(t - t0)


def path_angles(schedule: PulseSchedule, t: float) -> tuple[float, float, float, float]:
    """Analytic ``(theta, phi, dtheta/dt, dphi/dt)`` of |mu_1> on a geometric schedule.

    Constant-phase segments move ``theta`` at rate ``2 * amplitude`` along the
    meridian ``phi = phase - pi/2``; ramp segments hold ``theta`` and follow the ramp.
    """
    if schedule.params is None or schedule.scheme != "singqc":
        raise ValueError("path angles are only defined for geometric schedules")
    theta = schedule.params.theta0
    phi = schedule.params.phi0
    for _, t0, t1, seg in schedule.intervals():
        dt = min(t, t1) - t0
        if seg.phase_law.kind == "constant":
            rate = 2.0 * seg.amplitude
            theta_now, phi_now = theta + rate * dt, seg.phase_law.offset - math.pi / 2
            dtheta, dphi = rate, 0.0
        else:
            theta_now, phi_now = theta, seg.phase_law.value(dt)
            dtheta, dphi = 0.0, seg.phase_law.rate
        if t <= t1:
            return theta_now, phi_now, dtheta, dphi
        theta, phi = theta_now, phi_now
    return theta, phi, 0.0, 0.0


def _segment_nodes(t0: float, t1: float, quad_steps: int) -> np.ndarray:
    n = quad_steps + (quad_steps % 2)
    return np.linspace(t0, t1, n + 1)


def _cross_integrand(schedule: PulseSchedule, quad_steps: int):
    """Yield ``(times, integrand)`` of the state-independence integral per segment.

    The integrand is ``exp(i A(t)) exp(-i phi) (i theta' + sin(theta) phi')`` with
    ``A(t) = int_0^t (1 - cos theta) phi' dt'``, evaluated analytically.
    """
    theta = schedule.params.theta0
    accumulated = 0.0
    for _, t0, t1, seg in schedule.intervals():
        ts = _segment_nodes(t0, t1, quad_steps)
        el = ts - t0
        if seg.phase_law.kind == "constant":
            rate = 2.0 * seg.amplitude
            th = theta + rate * el
            ph = np.full_like(ts, seg.phase_law.offset - math.pi / 2)
            a = np.full_like(ts, accumulated)
            f = np.exp(1j * (a - ph)) * (1j * rate)
            theta = theta + rate * seg.duration
        else:
            dphi = seg.phase_law.rate
            ph = seg.phase_law.value(el)
            a = accumulated + (1 - math.cos(theta)) * dphi * el
            f = np.exp(1j * (a - ph)) * math.sin(theta) * dphi
            th = np.full_like(ts, theta)
            accumulated = accumulated + (1 - math.cos(theta)) * dphi * seg.duration
        yield ts, f, th


def singqc_residual(schedule: PulseSchedule, quad_steps: int = DEFAULT_QUAD_STEPS) -> complex:
    """Composite-Simpson value of the state-independence integral; zero when satisfied."""
    if quad_steps < 16:
        raise ValueError("quad_steps must be at least 16")
    total = 0j
    for ts, f, _ in _cross_integrand(schedule, quad_steps):
        total += simpson(f.real, x=ts) + 1j * simpson(f.imag, x=ts)
    return complex(total)


def dynamical_phase(schedule: PulseSchedule, c1: complex, c2: complex,
                    quad_steps: int = DEFAULT_QUAD_STEPS) -> float:
    """Dynamical phase of ``c1|psi_1> + c2|psi_2>`` accumulated over the schedule.

    Only the cross term survives: ``Re[c1* c2 e^{iA} e^{-i phi}(i theta' + sin theta phi')]``.
    """
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1.0) > 1e-10:
        raise ValueError("(c1, c2) must be normalised")
    if quad_steps < 16:
        raise ValueError("quad_steps must be at least 16")
    w = np.conj(c1) * c2
    total = 0.0
    for ts, f, _ in _cross_integrand(schedule, quad_steps):
        total += simpson(np.real(w * f), x=ts)
    return float(total)


def auxiliary_vectors(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    mu1 = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
    mu2 = np.array([math.sin(theta / 2) * np.exp(-1j * phi), -math.cos(theta / 2)])
    return mu1, mu2


def bloch_trajectory(schedule: PulseSchedule, samples: int = 201, cfg=None):
    """Spherical coordinates ``(t, Theta, Phi)`` of |psi_1(t)> from closed-system evolution."""
    from .lindblad import EvolutionConfig, evolve_pure, schedule_hamiltonian

    if samples < 2:
        raise ValueError("samples must be at least 2")
    params = schedule.params or GateParams(0.0, 0.0, 0.0)
    psi, _ = auxiliary_vectors(params.theta0, params.phi0)
    source = schedule_hamiltonian(schedule)
    cfg = cfg or EvolutionConfig.for_bound(source.norm_bound)
    times = np.linspace(0.0, schedule.total_duration, samples)
    out = [(0.0, *bloch_angles(psi))]
    for a, b in zip(times[:-1], times[1:]):
        psi = evolve_pure(psi, source, (a, b), cfg)
        out.append((float(b), *bloch_angles(psi)))
    return out


def broken_schedule(schedule: PulseSchedule, slope_factor: float = 0.5) -> PulseSchedule:
    """Copy of ``schedule`` with every phase-ramp slope scaled; breaks loop closure."""
    segs = tuple(
        replace(s, phase_law=replace(s.phase_law, slope=s.phase_law.slope * slope_factor))
        if s.phase_law.kind == "linear" else s
        for s in schedule.segments
    )
    return replace(schedule, segments=segs)


# serialization ---------------------------------------------------------------

def schedule_to_dict(schedule: PulseSchedule) -> dict:
    doc = {
        "scheme": schedule.scheme,
        "omega_rad_per_s": schedule.omega,
        "total_duration_s": schedule.total_duration,
        "segments": [
            {
                "duration_s": s.duration,
                "amplitude_rad_per_s": s.amplitude,
                "phase_law": {
                    "kind": s.phase_law.kind,
                    "offset_rad": s.phase_law.offset,
                    "slope_rad_per_s": s.phase_law.slope,
                },
                "detuning_rad_per_s": s.detuning,
            }
            for s in schedule.segments
        ],
    }
    if schedule.params is not None:
        p = schedule.params
        doc["gate"] = {"theta0": p.theta0, "phi0": p.phi0, "gamma": p.gamma, "path": p.path.value}
    if schedule.meta:
        doc["meta"] = dict(schedule.meta)
    return doc


def schedule_from_dict(doc: dict) -> PulseSchedule:
    segs = tuple(
        Segment(
            float(s["duration_s"]),
            float(s["amplitude_rad_per_s"]),
            PhaseLaw(s["phase_law"]["kind"], float(s["phase_law"]["offset_rad"]),
                     float(s["phase_law"].get("slope_rad_per_s", 0.0))),
            float(s.get("detuning_rad_per_s", 0.0)),
        )
        for s in doc["segments"]
    )
    params = None
    if "gate" in doc:
        g = doc["gate"]
        params = GateParams(g["theta0"], g["phi0"], g["gamma"], Path(g.get("path", "path1")))
    return PulseSchedule(segs, float(doc["omega_rad_per_s"]), params, doc.get("scheme", "singqc"),
                         dict(doc.get("meta", {})))


def save_schedule(schedule: PulseSchedule, path) -> None:
    FsPath(path).write_text(json.dumps(schedule_to_dict(schedule), indent=2) + "\n")


def load_schedule(path) -> PulseSchedule:
    return schedule_from_dict(json.loads(FsPath(path).read_text()))
