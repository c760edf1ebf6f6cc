"""Parameter sweeps over fidelity scenarios and their CSV datasets."""

from __future__ import annotations

import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .baselines import TARGETS, dg_sequence, slngqc_sequence
from .fidelity import FidelityReport, single_qubit_fidelity
from .lindblad import ErrorModel, qubit_channels
from .paths import NAMED_GATES, GateParams, Path, synthesize

SINGLE_QUBIT_SCENARIOS = ("singqc-path1", "singqc-path2", "dg", "slngqc")
RYDBERG_SCENARIOS = {"rydberg-cz": 1, "rydberg-c2z": 2, "rydberg-c3z": 3}
SCENARIOS = SINGLE_QUBIT_SCENARIOS + tuple(RYDBERG_SCENARIOS)

SINGLE_QUBIT_AXES = ("epsilon", "eta", "chi", "gamma_rate")
RYDBERG_AXES = ("epsilon_t", "epsilon_c", "eta_prime", "lifetime")

# fixed parameters accepted per scenario family, with defaults
SINGLE_QUBIT_FIXED = {"omega": 1.0, "epsilon": 0.0, "eta": 0.0, "chi": 0.0,
                      "gamma_rate": 0.0, "decay_rate": None}
RYDBERG_FIXED = {"scheme": "singqc", "lifetime": 200e-6, "epsilon_t": 0.0, "epsilon_c": 0.0,
                 "eta_prime": 0.0, "sample": None, "levels": 3, "omega_c_bar": None,
                 "omega": None, "omega_t_amp": None, "v_c": None, "v_t": None}
C3Z_DEFAULT_SAMPLE = 64

CSV_COLUMNS = ("axis_value", "fidelity", "n_states", "sampled", "stderr")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % x


@dataclass(frozen=True)
class GridRange:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError("steps must be an integer >= 2")
        if not self.start < self.stop:
            raise ValueError("start must be below stop")

    def values(self) -> np.ndarray:
        # rounded so overlapping grids share bit-identical points
        raw = np.linspace(self.start, self.stop, int(self.steps))
        return np.array([float(_fmt(float(v))) for v in raw])


@dataclass(frozen=True)
class SweepSpec:
    scenario: str
    axis: str
    range: GridRange
    gate: str | dict = "S"
    fixed: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {list(SCENARIOS)}")
        if isinstance(self.range, dict):
            object.__setattr__(self, "range", GridRange(**self.range))
        axes = RYDBERG_AXES if self.is_rydberg else SINGLE_QUBIT_AXES
        if self.axis not in axes:
            raise ValueError(f"axis {self.axis!r} is not valid for {self.scenario}; "
                             f"choose from {list(axes)}")
        allowed = RYDBERG_FIXED if self.is_rydberg else SINGLE_QUBIT_FIXED
        unknown = sorted(set(self.fixed) - set(allowed))
        if unknown:
            raise ValueError(f"unknown fixed parameters {unknown} for {self.scenario}")
        if self.axis in self.fixed:
            raise ValueError(f"{self.axis!r} is the sweep axis and cannot also be fixed")
        if not self.is_rydberg:
            self.gate_params()
        if self.axis == "lifetime" and self.range.start <= 0:
            raise ValueError("lifetime grid must be positive")

    @property
    def is_rydberg(self) -> bool:
        return self.scenario in RYDBERG_SCENARIOS

    def gate_params(self) -> GateParams | None:
        """Gate triple for SINGQC scenarios; baselines only know S and H."""
        if self.scenario in ("dg", "slngqc"):
            if not isinstance(self.gate, str) or self.gate not in TARGETS:
                raise ValueError(f"{self.scenario} supports gates {sorted(TARGETS)} only")
            return None
        path = Path.PATH2 if self.scenario == "singqc-path2" else Path.PATH1
        if isinstance(self.gate, dict):
            g = self.gate
            return GateParams(float(g["theta0"]), float(g["phi0"]), float(g["gamma"]), path)
        if self.gate not in NAMED_GATES:
            raise ValueError(f"unknown gate {self.gate!r}; use {sorted(NAMED_GATES)} or a "
                             "{theta0, phi0, gamma} mapping")
        p = NAMED_GATES[self.gate]
        return GateParams(p.theta0, p.phi0, p.gamma, path)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "gate": self.gate, "axis": self.axis,
                "range": asdict(self.range), "fixed": dict(self.fixed), "seed": self.seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        known = {"scenario", "gate", "axis", "range", "fixed", "seed"}
        extra = sorted(set(doc) - known)
        if extra:
            raise ValueError(f"unknown sweep fields {extra}")
        missing = sorted({"scenario", "axis", "range"} - set(doc))
        if missing:
            raise ValueError(f"missing sweep fields {missing}")
        return cls(doc["scenario"], doc["axis"], GridRange(**doc["range"]),
                   doc.get("gate", "S"), dict(doc.get("fixed") or {}), int(doc.get("seed", 0)))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    fidelity: float
    n_states: int
    sampled: bool
    stderr: float


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)

    def body(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        for key, value in self.metadata.items():
            out.write(f"# {key}: {value}\n")
        out.write(self.body())
        return out.getvalue()

    def write(self, path) -> None:
        FsPath(path).write_text(self.to_csv())

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.rows])


def _single_qubit_point(spec: SweepSpec, value: float) -> FidelityReport:
    p = {**SINGLE_QUBIT_FIXED, **spec.fixed, spec.axis: value}
    omega = float(p["omega"])
    if spec.scenario == "dg":
        schedule, target = dg_sequence(spec.gate, omega), TARGETS[spec.gate]
    elif spec.scenario == "slngqc":
        schedule, target = slngqc_sequence(spec.gate, omega), TARGETS[spec.gate]
    else:
        params = spec.gate_params()
        schedule, target = synthesize(params, omega), params.target_unitary()
    rate = p["decay_rate"] if p["decay_rate"] is not None else p["gamma_rate"] * omega
    errors = ErrorModel(p["epsilon"], p["eta"], p["chi"])
    return single_qubit_fidelity(schedule, errors, qubit_channels(rate, rate), target)


def rydberg_system(spec: SweepSpec, value: float | None = None):
    from .rydberg import RydbergErrors, RydbergSpec

    p = {**RYDBERG_FIXED, **spec.fixed}
    if value is not None:
        p[spec.axis] = value
    overrides = {k: float(p[k]) for k in ("omega_c_bar", "omega", "omega_t_amp", "v_c", "v_t")
                 if p[k] is not None}
    if "v_t" in overrides and "v_c" not in overrides:
        overrides["v_c"] = overrides["v_t"] / 7
    system = RydbergSpec(n_controls=RYDBERG_SCENARIOS[spec.scenario],
                         tau_r=float(p["lifetime"]), **overrides)
    errors = RydbergErrors(float(p["epsilon_c"]), float(p["epsilon_t"]), float(p["eta_prime"]))
    return system, errors, p


def _rydberg_point(spec: SweepSpec, value: float) -> FidelityReport:
    from .rydberg import gate_fidelity, target_schedule

    system, errors, p = rydberg_system(spec, value)
    sample = p["sample"]
    if sample is None and spec.scenario == "rydberg-c3z":
        sample = C3Z_DEFAULT_SAMPLE
    schedule = target_schedule(system, p["scheme"])
    return gate_fidelity(system, schedule, errors, channels=True, sample=sample,
                         seed=spec.seed, levels=int(p["levels"]))


def evaluate_point(spec: SweepSpec, value: float) -> FidelityReport:
    value = float(value)
    if spec.is_rydberg:
        return _rydberg_point(spec, value)
    return _single_qubit_point(spec, value)


def _row(args) -> SweepRow:
    spec, value = args
    r = evaluate_point(spec, value)
    return SweepRow(float(value), r.value, r.n_states, r.sampled, r.stderr)


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """One fidelity per grid value, in ascending order whatever the completion order."""
    started = time.perf_counter()
    tasks = [(spec, v) for v in spec.range.values()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    meta = {
        "scenario": spec.scenario,
        "gate": spec.gate,
        "axis": spec.axis,
        "range": f"{_fmt(spec.range.start)}..{_fmt(spec.range.stop)} ({spec.range.steps} points)",
        "fixed": dict(sorted(spec.fixed.items())),
        "seed": spec.seed,
        "code_version": __version__,
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    return SweepResult(spec, rows, meta)


def read_csv_body(text: str) -> list[dict]:
    """Parse a sweep CSV (comment lines skipped) back into row dictionaries."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, map(float, ln.split(",")))) for ln in lines[1:]]

