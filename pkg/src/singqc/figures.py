"""Named figure panels: each binds its curves to sweep specifications."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

from .sweeps import GridRange, SweepSpec, run_sweep

ERR_RANGE = GridRange(-0.2, 0.2, 41)
RYDBERG_ERR_RANGE = GridRange(-0.2, 0.2, 9)
LIFETIME_RANGE = GridRange(50e-6, 250e-6, 9)
GAMMA_RATES = (0.0, 1e-4, 2e-4, 4e-4)
RYDBERG_SINGLE_QUBIT = {"omega": 2 * math.pi * 1.36e6, "decay_rate": 1.15e3}

ASSUMED_GAMMAS = ("decoherence curves use gamma_rate in {0, 1e-4, 2e-4, 4e-4} (units of the "
                  "drive amplitude); only the largest value is a quoted number")
ASSUMED_CHI = "phase-error axis spans chi in [-0.2, 0.2]"
ASSUMED_LIFETIME = "lifetime axis spans 50 us to 250 us in 9 points"
ASSUMED_RYDBERG_GRID = "Rydberg error axes use 9 points to keep runtimes bounded"


@dataclass(frozen=True)
class Curve:
    label: str
    spec: SweepSpec


@dataclass(frozen=True)
class Panel:
    figure_id: str
    title: str
    curves: tuple[Curve, ...]
    assumptions: tuple[str, ...] = field(default=())


def _compare(gate, axis, path_scenario, rng=ERR_RANGE, fixed=None):
    fixed = fixed or {}
    return (
        Curve(path_scenario, SweepSpec(path_scenario, axis, rng, gate, dict(fixed))),
        Curve("dg", SweepSpec("dg", axis, rng, gate, dict(fixed))),
        Curve("slngqc", SweepSpec("slngqc", axis, rng, gate, dict(fixed))),
    )


def _gamma_curves(scenario, axis, gate="S"):
    return tuple(Curve(f"gamma_rate={g:g}", SweepSpec(scenario, axis, ERR_RANGE, gate,
                                                      {"gamma_rate": g}))
                 for g in GAMMA_RATES)


def _rydberg(scenarios_schemes, axis, rng, fixed=None):
    out = []
    for scenario, scheme in scenarios_schemes:
        f = {"scheme": scheme, **(fixed or {})}
        out.append(Curve(f"{scenario}:{scheme}", SweepSpec(scenario, axis, rng, "S", f)))
    return tuple(out)


def _build() -> dict[str, Panel]:
    p = {}
    for path, fig in (("singqc-path1", "2"), ("singqc-path2", "3")):
        for suffix, gate, axis in (("a", "S", "epsilon"), ("b", "H", "epsilon"),
                                   ("c", "S", "eta"), ("d", "H", "eta")):
            fid = fig + suffix
            p[fid] = Panel(fid, f"{gate} gate along {path} vs {axis}", _compare(gate, axis, path))
    fig4 = (("a", "singqc-path1", "epsilon"), ("b", "singqc-path2", "eta"),
            ("c", "dg", "epsilon"), ("d", "dg", "eta"),
            ("e", "slngqc", "epsilon"), ("f", "slngqc", "eta"))
    for suffix, scenario, axis in fig4:
        fid = "4" + suffix
        p[fid] = Panel(fid, f"S gate, {scenario} vs {axis} with decoherence",
                       _gamma_curves(scenario, axis), (ASSUMED_GAMMAS,))
    cz = (("rydberg-cz", "singqc"), ("rydberg-cz", "dg"))
    cnz = (("rydberg-c2z", "singqc"), ("rydberg-c3z", "singqc"))
    for fig, pairs in (("6", cz), ("7", cnz)):
        p[fig + "a"] = Panel(fig + "a", "fidelity vs Rydberg lifetime",
                             _rydberg(pairs, "lifetime", LIFETIME_RANGE), (ASSUMED_LIFETIME,))
        for suffix, axis in (("b", "epsilon_t"), ("c", "epsilon_c"), ("d", "eta_prime")):
            p[fig + suffix] = Panel(fig + suffix, f"fidelity vs {axis} at 200 us lifetime",
                                    _rydberg(pairs, axis, RYDBERG_ERR_RANGE),
                                    (ASSUMED_RYDBERG_GRID,))
    for suffix, gate in (("a", "S"), ("b", "H")):
        p["8" + suffix] = Panel("8" + suffix, f"{gate} gate vs phase error",
                                _compare(gate, "chi", "singqc-path1"), (ASSUMED_CHI,))
    return p


PANELS = _build()
# the single-qubit Rydberg operating point
RYDBERG_SINGLE_QUBIT_SWEEPS = {
    "rydberg-1q-epsilon": SweepSpec("singqc-path1", "epsilon", ERR_RANGE, "S",
                                    dict(RYDBERG_SINGLE_QUBIT)),
    "rydberg-1q-eta": SweepSpec("singqc-path2", "eta", ERR_RANGE, "S", dict(RYDBERG_SINGLE_QUBIT)),
}


def reproduce_figure(figure_id: str, out_dir, jobs: int = 1) -> list[FsPath]:
    """Write one CSV per curve of ``figure_id`` plus ``manifest.json``; return the paths."""
    if figure_id not in PANELS:
        raise ValueError(f"unknown figure id {figure_id!r}; choose from {sorted(PANELS)}")
    panel = PANELS[figure_id]
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written, entries = [], []
    for curve in panel.curves:
        result = run_sweep(curve.spec, jobs=jobs)
        name = f"fig{figure_id}_{curve.label.replace(':', '_').replace('=', '')}.csv"
        target = out / name
        result.write(target)
        written.append(target)
        entries.append({"label": curve.label, "file": name, "spec": curve.spec.to_dict()})
    manifest = out / f"fig{figure_id}_manifest.json"
    manifest.write_text(json.dumps({"figure": figure_id, "title": panel.title, "curves": entries,
                                    "assumptions": list(panel.assumptions)}, indent=2) + "\n")
    return written + [manifest]
