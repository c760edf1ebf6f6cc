"""Command-line entry point: ``singqc <command> ...``.

Failures exit nonzero and print one JSON object ``{"error": ..., "message": ...}``
on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FsPath

import yaml

from .sweeps import SCENARIOS, SweepSpec, default_jobs, run_sweep


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _gate_args(p):
    p.add_argument("--gate", default=None, help="named gate: S, T, H or X")
    p.add_argument("--theta0", type=float)
    p.add_argument("--phi0", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--path", choices=["path1", "path2"], default="path1")
    p.add_argument("--omega", type=float, default=1.0, help="drive amplitude in rad/s")


def _gate_params(args):
    from .paths import NAMED_GATES, GateParams

    custom = [args.theta0, args.phi0, args.gamma]
    if any(v is not None for v in custom):
        if args.gate is not None or any(v is None for v in custom):
            raise CliError("give either --gate or all of --theta0 --phi0 --gamma")
        return GateParams(args.theta0, args.phi0, args.gamma, args.path)
    name = args.gate or "S"
    if name not in NAMED_GATES:
        raise CliError(f"unknown gate {name!r}; choose from {sorted(NAMED_GATES)}")
    g = NAMED_GATES[name]
    return GateParams(g.theta0, g.phi0, g.gamma, args.path)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_synthesize(args) -> int:
    from .paths import bloch_trajectory, schedule_to_dict, synthesize

    schedule = synthesize(_gate_params(args), args.omega)
    _emit(schedule_to_dict(schedule), args.out)
    if args.trajectory:
        rows = bloch_trajectory(schedule, samples=args.samples)
        lines = ["t_s,theta_rad,phi_rad"] + ["%.12g,%.12g,%.12g" % r for r in rows]
        FsPath(args.trajectory).write_text("\n".join(lines) + "\n")
    return 0


def cmd_simulate(args) -> int:
    from .baselines import TARGETS, dg_sequence, slngqc_sequence
    from .fidelity import single_qubit_fidelity
    from .lindblad import ErrorModel, qubit_channels
    from .paths import load_schedule, singqc_residual, synthesize

    if args.schedule:
        schedule = load_schedule(args.schedule)
    elif args.scheme in ("dg", "slngqc"):
        build = dg_sequence if args.scheme == "dg" else slngqc_sequence
        schedule = build(args.gate or "S", args.omega)
    else:
        schedule = synthesize(_gate_params(args), args.omega)
    if schedule.params is not None:
        target = schedule.params.target_unitary()
    elif schedule.meta.get("gate") in TARGETS:
        target = TARGETS[schedule.meta["gate"]]
    else:
        raise CliError("schedule carries no gate to compare against")
    rate = args.gamma_rate * schedule.omega
    report = single_qubit_fidelity(schedule, ErrorModel(args.epsilon, args.eta, args.chi),
                                   qubit_channels(rate, rate), target)
    doc = {"scheme": schedule.scheme, "fidelity": report.value, "n_states": report.n_states,
           "duration_s": schedule.total_duration}
    if schedule.params is not None:
        r = singqc_residual(schedule)
        doc["residual_abs"] = abs(r)
    _emit(doc, args.out)
    return 0


def _load_config(path) -> dict:
    if not path:
        return {}
    doc = yaml.safe_load(FsPath(path).read_text()) or {}
    if not isinstance(doc, dict):
        raise CliError("config file must hold a mapping")
    return doc


def _parse_fixed(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"--fixed expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key] = yaml.safe_load(value)
    return out


def sweep_spec_from_args(args) -> SweepSpec:
    doc = _load_config(args.config)
    for key in ("scenario", "axis", "seed"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.gate is not None:
        doc["gate"] = args.gate
    rng = dict(doc.get("range") or {})
    for key in ("start", "stop", "steps"):
        if getattr(args, key) is not None:
            rng[key] = getattr(args, key)
    if rng:
        doc["range"] = rng
    fixed = dict(doc.get("fixed") or {})
    fixed.update(_parse_fixed(args.fixed))
    doc["fixed"] = fixed
    return SweepSpec.from_dict(doc)


def cmd_sweep(args) -> int:
    spec = sweep_spec_from_args(args)
    result = run_sweep(spec, jobs=args.jobs)
    if args.out:
        result.write(args.out)
    else:
        sys.stdout.write(result.to_csv())
    return 0


def cmd_rydberg(args) -> int:
    from .rydberg import RydbergErrors, RydbergSpec, gate_fidelity, target_schedule

    spec = RydbergSpec(n_controls=args.controls, tau_r=args.lifetime)
    schedule = target_schedule(spec, args.scheme)
    errors = RydbergErrors(args.epsilon_c, args.epsilon_t, args.eta_prime)
    report = gate_fidelity(spec, schedule, errors, channels=not args.no_decay,
                           sample=args.sample, seed=args.seed, jobs=args.jobs)
    _emit({"n_controls": args.controls, "scheme": args.scheme, "fidelity": report.value,
           "n_states": report.n_states, "sampled": report.sampled, "stderr": report.stderr,
           "population": report.population, "duration_s": schedule.total_duration}, args.out)
    return 0


def cmd_reproduce(args) -> int:
    from .figures import reproduce_figure

    paths = reproduce_figure(args.figure, args.out, jobs=args.jobs)
    _emit({"figure": args.figure, "files": [str(p) for p in paths]}, None)
    return 0


def run_checks() -> list[tuple[str, bool, str]]:
    """Quick invariant suite; each entry is ``(name, passed, detail)``."""
    from .algebra import equal_up_to_phase, is_unitary
    from .baselines import TARGETS, composed_unitary, dg_sequence, slngqc_sequence
    from .lindblad import propagator, schedule_hamiltonian
    from .paths import NAMED_GATES, Path, GateParams, singqc_residual, synthesize

    out = []
    for name, g in NAMED_GATES.items():
        for path in Path:
            sched = synthesize(GateParams(g.theta0, g.phi0, g.gamma, path), 1.0)
            u = propagator(schedule_hamiltonian(sched), (0.0, sched.total_duration))
            dist = equal_up_to_phase(u, sched.params.target_unitary())
            out.append((f"propagator {name} {path.value}", dist < 1e-6, f"{dist:.2e}"))
            out.append((f"unitary {name} {path.value}", is_unitary(u, 1e-8), ""))
            if g.theta0 == 0:
                res = abs(singqc_residual(sched))
                out.append((f"residual {name} {path.value}", res < 1e-8, f"{res:.2e}"))
    for gate, target in TARGETS.items():
        for build in (dg_sequence, slngqc_sequence):
            dist = equal_up_to_phase(composed_unitary(build(gate, 1.0)), target)
            out.append((f"{build.__name__} {gate}", dist < 1e-10, f"{dist:.2e}"))
    return out


def cmd_check(args) -> int:
    results = run_checks()
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip() + "\n")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="singqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synthesize", help="build a gate's pulse schedule as JSON")
    _gate_args(p)
    p.add_argument("--out")
    p.add_argument("--trajectory", help="also write the Bloch trajectory CSV here")
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="six-state fidelity of one schedule")
    _gate_args(p)
    p.add_argument("--schedule", help="schedule JSON written by synthesize")
    p.add_argument("--scheme", choices=["singqc", "dg", "slngqc"], default="singqc")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--chi", type=float, default=0.0)
    p.add_argument("--gamma-rate", type=float, default=0.0,
                   help="decay and dephasing rate in units of the drive amplitude")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="fidelity over a parameter grid, as CSV")
    p.add_argument("--config", help="YAML or JSON file with sweep fields")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--gate")
    p.add_argument("--axis")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--fixed", action="append", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rydberg", help="C_N Z fidelity of the Rydberg register")
    p.add_argument("--controls", type=int, default=1)
    p.add_argument("--scheme", choices=["singqc", "dg"], default="singqc")
    p.add_argument("--lifetime", type=float, default=200e-6, help="Rydberg lifetime in s")
    p.add_argument("--epsilon-t", type=float, default=0.0)
    p.add_argument("--epsilon-c", type=float, default=0.0)
    p.add_argument("--eta-prime", type=float, default=0.0)
    p.add_argument("--no-decay", action="store_true")
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--out")
    p.set_defaults(func=cmd_rydberg)

    p = sub.add_parser("reproduce", help="datasets for one figure panel")
    p.add_argument("figure")
    p.add_argument("--out", default=".")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("check", help="run the quick invariant suite")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError, yaml.YAMLError) as exc:
        kind = "usage" if isinstance(exc, CliError) else type(exc).__name__
        sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
