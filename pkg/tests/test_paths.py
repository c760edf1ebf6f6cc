import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from conftest import gate_variants
from singqc.algebra import equal_up_to_phase
from singqc.lindblad import evolve_pure, propagator, schedule_hamiltonian
from singqc.paths import (H_GATE, S_GATE, GateParams, Path, auxiliary_vectors, bloch_trajectory,
                          broken_schedule, derive_theta1, dynamical_phase, hamiltonian_at,
                          load_schedule, path_angles, save_schedule, schedule_from_dict,
                          schedule_to_dict, singqc_residual, synthesize)


def residual_closed_form(p: GateParams) -> complex:
    # the loop closes in the frame angles; only the final tilt back to theta0 leaves a residue
    return 1j * p.theta0 * np.exp(-1j * p.phi0) * (np.exp(2j * p.gamma) - 1)


def random_coefficients(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


class TestTheta1:
    @pytest.mark.parametrize("gamma, expected", [
        (math.pi / 2, math.acos(2 / 3)), (math.pi / 4, math.acos(4 / 5)), (0.0, 0.0)])
    def test_closed_form(self, gamma, expected):
        assert derive_theta1(gamma) == pytest.approx(expected, abs=1e-12)

    def test_numeric_values(self):
        assert derive_theta1(math.pi / 2) == pytest.approx(0.841069, abs=1e-6)
        assert derive_theta1(math.pi / 4) == pytest.approx(0.643501, abs=1e-6)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            derive_theta1(-0.1)


class TestGateParams:
    def test_bounds(self):
        with pytest.raises(ValueError):
            GateParams(-0.1, 0, 0.3)
        with pytest.raises(ValueError):
            GateParams(math.pi + 0.1, 0, 0.3)
        with pytest.raises(ValueError):
            GateParams(0.1, 0, -0.3)

    def test_path_from_string(self):
        assert GateParams(0, 0, 0.1, "path2").path is Path.PATH2


class TestSynthesize:
    def test_s_gate_path1_durations(self):
        th1 = math.acos(4 / 5)
        sched = synthesize(S_GATE, 1.0)
        durations = [s.duration for s in sched.segments]
        assert durations == pytest.approx([th1 / 2, math.pi * math.sin(th1), th1 / 2, 0.0])

    def test_h_gate_path2_first_segment(self):
        th1 = math.acos(2 / 3)
        sched = synthesize(GateParams(math.pi / 4, 0, math.pi / 2, Path.PATH2), 1.0)
        assert sched.segments[0].duration == pytest.approx((2 * math.pi - th1 - math.pi / 4) / 2)

    def test_segment_fields(self):
        th1 = math.acos(2 / 3)
        seg1, seg2, seg3, seg4 = synthesize(H_GATE, 2.0).segments
        assert seg1.phase_law.kind == "constant" and seg1.detuning == 0
        assert seg1.phase_law.offset == pytest.approx(math.pi / 2)
        assert seg1.amplitude == pytest.approx(2.0)  # theta1 > theta0
        assert seg2.amplitude == pytest.approx(-2.0)
        assert seg2.detuning == pytest.approx(2.0 * math.tan(th1))
        assert seg2.phase_law.rate == pytest.approx(2 * math.pi / (math.cos(th1) * seg2.duration))
        assert seg3.phase_law.offset == pytest.approx(math.pi / 2 + 2 * math.pi / math.cos(th1))
        assert seg3.amplitude == pytest.approx(-2.0)
        assert seg4.duration == pytest.approx(math.pi / 16) and seg4.amplitude == pytest.approx(2.0)

    def test_amplitude_scaling(self):
        a, b = synthesize(H_GATE, 1.0), synthesize(H_GATE, 4.0)
        assert b.total_duration == pytest.approx(a.total_duration / 4)

    def test_zero_omega_rejected(self):
        with pytest.raises(ValueError):
            synthesize(S_GATE, 0.0)

    @pytest.mark.parametrize("path", list(Path))
    def test_identity_gate(self, path):
        sched = synthesize(GateParams(0.6, 0.2, 0.0, path), 1.0)
        u = propagator(schedule_hamiltonian(sched), (0, sched.total_duration))
        assert equal_up_to_phase(u, np.eye(2)) < 1e-8

    @pytest.mark.parametrize("params", gate_variants())
    def test_propagator_is_target(self, params):
        sched = synthesize(params, 1.0)
        u = propagator(schedule_hamiltonian(sched), (0, sched.total_duration))
        assert equal_up_to_phase(u, params.target_unitary()) < 1e-6

    def test_s_gate_maps_zero_to_phase(self):
        sched = synthesize(S_GATE, 1.0)
        psi = evolve_pure(np.array([1, 0], complex), schedule_hamiltonian(sched),
                          (0, sched.total_duration))
        assert abs(psi[1]) < 1e-8
        assert np.angle(psi[0]) == pytest.approx(-math.pi / 4, abs=1e-7)


class TestHamiltonianAt:
    def test_first_segment_at_zero(self):
        h = hamiltonian_at(synthesize(S_GATE, 1.0), 0.0)
        assert np.allclose(h, [[0, -1j], [1j, 0]])

    def test_end_uses_last_segment(self):
        sched = synthesize(H_GATE, 1.0)
        last = sched.segments[-1]
        assert np.allclose(hamiltonian_at(sched, sched.total_duration),
                           last.hamiltonian(last.duration))

    def test_out_of_range(self):
        sched = synthesize(S_GATE, 1.0)
        with pytest.raises(ValueError):
            hamiltonian_at(sched, -1e-3)
        with pytest.raises(ValueError):
            hamiltonian_at(sched, sched.total_duration + 1e-3)

    @pytest.mark.parametrize("params", gate_variants())
    def test_reverse_engineered_form(self, params):
        """Off-diagonal frame Hamiltonian from finite differences of the auxiliary vectors."""
        sched = synthesize(params, 1.0)
        h = 1e-6
        worst = 0.0
        for t in np.linspace(0, sched.total_duration, 97)[1:-1]:
            theta, phi, dth, dph = path_angles(sched, t)
            mu = auxiliary_vectors(theta, phi)
            plus = auxiliary_vectors(theta + dth * h, phi + dph * h)
            minus = auxiliary_vectors(theta - dth * h, phi - dph * h)
            dmu = [(p - m) / (2 * h) for p, m in zip(plus, minus)]
            rebuilt = sum(1j * np.vdot(mu[l], dmu[k]) * np.outer(mu[l], mu[k].conj())
                          for k in range(2) for l in range(2) if k != l)
            worst = max(worst, np.abs(rebuilt - hamiltonian_at(sched, t)).max())
        assert worst < 1e-5


class TestResidual:
    @pytest.mark.parametrize("params", gate_variants())
    def test_matches_closed_form(self, params):
        sched = synthesize(params, 1.0)
        assert abs(singqc_residual(sched) - residual_closed_form(params)) < 1e-8

    @given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0.05, 3.0),
           st.sampled_from(list(Path)))
    @settings(max_examples=40, deadline=None)
    def test_closed_form_property(self, theta0, phi0, gamma, path):
        p = GateParams(theta0, phi0, gamma, path)
        assert abs(singqc_residual(synthesize(p, 1.3)) - residual_closed_form(p)) < 1e-8

    def test_broken_schedule(self):
        assert abs(singqc_residual(broken_schedule(synthesize(S_GATE, 1.0)))) > 0.1

    def test_quad_steps_floor(self):
        with pytest.raises(ValueError):
            singqc_residual(synthesize(S_GATE, 1.0), quad_steps=8)


class TestDynamicalPhase:
    def test_pure_first_vector(self):
        assert abs(dynamical_phase(synthesize(H_GATE, 1.0), 1.0, 0.0)) < 1e-8

    def test_s_gate_random_inputs(self, rng):
        sched = synthesize(S_GATE, 1.0)
        for _ in range(20):
            assert abs(dynamical_phase(sched, *random_coefficients(rng))) < 1e-6

    def test_broken_schedule_accumulates(self, rng):
        sched = broken_schedule(synthesize(S_GATE, 1.0))
        worst = max(abs(dynamical_phase(sched, *random_coefficients(rng))) for _ in range(10))
        assert worst > 1e-3

    def test_requires_normalised(self):
        with pytest.raises(ValueError):
            dynamical_phase(synthesize(S_GATE, 1.0), 1.0, 1.0)

    def test_equals_energy_integral(self):
        """Against integrating <psi(t)|H(t)|psi(t)> along the simulated trajectory."""
        sched = synthesize(H_GATE, 1.0)
        c1, c2 = 0.6, 0.8j
        mu1, mu2 = auxiliary_vectors(H_GATE.theta0, H_GATE.phi0)
        psi = c1 * mu1 + c2 * mu2
        src = schedule_hamiltonian(sched)
        total = 0.0
        for _, t0, t1, seg in sched.intervals():
            ts = np.linspace(t0, t1, 401)
            energies = []
            for i, t in enumerate(ts):
                if i:
                    psi = evolve_pure(psi, src, (ts[i - 1], t))
                energies.append(np.real(np.vdot(psi, seg.hamiltonian(t - t0) @ psi)))
            total += simpson(energies, x=ts)
        assert dynamical_phase(sched, c1, c2) == pytest.approx(total, abs=1e-6)


class TestTrajectory:
    def test_s_gate_loop(self):
        sched = synthesize(S_GATE, 1.0)
        th1 = math.acos(4 / 5)
        traj = np.array(bloch_trajectory(sched, samples=401))
        assert traj[0, 1] == pytest.approx(0, abs=1e-9)
        assert traj[-1, 1] == pytest.approx(0, abs=1e-4)
        assert traj[:, 1].max() == pytest.approx(th1, abs=1e-6)

    def test_h_gate_path2_reaches_b_prime(self):
        params = GateParams(math.pi / 4, 0, math.pi / 2, Path.PATH2)
        sched = synthesize(params, 1.0)
        t1 = sched.segments[0].duration
        traj = bloch_trajectory(replace_total(sched, t1), samples=2)
        _, theta, phi = traj[-1]
        assert theta == pytest.approx(math.acos(2 / 3), abs=1e-7)
        assert phi == pytest.approx(math.pi, abs=1e-7)

    def test_identity_loop_closes(self):
        # gamma = 0 collapses the latitude loop to the pole: out along a meridian and back
        sched = synthesize(GateParams(0.7, 1.1, 0.0), 1.0)
        traj = np.array(bloch_trajectory(sched, samples=11))
        assert traj[-1, 1] == pytest.approx(0.7, abs=1e-8)
        assert traj[-1, 2] == pytest.approx(1.1, abs=1e-8)
        assert traj[:, 1].min() == pytest.approx(0.0, abs=1e-8)


def replace_total(sched, t_end):
    """Schedule truncated to its first ``t_end`` seconds."""
    from dataclasses import replace

    segs, acc = [], 0.0
    for s in sched.segments:
        take = min(s.duration, max(0.0, t_end - acc))
        segs.append(replace(s, duration=take))
        acc += s.duration
    return replace(sched, segments=tuple(segs))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        sched = synthesize(H_GATE, 2.5)
        path = tmp_path / "h.json"
        save_schedule(sched, path)
        again = load_schedule(path)
        assert again == sched
        doc = json.loads(path.read_text())
        assert doc["segments"][1]["phase_law"]["kind"] == "linear"
        assert schedule_from_dict(schedule_to_dict(again)) == sched
