import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoshot.exceptions import InvalidInput, UnreachableTransition
from holoshot.gate import (
    GateParams,
    TargetRotation,
    bright_dark,
    build_h_eff,
    build_h_rot,
    check_holonomy,
    check_rwa,
    evolve_gate,
    gate_phase,
    logical_gate,
    map_to_lasers,
    params_to_physical,
    perturb_bright,
    synthesize,
)
from holoshot.quantum_core import distance_up_to_phase, hermitian_expm, logical_block

PI = math.pi
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

params = st.builds(
    GateParams,
    alpha=st.floats(0, PI / 2),
    beta=st.floats(0, 2 * PI, exclude_max=True),
    gamma=st.floats(-PI / 2, PI / 2),
    omega=st.floats(0.25, 4.0),
)


def reference_hamiltonian(p):
    """Bright/dark form assembled independently from |e>, |b> outer products."""
    e = np.array([1, 0, 0], dtype=complex)
    b = np.array([0, math.cos(p.alpha), np.exp(1j * p.beta) * math.sin(p.alpha)])
    ee, bb = np.outer(e, e), np.outer(b, b.conj())
    be = np.outer(b, e) + np.outer(e, b.conj())
    s, c = math.sin(p.gamma), math.cos(p.gamma)
    return p.omega * s * (ee + bb) + p.omega * (c * be + s * (ee - bb))


# -- parameterization ---------------------------------------------------------


def test_bright_dark_examples():
    bd = bright_dark(0.0, 1.1)
    assert np.allclose(bd.bright, [0, 1, 0], atol=1e-16)
    assert np.allclose(bd.dark, [0, 0, -np.exp(1.1j)], atol=1e-16)
    r = 1 / math.sqrt(2)
    assert np.allclose(bright_dark(PI / 4, 0).bright, [0, r, r], atol=1e-15)
    assert np.allclose(bright_dark(PI / 4, PI / 2).bright, [0, r, 1j * r], atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(-10, 10), beta=st.floats(-10, 10))
def test_bright_dark_orthonormal(alpha, beta):
    bd = bright_dark(alpha, beta)
    assert abs(np.vdot(bd.bright, bd.dark)) < 1e-14
    assert bd.bright[0] == 0 and bd.dark[0] == 0
    assert abs(np.linalg.norm(bd.bright) - 1) < 1e-14


def test_params_to_physical_examples():
    assert params_to_physical(GateParams(0, 0, 0, 1.3)) == (-0.0, 1.3, 0j)
    delta, o0, o1 = params_to_physical(GateParams(0.4, 0.2, PI / 2, 1.0))
    assert delta == -2.0 and abs(o0) < 1e-16 and abs(o1) < 1e-16
    delta, o0, o1 = params_to_physical(GateParams(PI / 4, PI, PI / 6, 1.0))
    assert delta == pytest.approx(-1.0, abs=1e-15)
    assert o0 == pytest.approx(math.sqrt(6) / 4, abs=1e-15)
    assert o1 == pytest.approx(-math.sqrt(6) / 4, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(p=params)
def test_norm_identity(p):
    delta, o0, o1 = params_to_physical(p)
    assert abs((delta / 2) ** 2 + abs(o0) ** 2 + abs(o1) ** 2 - p.omega**2) < 1e-12 * max(1.0, p.omega**2)


def test_gate_params_validation():
    for bad in ((-0.1, 0, 0, 1), (0, 2 * PI, 0, 1), (0, 0, 2.0, 1), (0, 0, 0, 0), (0, 0, 0, math.nan)):
        with pytest.raises(InvalidInput):
            GateParams(*bad)
    p = GateParams(0.1, 0.2, 0.3, 2.5)
    assert p.period * p.omega == PI


# -- Hamiltonians -------------------------------------------------------------


def test_h_eff_examples():
    h = build_h_eff(GateParams(0, 0, 0, 1.5))
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1.5
    assert np.max(np.abs(h - expected)) < 1e-15
    h = build_h_eff(GateParams(0.7, 1.0, PI / 2, 1.0))
    assert np.max(np.abs(h - np.diag([2.0, 0, 0]))) < 1e-15


def test_h_eff_matches_bright_dark_form_many_draws(rng):
    for _ in range(1000):
        p = GateParams(rng.uniform(0, PI / 2), rng.uniform(0, 2 * PI), rng.uniform(-PI / 2, PI / 2),
                       rng.uniform(0.25, 4))
        assert np.max(np.abs(build_h_eff(p) - reference_hamiltonian(p))) < 1e-13 * max(1.0, p.omega)


@settings(max_examples=200, deadline=None)
@given(p=params)
def test_spectrum_on_bright_pair_and_dark_energy(p):
    h = build_h_eff(p)
    frame = bright_dark(p.alpha, p.beta).matrix()
    hb = frame.conj().T @ h @ frame
    s = math.sin(p.gamma)
    ev = np.linalg.eigvalsh(hb[:2, :2])
    assert np.allclose(ev, sorted([p.omega * s - p.omega, p.omega * s + p.omega]), atol=1e-12 * p.omega)
    assert abs(hb[2, 2]) < 1e-13


def test_h_rot_zero_couplings_and_flag():
    lasers = map_to_lasers(GateParams(0.3, 0.4, PI / 2, 1.0), 50.0, 60.0)
    h = build_h_rot(lasers).matrix
    assert np.max(np.abs(h - np.diag([0, -2.0, -2.0]))) < 1e-15
    from dataclasses import replace

    skew = build_h_rot(replace(lasers, detuning=(0.1, 0.2)))
    assert skew.unequal_detunings and "unequal detunings" in skew.flags
    assert not build_h_rot(lasers).unequal_detunings


@settings(max_examples=100, deadline=None)
@given(p=params, d0=st.complex_numbers(min_magnitude=0.1, max_magnitude=5),
       d1=st.complex_numbers(min_magnitude=0.1, max_magnitude=5))
def test_h_rot_differs_from_h_eff_by_delta_identity(p, d0, d1):
    lasers = map_to_lasers(p, 1e4, 2e4, d0, d1)
    diff = build_h_rot(lasers).matrix - build_h_eff(p)
    assert np.max(np.abs(diff - lasers.delta * np.eye(3))) < 1e-13 * max(1.0, p.omega)


# -- evolution ----------------------------------------------------------------


def test_gate_phase_examples():
    assert gate_phase(0.0) == PI
    assert gate_phase(PI / 2) == 2 * PI
    assert gate_phase(-PI / 2) == 0.0


def test_evolve_examples():
    u = evolve_gate(GateParams(0.5, 0.5, PI / 2, 1.0))
    assert np.max(np.abs(u - np.eye(3))) < 1e-12
    u = evolve_gate(GateParams(0, 0, 0, 1.0))
    assert np.max(np.abs(u - np.diag([-1.0, -1.0, 1.0]))) < 1e-14


@settings(max_examples=200, deadline=None)
@given(p=params)
def test_evolution_in_bright_dark_frame(p):
    u = evolve_gate(p)
    frame = bright_dark(p.alpha, p.beta).matrix()
    phi = gate_phase(p.gamma)
    expected = np.diag([np.exp(-1j * phi), np.exp(-1j * phi), 1.0])
    assert np.max(np.abs(frame.conj().T @ u @ frame - expected)) < 1e-11
    assert np.max(np.abs(u - hermitian_expm(build_h_eff(p), PI / p.omega))) < 1e-15
    bd = bright_dark(p.alpha, p.beta)
    assert np.max(np.abs(u @ bd.dark - bd.dark)) < 1e-11
    # no leakage into |e> from the logical subspace
    assert np.max(np.abs(u[0, 1:])) < 1e-11


@settings(max_examples=200, deadline=None)
@given(p=params)
def test_logical_gate_is_block_of_evolution_and_ignores_global_term(p):
    block = logical_block(evolve_gate(p))
    assert distance_up_to_phase(logical_gate(p), block) < 1e-11
    assert distance_up_to_phase(logical_block(evolve_gate(p, True)), block) < 1e-11


@pytest.mark.parametrize(
    "alpha,beta,pauli",
    [(0.0, 0.0, Z), (PI / 4, 0.0, X), (PI / 4, PI / 2, Y)],
)
def test_named_logical_gates(alpha, beta, pauli):
    got = logical_gate(GateParams(alpha, beta, 0.0)).matrix
    assert distance_up_to_phase(got, -1j * pauli) < 1e-15
    assert np.max(np.abs(got - (-1j) * pauli)) < 1e-15


# -- synthesis ----------------------------------------------------------------


def test_synthesize_examples():
    p = synthesize(TargetRotation.named("Z", PI))
    assert (p.alpha, p.gamma) == (0.0, 0.0)
    assert synthesize(TargetRotation.named("X", 2 * PI)).gamma == PI / 2
    assert synthesize(TargetRotation.named("X", 0.0)).gamma == -PI / 2

    target = TargetRotation.named("X", PI / 3)
    p = synthesize(target)
    assert p.gamma == pytest.approx(math.asin(-2 / 3), abs=1e-15)
    assert p.gamma == pytest.approx(-0.72973, abs=1e-5)
    assert distance_up_to_phase(logical_gate(p), target.matrix()) < 1e-10


def test_synthesize_rejects_bad_axes_and_omega():
    with pytest.raises(InvalidInput):
        TargetRotation.from_bloch([0, 0, 0], 1.0)
    with pytest.raises(InvalidInput):
        synthesize(TargetRotation.named("X", 1.0), omega=0.0)
    with pytest.raises(InvalidInput):
        TargetRotation.named("W", 1.0)


def test_angles_outside_range_are_wrapped():
    t = TargetRotation.named("Y", 2 * PI + 0.5)
    assert t.angle == pytest.approx(0.5)
    t = TargetRotation.named("Y", -0.5)
    assert t.angle == pytest.approx(2 * PI - 0.5)


def test_axis_flip_is_the_same_gate():
    # alpha outside [0, pi/2] points along -x; canonicalised back into range
    flipped = TargetRotation.from_axis_angles(3 * PI / 4, 0.0, 1.0)
    p = synthesize(flipped)
    assert 0 <= p.alpha <= PI / 2
    assert distance_up_to_phase(logical_gate(p), flipped.matrix()) < 1e-12
    alt = TargetRotation.named("X", 2 * PI - 1.0)
    assert distance_up_to_phase(flipped.matrix(), alt.matrix()) < 1e-12


@settings(max_examples=300, deadline=None)
@given(v=st.tuples(*[st.floats(-1, 1)] * 3), angle=st.floats(0, 2 * PI), omega=st.floats(0.1, 10))
def test_synthesis_round_trip(v, angle, omega):
    if np.linalg.norm(v) < 1e-6:
        return
    t = TargetRotation.from_bloch(v, angle)
    p = synthesize(t, omega)
    assert distance_up_to_phase(logical_gate(p), t.matrix()) < 1e-10


# -- lasers and RWA -------------------------------------------------------------


def test_map_to_lasers_examples():
    lasers = map_to_lasers(GateParams(0.6, 0.1, 0.0, 1.0), 100.0, 80.0)
    assert lasers.nu == (100.0, 80.0)
    lasers = map_to_lasers(GateParams(0.6, 0.1, PI / 2, 1.0), 100.0, 80.0)
    assert lasers.envelope[0] < 1e-15 and lasers.envelope[1] < 1e-15
    assert lasers.nu == (98.0, 78.0)
    alpha = 0.5
    lasers = map_to_lasers(GateParams(alpha, 0.0, PI / 6, 1.0), 100.0, 100.0, 1.0, 1.0)
    assert lasers.nu[0] == pytest.approx(99.0, abs=1e-13)
    assert lasers.envelope[0] == pytest.approx(math.cos(alpha) * math.sqrt(3) / 2, abs=1e-15)
    assert lasers.detuning[0] == lasers.detuning[1] == lasers.delta


def test_map_to_lasers_records_phase_offset():
    p = GateParams(0.5, 1.2, 0.1, 1.0)
    lasers = map_to_lasers(p, 1e3, 1e3, 2.0, 0.5j)
    _, o0, o1 = params_to_physical(p)
    r0, r1 = lasers.rabi()
    assert abs(r0 - o0) < 1e-14 and abs(r1 - o1) < 1e-14
    assert lasers.phase_offset[1] == pytest.approx((1.2 - PI / 2) % (2 * PI))


def test_map_to_lasers_zero_coupling():
    with pytest.raises(UnreachableTransition):
        map_to_lasers(GateParams(0.5, 0, 0, 1), 1e3, 1e3, 0.0, 1.0)


def test_check_rwa():
    p = GateParams(0.0, 0.0, 0.0, 1.0)
    assert check_rwa(p, map_to_lasers(p, 1e5, 1e5)).passed
    assert not check_rwa(p, map_to_lasers(p, 10.0, 10.0)).passed
    # ratio exactly at the threshold fails
    report = check_rwa(p, map_to_lasers(p, 1000.0, 1000.0), threshold=1e-3)
    assert report.max_ratio == 1e-3 and not report.passed


# -- holonomy -----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(p=params)
def test_holonomy_conditions_hold(p):
    rep = check_holonomy(p)
    assert rep.passed
    assert rep.cyclicity_residual < 1e-10
    assert rep.max_dynamical_matrix_element < 1e-12 * p.omega


def test_holonomy_detects_dynamical_phase():
    p = GateParams(0.4, 0.9, 0.3, 1.5)
    rep = check_holonomy(p, hamiltonian=perturb_bright(p, 0.1))
    assert not rep.parallel_transport
    assert rep.max_dynamical_matrix_element == pytest.approx(0.1 * p.omega, rel=1e-12)


def test_holonomy_detects_non_cyclic_period():
    p = GateParams(0.4, 0.9, 0.3, 1.5)
    rep = check_holonomy(p, period=0.9 * p.period)
    assert not rep.cyclic
    assert rep.cyclicity_residual > 1e-3
