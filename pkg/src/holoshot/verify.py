"""Invariant battery behind ``holoshot verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .error_models import (
    InputState,
    IntegratorConfig,
    detuning_fidelity,
    detuning_fidelity_simulated,
    integrate_lindblad,
    pulse_area_fidelity,
    pulse_area_fidelity_simulated,
)
from .gate import (
    GateParams,
    TargetRotation,
    bright_dark,
    build_h_eff,
    check_holonomy,
    evolve_gate,
    gate_phase,
    logical_gate,
    params_to_physical,
    perturb_bright,
    synthesize,
)
from .quantum_core import distance_up_to_phase, logical_block, projector

THETA_GRID = tuple(k * math.pi / 8 for k in range(9))
GAMMA_GRID = (-1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2)
ERROR_GRID = (0.01, 0.1, 0.5)


@dataclass
class CheckResult:
    name: str
    tolerance: float
    worst: float = 0.0
    cases: int = 0
    failing_case: dict | None = field(default=None)

    @property
    def passed(self) -> bool:
        return self.failing_case is None

    def record(self, residual: float, case: dict) -> None:
        self.cases += 1
        # NaN counts as a failure
        if not residual <= self.worst:
            self.worst = residual
        if self.failing_case is None and not residual < self.tolerance:
            self.failing_case = dict(case, residual=residual)


def random_params(rng: np.random.Generator) -> GateParams:
    return GateParams(
        alpha=float(rng.uniform(0, math.pi / 2)),
        beta=float(rng.uniform(0, 2 * math.pi)),
        gamma=float(rng.uniform(-math.pi / 2, math.pi / 2)),
        omega=float(rng.uniform(0.5, 2.0)),
    )


def random_target(rng: np.random.Generator) -> TargetRotation:
    v = rng.normal(size=3)
    while np.linalg.norm(v) < 1e-8:
        v = rng.normal(size=3)
    return TargetRotation.from_bloch(v, float(rng.uniform(0, 2 * math.pi)))


def _case(p: GateParams) -> dict:
    return {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "omega": p.omega}


def bright_dark_form(p: GateParams) -> np.ndarray:
    """``H_eff`` assembled from ``|e>``, ``|b>`` projectors rather than from the couplings."""
    bd = bright_dark(p.alpha, p.beta)
    e = np.array([1.0, 0.0, 0.0], dtype=complex)
    b = bd.bright
    sg, cg = math.sin(p.gamma), math.cos(p.gamma)
    ee, bb = projector(e), projector(b)
    flip = np.outer(b, e.conj()) + np.outer(e, b.conj())
    return p.omega * sg * (ee + bb) + p.omega * (cg * flip + sg * (ee - bb))


def run_battery(seed: int = 0, samples: int = 200, perturb_hamiltonian: float = 0.0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    params = [random_params(rng) for _ in range(samples)]
    targets = [random_target(rng) for _ in range(samples)]
    results = []

    norm = CheckResult("parameterization norm identity", 1e-12)
    basis = CheckResult("bright/dark form of H_eff", 1e-13)
    spectrum = CheckResult("spectrum on {e,b} and <d|H|d>", 1e-12)
    structure = CheckResult("U(T) = diag(e^-i phi, e^-i phi, 1) in (e,b,d)", 1e-11)
    inert = CheckResult("global term leaves logical gate unchanged", 1e-11)
    cyc = CheckResult("holonomy condition (i): cyclic subspace", 1e-10)
    par = CheckResult("holonomy condition (ii): no dynamical part", 1e-12)
    for p in params:
        case = _case(p)
        delta, o0, o1 = params_to_physical(p)
        norm.record(abs((delta / 2) ** 2 + abs(o0) ** 2 + abs(o1) ** 2 - p.omega**2), case)
        h = build_h_eff(p)
        basis.record(float(np.max(np.abs(h - bright_dark_form(p)))), case)
        bd = bright_dark(p.alpha, p.beta)
        frame = bd.matrix()
        hb = frame.conj().T @ h @ frame
        ev = np.linalg.eigvalsh(hb[:2, :2])
        expected = np.sort([p.omega * math.sin(p.gamma) - p.omega, p.omega * math.sin(p.gamma) + p.omega])
        spectrum.record(max(float(np.max(np.abs(ev - expected))), abs(hb[2, 2])), case)
        u = evolve_gate(p)
        phi = gate_phase(p.gamma)
        target = np.diag([np.exp(-1j * phi), np.exp(-1j * phi), 1.0])
        structure.record(float(np.max(np.abs(frame.conj().T @ u @ frame - target))), case)
        inert.record(
            distance_up_to_phase(logical_block(evolve_gate(p, True)), logical_block(u)), case
        )
        if perturb_hamiltonian:
            rep = check_holonomy(p, hamiltonian=perturb_bright(p, perturb_hamiltonian))
        else:
            rep = check_holonomy(p)
        cyc.record(rep.cyclicity_residual, case)
        par.record(rep.max_dynamical_matrix_element / p.omega, case)
    results += [norm, basis, spectrum, structure, inert, cyc, par]

    trip = CheckResult("synthesis round trip", 1e-10)
    for t in targets:
        trip.record(distance_up_to_phase(logical_gate(synthesize(t)), t.matrix()), {"axis": list(t.axis), "angle": t.angle})
    named = CheckResult("named gates -iZ, -iX, -iY", 1e-12)
    for label, (alpha, beta), pauli in (
        ("Z", (0.0, 0.0), np.diag([1, -1])),
        ("X", (math.pi / 4, 0.0), np.array([[0, 1], [1, 0]])),
        ("Y", (math.pi / 4, math.pi / 2), np.array([[0, -1j], [1j, 0]])),
    ):
        got = logical_gate(GateParams(alpha, beta, 0.0)).matrix
        named.record(float(np.max(np.abs(got - (-1j) * pauli))), {"gate": f"-i{label}"})
    results += [trip, named]

    results += _coherent_grid_checks()
    results += _lindblad_checks(params[0])
    return results


def _coherent_grid_checks() -> list[CheckResult]:
    pulse = CheckResult("pulse-area closed form vs propagation", 1e-9)
    detune = CheckResult("detuning closed form vs propagation", 1e-9)
    flat = CheckResult("fidelity independent of varphi", 1e-10)
    for theta in THETA_GRID:
        for gamma in GAMMA_GRID:
            p = GateParams(0.3, 1.1, gamma, 1.0)
            for x in ERROR_GRID:
                case = {"theta": theta, "gamma": gamma, "error_product": x}
                s = InputState(theta, 0.7)
                pulse.record(abs(pulse_area_fidelity_simulated(p, s, x).value - float(pulse_area_fidelity(theta, gamma, x))), case)
                detune.record(abs(detuning_fidelity_simulated(p, s, x).value - float(detuning_fidelity(theta, gamma, x))), case)
                for sim in (pulse_area_fidelity_simulated, detuning_fidelity_simulated):
                    vals = [sim(p, InputState(theta, v), x).value for v in (0.0, math.pi / 2, math.pi, 1.5 * math.pi)]
                    flat.record(max(vals) - min(vals), dict(case, kind=sim.__name__))
    return [pulse, detune, flat]


def _lindblad_checks(p: GateParams) -> list[CheckResult]:
    cfg = IntegratorConfig()
    case = _case(p)
    bd = bright_dark(p.alpha, p.beta)
    psi = (bd.bright + 1j * bd.dark) / math.sqrt(2)
    rho0 = projector(psi)

    unitary = CheckResult("Lindblad eps=0 equals unitary evolution", 1e-8)
    u = evolve_gate(p)
    unitary.record(float(np.max(np.abs(integrate_lindblad(rho0, p, 0.0, cfg) - u @ rho0 @ u.conj().T))), case)

    trace = CheckResult("Lindblad trace drift at epsT=0.1", 1e-9)
    rho = integrate_lindblad(rho0, p, 0.1 / p.period, cfg)
    trace.record(abs(np.trace(rho) - 1.0), dict(case, epsT=0.1))

    # pure dephasing of |+>: coherence is (1/2) e^{-2 eps t} for this dissipator
    decay = CheckResult("pure dephasing coherence decay", 1e-7)
    plus = np.array([0.0, 1.0, 1.0], dtype=complex) / math.sqrt(2)
    eps = 0.1
    for t in (0.5, 1.0, 2.0):
        out = integrate_lindblad(projector(plus), p, eps, cfg, hamiltonian=np.zeros((3, 3)), duration=t)
        decay.record(abs(out[1, 2] - 0.5 * math.exp(-2 * eps * t)), {"epsilon": eps, "t": t})
    return [unitary, trace, decay]


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  {'worst':>10}  {'tol':>8}  cases"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.worst:>10.3e}  {r.tolerance:>8.1e}  {r.cases}")
    failed = [r for r in results if not r.passed]
    if failed:
        lines.append("")
        lines.append("failed: " + ", ".join(r.name for r in failed))
        first = failed[0]
        case = ", ".join(f"{k}={v!r}" for k, v in first.failing_case.items())
        lines.append(f"first failing case ({first.name}): {case}")
    else:
        lines.append("")
        lines.append(f"all {len(results)} checks passed")
    return "\n".join(lines) + "\n"
