"""Gate robustness under dephasing, pulse-area and frequency-detuning errors.

Coherent errors (pulse area ``xi``, detuning ``kappa``) have closed-form
fidelities which are checked here against direct unitary propagation.
Dephasing has no closed form and goes through a fixed-step RK4 integration
of the Lindblad equation.  Error strengths enter as dimensionless products
with the gate period (``xiT``, ``kappaT``, ``epsT``); closed forms assume
``Omega T = pi``.

Fidelity follows the convention ``F = Tr(rho_ideal rho_real)`` and is
averaged uniformly over the logical Bloch sphere of input states
``cos(theta/2) e^{i varphi/2}|b> + sin(theta/2) e^{-i varphi/2}|d>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .exceptions import ContractViolation, ConvergenceWarning, InvalidInput
from .gate import GateParams, bright_dark, build_h_eff, evolve_gate, logical_gate
from .quantum_core import I3, check_density, check_hermitian, dagger, hermitian_expm, input_kets

__all__ = [
    "Dephasing",
    "PulseArea",
    "Detuning",
    "ErrorSpec",
    "InputState",
    "IntegratorConfig",
    "QuadratureConfig",
    "FidelityReport",
    "SensitivityReport",
    "dephasing_operators",
    "lindblad_rhs",
    "liouvillian",
    "rk4_propagator",
    "integrate_lindblad",
    "dephasing_fidelities",
    "dephasing_fidelity",
    "sphere_nodes",
    "average_fidelity",
    "propagated_fidelities",
    "pulse_area_unitary",
    "pulse_area_fidelity",
    "pulse_area_fidelity_exact",
    "pulse_area_fidelity_approx",
    "pulse_area_avg_approx",
    "pulse_area_fidelity_simulated",
    "detuning_unitary",
    "detuning_b",
    "detuning_fidelity",
    "detuning_fidelity_exact",
    "detuning_fidelity_approx",
    "detuning_avg_approx",
    "detuning_fidelity_simulated",
    "sensitivity_extremes",
]

Method = Literal["closed_form_exact", "closed_form_approx", "simulated"]


@dataclass(frozen=True)
class Dephasing:
    epsilon: float
    kind: str = field(default="dephasing", init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidInput(f"dephasing rate must be finite and >= 0, got {self.epsilon!r}")


@dataclass(frozen=True)
class PulseArea:
    xi: float
    kind: str = field(default="pulse_area", init=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.xi):
            raise InvalidInput(f"pulse-area error must be finite, got {self.xi!r}")


@dataclass(frozen=True)
class Detuning:
    kappa: float
    kind: str = field(default="detuning", init=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.kappa):
            raise InvalidInput(f"detuning error must be finite, got {self.kappa!r}")


ErrorSpec = Union[Dephasing, PulseArea, Detuning]


@dataclass(frozen=True)
class InputState:
    theta: float
    varphi: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and 0.0 <= self.theta <= math.pi):
            raise InvalidInput(f"theta must lie in [0, pi], got {self.theta!r}")
        if not (math.isfinite(self.varphi) and 0.0 <= self.varphi <= 2 * math.pi):
            raise InvalidInput(f"varphi must lie in [0, 2pi], got {self.varphi!r}")


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int = 2000
    method: str = "rk4-fixed"

    def __post_init__(self) -> None:
        if self.method != "rk4-fixed":
            raise InvalidInput(f"only the 'rk4-fixed' integrator is available, got {self.method!r}")
        if int(self.steps) != self.steps or self.steps < 10:
            raise InvalidInput(f"integrator needs an integer number of steps >= 10, got {self.steps!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Sphere-averaging rule.

    ``gauss`` is Gauss-Legendre in ``cos(theta)`` times a uniform periodic
    trapezoid in ``varphi``; ``monte_carlo`` draws ``samples`` points uniformly
    on the sphere from ``seed``.
    """

    mode: Literal["gauss", "monte_carlo"] = "gauss"
    n_theta: int = 32
    n_phi: int = 64
    samples: int = 4096
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("gauss", "monte_carlo"):
            raise InvalidInput(f"unknown quadrature mode {self.mode!r}")
        if self.n_theta < 1 or self.n_phi < 1 or self.samples < 2:
            raise InvalidInput("quadrature node and sample counts must be positive")


@dataclass(frozen=True)
class FidelityReport:
    """One fidelity evaluation.

    ``value`` is the raw number (it may stray outside ``[0, 1]`` by rounding);
    :attr:`clamped` is what gets reported.  ``input`` is ``None`` for
    averages.  ``b_frequency`` is only set for the detuning closed form.
    """

    value: float
    method: Method
    error_product: float
    gate_params: GateParams | None = None
    input: InputState | None = None
    b_frequency: float | None = None
    stderr: float | None = None
    samples: int | None = None

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, float(self.value)))


def _half_angle_weights(theta):
    # (1 +- cos theta)/2 keeps cos^2(pi/2) at exactly zero
    ct = np.cos(theta)
    return 0.5 * (1.0 + ct), 0.5 * (1.0 - ct)


# -- dephasing -----------------------------------------------------------------


def dephasing_operators(epsilon: float) -> list[np.ndarray]:
    """``L_k = sqrt(eps) (|e><e| - |k><k|)`` for ``k = 0, 1``."""
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise InvalidInput(f"dephasing rate must be finite and >= 0, got {epsilon!r}")
    r = math.sqrt(epsilon)
    return [r * np.diag([1.0, -1.0, 0.0]).astype(complex), r * np.diag([1.0, 0.0, -1.0]).astype(complex)]


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, epsilon: float, check: bool = True) -> np.ndarray:
    """``-i[H, rho] + sum_k (2 L rho L^dag - L^dag L rho - rho L^dag L)``."""
    ops = dephasing_operators(epsilon)
    if check:
        rho = check_density(rho)
        h = check_hermitian(h)
    out = -1j * (h @ rho - rho @ h)
    for op in ops:
        ld = op.conj().T
        ldl = ld @ op
        out += 2.0 * op @ rho @ ld - ldl @ rho - rho @ ldl
    return out


def liouvillian(h: np.ndarray, epsilon: float) -> np.ndarray:
    """9x9 generator acting on row-major ``rho.reshape(9)``.

    Uses ``vec(A rho B) = (A kron B^T) vec(rho)``.
    """
    h = check_hermitian(h)
    gen = -1j * (np.kron(h, I3) - np.kron(I3, h.T))
    for op in dephasing_operators(epsilon):
        ldl = op.conj().T @ op
        gen += 2.0 * np.kron(op, op.conj()) - np.kron(ldl, I3) - np.kron(I3, ldl.T)
    return gen


def rk4_propagator(h: np.ndarray, epsilon: float, duration: float, steps: int) -> np.ndarray:
    """Superoperator of ``steps`` classical RK4 steps over ``duration``.

    For a linear time-independent generator one RK4 step is exactly the
    degree-4 Taylor polynomial of ``dt * L``, so this reproduces
    :func:`integrate_lindblad` for every initial state at once.
    """
    gen = liouvillian(h, epsilon) * (duration / steps)
    step = np.eye(9, dtype=complex)
    term = np.eye(9, dtype=complex)
    for k in range(1, 5):
        term = term @ gen / k
        step = step + term
    return np.linalg.matrix_power(step, steps)


def integrate_lindblad(
    rho0: np.ndarray,
    p: GateParams,
    epsilon: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    hamiltonian: np.ndarray | None = None,
    duration: float | None = None,
) -> np.ndarray:
    """Propagate ``rho0`` over the gate period with fixed-step RK4.

    ``hamiltonian`` replaces ``build_h_eff(p)`` and ``duration`` replaces
    ``p.period``.  A :class:`ConvergenceWarning` is emitted when the output
    trace drifts by more than 1e-9 or an eigenvalue falls below -1e-8.
    """
    rho = check_density(rho0).copy()
    h = build_h_eff(p) if hamiltonian is None else check_hermitian(hamiltonian)
    t_end = p.period if duration is None else float(duration)
    if not (math.isfinite(t_end) and t_end >= 0):
        raise InvalidInput(f"duration must be finite and >= 0, got {duration!r}")
    dt = t_end / cfg.steps
    for _ in range(cfg.steps):
        k1 = lindblad_rhs(rho, h, epsilon, check=False)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, epsilon, check=False)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, epsilon, check=False)
        k4 = lindblad_rhs(rho + dt * k3, h, epsilon, check=False)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.trace(rho) - np.trace(rho0))
    lowest = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if drift > 1e-9 or lowest < -1e-8:
        warnings.warn(
            f"RK4 with {cfg.steps} steps: trace drift {drift:.2e}, lowest eigenvalue {lowest:.2e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return rho


def dephasing_fidelities(
    p: GateParams,
    theta: np.ndarray,
    varphi: np.ndarray,
    epsilonT: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> np.ndarray:
    """Vectorised dephasing fidelity for many input states sharing one gate."""
    eps = epsilonT / p.period
    prop = rk4_propagator(build_h_eff(p), eps, p.period, cfg.steps)
    bd = bright_dark(p.alpha, p.beta)
    psi = input_kets(theta, varphi, bd.bright, bd.dark)
    shape = psi.shape[:-1]
    psi = psi.reshape(-1, 3)
    ideal = np.zeros_like(psi)
    ideal[:, 1:] = psi[:, 1:] @ logical_gate(p).matrix.T
    rho0 = np.einsum("ni,nj->nij", psi, psi.conj()).reshape(-1, 9)
    rho = (rho0 @ prop.T).reshape(-1, 3, 3)
    f = np.einsum("ni,nij,nj->n", ideal.conj(), rho, ideal)
    return f.real.reshape(shape)


def dephasing_fidelity(
    p: GateParams,
    s: InputState,
    epsilonT: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> FidelityReport:
    eps = epsilonT / p.period
    bd = bright_dark(p.alpha, p.beta)
    psi = input_kets(s.theta, s.varphi, bd.bright, bd.dark).reshape(3)
    psi[0] = 0.0
    rho_in = np.outer(psi, psi.conj())
    rho_real = integrate_lindblad(rho_in, p, eps, cfg)
    ideal = np.zeros(3, dtype=complex)
    ideal[1:] = logical_gate(p).matrix @ psi[1:]
    value = np.vdot(ideal, rho_real @ ideal)
    if abs(value.imag) > 1e-10:
        raise ContractViolation(f"fidelity has imaginary residue {value.imag:.3e}")
    return FidelityReport(float(value.real), "simulated", float(epsilonT), p, s)


# -- sphere averaging ----------------------------------------------------------


def sphere_nodes(n_theta: int = 32, n_phi: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flattened ``(theta, varphi, weight)`` nodes; weights sum to one."""
    x, w = leggauss(n_theta)
    theta = np.arccos(x)
    varphi = 2 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, varphi, indexing="ij")
    ww = np.outer(0.5 * w, np.full(n_phi, 1.0 / n_phi))
    return tt.ravel(), pp.ravel(), ww.ravel()


def average_fidelity(
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quad: QuadratureConfig = QuadratureConfig(),
    method: Method = "simulated",
    error_product: float = float("nan"),
    gate_params: GateParams | None = None,
) -> FidelityReport:
    """Uniform average of ``evaluator(theta, varphi)`` over the Bloch sphere.

    ``evaluator`` must accept equal-shape arrays.  In Monte Carlo mode the
    report also carries the standard error and sample count.
    """
    if quad.mode == "gauss":
        theta, varphi, weights = sphere_nodes(quad.n_theta, quad.n_phi)
        vals = np.asarray(evaluator(theta, varphi), dtype=float)
        return FidelityReport(float(np.dot(weights, vals)), method, error_product, gate_params)
    rng = np.random.default_rng(quad.seed)
    theta = np.arccos(rng.uniform(-1.0, 1.0, quad.samples))
    varphi = rng.uniform(0.0, 2 * np.pi, quad.samples)
    vals = np.asarray(evaluator(theta, varphi), dtype=float)
    stderr = float(vals.std(ddof=1) / math.sqrt(quad.samples))
    return FidelityReport(
        float(vals.mean()), method, error_product, gate_params, stderr=stderr, samples=quad.samples
    )


# -- coherent errors: propagation --------------------------------------------


def propagated_fidelities(
    p: GateParams, real_u: np.ndarray, theta, varphi
) -> np.ndarray:
    """``|<psi| U_ideal^dag U_real |psi>|^2`` over input states, vectorised."""
    bd = bright_dark(p.alpha, p.beta)
    psi = input_kets(theta, varphi, bd.bright, bd.dark)
    overlap = evolve_gate(p).conj().T @ real_u
    amp = np.einsum("...i,ij,...j->...", psi.conj(), overlap, psi)
    return np.abs(amp) ** 2


def pulse_area_unitary(p: GateParams, xi: float) -> np.ndarray:
    """``exp(-i (H_eff + H_xi) T)``; ``H_xi`` is ``H_eff`` with ``xi`` in place of ``Omega``."""
    h = build_h_eff(p) * (1.0 + xi / p.omega)
    return hermitian_expm(h, p.period)


def detuning_unitary(p: GateParams, kappa: float) -> np.ndarray:
    """``exp(-i (H_eff + kappa (|0><0| + |1><1|)) T)``."""
    h = build_h_eff(p) + kappa * np.diag([0.0, 1.0, 1.0])
    return hermitian_expm(h, p.period)


def pulse_area_fidelity_simulated(p: GateParams, s: InputState, xiT: float) -> FidelityReport:
    u = pulse_area_unitary(p, xiT / p.period)
    f = propagated_fidelities(p, u, s.theta, s.varphi)
    return FidelityReport(float(f), "simulated", float(xiT), p, s)


def detuning_fidelity_simulated(p: GateParams, s: InputState, kappaT: float) -> FidelityReport:
    u = detuning_unitary(p, kappaT / p.period)
    f = propagated_fidelities(p, u, s.theta, s.varphi)
    return FidelityReport(float(f), "simulated", float(kappaT), p, s)


# -- coherent errors: closed forms -------------------------------------------


def pulse_area_fidelity(theta, gamma, xiT):
    """Exact pulse-area fidelity; independent of ``varphi``. Vectorised."""
    c2, s2 = _half_angle_weights(theta)
    sg = np.sin(gamma)
    x = np.asarray(xiT, dtype=float)
    xp = x * sg
    re = s2 + c2 * (np.cos(xp) * np.cos(x) + np.sin(xp) * np.sin(x) * sg)
    im = np.cos(xp) * np.sin(x) * sg - np.sin(xp) * np.cos(x)
    return re**2 + c2**2 * im**2


def pulse_area_fidelity_exact(theta: float, gamma: float, xiT: float) -> FidelityReport:
    return FidelityReport(float(pulse_area_fidelity(theta, gamma, xiT)), "closed_form_exact", float(xiT))


def pulse_area_fidelity_approx(theta: float, gamma: float, xiT: float) -> FidelityReport:
    c2, _ = _half_angle_weights(theta)
    value = 1.0 - c2 * math.cos(gamma) ** 2 * xiT**2
    return FidelityReport(float(value), "closed_form_approx", float(xiT))


def pulse_area_avg_approx(gamma: float, xiT: float) -> FidelityReport:
    return FidelityReport(1.0 - 0.5 * math.cos(gamma) ** 2 * xiT**2, "closed_form_approx", float(xiT))


def detuning_b(gamma, kappaT, omegaT: float = math.pi):
    """``B T = sqrt((Omega T)^2 - kappa T Omega T sin(gamma) + (kappa T)^2 / 4)``."""
    k = np.asarray(kappaT, dtype=float)
    return np.sqrt(omegaT**2 - k * omegaT * np.sin(gamma) + 0.25 * k**2)


def detuning_fidelity(theta, gamma, kappaT, omegaT: float = math.pi):
    """Exact detuning fidelity; independent of ``varphi``. Vectorised."""
    c2, s2 = _half_angle_weights(theta)
    k = np.asarray(kappaT, dtype=float)
    bt = detuning_b(gamma, k, omegaT)
    # sin(BT) * (Omega sin(gamma) - kappa/2) / B, finite as BT -> 0
    num = omegaT * np.sin(gamma) - 0.5 * k
    sin_ratio = np.where(bt > 0, np.sin(bt) * num / np.where(bt > 0, bt, 1.0), num)
    ch, sh = np.cos(0.5 * k), np.sin(0.5 * k)
    first = s2 - c2 * ch * np.cos(bt) + c2 * sh * sin_ratio
    second = c2 * sh * np.cos(bt) + c2 * ch * sin_ratio
    return first**2 + second**2


def detuning_fidelity_exact(
    theta: float, gamma: float, kappaT: float, OmegaT: float = math.pi, omega: float = 1.0
) -> FidelityReport:
    """Exact detuning fidelity; ``b_frequency`` is ``B`` in the units of ``omega``."""
    bt = float(detuning_b(gamma, kappaT, OmegaT))
    value = float(detuning_fidelity(theta, gamma, kappaT, OmegaT))
    return FidelityReport(value, "closed_form_exact", float(kappaT), b_frequency=bt * omega / OmegaT)


def detuning_fidelity_approx(theta: float, gamma: float, kappaT: float) -> FidelityReport:
    c2, _ = _half_angle_weights(theta)
    q = c2 * math.cos(gamma) ** 2
    return FidelityReport(float(1.0 - 0.25 * q * (1.0 - q) * kappaT**2), "closed_form_approx", float(kappaT))


def detuning_avg_approx(gamma: float, kappaT: float) -> FidelityReport:
    cg2 = math.cos(gamma) ** 2
    return FidelityReport(1.0 - cg2 * (3.0 - 2.0 * cg2) * kappaT**2 / 24.0, "closed_form_approx", float(kappaT))


# -- most / least robust inputs ----------------------------------------------


@dataclass(frozen=True)
class SensitivityReport:
    kind: str
    gamma: float
    error_product: float
    argmin_theta: float
    argmax_theta: float
    min_fidelity: float
    max_fidelity: float
    grid_step: float
    predicted_argmin: float | None


def sensitivity_extremes(
    kind: str, gamma: float, error_product: float = 0.05, n_grid: int = 513
) -> SensitivityReport:
    """Least and most robust polar angle of the input state for a coherent error.

    The exact fidelity is scanned on a uniform ``theta`` grid over ``[0, pi]``
    and interior minima are polished with a bounded scalar search.
    ``predicted_argmin`` is the small-error prediction: ``theta = 0`` for the
    pulse-area error; for detuning the angle with
    ``cos^2(theta/2) = 1 / (2 cos^2 gamma)`` when that is attainable, else 0.
    """
    if kind == "pulse_area":
        f = lambda th: pulse_area_fidelity(th, gamma, error_product)  # noqa: E731
        predicted = 0.0
    elif kind == "detuning":
        f = lambda th: detuning_fidelity(th, gamma, error_product)  # noqa: E731
        cg2 = math.cos(gamma) ** 2
        predicted = 2.0 * math.acos(math.sqrt(0.5 / cg2)) if cg2 >= 0.5 else 0.0
    else:
        raise InvalidInput(f"sensitivity is defined for 'pulse_area' or 'detuning', got {kind!r}")

    grid = np.linspace(0.0, math.pi, n_grid)
    vals = f(grid)
    step = float(grid[1] - grid[0])
    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    argmin, fmin = float(grid[i_min]), float(vals[i_min])
    if 0 < i_min < n_grid - 1:
        res = minimize_scalar(
            lambda th: float(f(th)), bounds=(grid[i_min - 1], grid[i_min + 1]), method="bounded",
            options={"xatol": 1e-10},
        )
        if res.fun <= fmin:
            argmin, fmin = float(res.x), float(res.fun)
    return SensitivityReport(
        kind, gamma, error_product, argmin, float(grid[i_max]), fmin, float(vals[i_max]), step, predicted
    )
