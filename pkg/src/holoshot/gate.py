"""Single-shot holonomic one-qubit gates on a three-level lambda system.

A gate is fixed by ``GateParams(alpha, beta, gamma, omega)``: ``alpha`` and
``beta`` pick the bright state ``|b> = cos(alpha)|0> + e^{i beta} sin(alpha)|1>``
(the rotation axis), ``gamma`` sets the rotation angle
``phi = pi sin(gamma) + pi`` and ``omega`` is the overall coupling scale.  A
square pulse of length ``T = pi / omega`` returns the ``{|e>, |b>}`` pair to
itself with phase ``e^{-i phi}`` while ``|d>`` is untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInput, UnreachableTransition
from .quantum_core import (
    E,
    G0,
    G1,
    I3,
    LOGICAL_PROJECTOR,
    LogicalOperator,
    basis_ket,
    hermitian_expm,
    projector,
)

__all__ = [
    "GateParams",
    "BrightDarkBasis",
    "TargetRotation",
    "LaserSettings",
    "RotatingFrameHamiltonian",
    "RWAReport",
    "HolonomyReport",
    "NAMED_AXES",
    "bright_dark",
    "params_to_physical",
    "build_h_eff",
    "build_h_rot",
    "gate_phase",
    "evolve_gate",
    "logical_gate",
    "synthesize",
    "map_to_lasers",
    "check_rwa",
    "check_holonomy",
    "perturb_bright",
]

TWO_PI = 2.0 * math.pi

# (alpha, beta) for the axis labels used on the command line
NAMED_AXES = {
    "X": (math.pi / 4, 0.0),
    "Y": (math.pi / 4, math.pi / 2),
    "Z": (0.0, 0.0),
}


@dataclass(frozen=True)
class GateParams:
    alpha: float
    beta: float
    gamma: float
    omega: float = 1.0

    def __post_init__(self) -> None:
        vals = (self.alpha, self.beta, self.gamma, self.omega)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput(f"gate parameters must be finite, got {vals}")
        if self.omega <= 0:
            raise InvalidInput(f"omega must be positive, got {self.omega}")
        if not 0.0 <= self.alpha <= math.pi / 2:
            raise InvalidInput(f"alpha must lie in [0, pi/2], got {self.alpha}")
        if not 0.0 <= self.beta < TWO_PI:
            raise InvalidInput(f"beta must lie in [0, 2pi), got {self.beta}")
        if not -math.pi / 2 <= self.gamma <= math.pi / 2:
            raise InvalidInput(f"gamma must lie in [-pi/2, pi/2], got {self.gamma}")

    @property
    def period(self) -> float:
        return math.pi / self.omega

    @property
    def rotation_angle(self) -> float:
        return gate_phase(self.gamma)


@dataclass(frozen=True)
class BrightDarkBasis:
    bright: np.ndarray
    dark: np.ndarray

    def matrix(self) -> np.ndarray:
        """Columns ``(|e>, |b>, |d>)`` expressed in ``(|e>, |0>, |1>)``."""
        return np.column_stack([basis_ket(E), self.bright, self.dark])


def bright_dark(alpha: float, beta: float) -> BrightDarkBasis:
    c, s = math.cos(alpha), math.sin(alpha)
    ph = np.exp(1j * beta)
    bright = np.array([0.0, c, ph * s], dtype=complex)
    dark = np.array([0.0, s, -ph * c], dtype=complex)
    bright.setflags(write=False)
    dark.setflags(write=False)
    return BrightDarkBasis(bright, dark)


def params_to_physical(p: GateParams) -> tuple[float, complex, complex]:
    """Shared detuning and the two complex Rabi couplings ``(Delta, Omega_0, Omega_1)``."""
    delta = -2.0 * p.omega * math.sin(p.gamma)
    cg = math.cos(p.gamma)
    omega0 = complex(p.omega * math.cos(p.alpha) * cg)
    omega1 = p.omega * np.exp(1j * p.beta) * math.sin(p.alpha) * cg
    return delta, omega0, complex(omega1)


def _couplings(omega0: complex, omega1: complex) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[G0, E] = omega0
    h[G1, E] = omega1
    return h + h.conj().T


def build_h_eff(p: GateParams, include_global_term: bool = False) -> np.ndarray:
    """``-Delta|e><e| + sum_j (Omega_j|j><e| + h.c.)``, optionally plus ``Delta * I``."""
    delta, omega0, omega1 = params_to_physical(p)
    h = _couplings(omega0, omega1)
    h[E, E] = -delta
    if include_global_term:
        h = h + delta * I3
    return h


@dataclass(frozen=True)
class LaserSettings:
    """Laser configuration that realises a gate after the rotating-wave step.

    ``phase_offset`` holds, per transition, the extra laser phase needed so
    that ``g_j e^{i phase_offset_j} d_j`` equals the complex coupling.
    """

    nu: tuple[float, float]
    detuning: tuple[float, float]
    envelope: tuple[float, float]
    dipole: tuple[complex, complex]
    phase_offset: tuple[float, float]
    delta: float
    omega_e: tuple[float, float]

    def rabi(self) -> tuple[complex, complex]:
        return tuple(
            g * np.exp(1j * chi) * d for g, chi, d in zip(self.envelope, self.phase_offset, self.dipole)
        )


@dataclass(frozen=True)
class RotatingFrameHamiltonian:
    matrix: np.ndarray
    unequal_detunings: bool = False
    flags: tuple[str, ...] = field(default=())


def build_h_rot(lasers: LaserSettings) -> RotatingFrameHamiltonian:
    """``sum_j Delta_j|j><j| + (Omega_j|j><e| + h.c.)`` before the equal-detuning reduction."""
    omega0, omega1 = lasers.rabi()
    h = _couplings(omega0, omega1)
    h[G0, G0] += lasers.detuning[0]
    h[G1, G1] += lasers.detuning[1]
    unequal = lasers.detuning[0] != lasers.detuning[1]
    return RotatingFrameHamiltonian(h, unequal, ("unequal detunings",) if unequal else ())


def gate_phase(gamma: float) -> float:
    return math.pi * math.sin(gamma) + math.pi


def evolve_gate(p: GateParams, include_global_term: bool = False) -> np.ndarray:
    return hermitian_expm(build_h_eff(p, include_global_term), p.period)


def logical_gate(p: GateParams) -> LogicalOperator:
    """``exp(-i phi/2 (|b><b| - |d><d|))`` on ``(|0>, |1>)``."""
    bd = bright_dark(p.alpha, p.beta)
    b, d = bd.bright[1:], bd.dark[1:]
    half = gate_phase(p.gamma) / 2
    u = np.exp(-1j * half) * np.outer(b, b.conj()) + np.exp(1j * half) * np.outer(d, d.conj())
    return LogicalOperator(u, "computational")


@dataclass(frozen=True)
class TargetRotation:
    """A rotation by ``angle`` about the Bloch axis of ``|b>``.

    Build with :meth:`from_bloch`, :meth:`from_axis_angles` or :meth:`named`;
    the stored axis is always a unit Bloch vector.  Angles in ``[0, 2pi]`` are
    kept (so ``2pi`` stays distinct from ``0``); anything else is reduced
    modulo ``2pi``.
    """

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self) -> None:
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,) or not np.all(np.isfinite(n)):
            raise InvalidInput(f"axis must be a finite 3-vector, got {self.axis!r}")
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-12:
            raise InvalidInput(f"axis must be a unit Bloch vector (norm {norm!r})")
        if not math.isfinite(self.angle):
            raise InvalidInput(f"angle must be finite, got {self.angle!r}")
        if not 0.0 <= self.angle <= TWO_PI:
            object.__setattr__(self, "angle", self.angle % TWO_PI)

    @classmethod
    def from_bloch(cls, vector, angle: float) -> "TargetRotation":
        n = np.asarray(vector, dtype=float)
        if n.shape != (3,) or not np.all(np.isfinite(n)):
            raise InvalidInput(f"axis must be a finite 3-vector, got {vector!r}")
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise InvalidInput("rotation axis has zero Bloch norm")
        return cls(tuple(float(x) for x in n / norm), angle)

    @classmethod
    def from_axis_angles(cls, alpha: float, beta: float, angle: float) -> "TargetRotation":
        s = math.sin(2 * alpha)
        return cls.from_bloch((s * math.cos(beta), s * math.sin(beta), math.cos(2 * alpha)), angle)

    @classmethod
    def named(cls, label: str, angle: float) -> "TargetRotation":
        try:
            alpha, beta = NAMED_AXES[label.upper()]
        except KeyError:
            raise InvalidInput(f"unknown axis label {label!r}; expected one of X, Y, Z") from None
        return cls.from_axis_angles(alpha, beta, angle)

    def axis_angles(self) -> tuple[float, float]:
        """Canonical ``(alpha, beta)`` with ``alpha`` in ``[0, pi/2]`` and ``beta`` in ``[0, 2pi)``."""
        x, y, z = self.axis
        # atan2 keeps full precision near the poles, where acos(z) does not
        rho = math.hypot(x, y)
        alpha = 0.5 * math.atan2(rho, z)
        if rho == 0.0:
            return alpha, 0.0
        beta = math.atan2(y, x) % TWO_PI
        # atan2 of a tiny negative y can round up to exactly 2pi
        return alpha, 0.0 if beta >= TWO_PI else beta

    def matrix(self) -> LogicalOperator:
        """``exp(-i angle/2 n.sigma)`` on ``(|0>, |1>)``."""
        x, y, z = self.axis
        n_sigma = np.array([[z, x - 1j * y], [x + 1j * y, -z]], dtype=complex)
        half = self.angle / 2
        return LogicalOperator(math.cos(half) * np.eye(2) - 1j * math.sin(half) * n_sigma)


def synthesize(target: TargetRotation, omega: float = 1.0) -> GateParams:
    """Gate parameters whose logical gate equals ``target`` up to global phase.

    ``gamma`` comes from inverting ``phi = pi sin(gamma) + pi`` on the principal
    branch.  An axis flip ``n -> -n`` together with ``phi -> 2pi - phi`` is the
    same gate, so taking ``alpha`` from the polar angle of ``n`` (always in
    ``[0, pi/2]``) loses nothing.  For the identity (angle 0 or ``2pi``) the axis
    is meaningless and ``alpha = beta = 0`` is used.
    """
    if not (math.isfinite(omega) and omega > 0):
        raise InvalidInput(f"omega must be positive, got {omega!r}")
    phi = target.angle
    if not 0.0 <= phi <= TWO_PI:
        raise InvalidInput(f"rotation angle {phi!r} outside [0, 2pi]")
    gamma = math.asin(min(1.0, max(-1.0, phi / math.pi - 1.0)))
    if phi in (0.0, TWO_PI):
        return GateParams(0.0, 0.0, gamma, omega)
    alpha, beta = target.axis_angles()
    return GateParams(alpha, beta, gamma, omega)


def map_to_lasers(
    p: GateParams,
    omega_e0: float,
    omega_e1: float,
    d0: complex = 1.0,
    d1: complex = 1.0,
) -> LaserSettings:
    """Laser frequencies, envelopes and phases realising ``p`` on the given transitions.

    Both lasers share the detuning ``Delta``, so ``nu_j = Delta + omega_ej``.
    """
    delta, omega0, omega1 = params_to_physical(p)
    envelope, offset = [], []
    for j, (rabi, d) in enumerate(((omega0, complex(d0)), (omega1, complex(d1)))):
        if abs(d) == 0.0:
            raise UnreachableTransition(f"transition |{j}> <-> |e> has zero dipole coupling")
        envelope.append(abs(rabi) / abs(d))
        offset.append(float(np.angle(rabi) - np.angle(d)) % TWO_PI if abs(rabi) > 0 else 0.0)
    return LaserSettings(
        nu=(delta + omega_e0, delta + omega_e1),
        detuning=(delta, delta),
        envelope=(envelope[0], envelope[1]),
        dipole=(complex(d0), complex(d1)),
        phase_offset=(offset[0], offset[1]),
        delta=delta,
        omega_e=(float(omega_e0), float(omega_e1)),
    )


@dataclass(frozen=True)
class RWAReport:
    ratios: tuple[float, float]
    max_ratio: float
    threshold: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "ratios": list(self.ratios),
            "max_ratio": self.max_ratio,
            "threshold": self.threshold,
            "pass": self.passed,
        }


def check_rwa(p: GateParams, lasers: LaserSettings, threshold: float = 1e-3) -> RWAReport:
    """Rotating-wave validity: every ``|Omega_j| / nu_j`` must be strictly below ``threshold``."""
    _, omega0, omega1 = params_to_physical(p)
    ratios = []
    for rabi, nu in zip((omega0, omega1), lasers.nu):
        if abs(rabi) == 0.0:
            ratios.append(0.0)
        elif nu <= 0.0:
            ratios.append(math.inf)
        else:
            ratios.append(abs(rabi) / nu)
    worst = max(ratios)
    return RWAReport((ratios[0], ratios[1]), worst, threshold, worst < threshold)


@dataclass(frozen=True)
class HolonomyReport:
    cyclicity_residual: float
    max_dynamical_matrix_element: float
    cyclicity_tol: float
    dynamical_tol: float

    @property
    def cyclic(self) -> bool:
        return self.cyclicity_residual < self.cyclicity_tol

    @property
    def parallel_transport(self) -> bool:
        return self.max_dynamical_matrix_element < self.dynamical_tol

    @property
    def passed(self) -> bool:
        return self.cyclic and self.parallel_transport


def check_holonomy(
    p: GateParams,
    hamiltonian: np.ndarray | None = None,
    period: float | None = None,
    cyclicity_tol: float = 1e-10,
    dynamical_tol: float = 1e-12,
) -> HolonomyReport:
    """Numerically test cyclicity and absence of dynamical phase on the logical subspace.

    ``hamiltonian`` and ``period`` override ``build_h_eff(p)`` and ``p.period``;
    they exist so that deliberately broken evolutions can be checked.
    ``dynamical_tol`` is relative to ``p.omega``.
    """
    h = build_h_eff(p) if hamiltonian is None else np.asarray(hamiltonian, dtype=complex)
    t = p.period if period is None else period
    u = hermitian_expm(h, t)
    cyc = float(np.linalg.norm(u @ LOGICAL_PROJECTOR @ u.conj().T - LOGICAL_PROJECTOR))
    bd = bright_dark(p.alpha, p.beta)
    frame = np.column_stack([bd.bright, bd.dark])
    dyn = float(np.max(np.abs(frame.conj().T @ h @ frame)))
    return HolonomyReport(cyc, dyn, cyclicity_tol, dynamical_tol * p.omega)


def perturb_bright(p: GateParams, strength: float) -> np.ndarray:
    """``H_eff + strength * omega |b><b|``: a Hamiltonian that breaks parallel transport."""
    bd = bright_dark(p.alpha, p.beta)
    return build_h_eff(p) + strength * p.omega * projector(bd.bright)
