"""Dense linear algebra on the three-level space.

Every 3x3 array uses the fixed ordered basis ``(|e>, |0>, |1>)``; every 2x2
logical array uses ``(|0>, |1>)`` unless tagged otherwise.  Kets are plain
complex ``ndarray`` of shape ``(3,)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import ContractViolation, InvalidInput

__all__ = [
    "E",
    "G0",
    "G1",
    "I3",
    "LOGICAL_PROJECTOR",
    "Tolerances",
    "DEFAULT_TOL",
    "LogicalOperator",
    "basis_ket",
    "projector",
    "dagger",
    "check_hermitian",
    "check_unitary",
    "check_density",
    "hermitian_expm",
    "state_fidelity",
    "distance_up_to_phase",
    "logical_block",
    "input_kets",
    "bloch_input_state",
]

# index of each level in the ordered basis
E, G0, G1 = 0, 1, 2

I3 = np.eye(3, dtype=complex)
LOGICAL_PROJECTOR = np.diag([0.0, 1.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class Tolerances:
    hermiticity_tol: float = 1e-12
    unitarity_tol: float = 1e-12
    trace_tol: float = 1e-10
    phase_align_tol: float = 1e-11
    positivity_tol: float = 1e-10

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not value > 0:
                raise InvalidInput(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class LogicalOperator:
    """A 2x2 operator on the qubit subspace.

    ``basis`` is ``"computational"`` for ``(|0>, |1>)`` or ``"bright_dark"``
    for ``(|b>, |d>)``.
    """

    matrix: np.ndarray
    basis: Literal["computational", "bright_dark"] = "computational"

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidInput(f"logical operator must be 2x2, got shape {m.shape}")
        if self.basis not in ("computational", "bright_dark"):
            raise InvalidInput(f"unknown basis tag {self.basis!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def is_unitary(self, tol: float = DEFAULT_TOL.unitarity_tol) -> bool:
        return bool(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(2)) < tol)


def basis_ket(index: int) -> np.ndarray:
    k = np.zeros(3, dtype=complex)
    k[index] = 1.0
    return k


def projector(ket: ArrayLike) -> np.ndarray:
    k = np.asarray(ket, dtype=complex)
    return np.outer(k, k.conj())


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _as_finite_matrix(m: ArrayLike, shape: tuple[int, int] = (3, 3)) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != shape:
        raise InvalidInput(f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has NaN or infinite entries")
    return a


def check_hermitian(h: ArrayLike, tol: float = DEFAULT_TOL.hermiticity_tol) -> np.ndarray:
    """Return ``h`` as a complex array, raising if it is not Hermitian.

    The deviation is the largest elementwise ``|h - h^dagger|``.
    """
    a = _as_finite_matrix(h)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise ContractViolation(f"operator is not Hermitian (max deviation {dev:.3e} > {tol:.1e})")
    return a


def check_unitary(u: ArrayLike, tol: float = DEFAULT_TOL.unitarity_tol) -> np.ndarray:
    a = _as_finite_matrix(u, np.shape(u))
    dev = np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]))
    if dev >= tol:
        raise ContractViolation(f"operator is not unitary (||U^dag U - I||_F = {dev:.3e})")
    return a


def check_density(rho: ArrayLike, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    a = _as_finite_matrix(rho)
    herm = np.max(np.abs(a - a.conj().T))
    if herm > tol.trace_tol:
        raise ContractViolation(f"density matrix is not Hermitian (deviation {herm:.3e})")
    tr = np.trace(a)
    if abs(tr - 1.0) > tol.trace_tol:
        raise ContractViolation(f"density matrix trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0]
    if lo <= -tol.positivity_tol:
        raise ContractViolation(f"density matrix has negative eigenvalue {lo:.3e}")
    return a


def hermitian_expm(h: ArrayLike, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition.

    Negative ``t`` is accepted and gives the inverse propagator.
    """
    if not np.isfinite(t):
        raise InvalidInput(f"time must be finite, got {t!r}")
    a = check_hermitian(h)
    w, v = np.linalg.eigh(a)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def state_fidelity(rho: ArrayLike, rho_prime: ArrayLike, tol: Tolerances = DEFAULT_TOL) -> float:
    """``Tr(rho rho')`` with no renormalisation for mixed states."""
    a = check_density(rho, tol)
    b = check_density(rho_prime, tol)
    residue = np.sum(a * b.T).imag
    if abs(residue) > 1e-12:
        raise ContractViolation(f"fidelity has imaginary residue {residue:.3e}")
    # for Hermitian inputs Tr(a b) = sum Re(a_ij conj(b_ij)); this form is
    # bitwise symmetric in (a, b)
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def _logical_matrix(u: LogicalOperator | ArrayLike) -> tuple[np.ndarray, str | None]:
    if isinstance(u, LogicalOperator):
        return u.matrix, u.basis
    return _as_finite_matrix(u, (2, 2)), None


def distance_up_to_phase(u: LogicalOperator | ArrayLike, v: LogicalOperator | ArrayLike) -> float:
    """Frobenius distance between two 2x2 unitaries minimised over a global phase.

    For unitaries this equals ``sqrt(2d - 2|Tr(U^dag V)|)`` with ``d = 2``.
    The optimal phase ``c = Tr(V^dag U) / |Tr(V^dag U)|`` is applied and the
    norm taken directly; the square-root form cancels catastrophically near
    zero and cannot resolve distances below ~1e-8.  Bare arrays are taken to
    share whatever basis the other argument uses.
    """
    a, basis_a = _logical_matrix(u)
    b, basis_b = _logical_matrix(v)
    if basis_a is not None and basis_b is not None and basis_a != basis_b:
        raise InvalidInput(f"cannot compare operators in bases {basis_a!r} and {basis_b!r}")
    overlap = np.trace(b.conj().T @ a)
    c = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - c * b))


def logical_block(u: ArrayLike) -> LogicalOperator:
    """Restriction of a 3x3 operator to the ``{|0>, |1>}`` block."""
    a = _as_finite_matrix(u)
    return LogicalOperator(a[1:, 1:].copy(), "computational")


def input_kets(theta: ArrayLike, varphi: ArrayLike, bright: ArrayLike, dark: ArrayLike) -> np.ndarray:
    """Vectorised ``cos(theta/2) e^{i varphi/2}|b> + sin(theta/2) e^{-i varphi/2}|d>``.

    Broadcasts ``theta`` and ``varphi``; the result has a trailing axis of length 3.
    """
    theta = np.asarray(theta, dtype=float)
    varphi = np.asarray(varphi, dtype=float)
    cb = np.cos(theta / 2) * np.exp(0.5j * varphi)
    cd = np.sin(theta / 2) * np.exp(-0.5j * varphi)
    return cb[..., None] * np.asarray(bright) + cd[..., None] * np.asarray(dark)


def bloch_input_state(theta: float, varphi: float, basis) -> np.ndarray:
    """Logical input ket with polar angle ``theta`` and azimuth ``varphi`` about ``|b>``.

    ``basis`` is any object with ``bright`` and ``dark`` kets (see
    :class:`holoshot.gate.BrightDarkBasis`).  The ``|e>`` amplitude is exactly zero.
    """
    if not (np.isfinite(theta) and 0.0 <= theta <= np.pi):
        raise InvalidInput(f"theta must lie in [0, pi], got {theta!r}")
    if not (np.isfinite(varphi) and 0.0 <= varphi <= 2 * np.pi):
        raise InvalidInput(f"varphi must lie in [0, 2pi], got {varphi!r}")
    ket = input_kets(theta, varphi, basis.bright, basis.dark).reshape(3)
    ket[E] = 0.0
    return ket
