"""Dense single- and multi-qubit linear algebra used by every other module.

Matrices and state vectors are plain complex ``numpy`` arrays. Tensor products
follow the Kronecker convention: the first factor is the most significant
index, so the control qubit always comes first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

ALGEBRA_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class ItdmError(Exception):
    """Base class for errors raised by this package."""


class NormalizationError(ItdmError, ValueError):
    pass


class DomainError(ItdmError, ValueError):
    pass


class ShapeError(ItdmError, ValueError):
    pass


class ValidationError(ItdmError, ValueError):
    pass


@dataclass(frozen=True)
class EncodingAxis:
    """Unit rotation axis ``n = (n1, n2, n3)``."""

    n1: float
    n2: float
    n3: float

    def __post_init__(self):
        norm2 = self.n1**2 + self.n2**2 + self.n3**2
        if abs(norm2 - 1.0) > ALGEBRA_TOL:
            raise NormalizationError(f"encoding axis is not unit norm (|n|^2 = {norm2!r})")

    @classmethod
    def normalized(cls, v: Sequence[float]) -> "EncodingAxis":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_angles(cls, phi: float, xi: float) -> "EncodingAxis":
        """Axis ``(sin phi cos xi, sin phi sin xi, cos phi)``."""
        return cls.normalized([np.sin(phi) * np.cos(xi), np.sin(phi) * np.sin(xi), np.cos(phi)])

    @classmethod
    def from_n1_n2(cls, n1: float, n2: float) -> "EncodingAxis":
        """Axis with the given in-plane components and ``n3 >= 0``."""
        rest = 1.0 - n1**2 - n2**2
        if rest < -ALGEBRA_TOL:
            raise DomainError(f"n1^2 + n2^2 = {n1**2 + n2**2} exceeds 1")
        return cls.normalized([n1, n2, np.sqrt(max(rest, 0.0))])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3])

    def generator(self) -> np.ndarray:
        """``n . sigma``."""
        return self.n1 * SIGMA_X + self.n2 * SIGMA_Y + self.n3 * SIGMA_Z


X_AXIS = EncodingAxis(1.0, 0.0, 0.0)
Y_AXIS = EncodingAxis(0.0, 1.0, 0.0)
Z_AXIS = EncodingAxis(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class SingleQubitState:
    """Pure qubit ``sqrt(p)|0> + exp(i phi) sqrt(1-p)|1>``."""

    p: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p = {self.p!r} outside [0, 1]")

    @classmethod
    def from_bloch(cls, s: Sequence[float]) -> "SingleQubitState":
        """Pure state with (unit) Bloch vector ``s``."""
        sx, sy, sz = (float(c) for c in s)
        if abs(sx * sx + sy * sy + sz * sz - 1.0) > 1e-9:
            raise DomainError("only unit Bloch vectors describe pure states")
        p = min(max((1.0 + sz) / 2.0, 0.0), 1.0)
        phi = float(np.mod(np.arctan2(sy, sx), 2 * np.pi))
        return cls(p, phi)

    @property
    def bloch(self) -> np.ndarray:
        amp = 2.0 * np.sqrt(self.p * (1.0 - self.p))
        return np.array([amp * np.cos(self.phi), amp * np.sin(self.phi), 2.0 * self.p - 1.0])


PLUS = SingleQubitState(0.5, 0.0)
PLUS_I = SingleQubitState(0.5, np.pi / 2)


def as_bloch(state) -> np.ndarray:
    """Bloch vector of a :class:`SingleQubitState` or a raw 3-vector."""
    if isinstance(state, SingleQubitState):
        return state.bloch
    s = np.asarray(state, dtype=float)
    if s.shape != (3,):
        raise ShapeError(f"Bloch vector must have 3 components, got shape {s.shape}")
    if np.linalg.norm(s) > 1.0 + ALGEBRA_TOL:
        raise DomainError(f"|s| = {np.linalg.norm(s)!r} exceeds 1")
    return s


def density_from_bloch(s) -> np.ndarray:
    s = as_bloch(s)
    return 0.5 * (I2 + s[0] * SIGMA_X + s[1] * SIGMA_Y + s[2] * SIGMA_Z)


def pure_state(q: SingleQubitState) -> np.ndarray:
    return np.array([np.sqrt(q.p), np.exp(1j * q.phi) * np.sqrt(1.0 - q.p)], dtype=complex)


def is_unitary(m: np.ndarray, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)


def require_unitary(m: np.ndarray, tol: float = ALGEBRA_TOL) -> None:
    if not is_unitary(m, tol):
        raise ValidationError("operator is not unitary")


def su2_unitary(theta: float, axis: EncodingAxis) -> np.ndarray:
    """``exp(-i theta/2 n.sigma) = cos(theta/2) I - i sin(theta/2) n.sigma``."""
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * axis.generator()


def su2_derivative(theta: float, axis: EncodingAxis) -> np.ndarray:
    """Analytic ``d/dtheta`` of :func:`su2_unitary`."""
    return -0.5j * axis.generator() @ su2_unitary(theta, axis)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim:
        raise ShapeError("tensor product of a vector with a matrix")
    return np.kron(a, b)


def tensor_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def tensor_power(a: np.ndarray, n: int) -> np.ndarray:
    if n < 1:
        raise DomainError("tensor power needs n >= 1")
    return tensor_all([a] * n)


def apply_local(op: np.ndarray, psi: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Apply a 2x2 ``op`` to qubit ``site`` of an ``n_qubits`` state vector."""
    t = psi.reshape((2,) * n_qubits)
    t = np.tensordot(op, t, axes=([1], [site]))
    return np.moveaxis(t, 0, site).reshape(-1)


def apply_product(op: np.ndarray, psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply ``op`` to every qubit, i.e. ``op^{(x)N} psi``."""
    for site in range(n_qubits):
        psi = apply_local(op, psi, site, n_qubits)
    return psi


def apply_product_derivative(op: np.ndarray, dop: np.ndarray, psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Product rule: ``sum_k op (x) .. dop_k .. (x) op`` applied to ``psi``."""
    out = np.zeros_like(psi, dtype=complex)
    for k in range(n_qubits):
        phi = psi
        for site in range(n_qubits):
            phi = apply_local(dop if site == k else op, phi, site, n_qubits)
        out += phi
    return out
