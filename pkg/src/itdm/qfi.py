"""Quantum Fisher information of flip-encoded pure states.

Covers the generic pure-state formula, the closed forms for product and
symmetric product probes, the no-advantage condition (NAC) and the advantage
measure built on it, and exact QFI plus the ``4<dPhi|dPhi>`` upper bound for
arbitrary (entangled) probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoding import encode_pure, encode_pure_derivative
from .qcore import ItdmError, ShapeError, SingleQubitState, pure_state

CLAMP_TOL = 1e-10
MAX_EXACT_PROBES = 12


class ConsistencyError(ItdmError, ArithmeticError):
    """A quantity that is nonnegative by construction came out negative."""


class ResourceError(ItdmError, MemoryError):
    pass


@dataclass(frozen=True)
class ProductOverlaps:
    """Per-qubit overlaps of a product probe under ``U`` and ``U^T``.

    ``chi_norm`` and ``omega_norm`` are squared norms ``<dchi|dchi>`` and
    ``<domega|domega>``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    chi_norm: np.ndarray
    omega_norm: np.ndarray


@dataclass(frozen=True)
class FisherResult:
    value: float
    strategy: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("Fisher information must be nonnegative")


def _clamp(value: float) -> float:
    if value < -CLAMP_TOL:
        raise ConsistencyError(f"negative Fisher information {value!r}")
    return max(float(value), 0.0)


def qfi_pure(state: np.ndarray, dstate: np.ndarray) -> float:
    """``4 (<dXi|dXi> - |<dXi|Xi>|^2)`` for a normalized pure state."""
    state = np.asarray(state)
    dstate = np.asarray(dstate)
    if state.shape != dstate.shape:
        raise ShapeError(f"state {state.shape} and derivative {dstate.shape} differ")
    value = 4.0 * (np.vdot(dstate, dstate).real - abs(np.vdot(dstate, state)) ** 2)
    return _clamp(value)


def product_overlaps(probes: Sequence[SingleQubitState], U: np.ndarray, dU: np.ndarray) -> ProductOverlaps:
    a, b, cn, on = [], [], [], []
    for probe in probes:
        psi = pure_state(probe)
        chi, dchi = U @ psi, dU @ psi
        omega, domega = U.T @ psi, dU.T @ psi
        a.append(np.vdot(dchi, chi))
        b.append(np.vdot(domega, omega))
        cn.append(np.vdot(dchi, dchi).real)
        on.append(np.vdot(domega, domega).real)
    return ProductOverlaps(np.array(a), np.array(b), np.array(cn), np.array(on))


def qfi_product(control: SingleQubitState, overlaps: ProductOverlaps) -> float:
    p = control.p
    sa, sb = overlaps.alpha.sum(), overlaps.beta.sum()
    # sum_{j != k} a_k a_j^* = |sum a|^2 - sum |a|^2
    fwd = overlaps.chi_norm.sum() + abs(sa) ** 2 - np.sum(np.abs(overlaps.alpha) ** 2)
    bwd = overlaps.omega_norm.sum() + abs(sb) ** 2 - np.sum(np.abs(overlaps.beta) ** 2)
    value = 4.0 * (p * fwd + (1 - p) * bwd - abs(p * sa + (1 - p) * sb) ** 2)
    return _clamp(value)


def symmetric_coefficients(control: SingleQubitState, probe: SingleQubitState, U: np.ndarray,
                           dU: np.ndarray) -> tuple[float, float]:
    """``(A, B)`` such that the symmetric-probe QFI is ``A N^2 + B N``."""
    ov = product_overlaps([probe], U, dU)
    p = control.p
    alpha, beta = ov.alpha[0], ov.beta[0]
    A = 4 * p * (1 - p) * abs(alpha - beta) ** 2
    B = 4 * (p * (ov.chi_norm[0] - abs(alpha) ** 2) + (1 - p) * (ov.omega_norm[0] - abs(beta) ** 2))
    return float(A), float(B)


def qfi_symmetric(control: SingleQubitState, probe: SingleQubitState, U: np.ndarray, dU: np.ndarray,
                  N: int) -> float:
    A, B = symmetric_coefficients(control, probe, U, dU)
    return _clamp(A * N * N + B * N)


def flip_difference_operator(U: np.ndarray, dU: np.ndarray) -> np.ndarray:
    """``(dU)^dagger U - (dU^T)^dagger U^T``."""
    return dU.conj().T @ U - dU.T.conj().T @ U.T


def nac_check(U: np.ndarray, dU: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the no-advantage condition holds for ``U``."""
    return bool(np.max(np.abs(flip_difference_operator(U, dU))) < tol)


def _eig2(m: np.ndarray) -> tuple[complex, complex]:
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(tr * tr / 4 - det + 0j)
    return tr / 2 + disc, tr / 2 - disc


def advantage_measure(U: np.ndarray, dU: np.ndarray, p_c: float) -> float:
    """``4 p_c (1 - p_c) |lambda_max|^2`` of the flip difference operator."""
    lam = _eig2(flip_difference_operator(U, dU))
    lam_max = max(lam, key=abs)
    return float(4 * p_c * (1 - p_c) * abs(lam_max) ** 2)


def advantage_eigenvector(U: np.ndarray, dU: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the flip difference operator with the largest-modulus eigenvalue."""
    vals, vecs = np.linalg.eig(flip_difference_operator(U, dU))
    k = int(np.argmax(np.abs(vals)))
    v = vecs[:, k]
    return v / np.linalg.norm(v)


def _entangled_state_and_derivative(control, amplitudes, U, dU):
    amplitudes = np.asarray(amplitudes, dtype=complex)
    n = int(round(np.log2(amplitudes.size)))
    if n > MAX_EXACT_PROBES:
        raise ResourceError(f"N = {n} exceeds the dense statevector limit {MAX_EXACT_PROBES}")
    phi = encode_pure(control, amplitudes, U).state
    dphi = encode_pure_derivative(control, amplitudes, U, dU)
    return phi, dphi


def qfi_entangled_exact(control: SingleQubitState, amplitudes: np.ndarray, U: np.ndarray, dU: np.ndarray) -> float:
    phi, dphi = _entangled_state_and_derivative(control, amplitudes, U, dU)
    return qfi_pure(phi, dphi)


def qfi_upper_bound(control: SingleQubitState, amplitudes: np.ndarray, U: np.ndarray, dU: np.ndarray) -> float:
    """``4 <dPhi|dPhi>``, which dominates the QFI of the same encoded state."""
    _, dphi = _entangled_state_and_derivative(control, amplitudes, U, dU)
    return float(4.0 * np.vdot(dphi, dphi).real)
