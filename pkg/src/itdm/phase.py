"""Phase and axis estimation with flip encoding.

Phase estimation uses ``U = exp(-i theta/2 n.sigma)``. For a symmetric product
probe the QFI is ``A N^2 + B N`` with ``A, B`` independent of ``theta``. The
control-qubit measurement in the sigma_x basis gives a classical Fisher
information that depends on the probe only through the overlap
``<chi|omega> = r exp(i f)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .qcore import (
    I2,
    PAULIS,
    EncodingAxis,
    ItdmError,
    SingleQubitState,
    as_bloch,
    su2_unitary,
)
from .qfi import qfi_symmetric

SINGULAR_TOL = 1e-12


class SingularPointError(ItdmError, ZeroDivisionError):
    pass


@dataclass(frozen=True)
class PolarOverlap:
    """Overlap ``r exp(i f)`` and its parameter derivatives."""

    r: float
    f: float
    dr: float
    df: float

    def as_complex(self) -> tuple[complex, complex]:
        """``(z, dz/dtheta)``."""
        e = np.exp(1j * self.f)
        return self.r * e, (self.dr + 1j * self.r * self.df) * e

    @classmethod
    def from_complex(cls, z, dz) -> "PolarOverlap":
        r = abs(z)
        if r == 0:
            return cls(0.0, 0.0, float(abs(dz)), 0.0)
        w = np.conj(z) * dz
        return cls(float(r), float(np.angle(z)), float(w.real / r), float(w.imag / r**2))


@dataclass(frozen=True)
class PhaseCoefficients:
    A: float
    B: float

    def qfi(self, N: int) -> float:
        return self.A * N * N + self.B * N


def phase_alpha_beta(axis: EncodingAxis, probe: SingleQubitState) -> tuple[complex, complex]:
    """Closed-form ``alpha = <dchi|chi>`` and ``beta = <domega|omega>``."""
    p, ts = probe.p, probe.phi
    root = np.sqrt(p * (1 - p))
    common = axis.n3 * (p - 0.5)
    alpha = 1j * (common + root * (axis.n1 * np.cos(ts) + axis.n2 * np.sin(ts)))
    beta = 1j * (common + root * (axis.n1 * np.cos(ts) - axis.n2 * np.sin(ts)))
    return alpha, beta


def phase_AB(axis: EncodingAxis, probe: SingleQubitState, p_c: float) -> PhaseCoefficients:
    alpha, beta = phase_alpha_beta(axis, probe)
    A = 4 * p_c * (1 - p_c) * abs(alpha - beta) ** 2
    B = 4 * p_c * (0.25 - abs(alpha) ** 2) + 4 * (1 - p_c) * (0.25 - abs(beta) ** 2)
    return PhaseCoefficients(float(A), float(B))


def qfi_phase_max(axis: EncodingAxis, N: int) -> float:
    """Best symmetric-product-probe QFI: ``N^2 n2^2 + N (1 - n2^2)``."""
    n2sq = axis.n2**2
    return N * N * n2sq + N * (1 - n2sq)


def scheme_probabilities(N: int, theta: float) -> tuple[float, float]:
    """Outcome probabilities of ``|+->`` on the control for the optimal y-axis scheme."""
    c = np.cos(N * theta)
    return 0.5 * (1 + c), 0.5 * (1 - c)


def scheme_statistics(N: int, theta: float) -> list[tuple[float, float]]:
    """``[(p(b), dp(b)/dtheta)]`` for the optimal y-axis scheme."""
    p_plus, p_minus = scheme_probabilities(N, theta)
    d = -0.5 * N * np.sin(N * theta)
    return [(p_plus, d), (p_minus, -d)]


def classical_fi(statistics: Iterable[tuple[float, float]], tol: float = 1e-15) -> float:
    """``sum_b p_b (d ln p_b)^2`` from ``(p_b, dp_b)`` pairs."""
    total = 0.0
    for p, dp in statistics:
        if p <= tol:
            if abs(dp) > tol:
                raise SingularPointError(f"outcome with p = {p!r} has nonzero derivative {dp!r}")
            continue
        total += dp * dp / p
    return float(total)


def overlap_complex(s, axis: EncodingAxis, theta: float) -> tuple[complex, complex]:
    """``<chi|omega> = Tr(U^T rho U^dagger)`` and its theta-derivative for Bloch vector ``s``."""
    sx, sy, sz = as_bloch(s)
    n1, n2, n3 = axis.n1, axis.n2, axis.n3
    c, sn = np.cos(theta), np.sin(theta)
    tilt = n2 * (n3 * sx - n1 * sz)
    z = 1 - n2**2 * (1 - c) + 1j * (tilt * (1 - c) + n2 * sy * sn)
    dz = -(n2**2) * sn + 1j * (tilt * sn + n2 * sy * c)
    return z, dz


def overlap_polar(s, axis: EncodingAxis, theta: float) -> PolarOverlap:
    z, dz = overlap_complex(s, axis, theta)
    return PolarOverlap.from_complex(z, dz)


def unwrap_phases(f: Sequence[float]) -> np.ndarray:
    """Remove 2 pi jumps between neighbouring points of a phase scan."""
    return np.unwrap(np.asarray(f, dtype=float))


def control_fi(z, dz, N, p_c: float = 0.5, theta_c: float = 0.0):
    """Fisher information of a sigma_x measurement on the control.

    ``z`` is the per-probe overlap (identical probes), ``dz`` its parameter
    derivative. Works elementwise on arrays. Where the denominator vanishes
    with ``|z| = 1`` and ``d|z| = 0`` the analytic limit ``N^2 f'^2`` is
    returned.
    """
    z = np.asarray(z, dtype=complex)
    dz = np.asarray(dz, dtype=complex)
    N = np.asarray(N)
    w = 2 * np.sqrt(p_c * (1 - p_c))
    phase = np.exp(1j * theta_c)
    g = w * np.real(phase * z**N)
    dg = w * np.real(phase * N * z ** (N - 1) * dz)
    denom = 1 - g * g
    singular = denom < SINGULAR_TOL
    if not np.any(singular):
        return dg * dg / denom
    r = np.abs(z)
    safe_r = np.where(r > 0, r, 1.0)
    dr = np.real(np.conj(z) * dz) / safe_r
    df = np.imag(np.conj(z) * dz) / safe_r**2
    limit_ok = (np.abs(r - 1) < 1e-9) & (np.abs(dr) < 1e-9)
    if np.any(singular & ~limit_ok):
        raise SingularPointError("vanishing FI denominator away from the r = 1 analytic limit")
    out = np.where(singular, 4 * p_c * (1 - p_c) * (N * df) ** 2, dg * dg / np.where(singular, 1.0, denom))
    return out if out.ndim else float(out)


def restricted_fi(overlap: PolarOverlap, N: int, p_c: float = 0.5, theta_c: float = 0.0) -> float:
    """Control-measurement FI for ``N`` identical probes with the given overlap."""
    z, dz = overlap.as_complex()
    return float(control_fi(z, dz, N, p_c, theta_c))


def restricted_fi_polar(overlap: PolarOverlap, N: int, theta_c: float = 0.0) -> float:
    """Same quantity written directly in ``r, f`` at ``p_c = 1/2``."""
    r, f, dr, df = overlap.r, overlap.f, overlap.dr, overlap.df
    phi = N * f + theta_c
    denom = 1 - r ** (2 * N) * np.cos(phi) ** 2
    if denom < SINGULAR_TOL:
        if abs(r - 1) < 1e-9 and abs(dr) < 1e-9:
            return float(N * N * df * df)
        raise SingularPointError("vanishing FI denominator away from the r = 1 analytic limit")
    num = N * N * r ** (2 * N - 2) * (dr * np.cos(phi) - r * df * np.sin(phi)) ** 2
    return float(num / denom)


@dataclass(frozen=True)
class FlipSpectrum:
    """Eigenphases ``(+f, -f)`` of ``U^dagger U^T`` and matching eigenvectors (columns)."""

    phases: tuple[float, float]
    vectors: np.ndarray
    degenerate: bool = False


def flip_eigenphase(n2: float, theta: float) -> float:
    s2 = np.sin(theta / 2) ** 2
    return float(np.arctan2(np.sqrt(max(4 * n2**2 * s2 * (1 - n2**2 * s2), 0.0)), 1 - 2 * n2**2 * s2))


def spectrum_flip_overlap(axis: EncodingAxis, theta: float) -> FlipSpectrum:
    n1, n2, n3 = axis.n1, axis.n2, axis.n3
    s2 = np.sin(theta / 2) ** 2
    f = flip_eigenphase(n2, theta)
    denom = -2 * n2 * n3 * s2 - 1j * n2 * np.sin(theta)
    if abs(n2) < 1e-12:
        return FlipSpectrum((0.0, 0.0), np.eye(2, dtype=complex), degenerate=True)
    if abs(denom) < 1e-12:
        # closed-form eigenvectors break down; diagonalize directly
        U = su2_unitary(theta, axis)
        vals, vecs = np.linalg.eig(U.conj().T @ U.T)
        first = int(np.argmin(np.abs(vals - np.exp(1j * f))))
        order = [first, 1 - first]
        degenerate = abs(np.sin(f)) < 1e-12
        return FlipSpectrum((f, -f), vecs[:, order], degenerate=degenerate)
    root = np.sqrt(max(4 * n2**2 * s2 * (1 - n2**2 * s2), 0.0))
    vecs = []
    # e^{+if} pairs with g^-, e^{-if} with g^+
    for sign in (-1, +1):
        g = (2 * n1 * n2 * s2 + sign * root) / denom
        v = np.array([g, 1.0], dtype=complex)
        vecs.append(v / np.linalg.norm(v))
    return FlipSpectrum((f, -f), np.column_stack(vecs))


def eigen_probe(axis: EncodingAxis, theta: float, branch: int = +1) -> SingleQubitState:
    """Pure probe on the ``exp(+-i f)`` eigenvector of ``U^dagger U^T``."""
    spec = spectrum_flip_overlap(axis, theta)
    v = spec.vectors[:, 0 if branch > 0 else 1]
    if abs(v[0]) > 0:
        v = v * np.exp(-1j * np.angle(v[0]))
    p = float(min(max(abs(v[0]) ** 2, 0.0), 1.0))
    return SingleQubitState(p, float(np.mod(np.angle(v[1]), 2 * np.pi)))


def small_theta_fi(s_y: float, n2: float, N: int, theta_c: float) -> float:
    """Small-parameter limit of the control-measurement FI.

    ``theta_c`` enters only through the exact test ``theta_c == 0``.
    """
    delta = 1.0 if theta_c == 0 else 0.0
    return float(s_y**2 * n2**2 * N**2 + (1 - s_y**2) * n2**2 * N * delta)


def axis_from_angles(phi: float, xi: float) -> np.ndarray:
    return np.array([np.sin(phi) * np.cos(xi), np.sin(phi) * np.sin(xi), np.cos(phi)])


def axis_unitary(theta: float, phi: float, xi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``U`` for axis angles ``(phi, xi)`` with its derivatives in ``phi`` and ``xi``."""
    n = axis_from_angles(phi, xi)
    dn_phi = np.array([np.cos(phi) * np.cos(xi), np.cos(phi) * np.sin(xi), -np.sin(phi)])
    dn_xi = np.array([-np.sin(phi) * np.sin(xi), np.sin(phi) * np.cos(xi), 0.0])

    def dot(v):
        return sum(c * s for c, s in zip(v, PAULIS))

    sn = -1j * np.sin(theta / 2)
    return np.cos(theta / 2) * I2 + sn * dot(n), sn * dot(dn_phi), sn * dot(dn_xi)


def axis_qfi(theta: float, phi: float, xi: float, probe: SingleQubitState, p_c: float, N: int,
             target: str = "phi", theta_c: float = 0.0) -> float:
    """QFI for estimating the axis angle ``target`` (``"phi"`` or ``"xi"``) with a symmetric probe."""
    if target not in ("phi", "xi"):
        raise ValueError(f"target must be 'phi' or 'xi', not {target!r}")
    U, d_phi, d_xi = axis_unitary(theta, phi, xi)
    dU = d_phi if target == "phi" else d_xi
    return qfi_symmetric(SingleQubitState(p_c, theta_c), probe, U, dU, N)

