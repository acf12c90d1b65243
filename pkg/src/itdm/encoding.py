"""Time-flip gates, flip-encoded pure states and time-flipped Kraus channels.

The backward direction of a gate ``U`` is its transpose in the computational
basis. A flip gate on ``N`` probes is block diagonal in the control qubit::

    |0><0| (x) U^{(x)N}  +  |1><1| (x) (U^T)^{(x)N}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import (
    ALGEBRA_TOL,
    ShapeError,
    SingleQubitState,
    ValidationError,
    apply_product,
    apply_product_derivative,
    as_bloch,
    density_from_bloch,
    pure_state,
    require_unitary,
    tensor_all,
    tensor_power,
)

DENSE_MAX_PROBES = 6


@dataclass(frozen=True)
class FlipGate:
    n_probes: int
    forward_block: np.ndarray
    backward_block: np.ndarray

    def matrix(self) -> np.ndarray:
        d = self.forward_block.shape[0]
        out = np.zeros((2 * d, 2 * d), dtype=complex)
        out[:d, :d] = self.forward_block
        out[d:, d:] = self.backward_block
        return out


@dataclass(frozen=True)
class KrausFlipChannel:
    """Bistochastic Kraus set together with its transposes."""

    kraus: tuple

    def __post_init__(self):
        check_bistochastic(self.kraus)

    @property
    def transposed(self) -> tuple:
        return tuple(k.T for k in self.kraus)

    def controlled(self) -> list[np.ndarray]:
        """Control-extended operators ``|0><0| (x) K + |1><1| (x) K^T``."""
        out = []
        for k in self.kraus:
            f = np.zeros((4, 4), dtype=complex)
            f[:2, :2] = k
            f[2:, 2:] = k.T
            out.append(f)
        return out


@dataclass
class EncodedState:
    """Output of flip encoding.

    Pure encodings carry ``state``. Channel encodings carry the 2x2 control
    density ``control`` and, for each control block ``(a, b)``, one 2x2 factor
    per probe qubit, so that the full density operator is
    ``sum_ab control[a, b] |a><b| (x) factors[a, b][0] (x) ... (x) factors[a, b][N-1]``.
    """

    n_probes: int
    state: np.ndarray | None = None
    control: np.ndarray | None = None
    factors: dict = field(default_factory=dict)

    @property
    def is_pure(self) -> bool:
        return self.state is not None

    def density(self) -> np.ndarray:
        if self.state is not None:
            return np.outer(self.state, self.state.conj())
        if self.n_probes > DENSE_MAX_PROBES:
            raise ShapeError(f"dense density requested for N = {self.n_probes} > {DENSE_MAX_PROBES}")
        d = 2**self.n_probes
        out = np.zeros((2 * d, 2 * d), dtype=complex)
        for a, b in itertools.product(range(2), repeat=2):
            out[a * d:(a + 1) * d, b * d:(b + 1) * d] = self.control[a, b] * tensor_all(self.factors[a, b])
        return out

    def block_trace(self, a: int, b: int) -> complex:
        """Trace over the probes of control block ``(a, b)`` (without the control weight)."""
        return complex(np.prod([np.trace(f) for f in self.factors[a, b]]))

    def control_plus_probability(self) -> float:
        """Probability of ``|+>`` when the control is measured in the sigma_x basis."""
        if self.state is not None:
            d = self.state.size // 2
            amp = (self.state[:d] + self.state[d:]) / np.sqrt(2)
            return float(np.vdot(amp, amp).real)
        diag = self.control[0, 0] * self.block_trace(0, 0) + self.control[1, 1] * self.block_trace(1, 1)
        off = self.control[0, 1] * self.block_trace(0, 1)
        return float(0.5 * diag.real + off.real)


def check_bistochastic(kraus: Sequence[np.ndarray], tol: float = ALGEBRA_TOL) -> None:
    d = kraus[0].shape[0]
    left = sum(k.conj().T @ k for k in kraus)
    right = sum(k @ k.conj().T for k in kraus)
    if np.max(np.abs(left - np.eye(d))) > tol or np.max(np.abs(right - np.eye(d))) > tol:
        raise ValidationError("Kraus set is not bistochastic")


def flip_gate(U: np.ndarray, N: int) -> FlipGate:
    require_unitary(U)
    return FlipGate(N, tensor_power(U, N), tensor_power(U.T, N))


def _control_amplitudes(control: SingleQubitState) -> np.ndarray:
    return pure_state(control)


def _check_probe(probe: np.ndarray) -> int:
    probe = np.asarray(probe)
    n = int(round(np.log2(probe.size)))
    if probe.ndim != 1 or 2**n != probe.size or n < 1:
        raise ShapeError(f"probe amplitudes must have length 2^N, got {probe.size}")
    if abs(np.vdot(probe, probe).real - 1.0) > ALGEBRA_TOL * probe.size:
        raise ValidationError("probe state is not normalized")
    return n


def encode_pure(control: SingleQubitState, probe_amplitudes: np.ndarray, U: np.ndarray) -> EncodedState:
    """``sqrt(p_c)|0> U^{(x)N}|psi> + e^{i theta_c} sqrt(1-p_c)|1> (U^T)^{(x)N}|psi>``."""
    n = _check_probe(probe_amplitudes)
    require_unitary(U)
    c = _control_amplitudes(control)
    fwd = apply_product(U, np.asarray(probe_amplitudes, dtype=complex), n)
    bwd = apply_product(U.T, np.asarray(probe_amplitudes, dtype=complex), n)
    return EncodedState(n, state=np.concatenate([c[0] * fwd, c[1] * bwd]))


def encode_pure_derivative(control: SingleQubitState, probe_amplitudes: np.ndarray, U: np.ndarray,
                           dU: np.ndarray) -> np.ndarray:
    """Parameter derivative of :func:`encode_pure`'s state, given ``dU``."""
    n = _check_probe(probe_amplitudes)
    c = _control_amplitudes(control)
    psi = np.asarray(probe_amplitudes, dtype=complex)
    fwd = apply_product_derivative(U, dU, psi, n)
    bwd = apply_product_derivative(U.T, dU.T, psi, n)
    return np.concatenate([c[0] * fwd, c[1] * bwd])


def product_probe(probes: Sequence[SingleQubitState]) -> np.ndarray:
    return tensor_all([pure_state(p) for p in probes])


def flip_channel(kraus: Sequence[np.ndarray], control: SingleQubitState, probes: Sequence) -> EncodedState:
    """Time-flipped channel applied to ``rho_c (x) rho_1 (x) ... (x) rho_N``.

    ``probes`` are Bloch vectors (or pure :class:`SingleQubitState`). The
    result is stored in factored block form.
    """
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    check_bistochastic(kraus)
    c = _control_amplitudes(control)
    rho_c = np.outer(c, c.conj())
    rhos = [density_from_bloch(as_bloch(p)) for p in probes]
    sides = (kraus, [k.T for k in kraus])
    factors = {}
    for a, b in itertools.product(range(2), repeat=2):
        factors[a, b] = [sum(ka @ rho @ kb.conj().T for ka, kb in zip(sides[a], sides[b])) for rho in rhos]
    return EncodedState(len(rhos), control=rho_c, factors=factors)


def flip_channel_bruteforce(kraus: Sequence[np.ndarray], control: SingleQubitState, probes: Sequence) -> np.ndarray:
    """Dense ``sum_j F_j (rho_c (x) rho) F_j^dagger`` over all ``len(kraus)^N`` Kraus strings."""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    c = _control_amplitudes(control)
    rho = tensor_all([np.outer(c, c.conj())] + [density_from_bloch(as_bloch(p)) for p in probes])
    n = len(probes)
    d = 2**n
    out = np.zeros_like(rho)
    for js in itertools.product(range(len(kraus)), repeat=n):
        f = np.zeros((2 * d, 2 * d), dtype=complex)
        f[:d, :d] = tensor_all([kraus[j] for j in js])
        f[d:, d:] = tensor_all([kraus[j].T for j in js])
        out += f @ rho @ f.conj().T
    return out


def is_valid_density(rho: np.ndarray, tol: float = 1e-10) -> bool:
    herm = np.max(np.abs(rho - rho.conj().T)) < tol
    tr = abs(np.trace(rho) - 1.0) < tol
    psd = np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) > -tol
    return bool(herm and tr and psd)

