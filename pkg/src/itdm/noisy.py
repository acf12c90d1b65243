"""Flip encoding through a depolarized unitary.

The channel is ``rho -> (1-p) U rho U^dagger + (p/3) sum_j sigma_j U rho U^dagger sigma_j``
with ``q = 1 - 4p/3``. Since every Kraus operator acts on one qubit, the
flip-encoded multi-probe state factorizes blockwise and all Fisher
informations depend on the single-probe overlap ``z = Tr(sum_j K_j^T rho K_j^dagger)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .qcore import (
    ALGEBRA_TOL,
    PAULIS,
    DomainError,
    EncodingAxis,
    ItdmError,
    SingleQubitState,
    as_bloch,
    density_from_bloch,
    su2_unitary,
)
from .encoding import check_bistochastic
from .phase import PolarOverlap, control_fi

N_CAP = 512
DEFAULT_RESOLUTION = 4096


class QuadratureError(ItdmError, ArithmeticError):
    pass


def _check_q(q: float) -> float:
    q = float(q)
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q = {q!r} outside [0, 1]")
    return q


@dataclass(frozen=True)
class NoisyChannel:
    q: float
    theta: float
    axis: EncodingAxis
    kraus: tuple

    @property
    def p(self) -> float:
        return 0.75 * (1.0 - self.q)


def kraus_set(q: float, theta: float, axis: EncodingAxis) -> NoisyChannel:
    q = _check_q(q)
    U = su2_unitary(theta, axis)
    p = 0.75 * (1.0 - q)
    if p == 0.0:
        kraus = (U,)
    else:
        kraus = (np.sqrt(1 - p) * U,) + tuple(np.sqrt(p / 3) * s @ U for s in PAULIS)
    check_bistochastic(kraus, ALGEBRA_TOL)
    return NoisyChannel(q, float(theta), axis, kraus)


def kraus_overlap(rho, channel: NoisyChannel) -> complex:
    """``Tr(sum_j K_j^T rho K_j^dagger)`` evaluated directly from the Kraus set."""
    r = density_from_bloch(as_bloch(rho))
    return complex(sum(np.trace(k.T @ r @ k.conj().T) for k in channel.kraus))


def noisy_overlap_complex(rho, q: float, theta, axis: EncodingAxis):
    """Closed-form noisy overlap and its theta-derivative. ``theta`` may be an array."""
    sx, sy, sz = as_bloch(rho)
    n1, n2, n3 = axis.n1, axis.n2, axis.n3
    theta = np.asarray(theta, dtype=float)
    c, sn = np.cos(theta), np.sin(theta)
    tilt = n3 * sx - n1 * sz
    z = (1 + q) / 2 - n2**2 * q * (1 - c) + 1j * q * n2 * (tilt * (1 - c) + sy * sn)
    dz = -(n2**2) * q * sn + 1j * q * n2 * (tilt * sn + sy * c)
    return z, dz


def noisy_overlap_polar(rho, channel: NoisyChannel) -> PolarOverlap:
    z, dz = noisy_overlap_complex(rho, channel.q, channel.theta, channel.axis)
    return PolarOverlap.from_complex(complex(z), complex(dz))


def nitdm_fi_single(q: float, theta, n2: float):
    """Single-probe flip FI under depolarizing noise (probe independent)."""
    q = _check_q(q)
    theta = np.asarray(theta, dtype=float)
    x = (1 + q) / 2 - n2**2 * q * (1 - np.cos(theta))
    num = n2**4 * q**2 * np.sin(theta) ** 2
    denom = 1 - x * x
    singular = np.abs(denom) < 1e-15
    if np.any(singular & (np.abs(num) > 1e-15)):
        raise ZeroDivisionError("vanishing denominator with nonzero numerator")
    # only q = 1, n2^2 = 1, theta = 0 mod 2 pi lands here; limit sin^2/(1 - cos^2) = 1
    limit = np.where(q == 1.0, n2**4, 0.0)
    out = np.where(singular, limit, num / np.where(singular, 1.0, denom))
    return out if out.ndim else float(out)


def switched_fi(q: float, theta):
    """Switch-based FI ``qt^2 sin^2 / (1 - (qt cos + (1+q)^2/4)^2)`` with ``qt = q(1-q)``."""
    q = _check_q(q)
    theta = np.asarray(theta, dtype=float)
    qt = q * (1 - q)
    num = qt**2 * np.sin(theta) ** 2
    denom = 1 - (qt * np.cos(theta) + 0.25 * (1 + q) ** 2) ** 2
    singular = denom < 1e-12
    # removable 0/0 at q = 1, where the series limit is 0
    out = np.where(singular, 0.0, num / np.where(singular, 1.0, denom))
    return out if out.ndim else float(out)


def regular_qfi(q: float, axis: EncodingAxis, s) -> float:
    q = _check_q(q)
    cross = np.cross(axis.vector, as_bloch(s))
    return float(q**2 * np.dot(cross, cross))


def _advantage_boundaries(q: float) -> list[float]:
    q1 = (5 + 7 * q) / (3 + q)
    q2 = (1 + 4 * q + 3 * q * q) / (3 + q) ** 2
    inner = np.sqrt(q2)
    b = [np.pi / 3, 5 * np.pi / 3]
    for sign in (-1, 1):
        arg = q1 + sign * 4 * inner
        if arg >= 0:
            b.append(4 * np.arctan(np.sqrt(arg)))
    return sorted(x for x in b if 0 < x < 2 * np.pi)


def advantage_region(q: float) -> list[tuple[float, float]]:
    """Angle intervals in ``[0, 2 pi]`` where the flip FI beats ``q^2`` (axis y, probe orthogonal to it).

    At ``q = 0`` and ``q = 1`` both sides coincide identically and no interval is returned.
    """
    q = _check_q(q)
    if q in (0.0, 1.0):
        return []
    edges = [0.0] + _advantage_boundaries(q) + [2 * np.pi]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a > 0 and nitdm_fi_single(q, 0.5 * (a + b), 1.0) > q * q:
            if out and abs(out[-1][1] - a) < 1e-15:
                out[-1] = (out[-1][0], float(b))
            else:
                out.append((float(a), float(b)))
    return out


def avg_flip_fi(q: float, n2: float) -> float:
    q = _check_q(q)
    a = (3 + q) * (3 + q - 4 * q * n2**2)
    b = (1 - q) * (1 - q + 4 * q * n2**2)
    return float(1 - 0.25 * np.sqrt(max(a, 0.0)) - 0.25 * np.sqrt(max(b, 0.0)))


def avg_switch_fi(q: float) -> float:
    q = _check_q(q)
    a = (1 - q) * np.sqrt(max((1 - q) * (3 + 5 * q), 0.0))
    b = np.sqrt((5 + 6 * q - 3 * q * q) * (5 - 2 * q + 5 * q * q))
    return float(1 - np.sqrt(3) / 8 * a - b / 8)


def theta_grid(resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Midpoints of ``resolution`` equal cells of ``[0, 2 pi)``."""
    if resolution < 1:
        raise DomainError("resolution must be positive")
    return (np.arange(resolution) + 0.5) * (2 * np.pi / resolution)


def theta_avg(fn: Callable, resolution: int = DEFAULT_RESOLUTION, vectorized: bool = False) -> float:
    """Average of ``fn`` over ``[0, 2 pi)`` by the composite midpoint rule."""
    grid = theta_grid(resolution)
    vals = np.asarray(fn(grid) if vectorized else [fn(t) for t in grid], dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise QuadratureError(f"non-finite integrand at theta = {grid[bad][0]!r}")
    return float(vals.mean())


def nitdm_fi_multi(q: float, theta, axis: EncodingAxis, probe, N, p_c: float = 0.5, theta_c: float = 0.0):
    """Control-measurement FI for ``N`` identical noisy probes. ``theta`` and ``N`` broadcast."""
    q = _check_q(q)
    z, dz = noisy_overlap_complex(probe, q, theta, axis)
    return control_fi(z, dz, N, p_c, theta_c)


def multi_scan(q: float, theta: float, axis: EncodingAxis, probe, n_max: int, p_c: float = 0.5,
               theta_c: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``(N, F(N))`` for ``N = 1 .. n_max``."""
    Ns = np.arange(1, n_max + 1)
    return Ns, np.asarray(nitdm_fi_multi(q, theta, axis, probe, Ns, p_c, theta_c), dtype=float)


@dataclass(frozen=True)
class ScanMaximum:
    N: int
    value: float


def scan_maximum(Ns: np.ndarray, values: np.ndarray, per_qubit: bool = False) -> ScanMaximum:
    """Maximum of ``values`` (or ``values / N``), ties to the smallest ``N``."""
    y = values / Ns if per_qubit else values
    k = int(np.argmax(y))
    return ScanMaximum(int(Ns[k]), float(y[k]))


@dataclass(frozen=True)
class RepetitionPlan:
    tilde_N: int
    tilde_F: float
    repetitions: int
    effective_fi: float
    baseline_fi: float


def repetition_plan(q: float, theta: float, axis: EncodingAxis, probe, N_total: int, n_cap: int = N_CAP,
                    p_c: float = 0.5, theta_c: float = 0.0) -> RepetitionPlan:
    """Split ``N_total`` probes into independent blocks of the FI-per-probe optimal size."""
    if N_total < 1:
        raise DomainError("N_total must be at least 1")
    Ns, F = multi_scan(q, theta, axis, probe, max(n_cap, N_total), p_c, theta_c)
    best = scan_maximum(Ns, F, per_qubit=True)
    tilde_N, tilde_F = best.N, float(F[best.N - 1])
    baseline = N_total * q * q
    if N_total < tilde_N:
        return RepetitionPlan(tilde_N, tilde_F, 1, float(F[N_total - 1]), baseline)
    reps = N_total // tilde_N
    return RepetitionPlan(tilde_N, tilde_F, reps, reps * tilde_F, baseline)


@dataclass(frozen=True)
class AveragedRow:
    q: float
    per_qubit_N: int
    per_qubit_value: float
    max_N: int
    max_value: float


def averaged_multi_curve(q: float, axis: EncodingAxis, probe, n_max: int,
                         resolution: int = DEFAULT_RESOLUTION, p_c: float = 0.5,
                         theta_c: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``(N, <F(N)>_theta)`` for ``N = 1 .. n_max``."""
    q = _check_q(q)
    grid = theta_grid(resolution)
    z, dz = noisy_overlap_complex(probe, q, grid, axis)
    Ns = np.arange(1, n_max + 1)
    avg = np.empty(n_max)
    for i, N in enumerate(Ns):
        vals = control_fi(z, dz, int(N), p_c, theta_c)
        if not np.all(np.isfinite(vals)):
            bad = grid[~np.isfinite(vals)][0]
            raise QuadratureError(f"non-finite integrand at theta = {bad!r}, N = {N}")
        avg[i] = float(np.mean(vals))
    return Ns, avg


def averaged_table_row(q: float, axis: EncodingAxis, probe, n_max: int = N_CAP,
                       resolution: int = DEFAULT_RESOLUTION) -> AveragedRow:
    Ns, avg = averaged_multi_curve(q, axis, probe, n_max, resolution)
    pq = scan_maximum(Ns, avg, per_qubit=True)
    mx = scan_maximum(Ns, avg)
    return AveragedRow(float(q), pq.N, pq.value, mx.N, mx.value)


@dataclass(frozen=True)
class MonotonicityReport:
    monotone: bool
    violations: list


def monotonicity_in_q(theta: float, n2: float, q_grid: Sequence[float]) -> MonotonicityReport:
    """Scan whether the single-probe flip FI is nondecreasing in ``q``. Reported, not enforced."""
    qs = np.asarray(q_grid, dtype=float)
    vals = np.array([nitdm_fi_single(q, theta, n2) for q in qs])
    drops = np.where(np.diff(vals) < -1e-12)[0]
    return MonotonicityReport(len(drops) == 0, [(float(qs[i]), float(qs[i + 1])) for i in drops])


def regular_baseline_probe(axis: EncodingAxis) -> SingleQubitState:
    """A pure probe whose Bloch vector is orthogonal to ``axis`` (optimal for the regular strategy)."""
    n = axis.vector
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    s = trial - np.dot(trial, n) * n
    return SingleQubitState.from_bloch(s / np.linalg.norm(s))


def flip_switch_xy(q: float, theta):
    """Terms ``(x, y)`` of the flip-versus-switch comparison at ``n2 = 1``.

    ``x + y <= 1`` is the dominance condition for the flip strategy; ``1 - x - y``
    is not itself the FI difference.
    """
    q = _check_q(q)
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    x = ((1 + q) ** 2 - 4 * (q - 1) * q * c) ** 2 / 16
    y = (1 - q) ** 2 * np.sin(theta) ** 2 * (1 - 0.25 * (q - 1 - 2 * q * c) ** 2)
    return x, y
