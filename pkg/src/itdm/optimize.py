"""Multistart simplex maximization of QFI and the n2-threshold fit."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, least_squares, minimize

from .noisy import avg_flip_fi, avg_switch_fi
from .qcore import (
    DomainError,
    EncodingAxis,
    ItdmError,
    SingleQubitState,
    su2_derivative,
    su2_unitary,
    tensor_all,
    tensor_power,
)
from .qfi import MAX_EXACT_PROBES, qfi_pure, qfi_symmetric

RESTARTS = 32
MAX_EVALS = 10_000
SIMPLEX_TOL = 1e-9
STATE_THETA = 1.0
N2_ZERO = 0.945742
RICHARDSON_QS = (0.04, 0.02, 0.01)


class FitError(ItdmError, RuntimeError):
    pass


class NoRootError(ItdmError, ValueError):
    """No sign change on the search interval; carries the endpoint values."""

    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


@dataclass(frozen=True)
class OptimizationResult:
    best_value: float
    best_point: np.ndarray
    restarts_used: int
    converged: bool
    tolerance_achieved: float
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FitResult:
    g: float
    h: float
    n2_zero: float
    residual: float
    rel_uncertainty: tuple[float, float]
    weighting: str


def _simplex_diameter(simplex: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))


def multistart_maximize(objective: Callable[[np.ndarray], float], sampler: Callable[[np.random.Generator], np.ndarray],
                        restarts: int = RESTARTS, seed: int = 0, max_evals: int = MAX_EVALS,
                        tol: float = SIMPLEX_TOL, threads: int = 1, polish: bool = True) -> OptimizationResult:
    """Maximize ``objective`` by Nelder-Mead from ``restarts`` random starts.

    Each restart draws its start from its own child seed, so the result does
    not depend on ``threads``. With ``polish`` the best simplex point is
    refined by a quasi-Newton step, kept only if it improves the value.
    """
    children = np.random.SeedSequence(seed).spawn(restarts)

    def run(child):
        x0 = sampler(np.random.default_rng(child))
        res = minimize(lambda x: -objective(x), x0, method="Nelder-Mead",
                       options={"xatol": tol, "fatol": 1e-14, "maxfev": max_evals, "adaptive": x0.size > 4})
        diam = _simplex_diameter(res.final_simplex[0])
        return float(-res.fun), np.asarray(res.x), diam < tol, diam

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(run, children))
    else:
        outcomes = [run(c) for c in children]
    k = int(np.argmax([o[0] for o in outcomes]))
    value, point, converged, diam = outcomes[k]
    if polish:
        res = minimize(lambda x: -objective(x), point, method="L-BFGS-B")
        if -res.fun > value:
            value, point = float(-res.fun), np.asarray(res.x)
    value = float(objective(point))
    return OptimizationResult(value, point, restarts, bool(any(o[2] for o in outcomes)), diam)


def _product_objective(axis: EncodingAxis, N: int):
    U = su2_unitary(STATE_THETA, axis)
    dU = su2_derivative(STATE_THETA, axis)

    def f(x):
        theta_s, a, b = x
        return qfi_symmetric(SingleQubitState(np.sin(b) ** 2), SingleQubitState(np.sin(a) ** 2, theta_s), U, dU, N)

    return f


def product_point_to_states(x: np.ndarray) -> tuple[SingleQubitState, SingleQubitState]:
    """``(control, probe)`` encoded by a :func:`maximize_product_qfi` point."""
    theta_s, a, b = x
    return SingleQubitState(float(np.sin(b) ** 2)), SingleQubitState(float(np.sin(a) ** 2), float(np.mod(theta_s, 2 * np.pi)))


def maximize_product_qfi(axis: EncodingAxis, N: int, restarts: int = RESTARTS, seed: int = 0,
                         threads: int = 1) -> OptimizationResult:
    """Best symmetric product probe and control population, parameters ``(theta_s, a, b)``.

    ``p_s = sin^2 a`` and ``p_c = sin^2 b``. The control phase does not enter the QFI.
    """
    if N < 1:
        raise DomainError("N must be positive")
    return multistart_maximize(_product_objective(axis, N), lambda rng: rng.uniform(0, 2 * np.pi, 3),
                               restarts, seed, threads=threads)


def amplitudes_from_reals(x: np.ndarray) -> np.ndarray:
    """``2^{N+1}`` reals to a normalized state whose first nonzero amplitude is real and nonnegative."""
    x = np.asarray(x, dtype=float)
    psi = x[0::2] + 1j * x[1::2]
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DomainError("all-zero amplitude vector")
    psi = psi / norm
    nz = np.flatnonzero(np.abs(psi) > 1e-15)
    return psi * np.exp(-1j * np.angle(psi[nz[0]]))


def maximize_entangled_qfi(axis: EncodingAxis, N: int, restarts: int = RESTARTS, seed: int = 0,
                           threads: int = 1) -> OptimizationResult:
    """QFI maximized over all probe states and the control population.

    The point holds ``2^{N+1}`` amplitude reals followed by ``b`` with ``p_c = sin^2 b``.
    ``extras["amplitudes"]`` is the phase-fixed optimal probe.
    """
    if not 1 <= N <= min(4, MAX_EXACT_PROBES):
        raise DomainError("entangled search supports 1 <= N <= 4")
    U = su2_unitary(STATE_THETA, axis)
    dU = su2_derivative(STATE_THETA, axis)
    dim = 2 ** (N + 1)
    # dense N-probe blocks, built once; each evaluation is then four matvecs
    fwd, bwd = tensor_power(U, N), tensor_power(U.T, N)
    dfwd = sum(tensor_all([dU if k == j else U for k in range(N)]) for j in range(N))
    dbwd = sum(tensor_all([dU.T if k == j else U.T for k in range(N)]) for j in range(N))

    def f(x):
        psi = x[:dim:2] + 1j * x[1:dim:2]
        norm = np.linalg.norm(psi)
        if norm < 1e-12:
            return 0.0
        psi = psi / norm
        c0, c1 = np.sin(x[dim]), np.cos(x[dim])
        state = np.concatenate([c0 * (fwd @ psi), c1 * (bwd @ psi)])
        dstate = np.concatenate([c0 * (dfwd @ psi), c1 * (dbwd @ psi)])
        return qfi_pure(state, dstate)

    def sample(rng):
        return np.concatenate([rng.normal(size=dim), rng.uniform(0, 2 * np.pi, 1)])

    res = multistart_maximize(f, sample, restarts, seed, threads=threads)
    amps = amplitudes_from_reals(res.best_point[:dim])
    return OptimizationResult(res.best_value, res.best_point, res.restarts_used, res.converged,
                              res.tolerance_achieved, {"amplitudes": amps,
                                                       "p_c": float(np.sin(res.best_point[dim]) ** 2)})


def average_difference(q: float, n2: float) -> float:
    """``<F_flip> - <F_switch>`` over the encoding angle."""
    return avg_flip_fi(q, n2) - avg_switch_fi(q)


def find_n2_threshold(q: float, xtol: float = 1e-12) -> float:
    """Smallest ``n2`` in ``(0, 1)`` above which the averaged flip FI beats the switched one."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q = {q!r} must lie strictly inside (0, 1)")
    lo, hi = average_difference(q, 0.0), average_difference(q, 1.0)
    if lo * hi > 0:
        raise NoRootError(f"no sign change in n2 on [0, 1] at q = {q}", lo, hi)
    return float(brentq(lambda n2: average_difference(q, n2), 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps))


def extrapolate_n2_zero(qs: Sequence[float] = RICHARDSON_QS) -> float:
    """Richardson extrapolation of the threshold to ``q -> 0`` from three halving steps."""
    q0, q1, q2 = qs
    if not (np.isclose(q1, q0 / 2) and np.isclose(q2, q1 / 2)):
        raise DomainError("Richardson steps must halve q")
    r0, r1, r2 = (find_n2_threshold(q) for q in qs)
    a, b = 2 * r1 - r0, 2 * r2 - r1
    return float((4 * b - a) / 3)


def n2_min_model(q, g: float, h: float, n2_zero: float = N2_ZERO):
    """``n2_zero (1 - q^g)^(1/h)``."""
    q = np.asarray(q, dtype=float)
    return n2_zero * np.clip(1 - q**g, 0.0, None) ** (1 / h)


def fit_n2_threshold(q_grid: Sequence[float], n2_zero: float | None = None, weighting: str = "pearson",
                     data: Sequence[float] | None = None) -> FitResult:
    """Fit ``(g, h)`` of :func:`n2_min_model` to thresholds on ``q_grid``.

    ``weighting="pearson"`` divides each residual by the square root of the
    model value (chi-square form); ``"uniform"`` uses plain residuals.
    ``data`` overrides the computed thresholds (for synthetic checks).
    """
    qs = np.asarray(q_grid, dtype=float)
    if qs.size < 20 or np.any((qs <= 0) | (qs >= 1)) or np.unique(qs).size != qs.size:
        raise FitError("need at least 20 distinct grid points inside (0, 1)")
    if weighting not in ("pearson", "uniform"):
        raise ValueError(f"unknown weighting {weighting!r}")
    n0 = extrapolate_n2_zero() if n2_zero is None else float(n2_zero)
    ys = np.array([find_n2_threshold(q) for q in qs]) if data is None else np.asarray(data, dtype=float)

    def resid(p):
        model = n2_min_model(qs, p[0], p[1], n0)
        if weighting == "pearson":
            return (ys - model) / np.sqrt(np.maximum(model, 1e-300))
        return ys - model

    sol = least_squares(resid, [1.0, 2.0], bounds=([1e-3, 1e-3], [50.0, 50.0]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not sol.success:
        raise FitError(sol.message)
    ssr = float(np.sum(sol.fun**2))
    dof = max(qs.size - 2, 1)
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * ssr / dof
        rel = tuple(float(np.sqrt(max(cov[i, i], 0.0)) / abs(sol.x[i])) for i in range(2))
    except np.linalg.LinAlgError:
        rel = (float("nan"), float("nan"))
    return FitResult(float(sol.x[0]), float(sol.x[1]), n0, ssr, rel, weighting)
