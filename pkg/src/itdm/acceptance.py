"""Acceptance criteria, shared by the test suite and the ``acceptance`` subcommand.

Each check returns ``(passed, details)`` and :func:`run_criterion` wraps it in a
:class:`CriterionResult`. Tolerances are fixed here and never relaxed by callers.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import encoding, noisy, optimize, phase, qfi
from .qcore import (
    PLUS,
    PLUS_I,
    SIGMA_Y,
    Y_AXIS,
    EncodingAxis,
    SingleQubitState,
    su2_derivative,
    su2_unitary,
    tensor_all,
    pure_state,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: list
    elapsed: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.elapsed:.2f} s)"

    def as_dict(self) -> dict:
        return asdict(self)


def _check(details: list, label: str, value, expected, ok: bool) -> bool:
    details.append({"check": label, "value": _plain(value), "expected": _plain(expected), "ok": bool(ok)})
    return bool(ok)


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _rel_ok(value: float, expected: float, rel: float) -> bool:
    return abs(value - expected) <= rel * abs(expected)


def _random_axis(rng: np.random.Generator) -> EncodingAxis:
    return EncodingAxis.normalized(rng.normal(size=3))


def _random_state(rng: np.random.Generator) -> SingleQubitState:
    return SingleQubitState(float(rng.uniform()), float(rng.uniform(0, 2 * np.pi)))


def heisenberg_optimum() -> tuple[bool, list]:
    d, ok = [], True
    U, dU = su2_unitary(0.37, Y_AXIS), su2_derivative(0.37, Y_AXIS)
    ok &= _check(d, "advantage measure at y, p_c = 1/2", qfi.advantage_measure(U, dU, 0.5), 1.0,
                 abs(qfi.advantage_measure(U, dU, 0.5) - 1.0) < 1e-9)
    for N in range(1, 11):
        target = N * N
        vals = {
            "qfi_phase_max": phase.qfi_phase_max(Y_AXIS, N),
            "symmetric QFI, probe +i": qfi.qfi_symmetric(PLUS, PLUS_I, U, dU, N),
            "sigma_x scheme FI": phase.classical_fi(phase.scheme_statistics(N, 0.37)),
            "control FI from overlap": phase.restricted_fi(phase.overlap_polar(PLUS_I, Y_AXIS, 0.37), N),
        }
        for label, v in vals.items():
            ok &= _check(d, f"{label}, N = {N}", v, target, abs(v - target) < 1e-9)
    return ok, d


def product_closed_form(n_axes: int = 20, seed: int = 2024) -> tuple[bool, list]:
    d, ok = [], True
    rng = np.random.default_rng(seed)
    axes = [_random_axis(rng) for _ in range(n_axes)]
    worst = 0.0
    for N in (1, 3, 5):
        for k, axis in enumerate(axes):
            best = optimize.maximize_product_qfi(axis, N, seed=k).best_value
            gap = abs(best - phase.qfi_phase_max(axis, N))
            worst = max(worst, gap)
            if gap >= 1e-6:
                ok &= _check(d, f"axis {k}, N = {N}", best, phase.qfi_phase_max(axis, N), False)
    _check(d, "max |optimum - closed form|", worst, "< 1e-6", worst < 1e-6)
    return ok and worst < 1e-6, d


def fig2_anchors() -> tuple[bool, list]:
    d, ok = [], True
    x_axis = EncodingAxis(1.0, 0.0, 0.0)
    all_y = optimize.maximize_entangled_qfi(Y_AXIS, 3).best_value
    prod_0 = optimize.maximize_product_qfi(x_axis, 3).best_value
    all_0 = optimize.maximize_entangled_qfi(x_axis, 3).best_value
    ok &= _check(d, "all-state optimum, n2 = 1", all_y, 9.0, abs(all_y - 9) < 1e-3)
    ok &= _check(d, "product optimum, n2 = 0", prod_0, 3.0, abs(prod_0 - 3) < 1e-3)
    ok &= _check(d, "all-state optimum, n2 = 0", all_0, 9.0, abs(all_0 - 9) < 1e-3)
    ok &= _check(d, "gain, n2 = 0", all_0 - prod_0, 6.0, abs(all_0 - prod_0 - 6) < 1e-3)
    return ok, d


def axis_estimation() -> tuple[bool, list]:
    d, ok = [], True
    probe = SingleQubitState(0.5, np.pi)
    for N in (1, 2, 3):
        for phi in (0.3, 1.1, 2.0):
            v = phase.axis_qfi(np.pi, phi, np.pi / 2, probe, 0.5, N, target="phi")
            ok &= _check(d, f"Q_phi, N = {N}, phi = {phi}", v, 4 * N * N, abs(v - 4 * N * N) < 1e-8)
    return ok, d


def _fd_single_fi(q: float, theta: float, h: float = 1e-5) -> float:
    """Finite-difference FI of the control outcome probabilities (one probe)."""

    def p_plus(t):
        ch = noisy.kraus_set(q, t, Y_AXIS)
        return encoding.flip_channel(ch.kraus, PLUS, [PLUS_I]).control_plus_probability()

    p = p_plus(theta)
    dp = (p_plus(theta + h) - p_plus(theta - h)) / (2 * h)
    return dp * dp / p + dp * dp / (1 - p)


def noisy_single_qubit() -> tuple[bool, list]:
    d, ok = [], True
    qs = np.linspace(0, 1, 200)
    ts = np.linspace(0, 2 * np.pi, 200)
    worst = min(float(np.min(noisy.nitdm_fi_single(q, ts, 1.0) - noisy.switched_fi(q, ts))) for q in qs)
    ok &= _check(d, "min(flip - switch) on 200x200 grid", worst, ">= -1e-10", worst >= -1e-10)
    closed = noisy.nitdm_fi_single(0.95, np.pi / 4, 1.0)
    oracle = _fd_single_fi(0.95, np.pi / 4)
    ok &= _check(d, "closed form vs finite-difference FI at (0.95, pi/4)", closed, oracle, abs(closed - oracle) < 1e-6)
    return ok, d


REFERENCE_MULTI = {0.99: (3074.72, 170, 1894.5, 69), 0.95: (116.77, 34, 49.68, 9)}


def multiqubit_maxima() -> tuple[bool, list]:
    d, ok = [], True
    for q, (fmax, nmax, ftil, ntil) in REFERENCE_MULTI.items():
        Ns, F = noisy.multi_scan(q, np.pi / 4, Y_AXIS, PLUS_I, noisy.N_CAP)
        top = noisy.scan_maximum(Ns, F)
        pq = noisy.scan_maximum(Ns, F, per_qubit=True)
        ok &= _check(d, f"q = {q}: max F", top.value, fmax, _rel_ok(top.value, fmax, 5e-3))
        ok &= _check(d, f"q = {q}: argmax N", top.N, nmax, top.N == nmax)
        ok &= _check(d, f"q = {q}: F at per-qubit optimum", F[pq.N - 1], ftil, _rel_ok(F[pq.N - 1], ftil, 5e-3))
        ok &= _check(d, f"q = {q}: per-qubit optimal N", pq.N, ntil, pq.N == ntil)
    return ok, d


REFERENCE_REPETITION = {0.95: (5514.48, 111, 902.5), 0.99: (26523.0, 14, 980.1)}


def repetition_cases() -> tuple[bool, list]:
    d, ok = [], True
    for q, (eff, reps, base) in REFERENCE_REPETITION.items():
        plan = noisy.repetition_plan(q, np.pi / 4, Y_AXIS, PLUS_I, 1000)
        ok &= _check(d, f"q = {q}: effective FI", plan.effective_fi, eff, _rel_ok(plan.effective_fi, eff, 5e-3))
        ok &= _check(d, f"q = {q}: repetitions", plan.repetitions, reps, _rel_ok(plan.repetitions, reps, 5e-3))
        ok &= _check(d, f"q = {q}: baseline", plan.baseline_fi, base, _rel_ok(plan.baseline_fi, base, 5e-3))
    return ok, d


REFERENCE_TABLE1 = {0.95: (2.17, 10, 36.4, 26), 0.99: (11.16, 50, 956.4, 133)}


def table1() -> tuple[bool, list]:
    d, ok = [], True
    for q, (pqv, pqn, mv, mn) in REFERENCE_TABLE1.items():
        row = noisy.averaged_table_row(q, Y_AXIS, PLUS_I)
        ok &= _check(d, f"q = {q}: max <F>/N", row.per_qubit_value, pqv, _rel_ok(row.per_qubit_value, pqv, 1e-2))
        ok &= _check(d, f"q = {q}: its N", row.per_qubit_N, pqn, abs(row.per_qubit_N - pqn) <= 1)
        ok &= _check(d, f"q = {q}: max <F>", row.max_value, mv, _rel_ok(row.max_value, mv, 1e-2))
        ok &= _check(d, f"q = {q}: its N", row.max_N, mn, abs(row.max_N - mn) <= 1)
    return ok, d


FIT_GRID = np.linspace(0.01, 0.99, 50)


def threshold_fit() -> tuple[bool, list]:
    d, ok = [], True
    fit = optimize.fit_n2_threshold(FIT_GRID, n2_zero=optimize.N2_ZERO)
    ok &= _check(d, "g", fit.g, 1.14147, _rel_ok(fit.g, 1.14147, 2e-2))
    ok &= _check(d, "h", fit.h, 2.38455, _rel_ok(fit.h, 2.38455, 2e-2))
    return ok, d


def property_suites(seed: int = 7) -> tuple[bool, list]:
    d, ok = [], True
    rng = np.random.default_rng(seed)

    # symmetric product probes dominate asymmetric ones
    worst = -np.inf
    for _ in range(500):
        axis, N = _random_axis(rng), int(rng.integers(2, 6))
        theta = rng.uniform(0, 2 * np.pi)
        U, dU = su2_unitary(theta, axis), su2_derivative(theta, axis)
        probes = [_random_state(rng) for _ in range(N)]
        val = qfi.qfi_product(_random_state(rng), qfi.product_overlaps(probes, U, dU))
        worst = max(worst, val - phase.qfi_phase_max(axis, N))
    ok &= _check(d, "asymmetric product QFI minus symmetric optimum (max)", worst, "<= 1e-9", worst <= 1e-9)

    # A + B <= 1
    top = -np.inf
    for _ in range(100_000):
        c = phase.phase_AB(_random_axis(rng), _random_state(rng), float(rng.uniform()))
        top = max(top, c.A + c.B)
    ok &= _check(d, "max A + B over 1e5 samples", top, "<= 1", top <= 1 + 1e-12)

    # QFI <= 4 <dPhi|dPhi>
    worst = -np.inf
    for _ in range(1000):
        axis, theta = _random_axis(rng), rng.uniform(0, 2 * np.pi)
        U, dU = su2_unitary(theta, axis), su2_derivative(theta, axis)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        amps /= np.linalg.norm(amps)
        ctrl = _random_state(rng)
        worst = max(worst, qfi.qfi_entangled_exact(ctrl, amps, U, dU) - qfi.qfi_upper_bound(ctrl, amps, U, dU))
    ok &= _check(d, "QFI minus 4<dPhi|dPhi> (max, N = 3)", worst, "<= 1e-12", worst <= 1e-12)

    # closed-form averages against quadrature
    err = 0.0
    for q in (0.1, 0.5, 0.9):
        err = max(err, abs(noisy.avg_switch_fi(q) - noisy.theta_avg(lambda t: noisy.switched_fi(q, t), vectorized=True)))
        for n2 in (0.3, 0.7, 1.0):
            quad = noisy.theta_avg(lambda t: noisy.nitdm_fi_single(q, t, n2), vectorized=True)
            err = max(err, abs(noisy.avg_flip_fi(q, n2) - quad))
    ok &= _check(d, "closed-form averages vs quadrature", err, "< 1e-8", err < 1e-8)

    # factored channel blocks against the Kraus-string sum
    err = 0.0
    for N in (1, 2):
        for _ in range(5):
            ch = noisy.kraus_set(float(rng.uniform()), rng.uniform(0, 2 * np.pi), _random_axis(rng))
            probes = [rng.uniform(-1, 1, 3) / np.sqrt(3) for _ in range(N)]
            ctrl = _random_state(rng)
            fac = encoding.flip_channel(ch.kraus, ctrl, probes).density()
            err = max(err, float(np.max(np.abs(fac - encoding.flip_channel_bruteforce(ch.kraus, ctrl, probes)))))
    ok &= _check(d, "block form vs Kraus-string brute force (N <= 2)", err, "< 1e-10", err < 1e-10)

    # analytic derivatives against central differences
    err, h = 0.0, 1e-5
    for _ in range(20):
        axis, theta = _random_axis(rng), rng.uniform(0, 2 * np.pi)
        fd = (su2_unitary(theta + h, axis) - su2_unitary(theta - h, axis)) / (2 * h)
        err = max(err, float(np.max(np.abs(fd - su2_derivative(theta, axis)))))
        s = rng.uniform(-1, 1, 3) / np.sqrt(3)
        q = float(rng.uniform())
        zp = noisy.noisy_overlap_complex(s, q, theta + h, axis)[0]
        zm = noisy.noisy_overlap_complex(s, q, theta - h, axis)[0]
        err = max(err, abs((zp - zm) / (2 * h) - noisy.noisy_overlap_complex(s, q, theta, axis)[1]))
        phi, xi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        _, dphi, dxi = phase.axis_unitary(theta, phi, xi)
        fd_phi = (phase.axis_unitary(theta, phi + h, xi)[0] - phase.axis_unitary(theta, phi - h, xi)[0]) / (2 * h)
        fd_xi = (phase.axis_unitary(theta, phi, xi + h)[0] - phase.axis_unitary(theta, phi, xi - h)[0]) / (2 * h)
        err = max(err, float(np.max(np.abs(fd_phi - dphi))), float(np.max(np.abs(fd_xi - dxi))))
    ok &= _check(d, "analytic vs finite-difference derivatives", err, "< 1e-8", err < 1e-8)
    return ok, d


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, list]]]] = [
    (1, "Heisenberg optimum at the y axis", heisenberg_optimum),
    (2, "product-probe optimum matches the closed form", product_closed_form),
    (3, "N = 3 all-state and product anchors", fig2_anchors),
    (4, "axis-angle QFI equals 4 N^2", axis_estimation),
    (5, "noisy single qubit: flip >= switch, FI oracle", noisy_single_qubit),
    (6, "multiqubit noisy maxima", multiqubit_maxima),
    (7, "repetition strategy", repetition_cases),
    (8, "theta-averaged multiqubit table", table1),
    (9, "n2 threshold fit", threshold_fit),
    (10, "property suites", property_suites),
]


def run_criterion(number: int) -> CriterionResult:
    for n, name, fn in CRITERIA:
        if n == number:
            start = time.perf_counter()
            passed, details = fn()
            return CriterionResult(n, name, bool(passed), details, time.perf_counter() - start)
    raise KeyError(f"no criterion {number}")


def run_all(numbers=None) -> list[CriterionResult]:
    numbers = [n for n, _, _ in CRITERIA] if numbers is None else list(numbers)
    return [run_criterion(n) for n in numbers]
