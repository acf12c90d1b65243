import numpy as np
import pytest

from itdm.encoding import (
    KrausFlipChannel,
    encode_pure,
    encode_pure_derivative,
    flip_channel,
    flip_channel_bruteforce,
    flip_gate,
    is_valid_density,
    product_probe,
)
from itdm.noisy import kraus_set
from itdm.qcore import (
    KET_0,
    PLUS,
    PLUS_I,
    SIGMA_X,
    Y_AXIS,
    Z_AXIS,
    ShapeError,
    SingleQubitState,
    ValidationError,
    pure_state,
    su2_derivative,
    su2_unitary,
    tensor,
    tensor_power,
)

from conftest import random_axis, random_bloch, random_qubit


def test_symmetric_unitary_gives_trivial_flip():
    U = su2_unitary(0.7, Z_AXIS)
    gate = flip_gate(U, 2).matrix()
    np.testing.assert_allclose(gate, tensor(np.eye(2), tensor_power(U, 2)), atol=1e-15)


def test_y_rotation_backward_block_reverses_angle():
    g = flip_gate(su2_unitary(0.7, Y_AXIS), 3)
    np.testing.assert_allclose(g.backward_block, tensor_power(su2_unitary(-0.7, Y_AXIS), 3), atol=1e-14)


def test_single_probe_gate_block_structure(rng):
    U = su2_unitary(1.1, random_axis(rng))
    m = flip_gate(U, 1).matrix()
    assert m.shape == (4, 4)
    assert np.all(m[:2, 2:] == 0) and np.all(m[2:, :2] == 0)
    np.testing.assert_allclose(m.conj().T @ m, np.eye(4), atol=1e-12)


def test_non_unitary_rejected():
    with pytest.raises(ValidationError):
        flip_gate(np.array([[1, 1], [0, 1]]), 1)


def test_optimal_probe_encoded_state():
    for N in (1, 2, 4):
        theta = 0.3
        out = encode_pure(PLUS, product_probe([PLUS_I] * N), su2_unitary(theta, Y_AXIS)).state
        ctrl = np.exp(-1j * N * theta / 2) * np.array([1, np.exp(1j * N * theta)]) / np.sqrt(2)
        expected = tensor(ctrl, product_probe([PLUS_I] * N))
        np.testing.assert_allclose(out, expected, atol=1e-12)


def test_forward_only_control_and_identity(rng):
    probe = product_probe([random_qubit(rng) for _ in range(2)])
    U = su2_unitary(0.4, random_axis(rng))
    out = encode_pure(SingleQubitState(1.0), probe, U).state
    np.testing.assert_allclose(out, tensor(KET_0, tensor_power(U, 2) @ probe), atol=1e-12)
    ctrl = random_qubit(rng)
    out = encode_pure(ctrl, probe, np.eye(2)).state
    np.testing.assert_allclose(out, tensor(pure_state(ctrl), probe), atol=1e-12)


def test_gate_applied_equals_encode_pure(rng):
    for N in (1, 2, 3):
        U = su2_unitary(rng.uniform(0, 6), random_axis(rng))
        ctrl = random_qubit(rng)
        probe = product_probe([random_qubit(rng) for _ in range(N)])
        via_gate = flip_gate(U, N).matrix() @ tensor(pure_state(ctrl), probe)
        out = encode_pure(ctrl, probe, U)
        np.testing.assert_allclose(via_gate, out.state, atol=1e-12)
        assert np.linalg.norm(out.state) == pytest.approx(1.0, abs=1e-12)


def test_encoded_derivative_matches_finite_difference(rng):
    axis, ctrl = random_axis(rng), random_qubit(rng)
    probe = rng.normal(size=8) + 1j * rng.normal(size=8)
    probe /= np.linalg.norm(probe)
    theta, h = 0.9, 1e-6
    fd = (encode_pure(ctrl, probe, su2_unitary(theta + h, axis)).state
          - encode_pure(ctrl, probe, su2_unitary(theta - h, axis)).state) / (2 * h)
    an = encode_pure_derivative(ctrl, probe, su2_unitary(theta, axis), su2_derivative(theta, axis))
    assert np.max(np.abs(fd - an)) < 1e-8


def test_shape_errors():
    with pytest.raises(ShapeError):
        encode_pure(PLUS, np.ones(3) / np.sqrt(3), np.eye(2))
    with pytest.raises(ValidationError):
        encode_pure(PLUS, np.ones(2), np.eye(2))


def test_unitary_channel_reduces_to_pure(rng):
    U = su2_unitary(0.6, random_axis(rng))
    ctrl = random_qubit(rng)
    probes = [random_qubit(rng) for _ in range(2)]
    rho = flip_channel([U], ctrl, probes).density()
    psi = encode_pure(ctrl, product_probe(probes), U).state
    np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-12)


def test_block_form_matches_kraus_strings(rng):
    for N in (1, 2):
        for q in (0.0, 0.4, 1.0):
            ch = kraus_set(q, rng.uniform(0, 6), random_axis(rng))
            ctrl = random_qubit(rng)
            probes = [random_bloch(rng) for _ in range(N)]
            enc = flip_channel(ch.kraus, ctrl, probes)
            brute = flip_channel_bruteforce(ch.kraus, ctrl, probes)
            assert np.max(np.abs(enc.density() - brute)) < 1e-10
            assert is_valid_density(enc.density())


def test_depolarized_off_diagonal_block_carries_overlap(rng):
    ch = kraus_set(0.0, 0.8, random_axis(rng))
    s = random_bloch(rng)
    enc = flip_channel(ch.kraus, PLUS, [s, s])
    rho = np.eye(2) / 2 + 0.5 * sum(c * p for c, p in zip(s, (SIGMA_X, np.array([[0, -1j], [1j, 0]]), np.diag([1, -1]))))
    single = sum(np.trace(k.T @ rho @ k.conj().T) for k in ch.kraus)
    assert enc.block_trace(1, 0) == pytest.approx(single**2, abs=1e-12)


def test_half_control_single_probe_block(rng):
    ch = kraus_set(0.7, 1.3, random_axis(rng))
    theta_c = 0.9
    s = random_bloch(rng)
    enc = flip_channel(ch.kraus, SingleQubitState(0.5, theta_c), [s])
    rho = enc.density()
    r = 0.5 * (np.eye(2) + sum(c * p for c, p in zip(s, (SIGMA_X, np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])))))
    block = 0.5 * np.exp(-1j * theta_c) * sum(k @ r @ k.T.conj().T for k in ch.kraus)
    np.testing.assert_allclose(rho[:2, 2:], block, atol=1e-12)


def test_non_bistochastic_rejected():
    damp = [np.array([[1, 0], [0, np.sqrt(0.5)]]), np.array([[0, np.sqrt(0.5)], [0, 0]])]
    with pytest.raises(ValidationError):
        flip_channel(damp, PLUS, [[0, 0, 1]])
    with pytest.raises(ValidationError):
        KrausFlipChannel(tuple(damp))


def test_controlled_kraus_complete(rng):
    ch = KrausFlipChannel(kraus_set(0.3, 0.5, random_axis(rng)).kraus)
    total = sum(f.conj().T @ f for f in ch.controlled())
    np.testing.assert_allclose(total, np.eye(4), atol=1e-12)
