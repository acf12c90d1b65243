import numpy as np
import pytest
from hypothesis import given, settings
from scipy.linalg import expm

from itdm.qcore import (
    I2,
    KET_0,
    KET_1,
    KET_PLUS,
    SIGMA_Y,
    SIGMA_Z,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    DomainError,
    EncodingAxis,
    NormalizationError,
    ShapeError,
    SingleQubitState,
    apply_local,
    apply_product,
    apply_product_derivative,
    as_bloch,
    density_from_bloch,
    is_unitary,
    pure_state,
    su2_derivative,
    su2_unitary,
    tensor,
    tensor_all,
    tensor_power,
)

from conftest import angles, axes, bloch_vectors, qubits, random_axis


def test_unitary_at_zero_is_identity():
    for axis in (X_AXIS, Y_AXIS, Z_AXIS, EncodingAxis.normalized([1, 2, 3])):
        np.testing.assert_allclose(su2_unitary(0.0, axis), I2, atol=1e-15)


def test_unitary_pi_about_y():
    np.testing.assert_allclose(su2_unitary(np.pi, Y_AXIS), [[0, -1], [1, 0]], atol=1e-15)


def test_unitary_half_pi_about_z():
    expected = np.diag([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)])
    np.testing.assert_allclose(su2_unitary(np.pi / 2, Z_AXIS), expected, atol=1e-15)


def test_non_unit_axis_rejected():
    with pytest.raises(NormalizationError):
        EncodingAxis(1.0, 1.0, 0.0)
    with pytest.raises(NormalizationError):
        EncodingAxis.normalized([0, 0, 0])


def test_axis_constructors():
    a = EncodingAxis.from_angles(np.pi / 2, np.pi / 2)
    np.testing.assert_allclose(a.vector, [0, 1, 0], atol=1e-15)
    b = EncodingAxis.from_n1_n2(0.6, 0.0)
    assert b.n3 == pytest.approx(0.8)
    with pytest.raises(DomainError):
        EncodingAxis.from_n1_n2(0.9, 0.9)


@given(angles, axes())
def test_unitary_matches_matrix_exponential(theta, axis):
    U = su2_unitary(theta, axis)
    np.testing.assert_allclose(U, expm(-0.5j * theta * axis.generator()), atol=1e-12)
    assert is_unitary(U)


def test_derivative_examples():
    np.testing.assert_allclose(su2_derivative(0.0, Z_AXIS), -0.5j * SIGMA_Z, atol=1e-15)
    np.testing.assert_allclose(su2_derivative(np.pi, Y_AXIS), -0.5j * SIGMA_Y @ np.array([[0, -1], [1, 0]]),
                               atol=1e-15)


def test_inverse_transpose_and_finite_difference(rng):
    h = 1e-6
    for _ in range(1000):
        axis, theta = random_axis(rng), rng.uniform(-2 * np.pi, 2 * np.pi)
        U = su2_unitary(theta, axis)
        np.testing.assert_allclose(U @ su2_unitary(-theta, axis), I2, atol=1e-12)
        fd = (su2_unitary(theta + h, axis) - su2_unitary(theta - h, axis)) / (2 * h)
        assert np.max(np.abs(fd - su2_derivative(theta, axis))) < 1e-8
        np.testing.assert_allclose(su2_unitary(theta, Y_AXIS).T, su2_unitary(-theta, Y_AXIS), atol=1e-12)


def test_tensor_examples():
    np.testing.assert_array_equal(tensor(I2, I2), np.eye(4))
    np.testing.assert_array_equal(tensor(KET_0, KET_1), [0, 1, 0, 0])
    with pytest.raises(ShapeError):
        tensor(KET_0, I2)


def test_tensor_mixed_product_and_norms(rng):
    for _ in range(50):
        A, B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)), rng.normal(size=(4, 4))
        u, v = rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=4)
        np.testing.assert_allclose(tensor(A, B) @ tensor(u, v), tensor(A @ u, B @ v), atol=1e-12)
        assert np.linalg.norm(tensor(u, v)) == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v))
        C = rng.normal(size=(2, 2))
        np.testing.assert_allclose(tensor(tensor(A, B), C), tensor(A, tensor(B, C)), atol=1e-12)


def test_pure_state_examples():
    np.testing.assert_allclose(pure_state(SingleQubitState(1.0, 2.3)), KET_0, atol=1e-15)
    np.testing.assert_allclose(pure_state(SingleQubitState(0.5, np.pi / 2)), np.array([1, 1j]) / np.sqrt(2),
                               atol=1e-15)
    np.testing.assert_allclose(pure_state(SingleQubitState(0.5, 0.0)), KET_PLUS, atol=1e-15)
    with pytest.raises(DomainError):
        SingleQubitState(1.2)


@given(qubits())
def test_bloch_round_trip(q):
    psi = pure_state(q)
    assert psi[0].imag == 0 and psi[0].real >= 0
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(density_from_bloch(q.bloch), rho, atol=1e-12)
    back = SingleQubitState.from_bloch(q.bloch)
    np.testing.assert_allclose(back.bloch, q.bloch, atol=1e-7)


@given(bloch_vectors())
def test_bloch_density_is_valid(s):
    rho = density_from_bloch(s)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


def test_as_bloch_rejects_long_vectors():
    with pytest.raises(DomainError):
        as_bloch([1.0, 1.0, 0.0])
    with pytest.raises(ShapeError):
        as_bloch([1.0, 0.0])


def test_local_application_matches_kron(rng):
    n = 3
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    A = rng.normal(size=(2, 2))
    for site in range(n):
        ops = [I2] * n
        ops[site] = A
        np.testing.assert_allclose(apply_local(A, psi, site, n), tensor_all(ops) @ psi, atol=1e-12)
    np.testing.assert_allclose(apply_product(A, psi, n), tensor_power(A, n) @ psi, atol=1e-12)


def test_product_derivative_matches_finite_difference(rng):
    axis, theta, n = random_axis(rng), 0.8, 3
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    h = 1e-6
    fd = (apply_product(su2_unitary(theta + h, axis), psi, n) - apply_product(su2_unitary(theta - h, axis), psi, n)) / (2 * h)
    an = apply_product_derivative(su2_unitary(theta, axis), su2_derivative(theta, axis), psi, n)
    assert np.max(np.abs(fd - an)) < 1e-8


@settings(max_examples=25)
@given(axes(), angles)
def test_tensor_power_of_unitary_is_unitary(axis, theta):
    assert is_unitary(tensor_power(su2_unitary(theta, axis), 3))
