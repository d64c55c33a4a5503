import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mermin_lab.spin_algebra import (
    Direction,
    PauliAxis,
    allclose,
    direction_operator,
    eigenbasis,
    expectation,
    frame_transform,
    identity,
    is_hermitian,
    is_unitary,
    normalize,
    pauli,
    rotated_measurement,
    su2_rotation,
    tensor_op,
    tensor_state,
)
from mermin_lab.bell_states import BellKind, bell_state

import oracles

UP, DOWN = np.array([1, 0], complex), np.array([0, 1], complex)
angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi, allow_nan=False)
units = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: sum(x * x for x in v) > 1e-3).map(lambda v: Direction.normalized(*v))


def test_pauli_z_matches_methods_display():
    assert allclose(pauli(PauliAxis.Z), np.diag([1, -1]))


@pytest.mark.parametrize("axis", list(PauliAxis))
def test_pauli_properties(axis):
    p = pauli(axis)
    assert is_hermitian(p) and is_unitary(p)
    assert abs(np.trace(p)) <= 1e-12
    assert allclose(p @ p, identity(2))
    assert allclose(sorted(np.linalg.eigvalsh(p)), [-1, 1])


def test_pauli_xy_is_i_z_by_loop_oracle():
    p = oracles.pauli_lists()
    expected = oracles.matmul(p["x"], p["y"])
    assert allclose(pauli(PauliAxis.X) @ pauli(PauliAxis.Y), expected)
    assert allclose(expected, 1j * np.array(p["z"]))


def test_pauli_arrays_are_read_only():
    with pytest.raises(ValueError):
        pauli(PauliAxis.X)[0, 0] = 5


def test_direction_validation():
    with pytest.raises(ValueError):
        Direction(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        Direction(math.nan, 0.0, 1.0)
    with pytest.raises(ValueError):
        Direction.normalized(0, 0, 0)


@pytest.mark.parametrize("vec,axis", [((0, 0, 1), PauliAxis.Z), ((1, 0, 0), PauliAxis.X),
                                      ((0, 1, 0), PauliAxis.Y)])
def test_direction_operator_axis_aligned(vec, axis):
    assert allclose(direction_operator(Direction(*vec)), pauli(axis))


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 3, 2.0, -1.1])
def test_direction_operator_in_xz_plane(theta):
    op = direction_operator(Direction(math.sin(theta), 0.0, math.cos(theta)))
    expected = math.cos(theta) * pauli(PauliAxis.Z) + math.sin(theta) * pauli(PauliAxis.X)
    assert allclose(op, expected)


def test_direction_operator_rejects_non_unit():
    with pytest.raises(ValueError):
        direction_operator([0.0, 0.0, 2.0])


@given(units)
def test_direction_operator_squares_to_identity(a):
    op = direction_operator(a)
    assert is_hermitian(op)
    assert allclose(op @ op, np.eye(2))
    assert allclose(np.linalg.eigvalsh(op), [-1, 1])
    assert allclose(op, oracles.direction_op((a.ax, a.ay, a.az)))


def test_su2_identity_at_zero():
    assert allclose(su2_rotation(PauliAxis.Y, 0.0), np.eye(2))


@pytest.mark.parametrize("theta", [0.3, 1.0, -0.8])
def test_su2_y_is_real_rotation_of_basis(theta):
    c, s = math.cos(theta), math.sin(theta)
    # Methods: u -> cos u + sin d, d -> -sin u + cos d
    f = frame_transform(PauliAxis.Y, theta)
    assert allclose(f @ UP, c * UP + s * DOWN)
    assert allclose(f @ DOWN, -s * UP + c * DOWN)
    assert allclose(su2_rotation(PauliAxis.Y, theta), [[c, s], [-s, c]])


def test_su2_x_and_z_match_methods_transforms():
    theta = 0.6
    c, s = math.cos(theta), math.sin(theta)
    fx = frame_transform(PauliAxis.X, theta)
    assert allclose(fx @ UP, c * UP + 1j * s * DOWN)
    assert allclose(fx @ DOWN, 1j * s * UP + c * DOWN)
    fz = frame_transform(PauliAxis.Z, theta)
    assert allclose(fz @ UP, (c + 1j * s) * UP)
    assert allclose(fz @ DOWN, (c - 1j * s) * DOWN)


def test_quarter_turn_about_y_gives_sigma_x():
    assert allclose(rotated_measurement(PauliAxis.Y, math.pi / 4), pauli(PauliAxis.X))


def test_quarter_turn_about_x_gives_sigma_y():
    assert allclose(rotated_measurement(PauliAxis.X, math.pi / 4), pauli(PauliAxis.Y))


def test_z_rotation_leaves_sigma_z():
    assert allclose(rotated_measurement(PauliAxis.Z, 0.77), pauli(PauliAxis.Z))


@given(st.sampled_from(list(PauliAxis)), angles)
def test_su2_unitary_unit_determinant(axis, theta):
    u = su2_rotation(axis, theta)
    assert is_unitary(u)
    assert abs(np.linalg.det(u) - 1) <= 1e-12
    v = normalize([0.3 + 0.1j, -0.7j])
    assert abs(np.linalg.norm(u @ v) - 1) <= 1e-12


@given(angles)
def test_theta_is_twice_hilbert_angle(theta):
    expected = direction_operator(Direction(math.sin(2 * theta), 0.0, math.cos(2 * theta)))
    assert allclose(rotated_measurement(PauliAxis.Y, theta), expected)


def test_tensor_identity():
    assert allclose(tensor_op(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_op_on_ud_examples():
    x, y, z = (pauli(a) for a in (PauliAxis.X, PauliAxis.Y, PauliAxis.Z))
    ud = tensor_state(UP, DOWN)
    assert allclose(tensor_op(x, z) @ ud, -tensor_state(DOWN, DOWN))
    assert allclose(tensor_op(x, y) @ ud, -1j * tensor_state(DOWN, UP))


def _random_op(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def test_tensor_and_expectation_match_loop_oracle(rng):
    for _ in range(50):
        a, b = _random_op(rng, 2), _random_op(rng, 2)
        got = tensor_op(a, b)
        assert allclose(got, oracles.kron(oracles.to_lists(a), oracles.to_lists(b)))
        u = normalize(rng.normal(size=2) + 1j * rng.normal(size=2))
        v = normalize(rng.normal(size=2) + 1j * rng.normal(size=2))
        assert allclose(tensor_state(u, v), oracles.kron_vec(list(u), list(v)))
        psi = normalize(rng.normal(size=4) + 1j * rng.normal(size=4))
        op = _random_op(rng, 4)
        want = oracles.expectation(list(psi), oracles.to_lists(op))
        assert abs(expectation(psi, op) - want) <= 1e-12


def test_expectation_examples():
    psi_minus = bell_state(BellKind.PSI_MINUS)
    phi_plus = bell_state(BellKind.PHI_PLUS)
    z, x = pauli(PauliAxis.Z), pauli(PauliAxis.X)
    assert abs(expectation(psi_minus, np.eye(4)) - 1) <= 1e-12
    assert abs(expectation(psi_minus, tensor_op(z, z)) + 1) <= 1e-12
    oracle = oracles.expectation(list(phi_plus), oracles.kron(oracles.pauli_lists()["z"],
                                                              oracles.pauli_lists()["x"]))
    assert abs(oracle) <= 1e-12
    assert abs(expectation(phi_plus, tensor_op(z, x))) <= 1e-12


def test_expectation_is_real_for_hermitian(rng):
    for _ in range(20):
        h = _random_op(rng, 4)
        h = h + h.conj().T
        psi = normalize(rng.normal(size=4) + 1j * rng.normal(size=4))
        assert abs(expectation(psi, h).imag) <= 1e-12


def test_expectation_rejects_unnormalized():
    with pytest.raises(ValueError):
        expectation(np.array([1, 1, 0, 0], complex), np.eye(4))


def test_expectation_rejects_nan():
    with pytest.raises(ValueError):
        expectation(np.array([math.nan, 0, 0, 0], complex), np.eye(4))


def test_eigenbasis_z_and_x_as_printed():
    up, down = eigenbasis(PauliAxis.Z)
    assert allclose(up, [1, 0]) and allclose(down, [0, 1])
    s = 1 / math.sqrt(2)
    up, down = eigenbasis(PauliAxis.X)
    assert allclose(up, [s, s]) and allclose(down, [-s, s])


@pytest.mark.parametrize("axis", list(PauliAxis))
def test_eigenbasis_eigen_equations(axis):
    up, down = eigenbasis(axis)
    p = pauli(axis)
    assert allclose(p @ up, up)
    assert allclose(p @ down, -down)
    assert abs(np.vdot(up, down)) <= 1e-12
    assert abs(np.linalg.norm(up) - 1) <= 1e-12 and abs(np.linalg.norm(down) - 1) <= 1e-12


def test_eigenbasis_y_phase_convention():
    for v in eigenbasis(PauliAxis.Y):
        first = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        assert abs(first.imag) <= 1e-12 and first.real > 0


def test_direction_rotation_preserves_unit_norm(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    d = Direction.normalized(1, 2, 3).rotated(q)
    assert abs(d.dot(d) - 1) <= 1e-12
