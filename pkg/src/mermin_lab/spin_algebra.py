"""Closed-form one- and two-qubit spin algebra.

States and operators are plain complex numpy arrays (length-2/4 vectors,
2x2/4x4 matrices). Amplitudes are ordered in the sigma_z product basis
``(uu, ud, du, dd)``. Every array handed out by this module is read-only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from mermin_lab._validation import ATOL, check_finite_complex, check_state, check_square

__all__ = [
    "ATOL",
    "PauliAxis",
    "Direction",
    "pauli",
    "identity",
    "direction_operator",
    "su2_rotation",
    "frame_transform",
    "rotated_measurement",
    "tensor_op",
    "tensor_state",
    "expectation",
    "eigenbasis",
    "is_hermitian",
    "is_unitary",
    "allclose",
    "normalize",
]


class PauliAxis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


_PAULI = {
    PauliAxis.X: _frozen(np.array([[0, 1], [1, 0]], dtype=complex)),
    PauliAxis.Y: _frozen(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    PauliAxis.Z: _frozen(np.array([[1, 0], [0, -1]], dtype=complex)),
}

_S = 1.0 / math.sqrt(2.0)

# Methods' column vectors for X and Z; Y fixed so the first nonzero entry is real positive.
_EIGENBASIS = {
    PauliAxis.Z: (
        _frozen(np.array([1, 0], dtype=complex)),
        _frozen(np.array([0, 1], dtype=complex)),
    ),
    PauliAxis.X: (
        _frozen(np.array([_S, _S], dtype=complex)),
        _frozen(np.array([-_S, _S], dtype=complex)),
    ),
    PauliAxis.Y: (
        _frozen(np.array([_S, 1j * _S], dtype=complex)),
        _frozen(np.array([_S, -1j * _S], dtype=complex)),
    ),
}


@dataclass(frozen=True)
class Direction:
    """Unit vector in real space giving a Stern-Gerlach orientation."""

    ax: float
    ay: float
    az: float

    def __post_init__(self) -> None:
        comps = (self.ax, self.ay, self.az)
        if not all(math.isfinite(c) for c in comps):
            raise ValueError(f"direction components must be finite, got {comps}")
        norm2 = self.ax * self.ax + self.ay * self.ay + self.az * self.az
        if abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"direction must be a unit vector, |a|^2 = {norm2!r}")

    @classmethod
    def normalized(cls, ax: float, ay: float, az: float) -> "Direction":
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(ax / n, ay / n, az / n)

    @classmethod
    def from_array(cls, v) -> "Direction":
        ax, ay, az = (float(c) for c in np.asarray(v, dtype=float).reshape(3))
        return cls(ax, ay, az)

    def as_array(self) -> np.ndarray:
        return np.array([self.ax, self.ay, self.az])

    def dot(self, other: "Direction") -> float:
        return self.ax * other.ax + self.ay * other.ay + self.az * other.az

    def rotated(self, rotation) -> "Direction":
        """Apply a 3x3 rotation matrix, renormalizing away rounding drift."""
        v = np.asarray(rotation, dtype=float) @ self.as_array()
        return Direction.normalized(*v)


def pauli(axis: PauliAxis) -> np.ndarray:
    return _PAULI[PauliAxis(axis)]


def identity(dim: int = 2) -> np.ndarray:
    return _frozen(np.eye(dim, dtype=complex))


def direction_operator(a: Direction) -> np.ndarray:
    """Spin measurement operator ``a . sigma`` for a unit direction."""
    if not isinstance(a, Direction):
        a = Direction.from_array(a)
    op = a.ax * _PAULI[PauliAxis.X] + a.ay * _PAULI[PauliAxis.Y] + a.az * _PAULI[PauliAxis.Z]
    return _frozen(op)


def su2_rotation(axis: PauliAxis, theta_hilbert: float) -> np.ndarray:
    """``exp(i * theta * sigma_axis) = cos(theta) I + i sin(theta) sigma_axis``.

    ``theta_hilbert`` is the Hilbert-space angle; the corresponding real-space
    rotation angle is twice as large.
    """
    if not math.isfinite(theta_hilbert):
        raise ValueError("rotation angle must be finite")
    c, s = math.cos(theta_hilbert), math.sin(theta_hilbert)
    return _frozen(c * np.eye(2, dtype=complex) + 1j * s * _PAULI[PauliAxis(axis)])


def frame_transform(axis: PauliAxis, theta_hilbert: float) -> np.ndarray:
    """Matrix whose columns are the rotated kets ``|u'>``, ``|d'>``.

    ``su2_rotation`` acts on the tuple of basis kets, so ``|u'> = U00|u> + U01|d>``;
    the ket map is therefore the transpose of the rotation matrix.
    """
    return _frozen(np.ascontiguousarray(su2_rotation(axis, theta_hilbert).T))


def rotated_measurement(axis: PauliAxis, theta_hilbert: float) -> np.ndarray:
    """``|u'><u'| - |d'><d'|`` for the frame rotated by ``theta_hilbert``."""
    f = frame_transform(axis, theta_hilbert)
    return _frozen(f @ _PAULI[PauliAxis.Z] @ f.conj().T)


def tensor_op(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = check_square(a, 2, "a")
    b = check_square(b, 2, "b")
    return _frozen(np.kron(a, b))


def tensor_state(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = check_state(a, 2, "a")
    b = check_state(b, 2, "b")
    return _frozen(np.kron(a, b))


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    """``<psi|O|psi>`` for a normalized two-qubit state."""
    psi = check_state(state, 4, "state")
    op = check_square(op, 4, "op")
    return complex(np.vdot(psi, op @ psi))


def eigenbasis(axis: PauliAxis) -> tuple[np.ndarray, np.ndarray]:
    """The ``(up, down)`` eigenvectors of ``pauli(axis)`` (eigenvalues +1, -1)."""
    return _EIGENBASIS[PauliAxis(axis)]


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return bool(np.max(np.abs(op - op.conj().T)) <= atol)


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op.conj().T @ op - eye)) <= atol)


def allclose(x, y, atol: float = ATOL) -> bool:
    """Entrywise ``|x - y| <= atol``; the equality used throughout the package."""
    x, y = np.asarray(x), np.asarray(y)
    return x.shape == y.shape and bool(np.max(np.abs(x - y), initial=0.0) <= atol)


def normalize(state) -> np.ndarray:
    v = check_finite_complex(state, "state")
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return _frozen(v / n)
