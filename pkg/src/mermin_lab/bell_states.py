"""The four Bell spin states: construction, correlations and outcome statistics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

from mermin_lab._validation import ATOL, check_probability, check_state
from mermin_lab.spin_algebra import (
    Direction,
    PauliAxis,
    direction_operator,
    frame_transform,
    identity,
    su2_rotation,
    tensor_op,
)

__all__ = [
    "BellKind",
    "SymmetryPlane",
    "JointDistribution",
    "symmetry_plane",
    "invariant_axes",
    "in_plane_direction",
    "bell_state",
    "correlation_analytic",
    "correlation_matrix",
    "joint_distribution",
    "invariance_residual",
    "basis_change",
    "correlation_in_plane",
]


class BellKind(enum.Enum):
    PSI_MINUS = "psi-minus"
    PSI_PLUS = "psi-plus"
    PHI_MINUS = "phi-minus"
    PHI_PLUS = "phi-plus"

    @property
    def is_singlet(self) -> bool:
        return self is BellKind.PSI_MINUS


class SymmetryPlane(enum.Enum):
    XY = "xy"
    YZ = "yz"
    XZ = "xz"
    ALL = "all"


_PLANE = {
    BellKind.PSI_MINUS: SymmetryPlane.ALL,
    BellKind.PSI_PLUS: SymmetryPlane.XY,
    BellKind.PHI_MINUS: SymmetryPlane.YZ,
    BellKind.PHI_PLUS: SymmetryPlane.XZ,
}

_INVARIANT_AXES = {
    BellKind.PSI_MINUS: frozenset(PauliAxis),
    BellKind.PSI_PLUS: frozenset({PauliAxis.Z}),
    BellKind.PHI_MINUS: frozenset({PauliAxis.X}),
    BellKind.PHI_PLUS: frozenset({PauliAxis.Y}),
}

# <sigma_i sigma_i> on each state; the off-diagonal terms all vanish.
_CORRELATION_SIGNS = {
    BellKind.PSI_MINUS: (-1, -1, -1),
    BellKind.PSI_PLUS: (1, 1, -1),
    BellKind.PHI_MINUS: (-1, 1, 1),
    BellKind.PHI_PLUS: (1, -1, 1),
}

_S = 1.0 / math.sqrt(2.0)
_AMPLITUDES = {
    BellKind.PSI_MINUS: (0, _S, -_S, 0),
    BellKind.PSI_PLUS: (0, _S, _S, 0),
    BellKind.PHI_MINUS: (_S, 0, 0, -_S),
    BellKind.PHI_PLUS: (_S, 0, 0, _S),
}


@dataclass(frozen=True)
class JointDistribution:
    """Outcome probabilities ``p(i, j)`` for one pair of settings.

    Cells are ordered ``(uu, ud, du, dd)`` with u = +1 and d = -1. Entries may
    be floats or exact ``Fraction`` values.
    """

    p_uu: Real
    p_ud: Real
    p_du: Real
    p_dd: Real

    def __post_init__(self) -> None:
        for name, p in zip(("p_uu", "p_ud", "p_du", "p_dd"), self.as_tuple()):
            check_probability(p, name)
        total = sum(self.as_tuple())
        if abs(total - 1) > ATOL:
            raise ValueError(f"probabilities must sum to 1, got {total!r}")

    def as_tuple(self) -> tuple:
        return (self.p_uu, self.p_ud, self.p_du, self.p_dd)

    @property
    def correlation(self) -> Real:
        """Mean outcome product ``sum_ij i*j*p(i,j)``."""
        return self.p_uu - self.p_ud - self.p_du + self.p_dd

    @property
    def same_fraction(self) -> Real:
        return self.p_uu + self.p_dd

    @property
    def alice_marginal(self) -> Real:
        """Probability that Alice records +1."""
        return self.p_uu + self.p_ud

    @property
    def bob_marginal(self) -> Real:
        return self.p_uu + self.p_du

    def isclose(self, other, atol: float = ATOL) -> bool:
        other = other.as_tuple() if isinstance(other, JointDistribution) else tuple(other)
        return all(abs(float(x) - float(y)) <= atol for x, y in zip(self.as_tuple(), other))


def symmetry_plane(kind: BellKind) -> SymmetryPlane:
    return _PLANE[BellKind(kind)]


def invariant_axes(kind: BellKind) -> frozenset:
    """SU(2) generator axes that leave the state unchanged."""
    return _INVARIANT_AXES[BellKind(kind)]


def in_plane_direction(plane: SymmetryPlane, angle: float) -> Direction:
    """Unit vector at ``angle`` radians within ``plane``.

    Angles are measured from z in the XZ and YZ planes and from x in the XY
    plane. ``ALL`` is treated as XZ.
    """
    plane = SymmetryPlane(plane)
    c, s = math.cos(angle), math.sin(angle)
    if plane in (SymmetryPlane.XZ, SymmetryPlane.ALL):
        return Direction(s, 0.0, c)
    if plane is SymmetryPlane.YZ:
        return Direction(0.0, s, c)
    return Direction(c, s, 0.0)


def bell_state(kind: BellKind) -> np.ndarray:
    psi = np.array(_AMPLITUDES[BellKind(kind)], dtype=complex)
    psi.setflags(write=False)
    return psi


def correlation_analytic(kind: BellKind, a: Direction, b: Direction) -> float:
    sx, sy, sz = _CORRELATION_SIGNS[BellKind(kind)]
    return sx * a.ax * b.ax + sy * a.ay * b.ay + sz * a.az * b.az


def correlation_matrix(kind: BellKind) -> np.ndarray:
    """Diagonal 3x3 ``T`` with ``correlation_analytic(kind, a, b) == a @ T @ b``."""
    return np.diag(np.array(_CORRELATION_SIGNS[BellKind(kind)], dtype=float))


def _projectors(d: Direction) -> tuple[np.ndarray, np.ndarray]:
    # (I +/- a.sigma)/2 is the outer product |u><u| (|d><d|) of the eigenvectors
    # of a.sigma, independent of their phases.
    op = direction_operator(d)
    eye = identity(2)
    return (eye + op) / 2, (eye - op) / 2


def joint_distribution(kind: BellKind, a: Direction, b: Direction) -> JointDistribution:
    """Born-rule probabilities for Alice along ``a`` and Bob along ``b``."""
    psi = bell_state(kind)
    pa, pb = _projectors(a), _projectors(b)
    cells = []
    for i in (0, 1):
        for j in (0, 1):
            amp = np.vdot(psi, tensor_op(pa[i], pb[j]) @ psi)
            cells.append(min(max(float(amp.real), 0.0), 1.0))
    return JointDistribution(*cells)


def invariance_residual(kind: BellKind, axis: PauliAxis, theta_hilbert: float) -> float:
    """``||(U x U)|psi> - |psi>||`` for ``U = su2_rotation(axis, theta_hilbert)``."""
    psi = bell_state(kind)
    u = su2_rotation(axis, theta_hilbert)
    return float(np.linalg.norm(tensor_op(u, u) @ psi - psi))


def basis_change(state, to_axis: PauliAxis) -> np.ndarray:
    """Carry a sigma_z-basis state into the eigenbasis of ``to_axis``.

    Each basis ket is replaced by its image under the quarter-turn frame
    transform that maps the sigma_z eigenbasis onto the target one: the
    Y-generated transform for X, the X-generated transform for Y. Under this
    convention psi+ becomes -phi- (X) and i*phi+ (Y); other phase choices
    change only phases, never probabilities.
    """
    psi = check_state(state, 4)
    to_axis = PauliAxis(to_axis)
    if to_axis is PauliAxis.Z:
        out = psi.copy()
    else:
        generator = PauliAxis.Y if to_axis is PauliAxis.X else PauliAxis.X
        f = frame_transform(generator, math.pi / 4)
        out = np.kron(f, f) @ psi
    out.setflags(write=False)
    return out


def correlation_in_plane(kind: BellKind, alpha: float, beta: float) -> float:
    """Correlation for both magnets in the state's symmetry plane at angles ``alpha``, ``beta``.

    Equals ``-cos(alpha - beta)`` for the singlet and ``+cos(alpha - beta)`` for
    a triplet. The singlet is evaluated in the xz-plane.
    """
    plane = symmetry_plane(kind)
    a = in_plane_direction(plane, alpha)
    b = in_plane_direction(plane, beta)
    return correlation_analytic(kind, a, b)

