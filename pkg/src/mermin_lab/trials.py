"""Trial records, setting policies and columnar trial logs.

Both samplers (quantum and instruction-set) emit the same ``TrialLog`` so the
analysis layer never needs to know which model produced the data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from mermin_lab._validation import check_outcomes

__all__ = [
    "DEVICE_ANGLES",
    "DevicePolicy",
    "FixedPolicy",
    "Policy",
    "TrialRecord",
    "TrialLog",
    "device_angle",
    "setting_for_angle",
]

# Settings 1, 2, 3 sit 120 degrees apart in the measurement plane.
DEVICE_ANGLES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)


def device_angle(setting: int) -> float:
    if setting not in (1, 2, 3):
        raise ValueError(f"device setting must be 1, 2 or 3, got {setting!r}")
    return DEVICE_ANGLES[setting - 1]


def setting_for_angle(angle: float, atol: float = 1e-9) -> int:
    """Device setting whose angle equals ``angle`` modulo 2*pi, else 0."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    for k, ref in enumerate(DEVICE_ANGLES, start=1):
        if abs(math.remainder(wrapped - ref, 2.0 * math.pi)) <= atol:
            return k
    return 0


@dataclass(frozen=True)
class DevicePolicy:
    """Each party independently picks setting 1, 2 or 3 with probability 1/3."""

    name = "device"


@dataclass(frozen=True)
class FixedPolicy:
    """Both magnets held at fixed in-plane angles (radians) for every trial."""

    alpha: float
    beta: float
    name = "fixed"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("fixed-policy angles must be finite")

    @classmethod
    def from_settings(cls, alice: int, bob: int) -> "FixedPolicy":
        return cls(device_angle(alice), device_angle(bob))

    @classmethod
    def from_degrees(cls, alpha: float, beta: float) -> "FixedPolicy":
        return cls(math.radians(alpha), math.radians(beta))


Policy = Union[DevicePolicy, FixedPolicy]


@dataclass(frozen=True)
class TrialRecord:
    index: int
    alice_setting: Union[int, float]
    bob_setting: Union[int, float]
    alice_outcome: int
    bob_outcome: int

    def __post_init__(self) -> None:
        if self.alice_outcome not in (1, -1) or self.bob_outcome not in (1, -1):
            raise ValueError("outcomes must be exactly +1 or -1")


@dataclass
class TrialLog:
    """Columnar log of trials.

    ``alice_setting``/``bob_setting`` hold device settings 1-3, or 0 where the
    magnet sits at a free angle (fixed policy); ``alice_angle``/``bob_angle``
    always hold the in-plane angle in radians.
    """

    index: np.ndarray
    alice_angle: np.ndarray
    bob_angle: np.ndarray
    alice_setting: np.ndarray
    bob_setting: np.ndarray
    alice_outcome: np.ndarray
    bob_outcome: np.ndarray
    policy: str = "fixed"
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.index = np.asarray(self.index, dtype=np.int64)
        n = self.index.shape[0]
        self.alice_angle = np.asarray(self.alice_angle, dtype=float)
        self.bob_angle = np.asarray(self.bob_angle, dtype=float)
        self.alice_setting = np.asarray(self.alice_setting, dtype=np.int8)
        self.bob_setting = np.asarray(self.bob_setting, dtype=np.int8)
        self.alice_outcome = check_outcomes(self.alice_outcome, "alice_outcome")
        self.bob_outcome = check_outcomes(self.bob_outcome, "bob_outcome")
        for name in ("alice_angle", "bob_angle", "alice_setting", "bob_setting",
                     "alice_outcome", "bob_outcome"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if self.policy not in ("fixed", "device"):
            raise ValueError(f"unknown policy {self.policy!r}")

    def __len__(self) -> int:
        return int(self.index.shape[0])

    def __getitem__(self, i: int) -> TrialRecord:
        if self.policy == "device":
            sa, sb = int(self.alice_setting[i]), int(self.bob_setting[i])
        else:
            sa, sb = float(self.alice_angle[i]), float(self.bob_angle[i])
        return TrialRecord(int(self.index[i]), sa, sb,
                           int(self.alice_outcome[i]), int(self.bob_outcome[i]))

    def __iter__(self) -> Iterator[TrialRecord]:
        return (self[i] for i in range(len(self)))

    def outcome_pairs(self) -> np.ndarray:
        return np.column_stack([self.alice_outcome, self.bob_outcome])

    @property
    def products(self) -> np.ndarray:
        return self.alice_outcome.astype(np.int64) * self.bob_outcome

    def correlation(self) -> float:
        """Sample mean of outcome products."""
        if len(self) == 0:
            raise ValueError("empty log has no correlation")
        return float(self.products.mean())

    def same_fraction(self) -> float:
        return float(np.mean(self.alice_outcome == self.bob_outcome))

    def case_a(self) -> np.ndarray:
        """Mask of trials with equal settings (same reference frame)."""
        if self.policy == "device":
            return self.alice_setting == self.bob_setting
        return np.isclose(self.alice_angle, self.bob_angle, rtol=0.0, atol=1e-12)

    def case_b(self) -> np.ndarray:
        return ~self.case_a()

    def subset(self, mask) -> "TrialLog":
        mask = np.asarray(mask)
        return TrialLog(
            self.index[mask], self.alice_angle[mask], self.bob_angle[mask],
            self.alice_setting[mask], self.bob_setting[mask],
            self.alice_outcome[mask], self.bob_outcome[mask],
            policy=self.policy, meta=dict(self.meta),
        )

    def select_pair(self, alice: int, bob: int) -> "TrialLog":
        """Trials with device settings ``(alice, bob)``."""
        return self.subset((self.alice_setting == alice) & (self.bob_setting == bob))

    def setting_pairs(self) -> list[tuple[float, float]]:
        """Distinct (alice_angle, bob_angle) pairs, in order of first appearance."""
        seen: dict[tuple[float, float], None] = {}
        for a, b in zip(self.alice_angle.tolist(), self.bob_angle.tolist()):
            seen.setdefault((a, b), None)
        return list(seen)

    @classmethod
    def concatenate(cls, logs: list["TrialLog"]) -> "TrialLog":
        if not logs:
            raise ValueError("nothing to concatenate")
        cols = [np.concatenate([getattr(lg, name) for lg in logs]) for name in (
            "index", "alice_angle", "bob_angle", "alice_setting", "bob_setting",
            "alice_outcome", "bob_outcome")]
        return cls(*cols, policy=logs[0].policy, meta=dict(logs[0].meta))
