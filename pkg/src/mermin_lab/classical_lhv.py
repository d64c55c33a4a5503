"""Instruction sets: the local-hidden-variable model of the Mermin device.

An instruction set fixes an outcome for each of the three settings
(R = +1, G = -1). All enumeration results are exact when the distribution
weights are ``Fraction``s.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from mermin_lab._validation import ATOL
from mermin_lab.bell_states import JointDistribution
from mermin_lab.rng import RngStream, inverse_cdf, map_chunks, uniform_setting
from mermin_lab.trials import DEVICE_ANGLES, DevicePolicy, FixedPolicy, Policy, TrialLog, setting_for_angle

__all__ = [
    "BELL_BOUND",
    "CASE_A_PAIRS",
    "CASE_B_PAIRS",
    "CorrelationMode",
    "InstructionSet",
    "SetDistribution",
    "all_instruction_sets",
    "evaluate",
    "same_outcome_fraction_case_b",
    "classical_correlation",
    "case_b_correlation",
    "joint_table",
    "bell_bound_check",
    "satisfies_bell_bound",
    "sample_raffle",
    "InstructionSetDevice",
]

BELL_BOUND = Fraction(1, 3)
CASE_A_PAIRS = ((1, 1), (2, 2), (3, 3))
CASE_B_PAIRS = ((1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2))

_LETTER = {1: "R", -1: "G"}
_VALUE = {"R": 1, "G": -1}


class CorrelationMode(enum.Enum):
    CORRELATED = "correlated"
    ANTICORRELATED = "anticorrelated"


@dataclass(frozen=True, order=True)
class InstructionSet:
    outcomes: tuple[int, int, int]

    def __post_init__(self) -> None:
        if len(self.outcomes) != 3 or any(o not in (1, -1) for o in self.outcomes):
            raise ValueError(f"instruction set needs three outcomes of +/-1, got {self.outcomes!r}")

    @classmethod
    def from_label(cls, label: str) -> "InstructionSet":
        label = label.strip().upper()
        if len(label) != 3 or set(label) - {"R", "G"}:
            raise ValueError(f"instruction set label must be three of R/G, got {label!r}")
        return cls(tuple(_VALUE[c] for c in label))

    @property
    def label(self) -> str:
        return "".join(_LETTER[o] for o in self.outcomes)

    @property
    def is_two_one(self) -> bool:
        return abs(sum(self.outcomes)) == 1

    def outcome(self, setting: int) -> int:
        return self.outcomes[setting - 1]

    def __str__(self) -> str:
        return self.label


def all_instruction_sets() -> list[InstructionSet]:
    """The eight sets, RRR first and GGG last."""
    return [InstructionSet(t) for t in itertools.product((1, -1), repeat=3)]


_SETS = all_instruction_sets()
_SET_INDEX = {s: i for i, s in enumerate(_SETS)}
# (8, 3) table of outcomes, row order of all_instruction_sets().
_OUTCOME_TABLE = np.array([s.outcomes for s in _SETS], dtype=np.int8)


@dataclass(frozen=True)
class SetDistribution:
    """Probabilities over the eight instruction sets, in ``all_instruction_sets()`` order."""

    weights: tuple

    def __post_init__(self) -> None:
        w = tuple(Fraction(x) if isinstance(x, (int, np.integer)) else x for x in self.weights)
        if len(w) != 8:
            raise ValueError(f"need 8 weights, got {len(w)}")
        if any(isinstance(x, float) and not np.isfinite(x) for x in w):
            raise ValueError("weights must be finite")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1) > ATOL:
            raise ValueError(f"weights must sum to 1, got {sum(w)!r}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls) -> "SetDistribution":
        return cls((Fraction(1, 8),) * 8)

    @classmethod
    def point(cls, s: InstructionSet | str) -> "SetDistribution":
        if isinstance(s, str):
            s = InstructionSet.from_label(s)
        w = [Fraction(0)] * 8
        w[_SET_INDEX[s]] = Fraction(1)
        return cls(tuple(w))

    @classmethod
    def two_one(cls) -> "SetDistribution":
        """Uniform over the six sets with two of one colour and one of the other."""
        return cls(tuple(Fraction(1, 6) if s.is_two_one else Fraction(0) for s in _SETS))

    @classmethod
    def from_name(cls, name: str) -> "SetDistribution":
        """Parse ``uniform``, ``two-one`` or ``point:RRG``."""
        if name == "uniform":
            return cls.uniform()
        if name == "two-one":
            return cls.two_one()
        if name.startswith("point:"):
            return cls.point(name.split(":", 1)[1])
        raise ValueError(f"unknown distribution {name!r}")

    def items(self):
        return zip(_SETS, self.weights)


def evaluate(s: InstructionSet, alice: int, bob: int,
             mode: CorrelationMode = CorrelationMode.CORRELATED) -> tuple[int, int]:
    a, b = s.outcome(alice), s.outcome(bob)
    if CorrelationMode(mode) is CorrelationMode.ANTICORRELATED:
        b = -b
    return a, b


def same_outcome_fraction_case_b(s: InstructionSet) -> Fraction:
    same = sum(1 for a, b in CASE_B_PAIRS if s.outcome(a) == s.outcome(b))
    return Fraction(same, len(CASE_B_PAIRS))


def _check_dist(dist) -> SetDistribution:
    if not isinstance(dist, SetDistribution):
        dist = SetDistribution(tuple(dist))
    return dist


def classical_correlation(dist: SetDistribution, alice: int, bob: int,
                          mode: CorrelationMode = CorrelationMode.CORRELATED) -> Real:
    """Exact mean outcome product for one setting pair."""
    dist = _check_dist(dist)
    total = 0
    for s, w in dist.items():
        a, b = evaluate(s, alice, bob, mode)
        total += w * a * b
    return total


def case_b_correlation(dist: SetDistribution,
                       mode: CorrelationMode = CorrelationMode.CORRELATED) -> Real:
    """Correlation averaged over the six unequal setting pairs."""
    dist = _check_dist(dist)
    vals = [classical_correlation(dist, a, b, mode) for a, b in CASE_B_PAIRS]
    return sum(vals) / len(vals)


def joint_table(dist: SetDistribution, case: str,
                mode: CorrelationMode = CorrelationMode.CORRELATED) -> JointDistribution:
    """Outcome probabilities averaged over the case (a) or case (b) setting pairs.

    ``case`` is ``"same"`` (case a) or ``"different"`` (case b).
    """
    dist = _check_dist(dist)
    if case == "same":
        pairs = CASE_A_PAIRS
    elif case == "different":
        pairs = CASE_B_PAIRS
    else:
        raise ValueError(f"case must be 'same' or 'different', got {case!r}")
    cells = {(1, 1): 0, (1, -1): 0, (-1, 1): 0, (-1, -1): 0}
    for sa, sb in pairs:
        for s, w in dist.items():
            cells[evaluate(s, sa, sb, mode)] += w / len(pairs)
    return JointDistribution(cells[(1, 1)], cells[(1, -1)], cells[(-1, 1)], cells[(-1, -1)])


def satisfies_bell_bound(fraction: Real) -> bool:
    """Whether a case (b) same-outcome fraction is reachable by instruction sets (>= 1/3)."""
    return fraction >= BELL_BOUND if isinstance(fraction, (int, Fraction)) \
        else fraction >= float(BELL_BOUND) - ATOL


def bell_bound_check(dist: SetDistribution) -> tuple[Real, bool]:
    """Exact case (b) same-outcome probability under ``dist`` and the bound verdict."""
    frac = joint_table(dist, "different").same_fraction
    return frac, satisfies_bell_bound(frac)


def _set_cdf(dist: SetDistribution) -> np.ndarray:
    return np.cumsum([float(w) for w in dist.weights])


def sample_raffle(dist: SetDistribution, policy: Policy, trials: int, seed: int,
                  mode: CorrelationMode = CorrelationMode.CORRELATED,
                  workers: int = 1, chunk_size: int = 1 << 18) -> TrialLog:
    """Draw one instruction set per trial and read off both outcomes.

    Fixed policies must use device angles (0, 120 or 240 degrees).
    """
    dist = _check_dist(dist)
    mode = CorrelationMode(mode)
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    n = int(trials)
    rng = RngStream(seed)
    cdf = _set_cdf(dist)
    sign = -1 if mode is CorrelationMode.ANTICORRELATED else 1

    if isinstance(policy, DevicePolicy):
        fixed = None
    elif isinstance(policy, FixedPolicy):
        fixed = (setting_for_angle(policy.alpha), setting_for_angle(policy.beta))
        if 0 in fixed:
            raise ValueError("instruction sets only define outcomes at the three device settings")
    else:
        raise TypeError(f"unsupported policy {policy!r}")

    def chunk(start: int, stop: int):
        m = stop - start
        u = rng.uniforms(start, m)
        if fixed is None:
            sa, sb = uniform_setting(u[:, 0]), uniform_setting(u[:, 1])
        else:
            sa, sb = np.full(m, fixed[0], np.int8), np.full(m, fixed[1], np.int8)
        sets = inverse_cdf(u[:, 2], cdf)
        alice = _OUTCOME_TABLE[sets, sa - 1]
        bob = (sign * _OUTCOME_TABLE[sets, sb - 1]).astype(np.int8)
        return sa, sb, alice, bob

    parts = map_chunks(chunk, n, workers=workers, chunk_size=chunk_size)
    sa, sb, alice, bob = (np.concatenate([p[k] for p in parts]) for k in range(4))
    angles = np.array(DEVICE_ANGLES)
    return TrialLog(
        np.arange(n, dtype=np.int64), angles[sa - 1], angles[sb - 1], sa, sb, alice, bob,
        policy="device" if fixed is None else "fixed",
        meta={"model": "classical", "mode": mode.value, "seed": int(seed)},
    )


class InstructionSetDevice(BaseEstimator):
    """Estimator-style front end for raffle sampling.

    ``dist`` accepts a ``SetDistribution`` or a name understood by
    ``SetDistribution.from_name``; ``settings`` is ``None`` for random settings
    or an ``(alice, bob)`` pair of device settings.
    """

    def __init__(self, dist="uniform", settings=None, mode="correlated", workers=1):
        self.dist = dist
        self.settings = settings
        self.mode = mode
        self.workers = workers

    def distribution(self) -> SetDistribution:
        return self.dist if isinstance(self.dist, SetDistribution) else SetDistribution.from_name(self.dist)

    def sample(self, trials: int, seed: int = 0) -> TrialLog:
        policy = DevicePolicy() if self.settings is None else FixedPolicy.from_settings(*self.settings)
        return sample_raffle(self.distribution(), policy, trials, seed,
                             mode=CorrelationMode(self.mode), workers=self.workers)


def point_masses() -> Sequence[SetDistribution]:
    return [SetDistribution.point(s) for s in _SETS]
