"""Average-only conservation analysis of trial logs.

Trials are split by one party's outcome. Within each class the other party's
mean outcome is compared with the conserved projection ``+/-cos(theta)``; the
class means recombine (weighted by their empirical frequencies) into exactly
the sample correlation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from mermin_lab._validation import ATOL, check_outcome_pairs, check_outcomes
from mermin_lab.bell_states import BellKind, correlation_in_plane
from mermin_lab.trials import DEVICE_ANGLES, TrialLog

__all__ = [
    "N_SIGMA",
    "PartitionReport",
    "ConservationVerdict",
    "CorrelationTriple",
    "EnsembleSpec",
    "InfeasibleEnsembleError",
    "partition_outcomes",
    "partition_by_outcome",
    "reconstruct_correlation",
    "conditional_targets",
    "conservation_test",
    "make_ensemble",
    "elliptope_value",
    "elliptope_check",
    "device_triple",
    "triple_from_log",
    "PartitionAnalyzer",
]

# Statistical gate shared with the samplers' tests.
N_SIGMA = 4.5


@dataclass(frozen=True)
class PartitionReport:
    """Conditional means of the other party's outcomes, per reference outcome.

    ``ba_plus``/``ba_minus`` are ``None`` when the class is empty.
    """

    reference_party: str
    n_plus: int
    n_minus: int
    ba_plus: Optional[float]
    ba_minus: Optional[float]
    se_plus: Optional[float]
    se_minus: Optional[float]

    @property
    def total(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def f_plus(self) -> float:
        return self.n_plus / self.total

    @property
    def f_minus(self) -> float:
        return self.n_minus / self.total

    def as_dict(self) -> dict:
        return {
            "reference_party": self.reference_party,
            "n_plus": self.n_plus, "n_minus": self.n_minus,
            "ba_plus": self.ba_plus, "ba_minus": self.ba_minus,
            "se_plus": self.se_plus, "se_minus": self.se_minus,
        }


def _class_stats(values: np.ndarray) -> tuple[int, Optional[float], Optional[float]]:
    n = int(values.shape[0])
    if n == 0:
        return 0, None, None
    mean = float(values.sum(dtype=np.int64)) / n
    # Outcomes are +/-1, so the variance is 1 - mean^2.
    se = math.sqrt(max(1.0 - mean * mean, 0.0) / n)
    return n, mean, se


def partition_outcomes(reference, other, reference_party: str = "alice") -> PartitionReport:
    ref = check_outcomes(reference, "reference outcomes")
    oth = check_outcomes(other, "other outcomes")
    if ref.shape != oth.shape or ref.ndim != 1:
        raise ValueError("outcome arrays must be 1-D and of equal length")
    if ref.size == 0:
        raise ValueError("cannot partition an empty log")
    n_p, m_p, se_p = _class_stats(oth[ref == 1])
    n_m, m_m, se_m = _class_stats(oth[ref == -1])
    return PartitionReport(reference_party, n_p, n_m, m_p, m_m, se_p, se_m)


def partition_by_outcome(trials: TrialLog, reference: str = "alice") -> PartitionReport:
    """Split a single-setting-pair log by ``reference``'s outcome."""
    if len(trials) == 0:
        raise ValueError("cannot partition an empty log")
    if len(trials.setting_pairs()) != 1:
        raise ValueError("partition needs a log with a single fixed setting pair; "
                         "select one pair first")
    if reference == "alice":
        return partition_outcomes(trials.alice_outcome, trials.bob_outcome, "alice")
    if reference == "bob":
        return partition_outcomes(trials.bob_outcome, trials.alice_outcome, "bob")
    raise ValueError(f"reference must be 'alice' or 'bob', got {reference!r}")


def reconstruct_correlation(report: PartitionReport) -> float:
    """``f+ * (+1) * mean+ + f- * (-1) * mean-`` with empirical class frequencies."""
    if report.ba_plus is None or report.ba_minus is None:
        raise ValueError("reconstruction undefined: an outcome class is empty")
    return report.f_plus * report.ba_plus - report.f_minus * report.ba_minus


def conditional_targets(kind: BellKind, theta: float) -> tuple[float, float]:
    """Expected (mean+, mean-) for magnets ``theta`` apart in the symmetry plane."""
    c = correlation_in_plane(kind, 0.0, theta)
    return c, -c


@dataclass(frozen=True)
class ConservationVerdict:
    passed: bool
    report: PartitionReport
    target_plus: float
    target_minus: float
    z_plus: Optional[float]
    z_minus: Optional[float]
    integral_outcomes: bool
    reconstructed: Optional[float]
    direct: float

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "report": self.report.as_dict(),
            "target_plus": self.target_plus, "target_minus": self.target_minus,
            "z_plus": self.z_plus, "z_minus": self.z_minus,
            "integral_outcomes": self.integral_outcomes,
            "reconstructed": self.reconstructed, "direct": self.direct,
        }


def _z(mean: Optional[float], se: Optional[float], target: float) -> Optional[float]:
    if mean is None:
        return None
    dev = abs(mean - target)
    if dev <= ATOL:
        return 0.0
    return math.inf if se == 0 else dev / se


def conservation_test(trials: TrialLog, kind: BellKind, theta: float, reference: str = "alice",
                      n_sigma: float = N_SIGMA) -> ConservationVerdict:
    """Check both conditional means against ``+/-cos(theta)`` within ``n_sigma`` errors."""
    integral = bool(np.all(np.abs(trials.alice_outcome) == 1) and np.all(np.abs(trials.bob_outcome) == 1))
    report = partition_by_outcome(trials, reference)
    t_plus, t_minus = conditional_targets(kind, theta)
    z_p = _z(report.ba_plus, report.se_plus, t_plus)
    z_m = _z(report.ba_minus, report.se_minus, t_minus)
    passed = integral and z_p is not None and z_m is not None and z_p <= n_sigma and z_m <= n_sigma
    try:
        recon = reconstruct_correlation(report)
    except ValueError:
        recon = None
    return ConservationVerdict(passed, report, t_plus, t_minus, z_p, z_m, integral, recon,
                               trials.correlation())


class InfeasibleEnsembleError(ValueError):
    def __init__(self, message: str, nearest: tuple[Optional[int], Optional[int]]):
        super().__init__(message)
        self.nearest = nearest


@dataclass(frozen=True)
class EnsembleSpec:
    theta: float
    size: int
    singlet: bool = False

    @property
    def target(self) -> float:
        c = math.cos(self.theta)
        return -c if self.singlet else c


def _plus_count(size: int, target: float, tol: float = 1e-9) -> Optional[int]:
    k = size * (1.0 + target) / 2.0
    r = round(k)
    return int(r) if abs(k - r) <= tol else None


def make_ensemble(spec: EnsembleSpec, search: int = 64) -> list[int]:
    """Smallest illustration: ``+1`` outcomes first, then ``-1``, with mean exactly ``spec.target``.

    Raises ``InfeasibleEnsembleError`` carrying the nearest feasible sizes below
    and above (``None`` when none exists within ``search`` steps).
    """
    if spec.size < 1:
        raise ValueError("ensemble size must be >= 1")
    k = _plus_count(spec.size, spec.target)
    if k is None:
        below = next((n for n in range(spec.size - 1, 0, -1)
                      if _plus_count(n, spec.target) is not None), None)
        above = next((n for n in range(spec.size + 1, spec.size + search + 1)
                      if _plus_count(n, spec.target) is not None), None)
        raise InfeasibleEnsembleError(
            f"size {spec.size} cannot average to {spec.target:.6g} with +/-1 outcomes; "
            f"nearest feasible sizes: {below}, {above}", (below, above))
    return [1] * k + [-1] * (spec.size - k)


@dataclass(frozen=True)
class CorrelationTriple:
    chi_12: float
    chi_13: float
    chi_23: float

    def __post_init__(self) -> None:
        for name in ("chi_12", "chi_13", "chi_23"):
            v = getattr(self, name)
            if not (math.isfinite(v) and -1.0 - ATOL <= v <= 1.0 + ATOL):
                raise ValueError(f"{name} must lie in [-1, 1], got {v!r}")

    def matrix(self) -> np.ndarray:
        return np.array([
            [1.0, self.chi_12, self.chi_13],
            [self.chi_12, 1.0, self.chi_23],
            [self.chi_13, self.chi_23, 1.0],
        ])


def elliptope_value(t: CorrelationTriple) -> float:
    x, y, z = t.chi_12, t.chi_13, t.chi_23
    return 1.0 + 2.0 * x * y * z - x * x - y * y - z * z


def elliptope_check(t: CorrelationTriple) -> tuple[float, bool]:
    """Value of the elliptope polynomial and whether the triple lies inside (or on) it."""
    if not isinstance(t, CorrelationTriple):
        t = CorrelationTriple(*t)
    value = elliptope_value(t)
    return value, value >= -ATOL


def device_triple(kind: BellKind) -> CorrelationTriple:
    """Analytic correlations for the three unequal device setting pairs."""
    a1, a2, a3 = DEVICE_ANGLES
    return CorrelationTriple(correlation_in_plane(kind, a1, a2),
                             correlation_in_plane(kind, a1, a3),
                             correlation_in_plane(kind, a2, a3))


def triple_from_log(trials: TrialLog) -> CorrelationTriple:
    """Sample correlations per unordered unequal setting pair of a device log."""
    vals = []
    for i, j in ((1, 2), (1, 3), (2, 3)):
        mask = ((trials.alice_setting == i) & (trials.bob_setting == j)) | \
               ((trials.alice_setting == j) & (trials.bob_setting == i))
        if not mask.any():
            raise ValueError(f"log has no trials for settings {i}{j}")
        vals.append(float(trials.products[mask].mean()))
    return CorrelationTriple(*vals)


class PartitionAnalyzer(BaseEstimator):
    """Estimator wrapper around ``partition_outcomes``.

    ``fit`` takes an ``(n, 2)`` array of (alice, bob) outcomes for one setting
    pair. With ``state`` and ``theta`` set, ``verdict_`` records whether the
    conditional means match the conserved projection.
    """

    def __init__(self, reference="alice", state=None, theta=None, n_sigma=N_SIGMA):
        self.reference = reference
        self.state = state
        self.theta = theta
        self.n_sigma = n_sigma

    def fit(self, X, y=None):
        X = check_outcome_pairs(X)
        if self.reference == "alice":
            ref, oth = X[:, 0], X[:, 1]
        elif self.reference == "bob":
            ref, oth = X[:, 1], X[:, 0]
        else:
            raise ValueError(f"reference must be 'alice' or 'bob', got {self.reference!r}")
        self.report_ = partition_outcomes(ref, oth, self.reference)
        self.n_plus_, self.n_minus_ = self.report_.n_plus, self.report_.n_minus
        self.ba_plus_, self.ba_minus_ = self.report_.ba_plus, self.report_.ba_minus
        self.se_plus_, self.se_minus_ = self.report_.se_plus, self.report_.se_minus
        self.correlation_ = float(np.mean(X[:, 0].astype(np.int64) * X[:, 1]))
        if self.state is not None and self.theta is not None:
            t_plus, t_minus = conditional_targets(BellKind(self.state), float(self.theta))
            z_p = _z(self.ba_plus_, self.se_plus_, t_plus)
            z_m = _z(self.ba_minus_, self.se_minus_, t_minus)
            self.verdict_ = z_p is not None and z_m is not None and \
                z_p <= self.n_sigma and z_m <= self.n_sigma
        else:
            self.verdict_ = None
        return self

    def reconstructed_correlation(self) -> float:
        check_is_fitted(self, "report_")
        return reconstruct_correlation(self.report_)
