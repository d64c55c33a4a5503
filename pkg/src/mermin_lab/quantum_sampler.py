"""Seeded trial-by-trial Monte Carlo for Bell-state measurements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from mermin_lab.bell_states import (
    BellKind,
    in_plane_direction,
    joint_distribution,
    symmetry_plane,
)
from mermin_lab.rng import RngStream, inverse_cdf, map_chunks, uniform_setting
from mermin_lab.spin_algebra import Direction
from mermin_lab.trials import (
    DEVICE_ANGLES,
    DevicePolicy,
    FixedPolicy,
    Policy,
    TrialLog,
    setting_for_angle,
)

__all__ = ["ExperimentSpec", "sample_trial", "run_experiment", "MerminDevice", "CELL_OUTCOMES"]

# Cell order (uu, ud, du, dd) -> (alice, bob).
CELL_OUTCOMES = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int8)


@dataclass(frozen=True)
class ExperimentSpec:
    state: BellKind
    policy: Policy
    trials: int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "state", BellKind(self.state))
        if not isinstance(self.policy, (DevicePolicy, FixedPolicy)):
            raise TypeError(f"unsupported policy {self.policy!r}")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        RngStream(self.seed)


def _cdf(kind: BellKind, a: Direction, b: Direction) -> np.ndarray:
    return np.cumsum(joint_distribution(kind, a, b).as_tuple())


def sample_trial(kind: BellKind, a: Direction, b: Direction, rng: RngStream,
                 index: int = 0) -> tuple[int, int]:
    """Draw one (alice, bob) outcome pair from the Born-rule distribution."""
    u = rng.uniforms(index, 1)[0, 2]
    cell = int(inverse_cdf(np.array([u]), _cdf(kind, a, b))[0])
    alice, bob = CELL_OUTCOMES[cell]
    return int(alice), int(bob)


def _device_cdf_table(kind: BellKind) -> np.ndarray:
    plane = symmetry_plane(kind)
    dirs = [in_plane_direction(plane, ang) for ang in DEVICE_ANGLES]
    return np.array([[_cdf(kind, da, db) for db in dirs] for da in dirs])


def run_experiment(spec: ExperimentSpec, workers: int = 1, chunk_size: int = 1 << 18) -> TrialLog:
    """Generate the trial log for ``spec``.

    Output is a pure function of ``spec``: any ``workers``/``chunk_size`` gives
    the same log bit for bit.
    """
    kind, n = spec.state, int(spec.trials)
    rng = RngStream(spec.seed)
    plane = symmetry_plane(kind)

    if isinstance(spec.policy, DevicePolicy):
        table = _device_cdf_table(kind)
        angles = np.array(DEVICE_ANGLES)

        def chunk(start: int, stop: int):
            u = rng.uniforms(start, stop - start)
            sa, sb = uniform_setting(u[:, 0]), uniform_setting(u[:, 1])
            cells = inverse_cdf(u[:, 2], table[sa - 1, sb - 1])
            return sa, sb, cells
    else:
        alpha, beta = spec.policy.alpha, spec.policy.beta
        cdf = _cdf(kind, in_plane_direction(plane, alpha), in_plane_direction(plane, beta))
        fixed_a, fixed_b = setting_for_angle(alpha), setting_for_angle(beta)

        def chunk(start: int, stop: int):
            m = stop - start
            u = rng.uniforms(start, m)
            cells = inverse_cdf(u[:, 2], cdf)
            return np.full(m, fixed_a, np.int8), np.full(m, fixed_b, np.int8), cells

    parts = map_chunks(chunk, n, workers=workers, chunk_size=chunk_size)
    sa = np.concatenate([p[0] for p in parts])
    sb = np.concatenate([p[1] for p in parts])
    cells = np.concatenate([p[2] for p in parts])
    outcomes = CELL_OUTCOMES[cells]

    if isinstance(spec.policy, DevicePolicy):
        a_ang, b_ang, policy = angles[sa - 1], angles[sb - 1], "device"
    else:
        a_ang = np.full(n, spec.policy.alpha)
        b_ang = np.full(n, spec.policy.beta)
        policy = "fixed"
    return TrialLog(
        np.arange(n, dtype=np.int64), a_ang, b_ang, sa, sb,
        outcomes[:, 0], outcomes[:, 1], policy=policy,
        meta={"model": "quantum", "state": kind.value, "seed": int(spec.seed)},
    )


class MerminDevice(BaseEstimator):
    """Estimator-style front end for the quantum sampler.

    Parameters
    ----------
    state : str
        Bell state name, e.g. ``"phi-plus"``.
    policy : {"device", "fixed"}
        Random 1/2/3 settings per party, or fixed angles ``alpha``/``beta``.
    alpha, beta : float
        In-plane magnet angles in radians (fixed policy only).
    workers : int
        Threads used for sampling; never changes the output.
    """

    def __init__(self, state="phi-plus", policy="device", alpha=0.0, beta=0.0, workers=1):
        self.state = state
        self.policy = policy
        self.alpha = alpha
        self.beta = beta
        self.workers = workers

    def _spec(self, trials: int, seed: int) -> ExperimentSpec:
        if self.policy == "device":
            policy = DevicePolicy()
        elif self.policy == "fixed":
            policy = FixedPolicy(float(self.alpha), float(self.beta))
        else:
            raise ValueError(f"policy must be 'device' or 'fixed', got {self.policy!r}")
        return ExperimentSpec(BellKind(self.state), policy, trials, seed)

    def sample(self, trials: int, seed: int = 0) -> TrialLog:
        return run_experiment(self._spec(trials, seed), workers=self.workers)
