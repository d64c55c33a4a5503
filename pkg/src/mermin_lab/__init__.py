"""Mermin device laboratory.

Quantum (Bell-state) and classical (instruction-set) correlation statistics
computed in closed form, by exhaustive enumeration and by seeded Monte Carlo,
plus the outcome-partition analysis of average-only conservation.
"""
__version__ = "0.1.0"

from mermin_lab.bell_states import (  # noqa: E402
    BellKind,
    JointDistribution,
    SymmetryPlane,
    bell_state,
    correlation_analytic,
    correlation_in_plane,
    joint_distribution,
)
from mermin_lab.classical_lhv import InstructionSet, InstructionSetDevice, SetDistribution  # noqa: E402
from mermin_lab.conservation import PartitionAnalyzer, conservation_test, partition_by_outcome  # noqa: E402
from mermin_lab.quantum_sampler import ExperimentSpec, MerminDevice, run_experiment  # noqa: E402
from mermin_lab.spin_algebra import Direction, PauliAxis  # noqa: E402
from mermin_lab.trials import DevicePolicy, FixedPolicy, TrialLog  # noqa: E402

__all__ = [
    "__version__",
    "BellKind",
    "Direction",
    "DevicePolicy",
    "ExperimentSpec",
    "FixedPolicy",
    "InstructionSet",
    "InstructionSetDevice",
    "JointDistribution",
    "MerminDevice",
    "PartitionAnalyzer",
    "PauliAxis",
    "SetDistribution",
    "SymmetryPlane",
    "TrialLog",
    "bell_state",
    "conservation_test",
    "correlation_analytic",
    "correlation_in_plane",
    "joint_distribution",
    "partition_by_outcome",
    "run_experiment",
]
