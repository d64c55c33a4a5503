"""Self-verification suite behind ``mermin-lab check``.

Each check returns ``(passed, detail)``. ``mutation="correlation-sign"`` swaps in a
correlation function with a flipped z-term, which several checks must catch.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from mermin_lab import bell_states as bs
from mermin_lab import classical_lhv as lhv
from mermin_lab import conservation as cons
from mermin_lab import spin_algebra as sa
from mermin_lab.quantum_sampler import ExperimentSpec, run_experiment
from mermin_lab.trials import DevicePolicy, FixedPolicy

TOL = 1e-12
MUTATIONS = ("correlation-sign",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 4)}


def random_direction(rng: np.random.Generator) -> sa.Direction:
    v = rng.normal(size=3)
    return sa.Direction.normalized(*v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _mutated_correlation(kind, a, b):
    value = bs.correlation_analytic(kind, a, b)
    return value - 2 * bs.correlation_matrix(kind)[2, 2] * a.az * b.az


class Suite:
    def __init__(self, mutation: str | None = None, seed: int = 20240101):
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
        self.corr = _mutated_correlation if mutation == "correlation-sign" else bs.correlation_analytic
        self.rng = np.random.default_rng(seed)

    def checks(self) -> list[tuple[str, Callable[[], tuple[bool, str]]]]:
        return [(name[len("check_"):], getattr(self, name))
                for name in sorted(dir(self)) if name.startswith("check_")]

    def run(self) -> list[CheckResult]:
        results = []
        for name, fn in self.checks():
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
        return results

    # spin algebra
    def check_pauli_properties(self):
        for ax in sa.PauliAxis:
            p = sa.pauli(ax)
            if not (sa.is_hermitian(p) and sa.is_unitary(p) and abs(np.trace(p)) <= TOL
                    and sa.allclose(p @ p, np.eye(2))):
                return False, f"sigma_{ax.value} fails"
        return True, "hermitian, unitary, traceless, squares to I"

    def check_direction_operator_squares(self):
        worst = 0.0
        for _ in range(200):
            op = sa.direction_operator(random_direction(self.rng))
            worst = max(worst, float(np.max(np.abs(op @ op - np.eye(2)))))
        return worst <= TOL, f"max |A^2 - I| = {worst:.2e}"

    def check_su2_unitary(self):
        worst = 0.0
        for ax in sa.PauliAxis:
            for theta in self.rng.uniform(-math.pi, math.pi, 50):
                u = sa.su2_rotation(ax, theta)
                worst = max(worst, float(np.max(np.abs(u.conj().T @ u - np.eye(2)))),
                            abs(np.linalg.det(u) - 1))
        return worst <= TOL, f"max deviation {worst:.2e}"

    def check_theta_2theta_law(self):
        worst = 0.0
        for theta in self.rng.uniform(-math.pi, math.pi, 100):
            lhs = sa.rotated_measurement(sa.PauliAxis.Y, theta)
            rhs = sa.direction_operator(sa.Direction(math.sin(2 * theta), 0.0, math.cos(2 * theta)))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst <= TOL, f"max deviation {worst:.2e}"

    # bell states
    def check_correlation_closed_forms(self):
        worst = 0.0
        for kind in bs.BellKind:
            psi = bs.bell_state(kind)
            for _ in range(1000):
                a, b = random_direction(self.rng), random_direction(self.rng)
                op = sa.tensor_op(sa.direction_operator(a), sa.direction_operator(b))
                worst = max(worst, abs(self.corr(kind, a, b) - sa.expectation(psi, op).real))
        return worst <= TOL, f"max |closed form - <psi|O|psi>| = {worst:.2e}"

    def check_joint_distribution_consistency(self):
        worst = 0.0
        for kind in bs.BellKind:
            for _ in range(200):
                a, b = random_direction(self.rng), random_direction(self.rng)
                jd = bs.joint_distribution(kind, a, b)
                worst = max(worst, abs(jd.alice_marginal - 0.5), abs(jd.bob_marginal - 0.5),
                            abs(jd.correlation - self.corr(kind, a, b)))
        return worst <= TOL, f"max deviation {worst:.2e}"

    def check_singlet_rotation_invariance(self):
        worst = 0.0
        for _ in range(200):
            a, b = random_direction(self.rng), random_direction(self.rng)
            r = random_rotation(self.rng)
            k = bs.BellKind.PSI_MINUS
            worst = max(worst, abs(self.corr(k, a, b) - self.corr(k, a.rotated(r), b.rotated(r))),
                        abs(self.corr(k, a, b) + a.dot(b)))
        return worst <= TOL, f"max deviation {worst:.2e}"

    def check_triplet_symmetry_planes(self):
        worst = 0.0
        for kind in (bs.BellKind.PSI_PLUS, bs.BellKind.PHI_MINUS, bs.BellKind.PHI_PLUS):
            plane = bs.symmetry_plane(kind)
            for al, be in self.rng.uniform(-math.pi, math.pi, (100, 2)):
                a, b = bs.in_plane_direction(plane, al), bs.in_plane_direction(plane, be)
                worst = max(worst, abs(self.corr(kind, a, b) - math.cos(al - be)))
        off = self.corr(bs.BellKind.PHI_PLUS, sa.Direction(0, 0, 1), sa.Direction(0, 1, 0))
        return worst <= TOL and abs(off) <= TOL, f"max deviation {worst:.2e}; phi+ (z, y) = {off:.2e}"

    def check_su2_invariances(self):
        worst_in, best_out = 0.0, math.inf
        for kind in bs.BellKind:
            for ax in sa.PauliAxis:
                r = bs.invariance_residual(kind, ax, 0.35)
                if ax in bs.invariant_axes(kind):
                    worst_in = max(worst_in, r)
                else:
                    best_out = min(best_out, r)
        return worst_in <= TOL and best_out >= 0.01, \
            f"invariant residual {worst_in:.2e}, smallest non-invariant {best_out:.3f}"

    def check_basis_change_phases(self):
        psi_plus = bs.bell_state(bs.BellKind.PSI_PLUS)
        x = bs.basis_change(psi_plus, sa.PauliAxis.X)
        y = bs.basis_change(psi_plus, sa.PauliAxis.Y)
        ok = sa.allclose(x, -bs.bell_state(bs.BellKind.PHI_MINUS)) and \
            sa.allclose(y, 1j * bs.bell_state(bs.BellKind.PHI_PLUS))
        return ok, "psi+ -> -phi- (x basis), i phi+ (y basis)"

    def check_joint_distribution_values(self):
        k = bs.BellKind.PHI_PLUS
        z = bs.in_plane_direction(bs.SymmetryPlane.XZ, 0.0)
        b = bs.in_plane_direction(bs.SymmetryPlane.XZ, 2 * math.pi / 3)
        ok = bs.joint_distribution(k, z, z).isclose((0.5, 0, 0, 0.5)) and \
            bs.joint_distribution(k, z, b).isclose((1 / 8, 3 / 8, 3 / 8, 1 / 8))
        return ok, "case (a) (1/2,0,0,1/2); case (b) (1/8,3/8,3/8,1/8)"

    # classical
    def check_instruction_set_enumeration(self):
        u = lhv.SetDistribution.uniform()
        ok = lhv.joint_table(u, "different").as_tuple() == (Fraction(1, 4),) * 4 and \
            lhv.joint_table(u, "same").as_tuple() == (Fraction(1, 2), 0, 0, Fraction(1, 2)) and \
            lhv.case_b_correlation(u) == 0
        for s in lhv.all_instruction_sets():
            c = lhv.case_b_correlation(lhv.SetDistribution.point(s))
            ok &= c == (Fraction(-1, 3) if s.is_two_one else 1)
        return ok, "uniform cells 1/4, two-one -1/3, RRR/GGG +1"

    def check_bell_bound(self):
        fracs = [lhv.bell_bound_check(d)[0] for d in lhv.point_masses()]
        ok = min(fracs) == Fraction(1, 3) and not lhv.satisfies_bell_bound(Fraction(1, 4))
        return ok, f"min case (b) same fraction {min(fracs)}; quantum 1/4 violates"

    def check_fact1_classical(self):
        for s, mode in itertools.product(lhv.all_instruction_sets(), lhv.CorrelationMode):
            for k in (1, 2, 3):
                a, b = lhv.evaluate(s, k, k, mode)
                if (a == b) != (mode is lhv.CorrelationMode.CORRELATED):
                    return False, f"{s} mode {mode.value} setting {k}"
        return True, "equal settings give equal (correlated) / opposite (anti) outcomes"

    # sampler and conservation
    def check_sampler_reproducible(self):
        spec = ExperimentSpec(bs.BellKind.PHI_PLUS, DevicePolicy(), 50_000, 11)
        a = run_experiment(spec)
        b = run_experiment(spec, workers=3, chunk_size=7_000)
        ok = all(np.array_equal(getattr(a, n), getattr(b, n))
                 for n in ("alice_setting", "bob_setting", "alice_outcome", "bob_outcome"))
        return ok, "identical logs for 1 and 3 workers"

    def check_device_facts(self):
        n = 300_000
        log = run_experiment(ExperimentSpec(bs.BellKind.PHI_PLUS, DevicePolicy(), n, 5))
        case_a, case_b = log.subset(log.case_a()), log.subset(log.case_b())
        nb = len(case_b)
        same = case_b.same_fraction()
        tol = cons.N_SIGMA * math.sqrt(0.25 * 0.75 / nb)
        ok = case_a.same_fraction() == 1.0 and abs(same - 0.25) <= tol
        return ok, f"case (a) agreement {case_a.same_fraction():.6f}, case (b) {same:.5f}"

    def check_average_conservation(self):
        details = []
        ok = True
        for kind in (bs.BellKind.PHI_PLUS, bs.BellKind.PSI_MINUS):
            theta = math.pi / 3
            log = run_experiment(ExperimentSpec(kind, FixedPolicy(0.0, theta), 200_000, 3))
            v = cons.conservation_test(log, kind, theta)
            ok &= v.passed and abs(v.reconstructed - v.direct) <= TOL
            details.append(f"{kind.value}: mean+ {v.report.ba_plus:.4f}")
        return ok, "; ".join(details)

    def check_eight_trial_ensemble(self):
        e = cons.make_ensemble(cons.EnsembleSpec(math.pi / 3, 8))
        return e == [1] * 6 + [-1] * 2, f"{e}"

    def check_elliptope(self):
        v_q, in_q = cons.elliptope_check(cons.CorrelationTriple(-0.5, -0.5, -0.5))
        v_0, in_0 = cons.elliptope_check(cons.CorrelationTriple(0, 0, 0))
        v_c, in_c = cons.elliptope_check(cons.CorrelationTriple(-1, -1, -1))
        worst = 0.0
        for t in self.rng.uniform(-1, 1, (1000, 3)):
            tr = cons.CorrelationTriple(*t)
            worst = max(worst, abs(cons.elliptope_value(tr) - np.linalg.det(tr.matrix())))
        ok = abs(v_q) <= TOL and in_q and v_0 == 1 and in_0 and v_c == -4 and not in_c and worst <= TOL
        return ok, f"quantum {v_q:.1e}, origin {v_0}, corner {v_c}, det deviation {worst:.1e}"


def run_checks(mutation: str | None = None) -> list[CheckResult]:
    return Suite(mutation).run()
