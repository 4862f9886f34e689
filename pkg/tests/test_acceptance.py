"""The ten acceptance criteria at their stated tolerances; each prints one PASS/FAIL line."""

from __future__ import annotations

import numpy as np
import pytest

from casmon import connections as cn
from casmon import fusion as fu
from casmon import liealg as la
from casmon import qgroup as qg
from casmon.errors import NoSolution
from casmon.odecore import asymptotic_tail, laplace_solve
from casmon.report import VerificationReport


def rows(report: VerificationReport, prefix: str = "") -> list[tuple[str, float, float]]:
    return [(prefix + c.identity, c.residual, c.tolerance) for c in report.checks]


def test_criterion_01_flatness(verdict):
    checks = []
    for name, V in (("sl2", la.sl2_irrep(1)), ("A2", la.sln_defining(3))):
        conn = cn.build_connection("DynamicalKZ_n", [V, V], nu=0.1 + 0.03j)
        report = cn.verify_flatness(conn, sample_count=50, tol=1e-10, structural_tol=1e-12)
        assert report["curvature"].params["samples"] == 50
        checks += rows(report, f"{name}:")
    verdict("1 dynamical KZ flatness", checks)


def test_criterion_02_kz_associator(verdict):
    report = cn.associator_report(la.sl2_irrep(1), order=4, tol=1e-8)
    for name in ("pentagon", "hexagon_R12", "hexagon_R23", "eps_first", "eps_middle", "eps_last",
                 "order1_vanishes"):
        assert name in report.names()
    assert report["order1_vanishes"].tolerance <= 1e-10
    verdict("2 KZ associator", rows(report))


def test_criterion_03_dcp_structure(verdict):
    checks = []
    for name, V in (("A2", la.sln_defining(3)), ("A3", la.sln_defining(4))):
        report = cn.dcp_report(V, nu=0.1, tol=1e-7, support_tol=1e-8)
        for identity in ("transitivity", "forgetfulness", "support_weight_zero", "support_central"):
            assert identity in report.names()
        checks += rows(report, f"{name}:")
    verdict("3 DCP structure", checks)


def test_criterion_04_basic_irregular_ode(verdict):
    checks = []
    lam = 2.0
    k = lambda w: np.array(1.0 + 0j)
    h1 = laplace_solve(lam, k, [np.array(1.0)], theta=np.pi / 4)
    h2 = laplace_solve(lam, k, [np.array(1.0)], theta=np.pi / 3)
    gap = max(abs(h1(z) - h2(z)) for z in (3j, 5 + 4j, -2 + 6j))
    checks.append(("cross_contour_uniqueness", gap, 1e-10))
    try:
        laplace_solve(0.0, k, [np.array(1.0)])
        raised = False
    except NoSolution:
        raised = True
    checks.append(("no_solution_raised", 0.0 if raised else 1.0, 0.5))
    tail = asymptotic_tail(lam, [np.array(1.0)], 6)
    for n in (2, 3, 4):
        errs = []
        for r in (20.0, 40.0, 80.0):
            z = 1j * r
            partial = sum(tail[m - 1] / z ** m for m in range(1, n + 1))
            errs.append(abs(h1(z) - partial))
        slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        # truncating after n terms leaves O(|z|^-(n+1))
        checks.append((f"decay_order_n{n}", float(np.max(np.abs(slopes - (n + 1)))), 0.05))
    verdict("4 basic irregular ODE", checks)


def test_criterion_05_fusion_operator(verdict):
    checks = []
    V = la.sl2_irrep(1)
    for sign in (1, -1):
        c = fu.point_from_root_values(V.rs, [0.8j])
        report = fu.fusion_report([V, V], c, sign, 3, recursive=(sign == 1), tol=1e-9, sym_tol=1e-8, limit_tol=1e-6)
        checks += rows(report, f"sl2{sign:+d}:")
    A2 = la.sln_defining(3)
    report = fu.fusion_report([A2, A2], fu.point_from_root_values(A2.rs, [0.7j, 1.1j]), 1, 3)
    checks += rows(report, "A2:")
    names = [n for n, _, _ in checks]
    assert "sl2+1:recursive_limit_first" in names and "sl2+1:recursive_limit_last" in names
    verdict("5 fusion operator", checks)


def test_criterion_06_differential_twist(verdict):
    checks = []
    cases = (("sl2", la.sl2_irrep(1), [0.8j]), ("A2", la.sln_defining(3), [1j, 1.7j]))
    for name, V, y in cases:
        for sign in (1, -1):
            report = fu.twist_report(V, y, sign, 3, (1.0, 2.0), tol=1e-8, phi_tol=1e-7)
            checks += rows(report, f"{name}{sign:+d}:")
    names = {n.split(":")[1] for n, _, _ in checks}
    assert {"z_independence", "counit_left", "counit_right", "order_zero", "alt2", "pde",
            "hochschild_closed", "kills_phi_order_3"} <= names
    verdict("6 differential twist", checks)


def test_criterion_07_centraliser_constant(verdict):
    checks = []
    for name, V in (("sl2", la.sl2_irrep(1)), ("A2", la.sln_defining(3))):
        for sign in (1, -1):
            report = fu.centraliser_report(V, sign, 3, tol=1e-6, inv_tol=1e-7, phi_tol=1e-7)
            checks += rows(report, f"{name}{sign:+d}:")
    verdict("7 centraliser constant", checks)


@pytest.mark.parametrize("sign", [1, -1])
def test_criterion_08_qcqtqba_assembly(verdict, sign):
    report = fu.assemble_qcqtqba(la.sln_defining(3), 2, sign, tol=1e-6)
    names = report.names()
    for prefix in ("twist_equation_", "dcp_compatibility", "coproduct_", "monodromy_braid_", "kills_phi_"):
        assert any(n.startswith(prefix) for n in names), prefix
    verdict(f"8 qcqtqba assembly (sign {sign:+d})", rows(report))


def test_criterion_09_quantum_side(verdict):
    report = qg.quantum_report(la.sln_defining(3), hbars=(0.05, 0.1, 0.1 + 0.05j), tol=1e-10)
    verdict("9 quantum side", rows(report))


def test_criterion_10_monodromy_theorem(verdict):
    checks = []
    for m in range(1, 5):
        for variant in ("kappa", "C"):
            report = qg.monodromy_equivalence(la.sl2_irrep(m), [[1]], order=3, variant=variant,
                                              nus=(0.05, 0.1 + 0.05j), spectrum_tol=1e-6)
            checks += [r for r in rows(report, f"V{m}:") if "spectrum" in r[0]]
    words = [[1], [2], [1, 2], [1, 2, 1]]
    for variant in ("kappa", "C"):
        report = qg.monodromy_equivalence(la.sln_defining(3), words, order=3, variant=variant,
                                          nus=(0.05, 0.1 + 0.05j), tol=1e-5)
        checks += rows(report, "A2:")
    verdict("10 monodromy theorem", checks)
