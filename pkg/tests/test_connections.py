from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import dblquad

from casmon import connections as cn
from casmon import diagrams as dg
from casmon import liealg as la

NU = 0.05
HBAR = np.pi * 1j * NU


def _commutator(a, b):
    return a @ b - b @ a


def test_casimir_connection_on_sl2_has_single_term():
    V = la.sl2_irrep(2)
    conn = cn.build_connection("Casimir_kappa", V, nu=NU)
    assert len(conn.terms) == 1
    assert np.allclose(conn.terms[0].M, NU / 2 * la.K_B(V, [0]))


def test_dynamical_kz_terms(V1):
    conn = cn.build_connection("DynamicalKZ_n", [V1, V1], nu=NU)
    labels = [t.label for t in conn.terms]
    assert labels[0] == "Omega_12" and len(labels) == 2
    W = la.tensor([V1, V1])
    assert np.allclose(conn.terms[0].M, NU * la.omega(W))
    assert np.allclose(conn.terms[1].M, NU / 2 * la.K_B(W, [0]))


def test_decoupled_dynamical_system_has_no_exact_term(V1):
    conn = cn.build_connection("DynamicalKZ_n", [V1, V1], nu=NU, t=0)
    x = np.array([0.3, -0.4, 1.1])
    assert all(np.allclose(c, 0) for c in conn.exact_components(x))


@pytest.mark.parametrize("kind", ["KZ_n", "DynamicalKZ_n", "Casimir_kappa", "Casimir_C"])
@pytest.mark.parametrize("rep", [la.sl2_irrep(1), la.sln_defining(3)])
def test_flatness_of_all_kinds(kind, rep):
    reps = [rep] * (3 if kind == "KZ_n" else 2)
    conn = cn.build_connection(kind, reps, nu=0.1 + 0.02j)
    report = cn.verify_flatness(conn, sample_count=10)
    assert report.passed, report.failures()


def test_corrupted_coefficient_is_detected(V1):
    W = la.tensor([V1, V1, V1])
    bad = W.leg(0, V1.e[0]) @ W.leg(1, V1.e[0])
    conn = cn.build_connection("KZ_n", [V1, V1, V1], nu=0.1, corrupt=bad)
    report = cn.verify_flatness(conn, sample_count=10)
    assert report["curvature"].residual > 1e-3
    assert not report.passed


def test_dynamical_corruption_is_detected(V1):
    W = la.tensor([V1, V1])
    bad = W.leg(0, V1.e[0]) @ W.leg(1, V1.e[0])
    conn = cn.build_connection("DynamicalKZ_n", [V1, V1], nu=0.1, corrupt=bad)
    assert not cn.verify_flatness(conn, sample_count=10).passed


def test_associator_second_order_coefficient(V1):
    W = la.tensor([V1, V1, V1])
    O12, O23 = la.omega(W, (0, 1)), la.omega(W, (1, 2))
    Phi = cn.kz_associator([V1, V1, V1], order=3)
    bracket = _commutator(O12, O23)
    c2 = np.vdot(bracket, Phi[2]) / np.vdot(bracket, bracket)
    assert np.max(np.abs(Phi[2] - c2 * bracket)) < 1e-12
    # in nu units the coefficient is the iterated integral int_{0<s<t<1} ds/(1-s) dt/t = zeta(2)
    zeta2, _ = dblquad(lambda s, t: 1 / ((1 - s) * t), 0, 1, 0, lambda t: t)
    assert np.isclose(abs(c2) * np.pi ** 2, zeta2, atol=1e-8)
    # frozen regression value for the orientation Phi = G_1^{-1} G_0
    assert np.isclose(c2, 1 / 6, atol=1e-12)


def test_associator_starts_at_order_two(V1):
    Phi = cn.kz_associator([V1, V1, V1], order=3)
    assert np.allclose(Phi[0], np.eye(8))
    assert np.max(np.abs(Phi[1])) < 1e-12


def test_associator_with_trivial_slot_is_identity(V1):
    triv = la.trivial(V1.rs)
    for reps in ([V1, triv, V1], [triv, V1, V1], [V1, V1, triv]):
        Phi = cn.kz_associator(reps, order=4)
        assert Phi.max_abs_diff(np.eye(Phi.shape[0])) < 1e-10


def test_numeric_and_series_associator_agree(V1):
    series = cn.kz_associator([V1, V1, V1], order=10)
    numeric = cn.kz_associator([V1, V1, V1], nu=NU)
    assert np.allclose(series.evaluate(HBAR), numeric, atol=1e-12)


def test_associator_report_on_sl2(V1):
    report = cn.associator_report(V1, order=3)
    assert report.passed, report.failures()


def test_rank_one_dcp_solution_is_a_power():
    V = la.sl2_irrep(2)
    cd = cn.casimir_data(V, nu=NU)
    data = dg.enumerate_nested_sets(dg.Diagram.path(1))
    fam = dg.default_adapted_family(V.rs, data)
    psi = cn.dcp_solution(data.mns[0], fam, cd)(np.array([2.0 + 0.5j]))
    K = np.diag(la.K_B(V, [0])).real
    assert np.allclose(psi, np.diag(np.exp(NU / 2 * K * np.log(2.0 + 0.5j))), atol=1e-13)


def test_dcp_solution_for_trivial_rep_is_one():
    rs = la.root_system("A2")
    cd = cn.casimir_data(la.trivial(rs), nu=NU)
    data = dg.enumerate_nested_sets(dg.Diagram.from_root_system(rs))
    fam = dg.default_adapted_family(rs, data)
    for F in data.mns:
        assert np.allclose(cn.dcp_solution(F, fam, cd)(cn.default_base_point(rs)), 1)


def test_dcp_associators_on_a2(A2V):
    rs = A2V.rs
    data = dg.enumerate_nested_sets(dg.Diagram.from_root_system(rs))
    fam = dg.default_adapted_family(rs, data)
    cd = cn.casimir_data(A2V, nu=NU)
    F, G = data.mns
    assert np.allclose(cn.dcp_associator(F, F, fam, cd), np.eye(3))
    X = cn.dcp_associator(G, F, fam, cd)
    assert la.weight_zero_residual(A2V, X) < 1e-10
    assert np.allclose(cn.dcp_associator(F, G, fam, cd) @ X, np.eye(3), atol=1e-12)


def test_dcp_series_mode_matches_numeric(A2V):
    rs = A2V.rs
    data = dg.enumerate_nested_sets(dg.Diagram.from_root_system(rs))
    fam = dg.default_adapted_family(rs, data)
    F, G = data.mns
    numeric = cn.dcp_associator(G, F, fam, cn.casimir_data(A2V, nu=NU))
    series = cn.dcp_associator(G, F, fam, cn.casimir_data(A2V, order=12))
    assert np.allclose(series.evaluate(HBAR), numeric, atol=1e-12)


def test_dcp_report_on_a2(A2V):
    report = cn.dcp_report(A2V)
    assert report.passed, report.failures()
    assert report["support_locality"].params["pairs"] == 2


def test_rank_one_generator_spectrum_c_variant(V1):
    S = cn.braid_monodromy(V1, [1], nu=NU, variant="C")
    expected = np.array([1j, -1j]) * np.exp(3 * HBAR / 4)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(S)), np.sort_complex(expected), atol=1e-10)


def test_trivial_word_is_identity(A2V):
    assert np.allclose(cn.braid_monodromy(A2V, [], nu=NU), np.eye(3))


def test_inverse_letters_cancel(A2V):
    assert np.allclose(cn.braid_monodromy(A2V, [1, -1, 2, -2], nu=NU), np.eye(3), atol=1e-11)


def test_braid_relation_on_a2(A2V):
    a = cn.braid_monodromy(A2V, [1, 2, 1], nu=NU)
    b = cn.braid_monodromy(A2V, [2, 1, 2], nu=NU)
    assert np.max(np.abs(a - b)) < 1e-7


def test_monodromy_report_on_a2(A2V):
    for variant in ("kappa", "C"):
        report = cn.monodromy_report(A2V, variant=variant)
        assert report.passed, report.failures()
