from __future__ import annotations

import numpy as np
import pytest

from casmon import connections as cn
from casmon import liealg as la
from casmon import qgroup as qg
from casmon.errors import RelationViolation

HBARS = [0.05, 0.1, 0.1 + 0.05j]


def test_q_integers():
    q = np.exp(0.3)
    assert np.isclose(qg.qint(2, q), q + 1 / q)
    assert np.isclose(qg.qint(3, 1.0), 3)
    assert np.isclose(qg.qfactorial(3, q), qg.qint(2, q) * qg.qint(3, q))


def test_spin_half_keeps_classical_matrices(V1):
    Q = qg.q_deform(V1, 0.1)
    assert np.allclose(Q.E[0], V1.e[0]) and np.allclose(Q.F[0], V1.f[0])
    q = np.exp(0.1)
    assert np.allclose(Q.K(0), np.diag([q, 1 / q]))
    assert max(qg.q_relation_residuals(Q).values()) < 1e-14


@pytest.mark.parametrize("hbar", HBARS)
@pytest.mark.parametrize("m", [2, 3, 4])
def test_deformed_sl2_irreps_satisfy_relations(m, hbar):
    Q = qg.q_deform(la.sl2_irrep(m), hbar)
    assert max(qg.q_relation_residuals(Q).values()) < 1e-12


def test_classical_limit():
    V = la.sl2_irrep(3)
    Q = qg.q_deform(V, 0.0)
    assert np.allclose(Q.E[0], V.e[0]) and np.allclose(Q.F[0], V.f[0])


def test_adjoint_of_sl3_has_no_builtin_deformation(A2V):
    W = la.Representation(A2V.rs, tuple(2 * e for e in A2V.e), A2V.f, A2V.h)
    with pytest.raises(RelationViolation):
        qg.q_deform(W, 0.1)


def test_lusztig_operator_on_spin_half(V1):
    hbar = 0.1 + 0.05j
    S = qg.quantum_weyl(0, qg.q_deform(V1, hbar))
    # basis (v+, v-): v+ -> -q v-, v- -> v+
    assert np.allclose(S, np.array([[0, 1], [-np.exp(hbar), 0]]))


@pytest.mark.parametrize("variant", ["kappa", "C"])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_squares_lemma(m, variant):
    Q = qg.q_deform(la.sl2_irrep(m), 0.1 + 0.05j)
    assert qg.squares_residual(0, Q, variant) < 1e-10


def test_variants_differ_by_q_to_h_squared_over_four():
    Q = qg.q_deform(la.sl2_irrep(2), 0.1)
    H = np.diag(Q.H[0]).real
    ratio = np.diag(np.exp(0.1 * H ** 2 / 4))
    assert np.allclose(qg.quantum_weyl(0, Q, "C"), qg.quantum_weyl(0, Q, "kappa") @ ratio)


@pytest.mark.parametrize("hbar", HBARS)
def test_braid_relation_on_sl3(A2V, hbar):
    Q = qg.q_deform(A2V, hbar)
    assert np.max(np.abs(qg.quantum_word(Q, [1, 2, 1]) - qg.quantum_word(Q, [2, 1, 2]))) < 1e-10


def test_R_matrix_is_identity_at_hbar_zero(V1):
    Q = qg.q_deform(V1, 0.0)
    assert np.allclose(qg.sl2_R(0, Q, Q), np.eye(4))


@pytest.mark.parametrize("hbar", HBARS)
def test_R_matrix_intertwines_coproducts(V1, hbar):
    Q = qg.q_deform(V1, hbar)
    assert qg.intertwiner_residual(0, Q, Q) < 1e-10


@pytest.mark.parametrize("variant", ["kappa", "C"])
def test_coproduct_identity(V1, variant):
    Q = qg.q_deform(V1, 0.1 + 0.05j)
    assert qg.coproduct_identity_residual(0, Q, Q, variant) < 1e-10


def test_quantum_report_on_sl3(A2V):
    report = qg.quantum_report(A2V)
    assert report.passed, report.failures()


def test_rank_one_spectra_match_closed_form(V1):
    hbar = np.pi * 1j * 0.05
    S = qg.quantum_weyl(0, qg.q_deform(V1, hbar), "C")
    expected = np.array([1j, -1j]) * np.exp(3 * hbar / 4)
    assert qg.spectrum_distance(np.linalg.eigvals(S), expected) < 1e-10
    T = cn.braid_monodromy(V1, [1], nu=0.05, variant="C")
    assert qg.spectrum_distance(np.linalg.eigvals(T), expected) < 1e-10


def test_cauchy_coefficients_of_exponential():
    c = qg.cauchy_coefficients(np.exp, 4, 0.5)
    assert np.allclose(c, [1, 1, 1 / 2, 1 / 6, 1 / 24], atol=1e-12)


def test_spectrum_distance_ignores_order():
    a = np.array([1.0, 2.0, 3.0j])
    assert qg.spectrum_distance(a, a[::-1]) == 0


def test_default_words():
    assert qg.default_words(1) == [[1], [1, 1]]
    assert qg.default_words(2) == [[1], [2], [1, 1], [2, 2], [1, 2], [1, 2, 1]]


@pytest.mark.parametrize("variant", ["kappa", "C"])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_rank_one_equivalence(m, variant):
    report = qg.monodromy_equivalence(la.sl2_irrep(m), [[1], [1, 1]], order=3, variant=variant)
    assert report.passed, report.failures()


def test_weight_zero_intertwiner_recovers_conjugation(V1):
    rng = np.random.default_rng(1)
    A = [rng.normal(size=(2, 2)) for _ in range(2)]
    J = np.diag([2.0, 3.0])
    B = [J @ a @ np.linalg.inv(J) for a in A]
    Jhat, rel = qg.weight_zero_intertwiner(A, B, V1)
    assert rel < 1e-12
    Jhat = Jhat / Jhat[0, 0] * 2
    assert np.allclose(Jhat, J)
