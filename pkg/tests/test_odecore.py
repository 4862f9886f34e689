from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.integrate import quad_vec

from casmon.errors import DivergentTail, NoSolution, PoleTooClose, Resonant
from casmon.odecore import (
    HbarSeries,
    PathInC,
    RationalODE,
    asymptotic_tail,
    asymptotic_tail_lambda,
    hbar_series,
    laplace_solve,
    nu_series,
    regular_singular_solution,
    stokes_series_solve,
    transport,
)

RNG = np.random.default_rng(7)
A = RNG.normal(size=(3, 3)) + 1j * RNG.normal(size=(3, 3))
B = RNG.normal(size=(3, 3))


def _series(order=4):
    c = RNG.normal(size=(order + 1, 3, 3)) + 0j
    c[0] = np.eye(3) + 0.1 * c[0]
    return HbarSeries(c)


def test_series_inverse():
    X = _series()
    assert (X @ X.inv()).max_abs_diff(HbarSeries.identity(4, 3)) < 1e-12


def test_series_exp_log_round_trip():
    X = HbarSeries.monomial(A, 1, 5) + HbarSeries.monomial(B, 2, 5)
    assert X.exp().log().max_abs_diff(X) < 1e-12


def test_series_evaluate_matches_matrix_exponential_up_to_truncation():
    X = HbarSeries.monomial(A, 1, 12).exp()
    assert np.allclose(X.evaluate(1e-2), sla.expm(1e-2 * A), atol=1e-14)


def test_lift_is_multiplicative():
    X, Y = _series(), _series()
    assert np.allclose((X @ Y).lift(), X.lift() @ Y.lift())
    assert HbarSeries.from_lift(X.lift(), 4).max_abs_diff(X) == 0


def test_kron_of_series():
    X, Y = _series(2), _series(2)
    K = X.kron(Y)
    assert np.allclose(K[1], np.kron(X[0], Y[1]) + np.kron(X[1], Y[0]))


def test_nu_series_places_coupling_at_order_one():
    S = nu_series(A, 3)
    assert np.allclose(S[1], A / (np.pi * 1j))
    assert np.allclose(hbar_series(A, 3)[1], A)


def test_exp_requires_vanishing_constant_term():
    with pytest.raises(ValueError):
        HbarSeries.constant(A, 2).exp()


def test_abelian_monodromy():
    a = np.diag([0.3, -0.2 + 0.1j])
    ode = RationalODE(poles=[(0.0, a)])
    T = transport(ode, PathInC.circle(0.0, 1.0))
    assert np.allclose(T, sla.expm(2j * np.pi * a), atol=1e-12)


def test_constant_coefficient_transport_is_exponential():
    ode = RationalODE(poly=[A])
    T = transport(ode, PathInC.segment(0.0, 0.7 + 0.2j))
    assert np.allclose(T, sla.expm((0.7 + 0.2j) * A), atol=1e-12)


def test_transport_reversal():
    ode = RationalODE(poles=[(0.0, A), (1.0, B)])
    path = PathInC.polyline([0.5 + 0.5j, 0.5 - 0.5j, 2.0])
    T = transport(ode, path)
    assert np.allclose(T @ transport(ode, path.reversed()), np.eye(3), atol=1e-11)


def test_transport_refuses_paths_through_poles():
    ode = RationalODE(poles=[(0.0, A)])
    with pytest.raises(PoleTooClose):
        transport(ode, PathInC.segment(-1.0, 1.0))


def test_regular_singular_solution_solves_ode():
    ode = RationalODE(poles=[(0.0, 0.3 * A), (1.0, 0.2 * B)])
    sol = regular_singular_solution(ode, 0.0)
    z, h = 0.2 + 0.1j, 1e-3
    dpsi = (sol.psi(z - 2 * h) - 8 * sol.psi(z - h) + 8 * sol.psi(z + h) - sol.psi(z + 2 * h)) / (12 * h)
    rhs = ode.evaluate(z) @ sol.psi(z)
    assert np.max(np.abs(dpsi - rhs)) < 1e-8
    assert np.allclose(sol.H(0.0), np.eye(3))


def test_regular_singular_solution_matches_transport():
    ode = RationalODE(poles=[(0.0, 0.3 * A), (1.0, 0.2 * B)])
    sol = regular_singular_solution(ode, 0.0)
    a, b = 0.2, 0.3 + 0.2j
    T = transport(ode, PathInC.segment(a, b))
    assert np.allclose(sol.psi(b), T @ sol.psi(a), atol=1e-11)


def test_resonant_residue_detected():
    ode = RationalODE(poles=[(0.0, np.diag([0.0, 1.0])), (1.0, np.ones((2, 2)))])
    with pytest.raises(Resonant):
        regular_singular_solution(ode, 0.0)


def test_series_valued_transport_matches_coefficients():
    order = 3
    ode = RationalODE(poly=[HbarSeries.monomial(A, 1, order)])
    T = transport(ode, PathInC.segment(0.0, 0.5))
    assert T.max_abs_diff(HbarSeries.monomial(0.5 * A, 1, order).exp()) < 1e-12


def test_no_solution_when_k0_nonzero_and_lambda_zero():
    with pytest.raises(NoSolution):
        laplace_solve(0.0, lambda w: np.array(1.0), [np.array(1.0)])


def test_inadmissible_contour_angle_rejected():
    with pytest.raises(DivergentTail):
        laplace_solve(2.0, lambda w: np.array(1.0), [np.array(1.0)], theta=3 * np.pi / 4)


def test_laplace_solution_satisfies_ode():
    lam = 2.0
    k = lambda w: np.array(1.0 / (1 + 1 / w))
    h = laplace_solve(lam, k, [np.array(1.0)])
    z, d = 3.0 + 2.0j, 1e-3
    dh = (h(z - 2 * d) - 8 * h(z - d) + 8 * h(z + d) - h(z + 2 * d)) / (12 * d)
    assert abs(dh - (lam * h(z) + k(z) / z)) < 1e-9


def test_laplace_solution_decays_in_half_plane():
    h = laplace_solve(2.0, lambda w: np.array(1.0), [np.array(1.0)])
    assert abs(h(200j)) < 1e-2


def test_laplace_solution_rejects_points_inside_disk():
    h = laplace_solve(2.0, lambda w: np.array(1.0), [np.array(1.0)])
    with pytest.raises(ValueError):
        h(0.5j)


def test_asymptotic_tail_for_constant_k():
    # (n-1)! (-lambda)^{-n}
    tail = asymptotic_tail(2.0, [np.array(1.0)], 4)
    assert np.allclose(tail, [-0.5, 0.25, -0.25, 0.375])


def test_asymptotic_tail_with_subleading_k():
    tail = asymptotic_tail(1.0, [np.array(0.0), np.array(3.0)], 2)
    assert np.isclose(tail[0], 0.0)
    assert np.isclose(tail[1], -3.0)


def test_asymptotic_tail_lambda_zero_case():
    tail = asymptotic_tail(0.0, [np.array(0.0), np.array(2.0), np.array(6.0)], 2)
    assert np.allclose(tail, [-2.0, -3.0])


def test_asymptotic_in_lambda_matches_quadrature():
    z = 2.0 + 1.0j
    lam = 40.0
    h = laplace_solve(lam, lambda w: np.array(1.0), [np.array(1.0)])
    a = asymptotic_tail_lambda([np.array(1.0)], z, 3)
    approx = sum(a[m - 1] * lam ** (-m) for m in range(1, 4))
    assert abs(h(z) - approx) < 10 * lam ** -4


def test_quadrature_against_direct_integral():
    # for k = 1 and lam > 0 the solution is -int_0^inf e^{-lam t}/(z+t) dt along the real axis
    lam, z = 2.0, 3.0 + 1.0j
    h = laplace_solve(lam, lambda w: np.array(1.0), [np.array(1.0)])
    ref, _ = quad_vec(lambda t: np.exp(-lam * t) / (z + t), 0, np.inf, epsabs=1e-14)
    assert abs(h(z) + ref) < 1e-11


def test_stokes_series_solution_tends_to_one_and_solves_ode():
    order = 2
    N = np.diag([0.5, -0.5]) + 0j
    P = [(0.3j, HbarSeries.monomial(np.array([[0.0, 1.0], [0.5, 0.0]]), 1, order))]
    sol = stokes_series_solve(N, P, [], order)
    assert sol(60j).max_abs_diff(HbarSeries.identity(order, 2)) < 0.05
    assert np.max(sol.residual(2.0 + 1j)) < 1e-8
