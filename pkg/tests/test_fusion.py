from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.integrate import quad_vec

from casmon import connections as cn
from casmon import diagrams as dg
from casmon import fusion as fu
from casmon import liealg as la
from casmon.errors import InsideDisk, ResonantWeight, RouteDisagreement, UnsupportedN
from casmon.odecore import HbarSeries


@pytest.fixture(scope="module")
def sl2():
    V = la.sl2_irrep(1)
    return V, la.tensor([V, V]), fu.point_from_root_values(V.rs, [0.8j])


@pytest.mark.parametrize("sign", [1, -1])
def test_fusion_operator_starts_at_one(sl2, sign):
    V, W, c = sl2
    H = fu.fusion_solve([V, V], [1.0, 0.0], c, sign, 2).H()
    assert np.allclose(H[0], np.eye(4), atol=1e-12)
    assert max(la.weight_zero_residual(W, M) for M in H.coeffs) < 1e-10


def test_fusion_rejects_wall_points(sl2):
    V, _, _ = sl2
    with pytest.raises(ResonantWeight):
        fu.fusion_solve([V, V], [1.0, 0.0], [0.0], 1, 2)


def test_fusion_rejects_four_points(sl2):
    V, _, c = sl2
    with pytest.raises(UnsupportedN):
        fu.fusion_solve([V] * 4, [3.0, 2.0, 1.0, 0.0], c, 1, 1)


def test_fusion_report_on_a2(A2V):
    c = fu.point_from_root_values(A2V.rs, [0.7j, 1.1j])
    report = fu.fusion_report([A2V, A2V], c, 1, 2)
    assert report.passed, report.failures()


def test_upsilon0_at_mu_zero_is_a_power(sl2):
    _, W, _ = sl2
    up = fu.Upsilon0(W, np.zeros(1), 1, 3, radius=1.0)
    z = 0.6
    expected = HbarSeries.monomial(la.omega(W), 1, 3).map(lambda m: m * np.log(z) / (np.pi * 1j)).exp()
    assert up.M(z).max_abs_diff(expected) < 1e-13
    assert up.H0(z).max_abs_diff(HbarSeries.identity(3, 4)) < 1e-13


@pytest.mark.parametrize("sign", [1, -1])
def test_upsilon0_first_order_against_quadrature(sl2, sign):
    _, W, c = sl2
    z = 0.7 * sign
    up = fu.Upsilon0(W, c, sign, 2, radius=1.25 * abs(z))
    mu, Om = up.mu1, la.omega(W)

    def integrand(t):
        if t == 0:
            return np.zeros_like(Om)
        return (sla.expm(-t * mu) @ Om @ sla.expm(t * mu) - Om) / t

    K1, _ = quad_vec(integrand, 0, z, epsabs=1e-14)
    expected = sla.expm(z * mu) @ (K1 + Om * np.log(sign * z)) / (np.pi * 1j)
    assert np.max(np.abs(up.M(z)[1] - expected)) < 1e-12


def test_upsilon0_with_trivial_slot_is_one(sl2):
    V, _, c = sl2
    W = la.tensor([la.trivial(V.rs), V])
    up = fu.Upsilon0(W, c, 1, 3, radius=1.0)
    assert up.M(0.5).max_abs_diff(HbarSeries.identity(3, 2)) < 1e-14


@pytest.mark.parametrize("sign", [1, -1])
def test_twist_is_independent_of_probe(sl2, sign):
    V, _, c = sl2
    dt = fu.differential_twist([V, V], c, sign, 2, (1.0, 2.0))
    assert dt.probes == (sign * 1.0, sign * 2.0)
    assert dt.z_residual < 1e-8


def test_twist_probe_must_match_sign(sl2):
    V, _, c = sl2
    with pytest.raises(ValueError):
        fu.twist_at([V, V], c, 1, 1, -1.0)


def test_twist_order_one_antisymmetric_part_is_r(sl2):
    V, _, c = sl2
    F = fu.twist_at([V, V], c, 1, 1, 1.0)
    P = la.leg_permutation([2, 2], [1, 0])
    r = np.kron(V.e[0], V.f[0])
    alt = lambda M: M - P @ M @ P.T
    assert np.max(np.abs(alt(F[1]) - alt(r))) < 1e-8


@pytest.mark.parametrize("sign", [1, -1])
def test_twist_with_trivial_factor_is_one(sl2, sign):
    V, _, c = sl2
    one = la.trivial(V.rs)
    for reps in ([one, V], [V, one]):
        assert fu.twist_at(reps, c, sign, 3, sign * 1.0).max_abs_diff(np.eye(2)) < 1e-10


def test_twist_report_on_sl2(sl2):
    report = fu.twist_report(sl2[0], [0.8j], 1, 2)
    assert report.passed, report.failures()


@pytest.mark.parametrize("sign", [1, -1])
def test_bracketing_limits(sl2, sign):
    V, W, c = sl2
    order = 2
    x = [1.0, 0.0, -1.0]
    left = fu.rlim("((12)3)", [V] * 3, c, x, sign, order)
    right = fu.rlim("(1(23))", [V] * 3, c, x, sign, order)
    Phi = cn.kz_associator([V] * 3, order=order)
    assert right.max_abs_diff(Phi @ left) < 1e-7
    F = fu.twist_at([V, V], c, sign, order, sign * 1.0)
    I = np.eye(2)
    assert left.max_abs_diff(fu.twist_at([W, V], c, sign, order, sign * 1.0) @ F.kron(I)) < 1e-7
    assert right.max_abs_diff(fu.twist_at([V, W], c, sign, order, sign * 1.0) @ F.rkron(I)) < 1e-7


def test_same_bracketing_ratio_is_identity(sl2):
    V, _, c = sl2
    a = fu.rlim("((12)3)", [V] * 3, c, [1.0, 0.0, -1.0], 1, 2)
    b = fu.rlim("((12)3)", [V] * 3, c, [2.0, 0.5, -1.0], 1, 2)
    assert (b @ a.inv()).max_abs_diff(HbarSeries.identity(2, 8)) < 1e-10


def test_bracketing_needs_centred_configuration(sl2):
    V, _, c = sl2
    with pytest.raises(ValueError):
        fu.bracketing_solution("((12)3)", [V] * 3, c, [2.0, 1.0, 0.0], 1, 1)


def test_extrapolation_is_exact_on_polynomials():
    hs = [0.5, 0.25, 0.125, 0.0625]
    vals = [HbarSeries(np.array([[[3 + 2 * h - h * h]]])) for h in hs]
    limit, err = fu.extrapolate_to_zero(hs, vals)
    assert abs(limit[0][0, 0] - 3) < 1e-12
    assert err < 1e-12


def test_upsilon_infinity_rejects_points_in_disk(A2V):
    with pytest.raises(InsideDisk):
        fu.upsilon_infinity(A2V, 0, [0.1j, 1.0j], 1)


def test_upsilon_infinity_report_on_a2(A2V):
    y = fu.default_levi_point(A2V.rs, 0)
    report = fu.upsilon_infinity_report(A2V, 0, y, 2, dynamical=False)
    assert report.passed, report.failures()
    assert "factorisation" in report.names()


@pytest.mark.parametrize("sign", [1, -1])
def test_centraliser_routes_agree_on_sl2(sl2, sign):
    V = sl2[0]
    C = {route: fu.centraliser_constant([V, V], 0, sign, 2, route) for route in fu.ROUTES}
    assert C["asymptotic"].max_abs_diff(C["nabla0"]) < 1e-6
    assert C["recurrence"].max_abs_diff(C["nabla0"]) < 1e-6


def test_route_disagreement_is_raised(sl2, monkeypatch):
    V = sl2[0]
    original = fu.centraliser_nabla0
    monkeypatch.setattr(fu, "centraliser_nabla0", lambda *a, **k: original(*a, **k) * 1.01)
    with pytest.raises(RouteDisagreement):
        fu.centraliser_constant([V, V], 0, 1, 1, "nabla0", cross_check="asymptotic")


def test_unknown_route_rejected(sl2):
    V = sl2[0]
    with pytest.raises(ValueError):
        fu.centraliser_constant([V, V], 0, 1, 1, "shortcut")


def test_centraliser_commutes_with_levi_on_a2(A2V):
    W = la.tensor([A2V, A2V])
    C = fu.centraliser_constant([A2V, A2V], 0, 1, 2)
    assert max(la.levi_invariance_residual(W, M, {1}) for M in C.coeffs) < 1e-7


def test_rank_one_relative_twist_kills_associator(sl2):
    V, W, _ = sl2
    B = frozenset({0})
    F, Fl, Fr = (fu.relative_twist(reps, B, 0, 1, 3).F for reps in ([V, V], [W, V], [V, W]))
    Phi = cn.kz_associator([V] * 3, order=3)
    assert np.max(fu.twist_equation_residual(F, Fl, Fr, [2, 2, 2], Phi=Phi)) < 1e-7


def test_admissible_orderings_put_larger_elements_first():
    data = dg.enumerate_nested_sets(dg.Diagram.path(3))
    F = next(M for M in data.mns if frozenset({0}) in M.elements and frozenset({2}) in M.elements)
    orders = fu.admissible_orderings(F)
    assert len(orders) == 2
    assert all(o[0] == frozenset({0, 1, 2}) for o in orders)
    chain = data.mns[0]
    assert fu.admissible_orderings(chain) == [tuple(chain.sorted_elements()[::-1])]


def test_commuting_relative_twists_on_a3(A3V):
    reps = [A3V, A3V]
    a = fu.relative_twist(reps, {0}, 0, 1, 2).F
    b = fu.relative_twist(reps, {2}, 2, 1, 2).F
    assert (a @ b).max_abs_diff(b @ a) < 1e-10


def test_qcqtqba_rank_one(sl2):
    report = fu.assemble_qcqtqba(sl2[0], 3)
    assert report.passed, report.failures()
    names = report.names()
    for expected in ("kills_phi_1", "coproduct_theta_1", "coproduct_S_1", "square_central_1"):
        assert expected in names
