from __future__ import annotations

import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from casmon import connections as cn
from casmon import diagrams as dg
from casmon import fusion as fu
from casmon import liealg as la
from casmon import qgroup as qg
from casmon.odecore import HbarSeries, PathInC, RationalODE, laplace_solve, transport

SETTINGS = settings(max_examples=25, deadline=None)
seeds = st.integers(0, 2 ** 31)
MODULES = [la.sl2_irrep(1), la.sl2_irrep(2), la.sln_defining(3)]


def _rng(seed):
    return np.random.default_rng(seed)


def _random_series(rng, order, d):
    c = rng.normal(size=(order + 1, d, d)) + 1j * rng.normal(size=(order + 1, d, d))
    c[0] += 3 * np.eye(d)
    return HbarSeries(c)


@SETTINGS
@given(seeds, st.integers(0, 5), st.integers(1, 4))
def test_series_inverse_is_two_sided(seed, order, d):
    X = _random_series(_rng(seed), order, d)
    one = HbarSeries.identity(order, d)
    assert (X @ X.inv()).max_abs_diff(one) < 1e-10
    assert (X.inv() @ X).max_abs_diff(one) < 1e-10


@SETTINGS
@given(seeds, st.integers(1, 5))
def test_series_exp_of_sum_of_commuting_terms(seed, order):
    rng = _rng(seed)
    D1, D2 = np.diag(rng.normal(size=3)), np.diag(rng.normal(size=3))
    a, b = HbarSeries.monomial(D1, 1, order), HbarSeries.monomial(D2, 1, order)
    assert (a + b).exp().max_abs_diff(a.exp() @ b.exp()) < 1e-10


@SETTINGS
@given(seeds)
def test_transport_is_multiplicative_and_reversible(seed):
    rng = _rng(seed)
    A = 0.5 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    B = 0.5 * rng.normal(size=(2, 2))
    ode = RationalODE(poles=[(0.0, A), (1.0, B)])
    pts = [0.5 + 0.6j, complex(*rng.uniform(-1, 2, 2)) + 0.3j, complex(*rng.uniform(-1, 2, 2)) + 0.3j]
    p1, p2 = PathInC.segment(pts[0], pts[1]), PathInC.segment(pts[1], pts[2])
    whole = transport(ode, p1 + p2)
    assert np.allclose(whole, transport(ode, p2) @ transport(ode, p1), atol=1e-10)
    assert np.allclose(whole @ transport(ode, (p1 + p2).reversed()), np.eye(2), atol=1e-10)


@SETTINGS
@given(st.floats(0.1, 1.4), st.floats(0.1, 1.4), st.floats(1.5, 6.0), st.floats(0.2, 3.0))
def test_laplace_solution_does_not_depend_on_contour(theta1, theta2, r, lam):
    k = lambda w: np.array(1.0 / (1.0 + 0.5 / w))
    z = r * np.exp(1j * np.pi / 3)
    a = laplace_solve(lam, k, [np.array(1.0)], theta=theta1)(z)
    b = laplace_solve(lam, k, [np.array(1.0)], theta=theta2)(z)
    assert abs(a - b) < 1e-10


@SETTINGS
@given(st.lists(st.sampled_from([0, 1]), min_size=2, max_size=3), st.data())
def test_omega_is_invariant_on_tensor_products(choice, data):
    reps = [la.sl2_irrep(1 + c) for c in choice]
    W = la.tensor(reps)
    i, j = data.draw(st.sampled_from(list(itertools.combinations(range(len(reps)), 2))))
    assert la.invariance_residual(W, la.omega(W, (i, j))) < 1e-12


@SETTINGS
@given(st.sampled_from([[0], [1], [0, 1]]), st.integers(2, 3))
def test_omega_of_subdiagram_commutes_with_its_levi(B, n):
    W = la.tensor([la.sln_defining(3)] * n)
    for legs in itertools.combinations(range(n), 2):
        assert la.levi_invariance_residual(W, la.omega(W, legs, B), B) < 1e-12


@SETTINGS
@given(st.integers(2, 3), seeds)
def test_kernel_projection_of_omega_is_cartan_part(n, seed):
    rng = _rng(seed)
    V = la.sln_defining(3)
    W = la.tensor([V] * n)
    zeta = np.sort(rng.uniform(-3, 3, n))[::-1]
    c = rng.uniform(0.2, 2.0, 2)
    N = sum(z * m for z, m in zip(zeta, fu.mu_legs(W, c)))
    nd = np.diag(N)
    mask = np.abs(nd[:, None] - nd[None, :]) < 1e-9
    for legs in itertools.combinations(range(n), 2):
        assert np.allclose(la.omega(W, legs) * mask, la.omega_h(W, legs), atol=1e-12)


@SETTINGS
@given(st.sampled_from([la.sl2_irrep(1), la.sl2_irrep(2), la.sln_defining(3)]), st.data())
def test_coproduct_of_k_tilde(V, data):
    i = data.draw(st.integers(0, V.rs.rank - 1))
    W = la.tensor([V, V])
    Kt = lambda U: sum(la.K_alpha(U, a) for a in V.rs.positive_roots if a[i] != 0)
    Bbar = frozenset(V.rs.vertices) - {i}
    Obar = la.omega(W, (0, 1), Bbar) if Bbar else 0
    lhs = Kt(W) - W.leg(0, Kt(V)) - W.leg(1, Kt(V))
    rhs = 2 * (la.omega(W) - Obar - la.Lambda(W, i))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@st.composite
def trees(draw):
    n = draw(st.integers(1, 5))
    parents = [draw(st.integers(0, k - 1)) for k in range(1, n)]
    edges = frozenset(frozenset((k, p)) for k, p in zip(range(1, n), parents))
    return dg.Diagram(n, edges, tuple((tuple(sorted(e)), 3) for e in edges))


@SETTINGS
@given(trees())
def test_every_mns_has_one_element_per_vertex(D):
    data = dg.enumerate_nested_sets(D)
    assert data.mns
    for F in data.mns:
        assert len(F.elements) == D.n
        assert sorted(F.alpha(B) for B in F.elements) == list(range(D.n))
        assert all(D.is_connected(B) for B in F.elements)


@SETTINGS
@given(trees(), st.data())
def test_compatibility_is_symmetric_and_implied_by_orthogonality(D, data):
    subs = D.connected_subdiagrams
    B1 = data.draw(st.sampled_from(subs))
    B2 = data.draw(st.sampled_from(subs))
    assert D.compatible(B1, B2) == D.compatible(B2, B1)
    if not (B1 & B2) and D.orthogonal(B1, B2):
        assert D.compatible(B1, B2)


@SETTINGS
@given(st.sampled_from(["A2", "A3", "B2", "G2"]), st.data())
def test_chart_maps_coordinate_hyperplanes_to_strata(name, data):
    rs = la.root_system(name)
    nsd = dg.enumerate_nested_sets(dg.Diagram.from_root_system(rs))
    F = data.draw(st.sampled_from(nsd.mns))
    chart = dg.blowup_chart(F, dg.default_adapted_family(rs, nsd))
    B = data.draw(st.sampled_from(chart.basis))
    u = {C: complex(data.draw(st.floats(0.2, 2.0))) for C in chart.basis}
    u[B] = 0.0
    x = chart.x_from_u(u)
    for C in chart.basis:
        if C <= B:
            assert x[C] == 0


@SETTINGS
@given(seeds, st.sampled_from(["KZ_n", "Casimir_kappa", "Casimir_C", "DynamicalKZ_n"]))
def test_flatness_at_random_points(seed, kind):
    V = la.sln_defining(3)
    reps = [V] * (3 if kind == "KZ_n" else 2)
    nu = complex(*_rng(seed).uniform(-0.3, 0.3, 2))
    conn = cn.build_connection(kind, reps, nu=nu)
    assert cn.verify_flatness(conn, sample_count=3, seed=seed).passed


@SETTINGS
@given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.sampled_from(MODULES))
def test_quantum_relations_and_variants(re, im, V):
    Q = qg.q_deform(V, complex(re, im))
    assert max(qg.q_relation_residuals(Q).values()) < 1e-12
    for i in range(V.rs.rank):
        ratio = np.diag(np.exp(Q.hbar * V.rs.d[i] * np.diag(Q.H[i]) ** 2 / 4))
        assert np.allclose(qg.quantum_weyl(i, Q, "C"), qg.quantum_weyl(i, Q, "kappa") @ ratio, atol=1e-12)
        for variant in ("kappa", "C"):
            assert qg.squares_residual(i, Q, variant) < 1e-10
