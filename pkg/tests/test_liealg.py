from __future__ import annotations

import json

import numpy as np
import pytest

from casmon import liealg as la
from casmon.errors import NotCartan, RelationViolation


@pytest.mark.parametrize("name,count", [("A1", 1), ("A2", 3), ("A3", 6), ("B2", 4), ("G2", 6)])
def test_positive_root_counts(name, count):
    assert len(la.root_system(name).positive_roots) == count


def test_unknown_algebra_rejected():
    with pytest.raises(NotCartan):
        la.root_system("Q7")


def test_non_cartan_matrix_rejected():
    with pytest.raises(NotCartan):
        la.build_root_system([[2, 1], [-1, 2]])


def test_casimir_on_adjoint_of_sl2():
    V = la.sl2_irrep(2)
    assert np.allclose(la.casimir(V), 4 * np.eye(3))


def test_omega_spectrum_on_two_spin_halves(V1):
    W = la.tensor([V1, V1])
    eig = np.sort(np.linalg.eigvals(la.omega(W)).real)
    assert np.allclose(eig, [-1.5, 0.5, 0.5, 0.5])


def test_K_on_sl2_adjoint():
    V = la.sl2_irrep(2)
    assert np.allclose(la.K_B(V, [0]), np.diag([2, 4, 2]))


def test_lambda_is_half_h_tensor_h(V1):
    W = la.tensor([V1, V1])
    assert np.allclose(la.Lambda(W, 0), np.kron(V1.h[0], V1.h[0]) / 2)


def test_omega_of_empty_subdiagram_vanishes(A2V):
    W = la.tensor([A2V, A2V])
    assert np.allclose(la.omega(W, B=[]), 0)


@pytest.mark.parametrize("rep", [la.sl2_irrep(3), la.sln_defining(3), la.sln_defining(4)])
def test_builtin_reps_satisfy_relations(rep):
    assert max(la.relation_residuals(rep).values()) < 1e-12


def test_broken_rep_raises(V1):
    bad = la.Representation(V1.rs, (2 * V1.e[0],), V1.f, V1.h)
    with pytest.raises(RelationViolation):
        la.check_relations(bad)


def test_omega_and_casimir_are_invariant(A2V):
    W = la.tensor([A2V, A2V])
    assert la.invariance_residual(W, la.omega(W)) < 1e-12
    assert la.invariance_residual(A2V, la.casimir(A2V)) < 1e-12


def test_casimir_of_subdiagram_commutes_with_levi(A2V):
    W = la.tensor([A2V, A2V])
    assert la.levi_invariance_residual(W, la.casimir(W, [0]), [0]) < 1e-12
    assert la.invariance_residual(W, la.K_B(W, [0]), [0]) > 0.1


def test_restrict_relabels_vertices(A3V):
    R = la.restrict(A3V, [1, 2])
    assert R.rs.rank == 2
    assert np.allclose(R.e[0], A3V.e[1])
    la.check_relations(R)


def test_leg_permutation_swaps_tensor_factors():
    a = np.arange(2.0)
    b = np.arange(3.0) + 5
    P = la.leg_permutation([2, 3], [1, 0])
    assert np.allclose(P @ np.kron(a, b), np.kron(b, a))


def test_rep_file_round_trip(tmp_path, A2V):
    path = tmp_path / "rep.json"
    payload = {
        "cartan": A2V.rs.cartan_matrix.tolist(),
        "generators": {k: [la.encode_matrix(m) for m in getattr(A2V, k)] for k in "efh"},
    }
    path.write_text(json.dumps(payload))
    R = la.rep_from_file(path)
    assert all(np.allclose(x, y) for x, y in zip(R.e, A2V.e))


def test_rep_file_with_wrong_rank_rejected(tmp_path, V1):
    path = tmp_path / "rep.json"
    payload = {"cartan": [[2]], "rank": 2, "generators": {k: [la.encode_matrix(getattr(V1, k)[0])] for k in "efh"}}
    path.write_text(json.dumps(payload))
    with pytest.raises(RelationViolation):
        la.rep_from_file(path)


@pytest.mark.parametrize("spec,dim", [("V2", 3), ("sl3", 3), ("triv:sl2", 1)])
def test_build_representation_shorthands(spec, dim):
    assert la.build_representation(spec).dim == dim
