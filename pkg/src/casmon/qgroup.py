"""Quantum group side: q-deformed modules, Lusztig's quantum Weyl group
operators, rank-one R-matrices and the comparison with Casimir monodromy.

Conventions: q = exp(hbar), q_i = q**d_i, K_i = q_i**H_i,
Delta(E) = E x 1 + K x E, Delta(F) = F x K^{-1} + 1 x F.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from . import liealg as la
from .connections import braid_monodromy
from .errors import RelationViolation
from .report import VerificationReport


def qint(n: int, q: complex) -> complex:
    """Symmetric q-integer [n] = (q^n - q^-n)/(q - q^-1), equal to n at q = 1."""
    if abs(q - 1) < 1e-300:
        return complex(n)
    return (q ** n - q ** (-n)) / (q - 1 / q)


def qfactorial(n: int, q: complex) -> complex:
    out = 1.0 + 0j
    for k in range(1, n + 1):
        out *= qint(k, q)
    return out


def _matrix_power_of_q(q: complex, H: np.ndarray) -> np.ndarray:
    """q**H for diagonal H."""
    return np.diag(np.exp(np.log(q) * np.diag(H)))


@dataclass
class QRepresentation:
    """E_i, F_i, H_i matrices of a U_q(g)-module with K_i = q_i**H_i."""

    classical: la.Representation
    hbar: complex
    E: tuple[np.ndarray, ...]
    F: tuple[np.ndarray, ...]
    H: tuple[np.ndarray, ...]

    @property
    def rs(self) -> la.RootSystem:
        return self.classical.rs

    @property
    def dim(self) -> int:
        return self.H[0].shape[0]

    @property
    def q(self) -> complex:
        return np.exp(self.hbar)

    def qi(self, i: int) -> complex:
        return np.exp(self.hbar * self.rs.d[i])

    def K(self, i: int, power: complex = 1) -> np.ndarray:
        return np.diag(np.exp(power * self.hbar * self.rs.d[i] * np.diag(self.H[i])))

    def divided_power(self, X: np.ndarray, i: int, n: int) -> np.ndarray:
        return np.linalg.matrix_power(X, n) / qfactorial(n, self.qi(i))


def q_relation_residuals(qrep: QRepresentation) -> dict[str, float]:
    rs = qrep.rs
    A = rs.cartan_matrix
    out = {"KE": 0.0, "KF": 0.0, "EF": 0.0, "serre": 0.0}
    for i, j in itertools.product(range(rs.rank), repeat=2):
        Ki, Kiinv = qrep.K(i), qrep.K(i, -1)
        qi = qrep.qi(i)
        out["KE"] = max(out["KE"], float(np.max(np.abs(Ki @ qrep.E[j] @ Kiinv - qi ** A[i, j] * qrep.E[j]))))
        out["KF"] = max(out["KF"], float(np.max(np.abs(Ki @ qrep.F[j] @ Kiinv - qi ** (-A[i, j]) * qrep.F[j]))))
        comm = qrep.E[i] @ qrep.F[j] - qrep.F[j] @ qrep.E[i]
        if i == j:
            target = qrep.H[i] if abs(qi - 1) < 1e-300 else (Ki - Kiinv) / (qi - 1 / qi)
        else:
            target = 0 * comm
        out["EF"] = max(out["EF"], float(np.max(np.abs(comm - target))))
        if i != j:
            n = 1 - A[i, j]
            for X in (qrep.E, qrep.F):
                acc = 0
                for k in range(n + 1):
                    acc = acc + (-1) ** k * qrep.divided_power(X[i], i, k) @ X[j] @ qrep.divided_power(
                        X[i], i, n - k
                    )
                out["serre"] = max(out["serre"], float(np.max(np.abs(acc))))
    return out


def _check(qrep: QRepresentation, tol: float) -> QRepresentation:
    res = q_relation_residuals(qrep)
    worst = max(res, key=res.get)
    if res[worst] > tol:
        raise RelationViolation(f"q-relation {worst} fails with residual {res[worst]:.3e}")
    return qrep


def _deform_sl2_irrep(rep: la.Representation, hbar: complex) -> QRepresentation:
    q = np.exp(hbar)
    m = rep.dim - 1
    E = np.zeros((m + 1, m + 1), dtype=complex)
    F = np.zeros((m + 1, m + 1), dtype=complex)
    for k in range(m):
        # basis v_k of weight m - 2k
        E[k, k + 1] = qint(m - k, q)
        F[k + 1, k] = qint(k + 1, q)
    return QRepresentation(rep, hbar, (E,), (F,), tuple(np.asarray(h, complex) for h in rep.h))


def q_coproduct(a: QRepresentation, b: QRepresentation) -> QRepresentation:
    Ia, Ib = np.eye(a.dim), np.eye(b.dim)
    E, F, H = [], [], []
    for i in range(a.rs.rank):
        E.append(np.kron(a.E[i], Ib) + np.kron(a.K(i), b.E[i]))
        F.append(np.kron(a.F[i], b.K(i, -1)) + np.kron(Ia, b.F[i]))
        H.append(np.kron(a.H[i], Ib) + np.kron(Ia, b.H[i]))
    classical = la.tensor([a.classical, b.classical])
    return QRepresentation(classical, a.hbar, tuple(E), tuple(F), tuple(H))


def _is_minuscule_like(rep: la.Representation) -> bool:
    """True when every e_i, f_i squares to zero, so the q-deformation keeps the matrices."""
    return all(np.max(np.abs(X @ X), initial=0.0) == 0 for X in rep.e + rep.f)


def q_deform(rep: la.Representation, hbar: complex, tol: float = 1e-10) -> QRepresentation:
    """Deform a built-in module (sl2 irreps, defining reps, tensor products of these)."""
    if rep.factors:
        parts = [q_deform(V, hbar, tol) for V in rep.factors]
        out = parts[0]
        for P in parts[1:]:
            out = q_coproduct(out, P)
        return _check(out, max(tol, 1e-10 * max(1.0, float(np.max(np.abs(out.E[0]))))))
    if rep.rs.rank == 1 and rep.dim > 2:
        return _check(_deform_sl2_irrep(rep, hbar), tol)
    if _is_minuscule_like(rep):
        cast = lambda xs: tuple(np.asarray(x, dtype=complex) for x in xs)
        return _check(QRepresentation(rep, hbar, cast(rep.e), cast(rep.f), cast(rep.h)), tol)
    raise RelationViolation("no q-deformation available for this module")


# ---------------------------------------------------------------------------
# Lusztig operators
# ---------------------------------------------------------------------------


def _weight_projectors(H: np.ndarray) -> dict[int, np.ndarray]:
    diag = np.rint(np.real(np.diag(H))).astype(int)
    out = {}
    for lam in sorted(set(diag.tolist())):
        out[lam] = np.diag((diag == lam).astype(complex))
    return out


def quantum_weyl(i: int, qrep: QRepresentation, variant: str = "kappa") -> np.ndarray:
    """sum (-1)^b q_i^(b - ac) E^(a) F^(b) E^(c) on each weight space, a - b + c = -lambda(h_i)."""
    qi = qrep.qi(i)
    E, F = qrep.E[i], qrep.F[i]
    n = qrep.dim
    powE = [qrep.divided_power(E, i, k) for k in range(n + 1)]
    powF = [qrep.divided_power(F, i, k) for k in range(n + 1)]
    S = np.zeros((n, n), dtype=complex)
    for lam, P in _weight_projectors(qrep.H[i]).items():
        for a, c in itertools.product(range(n + 1), repeat=2):
            b = a + c + lam
            if b < 0 or b > n:
                continue
            S += (-1) ** b * qi ** (b - a * c) * powE[a] @ powF[b] @ powE[c] @ P
    if variant == "C":
        S = S @ np.diag(np.exp(qrep.hbar * qrep.rs.d[i] * np.diag(qrep.H[i]) ** 2 / 4))
    return S


def q_kappa(i: int, qrep: QRepresentation) -> np.ndarray:
    """q_i**kappa_i with kappa_i = m(m+2)/2 - H_i^2/2 on the U_q(sl2_i)-isotypic part of type V_m."""
    qi = qrep.qi(i)
    H = np.real(np.diag(qrep.H[i]))
    n = qrep.dim
    if abs(qi - 1) < 1e-14:
        rep = qrep.classical
        Cas = rep.e[i] @ rep.f[i] + rep.f[i] @ rep.e[i] + rep.h[i] @ rep.h[i] / 2
        return sla.expm(qrep.hbar * qrep.rs.d[i] * (Cas - np.diag(H ** 2) / 2))
    # (q - q^-1)^2 FE + q K + q^-1 K^-1 acts on V_m by q^(m+1) + q^-(m+1)
    X = (qi - 1 / qi) ** 2 * qrep.F[i] @ qrep.E[i] + qi * qrep.K(i) + qrep.K(i, -1) / qi
    ms = sorted({round(abs(h)) for h in H} | set(range(int(np.max(np.abs(H))) + 1)))
    present = []
    vals = {m: qi ** (m + 1) + qi ** (-(m + 1)) for m in ms}
    ev = np.linalg.eigvals(X)
    for m in ms:
        if np.min(np.abs(ev - vals[m])) < 1e-6 * max(1.0, abs(vals[m])):
            present.append(m)
    out = np.zeros((n, n), dtype=complex)
    for m in present:
        P = np.eye(n, dtype=complex)
        for m2 in present:
            if m2 != m:
                P = P @ (X - vals[m2] * np.eye(n)) / (vals[m] - vals[m2])
        out += P * qi ** (m * (m + 2) / 2)
    return out @ np.diag(qi ** (-H ** 2 / 2))


def squares_residual(i: int, qrep: QRepresentation, variant: str = "kappa") -> float:
    S = quantum_weyl(i, qrep, variant)
    lhs = S @ S
    rhs = np.diag(np.exp(np.pi * 1j * np.diag(qrep.H[i]))) @ q_kappa(i, qrep)
    if variant == "C":
        rhs = rhs @ np.diag(np.exp(qrep.hbar * qrep.rs.d[i] * np.diag(qrep.H[i]) ** 2 / 2))
    return float(np.max(np.abs(lhs - rhs)))


def sl2_R(i: int, a: QRepresentation, b: QRepresentation, quasi: bool = False) -> np.ndarray:
    """R_i = q_i^(H_i x H_i / 2) * sum_n q_i^(n(n-1)/2) (q_i - q_i^-1)^n / [n]! F_i^n x E_i^n.

    With quasi=True only the sum (the quasi R-matrix) is returned.
    """
    qi = a.qi(i)
    N = max(a.dim, b.dim)
    Theta = np.zeros((a.dim * b.dim, a.dim * b.dim), dtype=complex)
    for n in range(N + 1):
        coef = qi ** (n * (n - 1) / 2) * (qi - 1 / qi) ** n / qfactorial(n, qi)
        Theta += coef * np.kron(np.linalg.matrix_power(a.F[i], n), np.linalg.matrix_power(b.E[i], n))
    if quasi:
        return Theta
    hh = np.kron(np.diag(a.H[i]), np.diag(b.H[i]))
    return np.diag(np.exp(a.hbar * a.rs.d[i] * hh / 2)) @ Theta


def _swap(a: QRepresentation, b: QRepresentation) -> np.ndarray:
    return la.leg_permutation([a.dim, b.dim], [1, 0])


def intertwiner_residual(i: int, a: QRepresentation, b: QRepresentation) -> float:
    """max over generators of |Delta^op(x) R - R Delta(x)| on a x b (rank-one block i)."""
    R = sl2_R(i, a, b)
    ab = q_coproduct(a, b)
    ba = q_coproduct(b, a)
    P = _swap(a, b)
    worst = 0.0
    for X, Y in ((ab.E[i], ba.E[i]), (ab.F[i], ba.F[i]), (ab.H[i], ba.H[i])):
        op = P.T @ Y @ P  # Delta^op on a x b
        worst = max(worst, float(np.max(np.abs(op @ R - R @ X))))
    return worst


def coproduct_identity_residual(i: int, a: QRepresentation, b: QRepresentation, variant: str = "kappa") -> float:
    """Delta(S_i) = (S_i x S_i) Theta_i on a x b, Theta_i the quasi R-matrix of R_i.

    For the C variant the right side carries the extra factor q_i^(Delta(H_i)^2/4).
    """
    ab = q_coproduct(a, b)
    lhs = quantum_weyl(i, ab, variant)
    rhs = np.kron(quantum_weyl(i, a), quantum_weyl(i, b)) @ sl2_R(i, a, b, quasi=True)
    if variant == "C":
        rhs = rhs @ np.diag(np.exp(a.hbar * a.rs.d[i] * np.diag(ab.H[i]) ** 2 / 4))
    return float(np.max(np.abs(lhs - rhs)))


def quantum_report(rep: la.Representation, hbars: Sequence[complex] = (0.05, 0.1, 0.1 + 0.05j),
                   tol: float = 1e-10) -> VerificationReport:
    """q-relations, braid relations, squares lemma, coproduct identity and intertwining."""
    report = VerificationReport()
    rs = rep.rs
    for hbar in hbars:
        Q = q_deform(rep, hbar)
        tag = {"hbar": [float(np.real(hbar)), float(np.imag(hbar))]}
        res = q_relation_residuals(Q)
        report.add("q_relations", max(res["KE"], res["KF"], res["EF"]), tol, **tag)
        report.add("q_serre", res["serre"], tol, **tag)
        for variant in ("kappa", "C"):
            S = [quantum_weyl(i, Q, variant) for i in range(rs.rank)]
            for i, j in itertools.combinations(range(rs.rank), 2):
                m = {0: 2, 1: 3, 2: 4, 3: 6}[int(rs.cartan_matrix[i, j] * rs.cartan_matrix[j, i])]
                w1 = np.eye(Q.dim, dtype=complex)
                w2 = np.eye(Q.dim, dtype=complex)
                for k in range(m):
                    w1 = w1 @ S[i if k % 2 == 0 else j]
                    w2 = w2 @ S[j if k % 2 == 0 else i]
                report.add(f"braid_{variant}_{i + 1}{j + 1}", float(np.max(np.abs(w1 - w2))), tol, **tag)
            for i in range(rs.rank):
                report.add(f"square_{variant}_{i + 1}", squares_residual(i, Q, variant), tol, **tag)
        for i in range(rs.rank):
            report.add(f"variant_ratio_{i + 1}", float(np.max(np.abs(
                quantum_weyl(i, Q, "C") - quantum_weyl(i, Q, "kappa") @ np.diag(
                    np.exp(hbar * rs.d[i] * np.diag(Q.H[i]) ** 2 / 4))))), tol, **tag)
            for variant in ("kappa", "C"):
                report.add(f"coproduct_{variant}_{i + 1}", coproduct_identity_residual(i, Q, Q, variant), tol, **tag)
            report.add(f"R_intertwiner_{i + 1}", intertwiner_residual(i, Q, Q), tol, **tag)
    return report


# ---------------------------------------------------------------------------
# Monodromy comparator
# ---------------------------------------------------------------------------


def quantum_word(qrep: QRepresentation, word: Sequence[int], variant: str = "kappa") -> np.ndarray:
    out = np.eye(qrep.dim, dtype=complex)
    for letter in word:
        S = quantum_weyl(abs(letter) - 1, qrep, variant)
        out = out @ (S if letter > 0 else np.linalg.inv(S))
    return out


def cauchy_coefficients(fn, order: int, radius: float, points: int = 64) -> np.ndarray:
    """Taylor coefficients c_0..c_order of an analytic scalar function by the trapezoid rule on a circle."""
    theta = 2 * np.pi * np.arange(points) / points
    vals = np.array([fn(radius * np.exp(1j * t)) for t in theta])
    c = np.fft.fft(vals) / points
    return c[: order + 1] / radius ** np.arange(order + 1)


def spectrum_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Optimal bipartite matching of two eigenvalue multisets; the largest matched gap."""
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c]))


def quantum_trace_series(rep: la.Representation, word: Sequence[int], order: int, variant: str = "kappa",
                         radii: Sequence[float] = (0.25, 0.5)) -> tuple[np.ndarray, float]:
    """Taylor coefficients of hbar -> tr S_w, with the disagreement between two Cauchy radii."""
    fn = lambda h: np.trace(quantum_word(q_deform(rep, h, tol=1e-6), word, variant))
    coeffs = [cauchy_coefficients(fn, order, r) for r in radii]
    return coeffs[0], float(np.max(np.abs(coeffs[0] - coeffs[1])))


def connection_trace_series(rep: la.Representation, word: Sequence[int], order: int,
                            variant: str = "kappa") -> np.ndarray:
    M = braid_monodromy(rep, word, order=order, variant=variant)
    return np.array([np.trace(c) for c in M.coeffs])


def default_words(rank: int) -> list[list[int]]:
    """Generators, their squares and mixed words; letters are 1-based vertices."""
    gens = [[i + 1] for i in range(rank)]
    squares = [[i + 1, i + 1] for i in range(rank)]
    mixed = [[1, 2], [1, 2, 1]] if rank >= 2 else []
    return gens + squares + mixed


def monodromy_equivalence(rep: la.Representation, words: Sequence[Sequence[int]], order: int = 3,
                          nus: Sequence[complex] = (0.05, 0.1 + 0.05j), variant: str = "kappa",
                          tol: float = 1e-5, spectrum_tol: float = 1e-6) -> VerificationReport:
    """Compare traces (as hbar-series) and spectra (at numeric nu) of both braid actions."""
    report = VerificationReport()
    for word in words:
        name = "".join(f"S{abs(x)}" + ("^-1" if x < 0 else "") for x in word)
        conn = connection_trace_series(rep, word, order, variant)
        quant, radius_gap = quantum_trace_series(rep, word, order, variant)
        report.add(f"trace_series_{variant}_{name}", float(np.max(np.abs(conn - quant))), tol, order=order,
                   cauchy_radius_gap=radius_gap)
        for nu in nus:
            hbar = np.pi * 1j * nu
            A = braid_monodromy(rep, word, nu=nu, variant=variant)
            B = quantum_word(q_deform(rep, hbar, tol=1e-6), word, variant)
            report.add(f"spectrum_{variant}_{name}", spectrum_distance(np.linalg.eigvals(A), np.linalg.eigvals(B)),
                       spectrum_tol, nu=[float(np.real(nu)), float(np.imag(nu))])
    return report


def weight_zero_intertwiner(A_list: Sequence[np.ndarray], B_list: Sequence[np.ndarray],
                            rep: la.Representation) -> tuple[np.ndarray, float]:
    """Least-squares weight-zero J with J A_k = B_k J; returns (J, relative residual).

    Optional diagnostic: the intertwiner is not part of any acceptance gate.
    """
    n = rep.dim
    blocks = list(rep.weight_grading.values())
    mask = np.zeros((n, n), dtype=bool)
    for idx in blocks:
        mask[np.ix_(idx, idx)] = True
    cols = np.flatnonzero(mask.reshape(-1))
    rows = []
    I = np.eye(n)
    for A, B in zip(A_list, B_list):
        rows.append(np.kron(I, A.T) - np.kron(B, I))
    M = np.vstack(rows)[:, cols]
    _, s, vh = np.linalg.svd(M)
    x = vh[-1].conj()
    J = np.zeros(n * n, dtype=complex)
    J[cols] = x
    return J.reshape(n, n), float(s[-1] / s[0])
