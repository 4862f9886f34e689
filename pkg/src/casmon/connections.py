"""KZ, Casimir and dynamical KZ connections: flatness, the KZ associator,
De Concini-Procesi fundamental solutions and braid group monodromy.

Coupling conventions: connections are written with the numeric parameter nu,
the KZ part as nu * Omega_ij dlog(z_i - z_j) and the Casimir part as
(nu/2) K_alpha dlog(alpha).  The formal parameter is hbar = pi i nu.  A point y of
the Cartan subalgebra is recorded by its simple-root values (alpha_1(y), ...).
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import liealg as la
from .diagrams import (
    AdaptedFamily,
    BlowupChart,
    Diagram,
    MaximalNestedSet,
    NestedSetData,
    blowup_chart,
    default_adapted_family,
    enumerate_nested_sets,
    mns_pair_data,
)
from .errors import ChartSingular, PathHitsWall, UnsupportedN
from .odecore import (
    HbarSeries,
    PathInC,
    RationalODE,
    nu_series,
    regular_singular_solution,
    transport,
)
from .report import VerificationReport

KINDS = ("KZ_n", "Casimir_kappa", "Casimir_C", "DynamicalKZ_n")


# ---------------------------------------------------------------------------
# Connection specifications
# ---------------------------------------------------------------------------


@dataclass
class LogTerm:
    """M * d(ell)/ell with ell(x) = c . x (a linear functional of the coordinates)."""

    c: np.ndarray
    M: np.ndarray
    label: str = ""

    def ell(self, x: np.ndarray) -> complex:
        return complex(self.c @ x)


@dataclass
class ConnectionSpec:
    """nabla = d - A, A = sum of log terms + t d(sum_i z_i mu^(i)).

    Coordinates are (z_1..z_n) for KZ, (y_1..y_r) for Casimir and
    (z_1..z_n, y_1..y_r) for the dynamical system, where y_i = alpha_i(mu).
    """

    kind: str
    rep: la.Representation
    nu: complex
    t: complex
    n_points: int
    rank: int
    terms: list[LogTerm]
    dynamical: str = "left"
    mu_legs: list[list[np.ndarray]] = field(default_factory=list)  # mu_legs[i][j] = lambda_j^vee on leg i

    @property
    def n_coords(self) -> int:
        return self.n_points + (self.rank if self.kind != "KZ_n" else 0)

    @property
    def superop(self) -> bool:
        return self.kind == "DynamicalKZ_n" and self.dynamical == "ad"

    @property
    def hbar(self) -> complex:
        return np.pi * 1j * self.nu

    def _lift_op(self, M: np.ndarray) -> np.ndarray:
        if not self.superop:
            return M
        return np.kron(M, np.eye(M.shape[0]))

    def _ad_op(self, M: np.ndarray) -> np.ndarray:
        if not self.superop:
            return M
        d = M.shape[0]
        return np.kron(M, np.eye(d)) - np.kron(np.eye(d), M.T)

    @property
    def dim(self) -> int:
        return self.rep.dim ** 2 if self.superop else self.rep.dim

    def exact_components(self, x: np.ndarray) -> list[np.ndarray]:
        """Components of t d(sum_i z_i mu^(i)) in all coordinates."""
        d = self.dim
        out = [np.zeros((d, d), dtype=complex) for _ in range(self.n_coords)]
        if self.kind != "DynamicalKZ_n" or self.t == 0:
            return out
        n, r = self.n_points, self.rank
        z, y = x[:n], x[n:]
        for i in range(n):
            mu_i = sum(y[j] * self.mu_legs[i][j] for j in range(r))
            out[i] = self.t * self._ad_op(mu_i)
            for j in range(r):
                out[n + j] = out[n + j] + self.t * z[i] * self._ad_op(self.mu_legs[i][j])
        return out

    def components(self, x: np.ndarray) -> list[np.ndarray]:
        out = self.exact_components(x)
        for term in self.terms:
            ell = term.ell(x)
            M = self._lift_op(term.M)
            for k in range(self.n_coords):
                if term.c[k] != 0:
                    out[k] = out[k] + M * (term.c[k] / ell)
        return out

    def derivative_components(self, x: np.ndarray) -> list[list[np.ndarray]]:
        """dA[l][k] = d A_k / d x_l."""
        d = self.dim
        N = self.n_coords
        out = [[np.zeros((d, d), dtype=complex) for _ in range(N)] for _ in range(N)]
        for term in self.terms:
            ell = term.ell(x)
            M = self._lift_op(term.M)
            for k in range(N):
                for l in range(N):
                    if term.c[k] != 0 and term.c[l] != 0:
                        out[l][k] = out[l][k] - M * (term.c[k] * term.c[l] / ell ** 2)
        if self.kind == "DynamicalKZ_n" and self.t != 0:
            n, r = self.n_points, self.rank
            for i in range(n):
                for j in range(r):
                    E = self.t * self._ad_op(self.mu_legs[i][j])
                    out[n + j][i] = out[n + j][i] + E
                    out[i][n + j] = out[i][n + j] + E
        return out

    def residue(self, c: Sequence[float]) -> np.ndarray:
        """Sum of the coefficient matrices of log terms along the divisor c . x = 0."""
        c = np.asarray(c, dtype=float)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.terms:
            if np.allclose(term.c / np.linalg.norm(term.c), c / np.linalg.norm(c)) or np.allclose(
                term.c / np.linalg.norm(term.c), -c / np.linalg.norm(c)
            ):
                out = out + self._lift_op(term.M)
        return out


def _root_functional(rs: la.RootSystem, alpha, offset: int, N: int) -> np.ndarray:
    c = np.zeros(N)
    c[offset:offset + rs.rank] = np.array(alpha, dtype=float)
    return c


def casimir_coefficient(rep: la.Representation, alpha, variant: str) -> np.ndarray:
    if variant in ("kappa", "Casimir_kappa", "K"):
        return la.K_alpha(rep, alpha)
    return la.C_alpha(rep, alpha)


def build_connection(kind: str, reps: Sequence[la.Representation] | la.Representation, nu: complex = 0.1,
                     t: complex = 1.0, dynamical: str = "left", corrupt: np.ndarray | None = None) -> ConnectionSpec:
    """Assemble the term list of one of the four connections.

    For KZ_n and DynamicalKZ_n, reps lists the tensor factors.  For the Casimir
    kinds, reps is the representation on which K_alpha (or C_alpha) acts; pass
    a list to act through the coproduct on their tensor product.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown connection kind {kind!r}")
    reps = [reps] if isinstance(reps, la.Representation) else list(reps)
    W = la.tensor(reps)
    rs = W.rs
    n = len(reps) if kind in ("KZ_n", "DynamicalKZ_n") else 0
    if kind == "DynamicalKZ_n" and n not in (2, 3):
        raise UnsupportedN("the dynamical system is supported for n = 2, 3")
    r = rs.rank if kind != "KZ_n" else 0
    N = n + r
    terms: list[LogTerm] = []
    for i, j in itertools.combinations(range(n), 2):
        c = np.zeros(N)
        c[i], c[j] = 1.0, -1.0
        M = la.omega(W, (i, j))
        if corrupt is not None and (i, j) == (0, 1):
            M = M + corrupt
        terms.append(LogTerm(c, nu * M, f"Omega_{i + 1}{j + 1}"))
    if kind != "KZ_n":
        variant = "C" if kind == "Casimir_C" else "kappa"
        for alpha in rs.positive_roots:
            M = casimir_coefficient(W, alpha, variant)
            terms.append(LogTerm(_root_functional(rs, alpha, n, N), 0.5 * nu * M, f"K_{alpha}"))
    mu_legs: list[list[np.ndarray]] = []
    if kind == "DynamicalKZ_n":
        for i in range(n):
            mu_legs.append([W.leg(i, la.coweight_matrix(reps[i], j)) for j in range(r)])
    return ConnectionSpec(kind, W, nu, t if kind == "DynamicalKZ_n" else 0.0, n, r, terms, dynamical, mu_legs)


def _random_regular_point(conn: ConnectionSpec, rng: np.random.Generator) -> np.ndarray:
    while True:
        x = rng.normal(size=conn.n_coords) + 1j * rng.normal(size=conn.n_coords)
        if all(abs(term.ell(x)) > 0.2 for term in conn.terms):
            return x


def curvature(conn: ConnectionSpec, x: np.ndarray) -> float:
    A = conn.components(x)
    dA = conn.derivative_components(x)
    worst = 0.0
    for k, l in itertools.combinations(range(conn.n_coords), 2):
        F = dA[l][k] - dA[k][l] + A[k] @ A[l] - A[l] @ A[k]
        worst = max(worst, float(np.max(np.abs(F))))
    return worst


def _form_bracket(a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    """Components (k<l) of the graded commutator of two matrix-valued 1-forms."""
    out = []
    for k, l in itertools.combinations(range(len(a)), 2):
        out.append(a[k] @ b[l] - b[l] @ a[k] - (a[l] @ b[k] - b[k] @ a[l]))
    return out


def mixed_forms(conn: ConnectionSpec, x: np.ndarray) -> dict[str, list[np.ndarray]]:
    """A_X, A_Y, lambda_X, lambda_Y of the dynamical system without its couplings."""
    d = conn.dim
    N = conn.n_coords
    n, r = conn.n_points, conn.rank
    zero = lambda: [np.zeros((d, d), dtype=complex) for _ in range(N)]
    AX, AY, LX, LY = zero(), zero(), zero(), zero()
    for term in conn.terms:
        ell = term.ell(x)
        M = conn._lift_op(term.M) / conn.nu
        target = AX if term.label.startswith("Omega") else AY
        for k in range(N):
            if term.c[k] != 0:
                target[k] = target[k] + M * (term.c[k] / ell)
    z, y = x[:n], x[n:]
    for i in range(n):
        LX[i] = sum(y[j] * conn._ad_op(conn.mu_legs[i][j]) for j in range(r))
        for j in range(r):
            LY[n + j] = LY[n + j] + z[i] * conn._ad_op(conn.mu_legs[i][j])
    return {"A_X": AX, "A_Y": AY, "lambda_X": LX, "lambda_Y": LY}


def verify_flatness(conn: ConnectionSpec, sample_count: int = 50, seed: int = 0, tol: float = 1e-10,
                    structural_tol: float = 1e-12) -> VerificationReport:
    rng = np.random.default_rng(seed)
    rep = VerificationReport()
    worst = 0.0
    for _ in range(sample_count):
        worst = max(worst, curvature(conn, _random_regular_point(conn, rng)))
    rep.add("curvature", worst, tol, kind=conn.kind, samples=sample_count)
    if conn.kind == "DynamicalKZ_n":
        worst = {"[A_X,A_Y]": 0.0, "[A_X,lambda_X]": 0.0, "[A_Y,lambda_Y]": 0.0,
                 "[A_X,lambda_Y]+[A_Y,lambda_X]": 0.0}
        for _ in range(max(5, sample_count // 5)):
            f = mixed_forms(conn, _random_regular_point(conn, rng))
            vals = {
                "[A_X,A_Y]": _form_bracket(f["A_X"], f["A_Y"]),
                "[A_X,lambda_X]": _form_bracket(f["A_X"], f["lambda_X"]),
                "[A_Y,lambda_Y]": _form_bracket(f["A_Y"], f["lambda_Y"]),
                "[A_X,lambda_Y]+[A_Y,lambda_X]": [
                    a + b for a, b in zip(_form_bracket(f["A_X"], f["lambda_Y"]), _form_bracket(f["A_Y"], f["lambda_X"]))
                ],
            }
            for key, comps in vals.items():
                worst[key] = max(worst[key], max(float(np.max(np.abs(c))) for c in comps))
        for key, value in worst.items():
            rep.add(key, value, structural_tol)
    return rep


# ---------------------------------------------------------------------------
# KZ associator
# ---------------------------------------------------------------------------


def _coefficient(M: np.ndarray, nu: complex | None, order: int | None):
    if order is not None:
        return nu_series(M, order)
    return nu * M


def kz_associator(reps: Sequence[la.Representation], nu: complex | None = None, order: int | None = None,
                  x: float = 0.5, tol: float = 1e-14):
    """Phi = G_1(x)^{-1} G_0(x) for dG/dz = nu (Omega_12/z + Omega_23/(z-1)) G.

    With order given the result is an HbarSeries (nu = hbar/(pi i)); otherwise
    a matrix at the numeric value nu.
    """
    W = la.tensor(list(reps))
    O12, O23 = la.omega(W, (0, 1)), la.omega(W, (1, 2))
    ode = RationalODE(poles=[(0.0, _coefficient(O12, nu, order)), (1.0, _coefficient(O23, nu, order))])
    radius = max(x, 1 - x)
    G0 = regular_singular_solution(ode, 0.0, tol=tol, radius=radius)
    G1 = regular_singular_solution(ode, 1.0, tol=tol, radius=radius, sign=-1)
    a = G0.psi(x)
    b = G1.psi(x)
    if order is not None:
        return b.inv() @ a
    return np.linalg.solve(b, a)


def permute_legs_matrix(reps: Sequence[la.Representation], perm: Sequence[int]) -> np.ndarray:
    return la.leg_permutation([V.dim for V in reps], perm)


def apply_sigma(fn, reps: Sequence[la.Representation], sigma: Sequence[int]):
    """X_sigma on V_1 x V_2 x V_3 for X = fn(reps), where X_{ijk} places the
    first factor of X in slot i, the second in slot j and the third in slot k.
    """
    sigma = [s - 1 for s in sigma]
    n = len(sigma)
    # factor a of X goes to slot sigma[a]; compute X on the reps ordered by slot
    order = [None] * n
    for a, s in enumerate(sigma):
        order[a] = reps[s]
    X = fn(order)
    # leg a of the computed object sits over reps[sigma[a]]; move it to slot sigma[a]
    P = la.leg_permutation([V.dim for V in order], _inverse_perm(sigma))
    if isinstance(X, HbarSeries):
        return X.map(lambda c: P @ c @ P.T)
    return P @ X @ P.T


def _inverse_perm(sigma: Sequence[int]) -> list[int]:
    inv = [0] * len(sigma)
    for a, s in enumerate(sigma):
        inv[s] = a
    return inv


def _series_exp(M: np.ndarray, order: int) -> HbarSeries:
    return HbarSeries.monomial(M, 1, order).exp()


def kz_R(reps: Sequence[la.Representation], order: int | None = None, hbar: complex | None = None, legs=(0, 1)):
    """R = exp(hbar Omega) on the given legs."""
    W = la.tensor(list(reps))
    O = la.omega(W, legs)
    if order is not None:
        return _series_exp(O, order)
    return sla.expm(hbar * O)


def associator_report(V: la.Representation, order: int = 4, tol: float = 1e-8) -> VerificationReport:
    """Pentagon, both hexagons, counit slots and the low-order shape of Phi_KZ."""
    rep = VerificationReport()
    triv = la.trivial(V.rs)
    Phi = lambda rs: kz_associator(rs, order=order)
    VV = la.tensor([V, V])
    I = np.eye(V.dim)
    # pentagon on V^4
    P_1 = Phi([V, V, V]).rkron(I)  # 1 x Phi
    P_2 = Phi([V, VV, V])
    P_3 = Phi([V, V, V]).kron(I)  # Phi x 1
    P_4 = Phi([V, V, VV])
    P_5 = Phi([VV, V, V])
    lhs = P_1 @ P_2 @ P_3
    rhs = P_4 @ P_5
    rep.add("pentagon", lhs.max_abs_diff(rhs), tol, order=order)
    # hexagons with R = exp(hbar Omega)
    reps3 = [V, V, V]
    R_a = HbarSeries.monomial(la.omega(la.tensor([VV, V]), (0, 1)), 1, order).exp()  # Delta x id (R)
    W3 = la.tensor(reps3)
    R13 = _series_exp(la.omega(W3, (0, 2)), order)
    R23 = _series_exp(la.omega(W3, (1, 2)), order)
    R12 = _series_exp(la.omega(W3, (0, 1)), order)
    Ph = lambda s: apply_sigma(Phi, reps3, s)
    rhs1 = Ph((3, 1, 2)) @ R13 @ Ph((1, 3, 2)).inv() @ R23 @ Ph((1, 2, 3))
    rep.add("hexagon_R12", R_a.max_abs_diff(rhs1), tol, order=order)
    R_b = HbarSeries.monomial(la.omega(la.tensor([V, VV]), (0, 1)), 1, order).exp()  # id x Delta (R)
    rhs2 = Ph((2, 3, 1)).inv() @ R13 @ Ph((2, 1, 3)) @ R12 @ Ph((1, 2, 3)).inv()
    rep.add("hexagon_R23", R_b.max_abs_diff(rhs2), tol, order=order)
    # counit slots
    for name, rs in (("eps_middle", [V, triv, V]), ("eps_first", [triv, V, V]), ("eps_last", [V, V, triv])):
        P = Phi(rs)
        rep.add(name, P.max_abs_diff(np.eye(P.shape[0])), 1e-10)
    P = Phi(reps3)
    rep.add("order0_is_identity", float(np.max(np.abs(P[0] - np.eye(P.shape[0])))), 1e-10)
    rep.add("order1_vanishes", float(np.max(np.abs(P[1]))), 1e-10)
    rep.add("weight_zero", max(la.weight_zero_residual(W3, c) for c in P.coeffs), 1e-10)
    rep.add("g_invariant", max(la.invariance_residual(W3, c) for c in P.coeffs), 1e-10)
    return rep


# ---------------------------------------------------------------------------
# Casimir connection along lines, DCP fundamental solutions
# ---------------------------------------------------------------------------


@dataclass
class CasimirData:
    """Coefficients (nu/2) M_alpha of dalpha/alpha for each positive root."""

    rs: la.RootSystem
    rep: la.Representation
    coeffs: dict[tuple[int, ...], object]  # matrices or HbarSeries
    order: int | None
    variant: str

    @property
    def dim(self) -> int:
        return self.rep.dim

    def zero(self):
        if self.order is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return HbarSeries.zeros(self.order, self.dim)

    def sum_over(self, roots) -> object:
        out = self.zero()
        for a in roots:
            out = out + self.coeffs[tuple(a)]
        return out

    def identity(self):
        if self.order is None:
            return np.eye(self.dim, dtype=complex)
        return HbarSeries.identity(self.order, self.dim)


def casimir_data(rep: la.Representation, nu: complex | None = None, order: int | None = None,
                 variant: str = "kappa", roots=None) -> CasimirData:
    rs = rep.rs
    roots = rs.positive_roots if roots is None else roots
    coeffs = {}
    for a in roots:
        M = 0.5 * casimir_coefficient(rep, a, variant)
        coeffs[tuple(a)] = nu_series(M, order) if order is not None else nu * M
    return CasimirData(rs, rep, coeffs, order, variant)


def line_ode(cd: CasimirData, y_a: np.ndarray, v: np.ndarray) -> RationalODE:
    """The Casimir connection pulled back to w -> y_a + w v."""
    poles = []
    for a, M in cd.coeffs.items():
        av = float(np.dot(a, v)) if np.isrealobj(v) else complex(np.dot(a, v))
        if abs(av) < 1e-14:
            continue
        ay = complex(np.dot(a, y_a))
        poles.append((-ay / av, M))
    if not poles:
        poles = [(1e6, cd.zero())]
    return RationalODE(poles=poles)


def _power(R, logt: complex, order: int | None):
    if order is None:
        return sla.expm(R * logt)
    return HbarSeries.from_lift(sla.expm(R.lift() * logt), order)


def _normalized_1d(ode: RationalODE, target: complex, tol: float = 1e-14, logt: complex | None = None):
    """Psi(target) for the solution normalized at 0 as H(t) t^Res.

    The power uses the principal log of target unless logt is given.
    """
    sol = regular_singular_solution(ode, 0.0, tol=tol)
    logt = np.log(complex(target)) if logt is None else logt
    if abs(target) <= sol.radius:
        return sol.psi(target, logw=logt)
    scale = 0.9 * sol.radius / abs(target)
    start = target * scale
    T = transport(ode, PathInC.segment(start, target), tol=tol)
    return T @ sol.psi(start, logw=logt + np.log(scale))


@dataclass
class DCPSolution:
    F: MaximalNestedSet
    chart: BlowupChart
    cd: CasimirData

    def residue(self, B: frozenset[int]):
        return self.cd.sum_over(self.cd.rs.roots_in(B))

    def __call__(self, y: np.ndarray, tol: float = 1e-14):
        """Psi_F at the point with simple-root values y."""
        y = np.asarray(y, dtype=complex)
        chart = self.chart
        u_star = chart.u_from_y(y)
        chart.check_point(u_star)
        elems = chart.basis
        result = self.cd.identity()
        for k, B in enumerate(elems):
            u = {C: (0.0 if j < k else u_star[C]) for j, C in enumerate(elems)}
            poles = []
            for pb in chart.pullbacks:
                M = self.cd.coeffs[pb.root]
                if B >= pb.B:
                    poles.append((0.0, M))
                p0, p1 = pb.affine_in(u, B)
                if abs(p1) > 1e-14:
                    if abs(p0) < 1e-12:
                        raise ChartSingular(f"P_alpha degenerates along u_B for alpha={pb.root}")
                    poles.append((-p0 / p1, M))
            ode = RationalODE(poles=poles)
            result = result @ _normalized_1d(ode, u_star[B], tol)
        return result


def dcp_solution(F: MaximalNestedSet, fam: AdaptedFamily, cd: CasimirData) -> DCPSolution:
    return DCPSolution(F, blowup_chart(F, fam), cd)


def default_base_point(rs: la.RootSystem) -> np.ndarray:
    """The point where every simple root takes the value 1."""
    return np.ones(rs.rank, dtype=complex)


def _inv(X):
    return X.inv() if isinstance(X, HbarSeries) else np.linalg.inv(X)


def dcp_associator(G: MaximalNestedSet, F: MaximalNestedSet, fam: AdaptedFamily, cd: CasimirData,
                   y0: np.ndarray | None = None):
    y0 = default_base_point(cd.rs) if y0 is None else y0
    if G == F:
        return cd.identity()
    PsiG = dcp_solution(G, fam, cd)(y0)
    PsiF = dcp_solution(F, fam, cd)(y0)
    return _inv(PsiG) @ PsiF


def _diff(a, b) -> float:
    if isinstance(a, HbarSeries) or isinstance(b, HbarSeries):
        a = a if isinstance(a, HbarSeries) else HbarSeries.constant(a, b.order)
        return a.max_abs_diff(b)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _coeff_list(X) -> list[np.ndarray]:
    return list(X.coeffs) if isinstance(X, HbarSeries) else [X]


def dcp_report(rep: la.Representation, nu: complex = 0.1, variant: str = "kappa", points=None,
               tol: float = 1e-7, support_tol: float = 1e-8) -> VerificationReport:
    """Transitivity, base-point independence, support and forgetfulness over all MNS pairs."""
    rs = rep.rs
    data = enumerate_nested_sets(Diagram.from_root_system(rs))
    fam = default_adapted_family(rs, data)
    cd = casimir_data(rep, nu=nu, variant=variant)
    points = points or [default_base_point(rs), np.array([1.0 + 0.3 * k for k in range(rs.rank)], dtype=complex)[::-1]]
    sols = {F: dcp_solution(F, fam, cd) for F in data.mns}
    vals = [{F: s(y) for F, s in sols.items()} for y in points]
    report = VerificationReport()
    mns = data.mns
    phi = lambda G, F, k=0: np.linalg.solve(vals[k][G], vals[k][F])
    trans = 0.0
    for H, G, F in itertools.product(mns, repeat=3):
        trans = max(trans, _diff(phi(H, F), phi(H, G) @ phi(G, F)))
    report.add("transitivity", trans, tol)
    indep = 0.0
    for G, F in itertools.combinations(mns, 2):
        indep = max(indep, _diff(phi(G, F, 0), phi(G, F, 1)))
    report.add("base_point_independence", indep, tol)
    wz, cent, forget = 0.0, 0.0, 0.0
    elementary = []
    for G, F in itertools.permutations(mns, 2):
        pd = mns_pair_data(F, G, data)
        if not pd.elementary:
            continue
        elementary.append((G, F))
        X = phi(G, F)
        wz = max(wz, la.weight_zero_residual(rep, X))
        if variant == "kappa" and pd.zsupp:
            cent = max(cent, la.invariance_residual(rep, X, pd.zsupp))
    report.add("support_weight_zero", wz, support_tol)
    if variant == "kappa":
        report.add("support_central", cent, support_tol)
    compared = 0
    for (G, F), (G2, F2) in itertools.combinations(elementary, 2):
        if (F.elements - G.elements) == (F2.elements - G2.elements) and (G.elements - F.elements) == (
            G2.elements - F2.elements
        ):
            forget = max(forget, _diff(phi(G, F), phi(G2, F2)))
            compared += 1
    report.add("forgetfulness", forget, tol, pairs=compared)
    local = 0.0
    for G, F in elementary:
        local = max(local, _diff(phi(G, F), restricted_associator(G, F, data, rep, nu, variant)))
    report.add("support_locality", local, tol, pairs=len(elementary))
    return report


def _restrict_mns(F: MaximalNestedSet, S: frozenset[int], data: NestedSetData) -> MaximalNestedSet:
    relabel = {v: k for k, v in enumerate(sorted(S))}
    els = frozenset(frozenset(relabel[v] for v in B) for B in F.elements if B <= S)
    (out,) = [M for M in data.mns if M.elements == els]
    return out


def restricted_associator(G: MaximalNestedSet, F: MaximalNestedSet, data: NestedSetData,
                          rep: la.Representation, nu: complex, variant: str = "kappa") -> np.ndarray:
    """Phi_GF of an elementary pair computed with the Casimir connection of g_supp on the restricted rep."""
    S = mns_pair_data(F, G, data).supp
    sub = la.restrict(rep, sorted(S))
    sdata = enumerate_nested_sets(Diagram.from_root_system(sub.rs))
    sfam = default_adapted_family(sub.rs, sdata)
    cd = casimir_data(sub, nu=nu, variant=variant)
    return dcp_associator(_restrict_mns(G, S, sdata), _restrict_mns(F, S, sdata), sfam, cd)


# ---------------------------------------------------------------------------
# Braid group monodromy
# ---------------------------------------------------------------------------


def triple_exponential(rep: la.Representation, i: int) -> np.ndarray:
    e, f = rep.e[i], rep.f[i]
    return sla.expm(e) @ sla.expm(-f) @ sla.expm(e)


def reflect(rs: la.RootSystem, y: np.ndarray, i: int) -> np.ndarray:
    """s_i(y) in simple-root-value coordinates."""
    return np.asarray(y) - y[i] * rs.cartan_matrix[i].astype(float)


def generator_transport(cd: CasimirData, y0: np.ndarray, i: int):
    """Transport from y0 to s_i(y0) along the upper semicircle in alpha_i."""
    rs = cd.rs
    y0 = np.asarray(y0, dtype=complex)
    ai = rs.cartan_matrix[i].astype(float)
    # y(w) = y0 - y0_i (1 - w)/2 a_i  with w on the upper unit semicircle from 1 to -1
    y_a = y0 - y0[i] * ai / 2
    v = y0[i] * ai / 2
    ode = line_ode(cd, y_a, v)
    path = PathInC.arc(0.0, 1.0, 0.0, np.pi)
    for p in ode.pole_points():
        if min(abs(q - p) for q in path.points) < 1e-6:
            raise PathHitsWall(f"generator path for vertex {i} meets a wall")
    return transport(ode, path)


@dataclass
class Monodromy:
    cd: CasimirData
    fam: AdaptedFamily
    y0: np.ndarray
    F: MaximalNestedSet | None = None

    def __post_init__(self):
        self._gen: dict[int, object] = {}
        self._psi = dcp_solution(self.F, self.fam, self.cd)(self.y0) if self.F is not None else None

    def generator(self, i: int):
        if i not in self._gen:
            s = triple_exponential(self.cd.rep, i)
            T = generator_transport(self.cd, self.y0, i)
            X = s @ T
            if self._psi is not None:
                X = _inv(self._psi) @ X @ self._psi
            self._gen[i] = X
        return self._gen[i]

    def word(self, word: Sequence[int]):
        """Image of a braid word; letters are 1-based vertex indices, negative for inverses."""
        out = self.cd.identity()
        for letter in word:
            g = self.generator(abs(letter) - 1)
            out = out @ (g if letter > 0 else _inv(g))
        return out


def braid_monodromy(rep: la.Representation, word: Sequence[int], nu: complex | None = None,
                    order: int | None = None, variant: str = "kappa", F: MaximalNestedSet | None = None,
                    y0: np.ndarray | None = None):
    rs = rep.rs
    cd = casimir_data(rep, nu=nu, order=order, variant=variant)
    fam = default_adapted_family(rs)
    y0 = default_base_point(rs) if y0 is None else y0
    return Monodromy(cd, fam, y0, F).word(word)


def monodromy_report(rep: la.Representation, nu: complex = 0.1, variant: str = "kappa",
                     tol: float = 1e-7) -> VerificationReport:
    """Braid relations, base change between MNS, and the local form of generators."""
    rs = rep.rs
    data = enumerate_nested_sets(Diagram.from_root_system(rs))
    fam = default_adapted_family(rs, data)
    cd = casimir_data(rep, nu=nu, variant=variant)
    y0 = default_base_point(rs)
    report = VerificationReport()
    mon = {F: Monodromy(cd, fam, y0, F) for F in data.mns}
    D = Diagram.from_root_system(rs)
    F0 = data.mns[0]
    for i, j in itertools.combinations(range(rs.rank), 2):
        m = D.label(i, j)
        w1 = [(i + 1) if k % 2 == 0 else (j + 1) for k in range(m)]
        w2 = [(j + 1) if k % 2 == 0 else (i + 1) for k in range(m)]
        report.add(f"braid_{i + 1}{j + 1}", _diff(mon[F0].word(w1), mon[F0].word(w2)), tol)
    hbar = np.pi * 1j * nu
    for G in data.mns:
        for F in data.mns:
            phi = np.linalg.solve(mon[G]._psi, mon[F]._psi)
            for i in range(rs.rank):
                lhs = mon[G].generator(i)
                rhs = phi @ mon[F].generator(i) @ np.linalg.inv(phi)
                report.add(f"base_change_{i + 1}", _diff(lhs, rhs), tol)
    for i in range(rs.rank):
        for G in data.mns:
            if frozenset({i}) in G.elements:
                local = 2.0 * cd.coeffs[rs.simple_roots[i]] / nu * (hbar / 2)
                S = triple_exponential(rep, i) @ sla.expm(local)
                report.add(f"local_generator_{i + 1}", _diff(mon[G].generator(i), S), tol)
    out = VerificationReport()
    seen = set()
    for c in report.checks:
        if c.identity in seen:
            prev = out[c.identity]
            if c.residual > prev.residual:
                out.checks[out.checks.index(prev)] = c
        else:
            seen.add(c.identity)
            out.checks.append(c)
    return out
