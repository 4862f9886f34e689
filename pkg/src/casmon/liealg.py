"""Root systems, matrix representations and the invariant tensors built from them.

Conventions: the Cartan matrix entry a_ij is alpha_j(h_i) with h_i the simple
coroots.  The invariant form is normalized so that short roots have
(alpha, alpha) = 2.  Vertices are 0-based; a subdiagram is a frozenset of
vertices.
"""

from __future__ import annotations

import itertools
import json
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    LegMismatch,
    MixedAlgebras,
    NotCartan,
    RankTooLarge,
    RelationViolation,
    ZeroBracket,
)

MAX_RANK = 3
Root = tuple[int, ...]


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# Root systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RootSystem:
    cartan_matrix: np.ndarray
    d: np.ndarray
    positive_roots: tuple[Root, ...]
    connected: bool = True
    components: tuple[frozenset[int], ...] = ()

    @property
    def rank(self) -> int:
        return self.cartan_matrix.shape[0]

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(range(self.rank))

    @cached_property
    def simple_roots(self) -> tuple[Root, ...]:
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    @cached_property
    def form_roots(self) -> np.ndarray:
        """Gram matrix (alpha_i, alpha_j) = d_i a_ij on simple roots."""
        return self.d[:, None] * self.cartan_matrix.astype(float)

    @cached_property
    def form_h(self) -> np.ndarray:
        """Gram matrix (h_i, h_j) on simple coroots."""
        return self.form_roots / np.outer(self.d, self.d)

    def pairing(self, a: Sequence[float], b: Sequence[float]) -> float:
        """(alpha, beta) for roots given in simple-root coordinates."""
        return float(np.asarray(a, float) @ self.form_roots @ np.asarray(b, float))

    def root_length2(self, a: Sequence[float]) -> float:
        return self.pairing(a, a)

    def t_vector(self, a: Sequence[float]) -> np.ndarray:
        """Coordinates in the h_j basis of t_alpha, the form-dual of alpha."""
        return np.asarray(a, float) * self.d

    def coroot(self, a: Sequence[float]) -> np.ndarray:
        """Coordinates in the h_j basis of the coroot of alpha."""
        return 2.0 * self.t_vector(a) / self.root_length2(a)

    def evaluate(self, a: Sequence[float], x: Sequence[complex]) -> complex:
        """alpha(x) for x in h given in h_j coordinates."""
        return complex(np.asarray(x) @ self.cartan_matrix @ np.asarray(a, float))

    @cached_property
    def fundamental_coweights(self) -> np.ndarray:
        """Row i holds the h_j coordinates of lambda_i^vee."""
        return np.linalg.inv(self.cartan_matrix.astype(float))

    def coweight_norm2(self, i: int) -> float:
        c = self.fundamental_coweights[i]
        return float(c @ self.form_h @ c)

    def roots_in(self, B: Iterable[int]) -> list[Root]:
        """Positive roots supported on the subdiagram B."""
        B = frozenset(B)
        return [a for a in self.positive_roots if all(a[j] == 0 for j in range(self.rank) if j not in B)]

    def support(self, a: Root) -> frozenset[int]:
        return frozenset(j for j in range(self.rank) if a[j] != 0)

    def dual_coordinates(self, x: Sequence[complex]) -> np.ndarray:
        """Simple-root values (alpha_1(x), ..., alpha_r(x)) of x in h."""
        return np.asarray(x) @ self.cartan_matrix


def _symmetrizer(A: np.ndarray) -> np.ndarray:
    r = A.shape[0]
    d = np.zeros(r)
    for comp in _components(A):
        start = min(comp)
        d[start] = 1.0
        stack = [start]
        seen = {start}
        while stack:
            i = stack.pop()
            for j in comp:
                if A[i, j] != 0 and j != i and j not in seen:
                    d[j] = d[i] * A[i, j] / A[j, i]
                    seen.add(j)
                    stack.append(j)
        d[list(comp)] /= min(d[list(comp)])
    B = d[:, None] * A
    if not np.allclose(B, B.T):
        raise NotCartan("matrix is not symmetrizable")
    return d


def _components(A: np.ndarray) -> list[frozenset[int]]:
    r = A.shape[0]
    comps: list[frozenset[int]] = []
    left = set(range(r))
    while left:
        start = left.pop()
        comp = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(r):
                if j not in comp and A[i, j] != 0:
                    comp.add(j)
                    stack.append(j)
        left -= comp
        comps.append(frozenset(comp))
    return sorted(comps, key=min)


def _enumerate_positive_roots(A: np.ndarray) -> list[Root]:
    r = A.shape[0]
    simple = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    roots = set(simple)
    layer = list(simple)
    while layer:
        nxt = []
        for beta in layer:
            for i in range(r):
                # alpha_i-string through beta: beta + alpha_i is a root iff q > 0
                p = 0
                down = list(beta)
                while True:
                    down[i] -= 1
                    if tuple(down) in roots:
                        p += 1
                    else:
                        break
                pairing = sum(beta[j] * A[i, j] for j in range(r))
                q = p - pairing
                if q > 0:
                    up = list(beta)
                    up[i] += 1
                    up = tuple(up)
                    if up not in roots:
                        roots.add(up)
                        nxt.append(up)
        layer = nxt
        if len(roots) > 200:
            raise NotCartan("root system is not of finite type")
    return sorted(roots, key=lambda a: (sum(a), tuple(-x for x in a)))


def build_root_system(cartan_matrix) -> RootSystem:
    A = np.array(cartan_matrix, dtype=int)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise NotCartan("Cartan matrix must be square and nonempty")
    r = A.shape[0]
    if r > MAX_RANK:
        raise RankTooLarge(f"rank {r} exceeds the supported maximum {MAX_RANK}")
    if np.any(np.diag(A) != 2):
        raise NotCartan("diagonal entries must equal 2")
    off = A[~np.eye(r, dtype=bool)]
    if np.any(off > 0):
        raise NotCartan("off-diagonal entries must be nonpositive")
    if np.any((A == 0) != (A.T == 0)):
        raise NotCartan("a_ij = 0 must be equivalent to a_ji = 0")
    d = _symmetrizer(A)
    if np.any(np.linalg.eigvalsh(d[:, None] * A) <= 1e-12):
        raise NotCartan("symmetrized matrix is not positive definite")
    comps = _components(A)
    connected = len(comps) == 1
    if not connected:
        warnings.warn("diagram is disconnected; returned as orthogonal components", stacklevel=2)
    roots = _enumerate_positive_roots(A)
    return RootSystem(A, d, tuple(roots), connected, tuple(comps))


CARTAN = {
    "sl2": [[2]],
    "A1": [[2]],
    "sl3": [[2, -1], [-1, 2]],
    "A2": [[2, -1], [-1, 2]],
    "sl4": [[2, -1, 0], [-1, 2, -1], [0, -1, 2]],
    "A3": [[2, -1, 0], [-1, 2, -1], [0, -1, 2]],
    # alpha_1 short, alpha_2 long
    "B2": [[2, -2], [-1, 2]],
    "G2": [[2, -1], [-3, 2]],
}


def root_system(name: str) -> RootSystem:
    try:
        return build_root_system(CARTAN[name])
    except KeyError:
        raise NotCartan(f"unknown algebra {name!r}") from None


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Representation:
    rs: RootSystem
    e: tuple[np.ndarray, ...]
    f: tuple[np.ndarray, ...]
    h: tuple[np.ndarray, ...]
    factors: tuple[Representation, ...] = ()
    name: str = ""

    @property
    def dim(self) -> int:
        return self.h[0].shape[0]

    @property
    def n_legs(self) -> int:
        return max(1, len(self.factors))

    @cached_property
    def weights(self) -> np.ndarray:
        """Row b holds the Dynkin labels (h_1..h_r eigenvalues) of basis vector b."""
        return np.array([np.real(np.diag(hi)) for hi in self.h]).T

    @cached_property
    def weight_grading(self) -> dict[tuple[int, ...], list[int]]:
        grading: dict[tuple[int, ...], list[int]] = {}
        for b, w in enumerate(np.rint(self.weights).astype(int)):
            grading.setdefault(tuple(w), []).append(b)
        return grading

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def leg(self, i: int, X: np.ndarray) -> np.ndarray:
        """Embed X acting on factor i as 1 x ... x X x ... x 1."""
        if not self.factors:
            if i != 0:
                raise LegMismatch(f"leg {i} requested on a single-factor representation")
            return X
        if not 0 <= i < len(self.factors):
            raise LegMismatch(f"leg {i} out of range for {len(self.factors)} factors")
        out = np.ones((1, 1), dtype=complex)
        for k, V in enumerate(self.factors):
            out = np.kron(out, X if k == i else np.eye(V.dim))
        return out

    def legs_product(self, ops: dict[int, np.ndarray]) -> np.ndarray:
        """Tensor product of operators on chosen factors, identity elsewhere."""
        out = np.ones((1, 1), dtype=complex)
        for k, V in enumerate(self.factors):
            out = np.kron(out, ops.get(k, np.eye(V.dim)))
        return out

    def cartan_element(self, coeffs: Sequence[complex]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, hi in zip(coeffs, self.h):
            out = out + c * hi
        return out

    def twisted(self) -> Representation:
        """Pull back along the Chevalley involution e -> -f, f -> -e, h -> -h."""
        factors = tuple(V.twisted() for V in self.factors)
        return Representation(
            self.rs,
            tuple(-x for x in self.f),
            tuple(-x for x in self.e),
            tuple(-x for x in self.h),
            factors,
            self.name + "^theta",
        )


def relation_residuals(rep: Representation) -> dict[str, float]:
    """Residuals of the Chevalley and Serre relations on rep."""
    A = rep.rs.cartan_matrix
    r = rep.rs.rank
    res: dict[str, float] = {}

    def nrm(x):
        return float(np.max(np.abs(x), initial=0.0))

    for i in range(r):
        for j in range(r):
            res[f"[h{i},e{j}]"] = nrm(_comm(rep.h[i], rep.e[j]) - A[i, j] * rep.e[j])
            res[f"[h{i},f{j}]"] = nrm(_comm(rep.h[i], rep.f[j]) + A[i, j] * rep.f[j])
            res[f"[e{i},f{j}]"] = nrm(_comm(rep.e[i], rep.f[j]) - (rep.h[i] if i == j else 0))
            res[f"[h{i},h{j}]"] = nrm(_comm(rep.h[i], rep.h[j]))
            if i != j:
                for name, gens in (("e", rep.e), ("f", rep.f)):
                    x = gens[j]
                    for _ in range(1 - A[i, j]):
                        x = _comm(gens[i], x)
                    res[f"serre_{name}{i}{j}"] = nrm(x)
    return res


def check_relations(rep: Representation, tol: float = 1e-10) -> None:
    for name, value in relation_residuals(rep).items():
        if value > tol:
            raise RelationViolation(f"relation {name} fails with residual {value:.3e}")
    for hi in rep.h:
        if np.max(np.abs(hi - np.diag(np.diag(hi))), initial=0.0) > tol:
            raise RelationViolation("h generators must be diagonal (weight basis)")


def sl2_irrep(m: int) -> Representation:
    """Irreducible sl2-module V_m on basis v_k = f^(k) v_0."""
    if m < 0:
        raise ValueError("highest weight must be nonnegative")
    n = m + 1
    e = np.zeros((n, n), dtype=complex)
    f = np.zeros((n, n), dtype=complex)
    for k in range(m):
        f[k + 1, k] = k + 1
        e[k, k + 1] = m - k
    h = np.diag([m - 2 * k for k in range(n)]).astype(complex)
    return Representation(root_system("sl2"), (e,), (f,), (h,), (), f"V{m}")


def sln_defining(n: int) -> Representation:
    if n not in (2, 3, 4):
        raise ValueError("sl_n defining representation supported for n in {2, 3, 4}")
    rs = root_system(f"sl{n}")
    es, fs, hs = [], [], []
    for i in range(n - 1):
        e = np.zeros((n, n), dtype=complex)
        e[i, i + 1] = 1
        es.append(e)
        fs.append(e.T.copy())
        h = np.zeros((n, n), dtype=complex)
        h[i, i], h[i + 1, i + 1] = 1, -1
        hs.append(h)
    return Representation(rs, tuple(es), tuple(fs), tuple(hs), (), f"C{n}")


def trivial(rs: RootSystem) -> Representation:
    z = np.zeros((1, 1), dtype=complex)
    return Representation(rs, (z,) * rs.rank, (z,) * rs.rank, (z,) * rs.rank, (), "triv")


def _decode_matrix(m) -> np.ndarray:
    arr = np.array(m, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def encode_matrix(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in M]


def rep_from_file(path: str | Path) -> Representation:
    data = json.loads(Path(path).read_text())
    rs = build_root_system(data["cartan"])
    if data.get("rank", rs.rank) != rs.rank:
        raise RelationViolation("declared rank does not match the Cartan matrix")
    g = data["generators"]
    e, f, h = (tuple(_decode_matrix(m) for m in g[k]) for k in ("e", "f", "h"))
    if not (len(e) == len(f) == len(h) == rs.rank):
        raise RelationViolation("one generator matrix per simple root is required")
    rep = Representation(rs, e, f, h, (), Path(path).stem)
    check_relations(rep)
    return rep


def build_representation(spec: dict | str) -> Representation:
    """Build a representation from {'sl2_irrep': m} | {'sln_defining': n} | {'from_file': path}.

    A string such as 'V2', 'sl3', 'triv:sl2' or a path to a JSON file is also accepted.
    """
    if isinstance(spec, str):
        if spec.startswith("V") and spec[1:].isdigit():
            spec = {"sl2_irrep": int(spec[1:])}
        elif spec.startswith("sl") and spec[2:].isdigit():
            spec = {"sln_defining": int(spec[2:])}
        elif spec.startswith("triv:"):
            return trivial(root_system(spec[5:]))
        else:
            spec = {"from_file": spec}
    if "sl2_irrep" in spec:
        rep = sl2_irrep(int(spec["sl2_irrep"]))
    elif "sln_defining" in spec:
        rep = sln_defining(int(spec["sln_defining"]))
    elif "from_file" in spec:
        return rep_from_file(spec["from_file"])
    else:
        raise ValueError(f"unrecognized representation spec {spec!r}")
    check_relations(rep)
    return rep


def tensor(reps: Sequence[Representation]) -> Representation:
    """Tensor product with generators acting through the iterated coproduct."""
    reps = tuple(reps)
    if not reps:
        raise ValueError("at least one factor is required")
    rs = reps[0].rs
    for V in reps[1:]:
        if V.rs is not rs and not np.array_equal(V.rs.cartan_matrix, rs.cartan_matrix):
            raise MixedAlgebras("all factors must share the root system")
    if len(reps) == 1:
        return reps[0]
    shell = Representation(rs, reps[0].e, reps[0].f, reps[0].h, reps, "")

    def delta(gens_of):
        out = []
        for i in range(rs.rank):
            total = 0
            for k, V in enumerate(reps):
                total = total + shell.leg(k, gens_of(V)[i])
            out.append(np.asarray(total, dtype=complex))
        return tuple(out)

    name = "(" + "x".join(V.name for V in reps) + ")"
    return Representation(
        rs, delta(lambda V: V.e), delta(lambda V: V.f), delta(lambda V: V.h), reps, name
    )


def restrict(rep: Representation, B) -> Representation:
    """rep as a representation of g_B, with the vertices of B relabelled 0, 1, ... in increasing order."""
    B = sorted(_norm_B(B))
    if not B:
        raise ValueError("B must be nonempty")
    if rep.factors:
        return tensor([restrict(V, B) for V in rep.factors])
    A = rep.rs.cartan_matrix[np.ix_(B, B)]
    rs = build_root_system(A)
    pick = lambda gens: tuple(gens[i] for i in B)
    return Representation(rs, pick(rep.e), pick(rep.f), pick(rep.h), (), f"{rep.name}|{B}")


def leg_permutation(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Matrix P with P (v_0 x ... x v_{n-1}) = v_{perm[0]} x ... x v_{perm[n-1]}."""
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    P = np.zeros((total, total))
    out_dims = [dims[p] for p in perm]
    for idx in itertools.product(*[range(d) for d in dims]):
        src = np.ravel_multi_index(idx, dims)
        dst = np.ravel_multi_index(tuple(idx[p] for p in perm), out_dims)
        P[dst, src] = 1.0
    assert len(perm) == n
    return P


# ---------------------------------------------------------------------------
# Root vectors and invariant tensors
# ---------------------------------------------------------------------------


def _addition_chains(rs: RootSystem, alpha: Root) -> list[tuple[int, ...]]:
    """All sequences of simple roots whose partial sums are roots ending at alpha, lex order."""
    roots = set(rs.positive_roots)
    chains: list[tuple[int, ...]] = []

    def grow(current: list[int], chain: tuple[int, ...]):
        if tuple(current) == alpha:
            chains.append(chain)
            return
        for i in range(rs.rank):
            nxt = list(current)
            nxt[i] += 1
            if nxt[i] <= alpha[i] and tuple(nxt) in roots:
                grow(nxt, chain + (i,))

    for i in range(rs.rank):
        if alpha[i] > 0:
            start = [0] * rs.rank
            start[i] = 1
            grow(start, (i,))
    return sorted(set(chains))


def root_vectors(rs: RootSystem, rep: Representation) -> dict[Root, np.ndarray]:
    """Matrices x_alpha for all roots (negative roots keyed by negated tuples).

    x_alpha is the bracket chain [[e_i1, e_i2], ...] and x_-alpha the matching
    chain of f's rescaled so that [x_alpha, x_-alpha] = t_alpha, i.e. the pair
    has unit pairing under the invariant form.
    """
    out: dict[Root, np.ndarray] = {}
    for alpha in rs.positive_roots:
        t = rep.cartan_element(rs.t_vector(alpha))
        tnorm = np.vdot(t, t).real
        neg = tuple(-a for a in alpha)
        if tnorm < 1e-24:
            zero = np.zeros((rep.dim, rep.dim), dtype=complex)
            out[alpha], out[neg] = zero, zero.copy()
            continue
        for chain in _addition_chains(rs, alpha):
            E, F = rep.e[chain[0]], rep.f[chain[0]]
            for i in chain[1:]:
                E = _comm(E, rep.e[i])
                F = _comm(F, rep.f[i])
            c = np.vdot(t, _comm(E, F)) / tnorm
            if abs(c) > 1e-12:
                out[alpha], out[neg] = E, F / c
                break
        else:
            raise ZeroBracket(f"every bracket chain for root {alpha} vanishes")
    return out


def _norm_B(B) -> frozenset[int]:
    return frozenset(B) if B is not None else frozenset()


def cartan_casimir_terms(rs: RootSystem, B) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs (u, v) of h-coordinates with Omega^h_B = sum u (x) v, dual bases of h_B."""
    idx = sorted(_norm_B(B))
    if not idx:
        return []
    G = rs.form_h[np.ix_(idx, idx)]
    Ginv = np.linalg.inv(G)
    terms = []
    for a, i in enumerate(idx):
        u = np.zeros(rs.rank)
        u[i] = 1.0
        v = np.zeros(rs.rank)
        v[idx] = Ginv[a]
        terms.append((u, v))
    return terms


@dataclass(frozen=True, eq=False)
class InvariantTensor:
    kind: str
    B: frozenset[int]
    matrix: np.ndarray
    legs: tuple[int, ...] = ()
    params: dict = field(default_factory=dict)


TWO_LEG = {"Omega_B", "Omega_h_B", "r_B", "Lambda_i"}
ONE_LEG = {"K_alpha", "C_alpha", "K_B", "Casimir_C", "Casimir_h"}


def _two_leg_sum(rep: Representation, legs, pairs) -> np.ndarray:
    i, j = legs
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for X, Y in pairs:
        out += rep.leg(i, X) @ rep.leg(j, Y)
    return out


def _factor(rep: Representation, i: int) -> Representation:
    return rep.factors[i] if rep.factors else rep


def invariant_tensor(
    kind: str,
    B=None,
    rep: Representation | None = None,
    legs: tuple[int, ...] | None = None,
    alpha: Root | None = None,
    vertex: int | None = None,
) -> InvariantTensor:
    """Matrix of an invariant tensor on rep.

    Two-leg kinds act on legs (i, j) of a tensor product.  One-leg kinds act on the
    whole rep, so on a tensor product they give the coproduct image.
    """
    if rep is None:
        raise ValueError("a representation is required")
    rs = rep.rs
    B = _norm_B(B) if B is not None else rs.vertices
    if kind in TWO_LEG:
        if not rep.factors:
            raise LegMismatch(f"{kind} needs a tensor product of at least two factors")
        legs = legs or (0, 1)
        if len(legs) != 2 or legs[0] == legs[1]:
            raise LegMismatch(f"{kind} needs two distinct legs")
        Vi, Vj = _factor(rep, legs[0]), _factor(rep, legs[1])
        pairs: list[tuple[np.ndarray, np.ndarray]] = []
        if kind in ("Omega_B", "Omega_h_B"):
            for u, v in cartan_casimir_terms(rs, B):
                pairs.append((Vi.cartan_element(u), Vj.cartan_element(v)))
        if kind in ("Omega_B", "r_B"):
            xi, xj = root_vectors(rs, Vi), root_vectors(rs, Vj)
            for a in rs.roots_in(B):
                na = tuple(-x for x in a)
                pairs.append((xi[a], xj[na]))
                if kind == "Omega_B":
                    pairs.append((xi[na], xj[a]))
        if kind == "Lambda_i":
            if vertex is None:
                raise ValueError("Lambda_i needs a vertex")
            c = rs.fundamental_coweights[vertex]
            pairs.append((Vi.cartan_element(c) / rs.coweight_norm2(vertex), Vj.cartan_element(c)))
        M = _two_leg_sum(rep, legs, pairs)
        return InvariantTensor(kind, B, M, tuple(legs), {"vertex": vertex})
    if kind not in ONE_LEG:
        raise ValueError(f"unknown invariant tensor kind {kind!r}")
    if kind in ("K_alpha", "C_alpha"):
        if alpha is None:
            raise ValueError(f"{kind} needs a root")
        M = K_alpha(rep, alpha)
        if kind == "C_alpha":
            ha = rep.cartan_element(rs.coroot(alpha))
            M = M + rs.root_length2(alpha) / 4.0 * ha @ ha
        return InvariantTensor(kind, rs.support(alpha), M, (), {"alpha": alpha})
    if kind == "K_B":
        return InvariantTensor(kind, B, K_B(rep, B))
    if kind == "Casimir_h":
        return InvariantTensor(kind, B, casimir_h(rep, B))
    return InvariantTensor(kind, B, casimir(rep, B))


def K_alpha(rep: Representation, alpha: Root) -> np.ndarray:
    x = root_vectors(rep.rs, rep)
    na = tuple(-a for a in alpha)
    return x[alpha] @ x[na] + x[na] @ x[alpha]


def K_B(rep: Representation, B) -> np.ndarray:
    x = root_vectors(rep.rs, rep)
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for a in rep.rs.roots_in(B):
        na = tuple(-c for c in a)
        out += x[a] @ x[na] + x[na] @ x[a]
    return out


def casimir_h(rep: Representation, B) -> np.ndarray:
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for u, v in cartan_casimir_terms(rep.rs, B):
        out += rep.cartan_element(u) @ rep.cartan_element(v)
    return out


def casimir(rep: Representation, B=None) -> np.ndarray:
    """Casimir operator of g_B (B defaults to the whole diagram)."""
    B = rep.rs.vertices if B is None else B
    return K_B(rep, B) + casimir_h(rep, B)


def C_alpha(rep: Representation, alpha: Root) -> np.ndarray:
    return invariant_tensor("C_alpha", rep=rep, alpha=alpha).matrix


def omega(rep: Representation, legs=(0, 1), B=None) -> np.ndarray:
    return invariant_tensor("Omega_B", B, rep, legs).matrix


def omega_h(rep: Representation, legs=(0, 1), B=None) -> np.ndarray:
    return invariant_tensor("Omega_h_B", B, rep, legs).matrix


def r_matrix(rep: Representation, legs=(0, 1), B=None) -> np.ndarray:
    return invariant_tensor("r_B", B, rep, legs).matrix


def Lambda(rep: Representation, vertex: int, legs=(0, 1)) -> np.ndarray:
    return invariant_tensor("Lambda_i", None, rep, legs, vertex=vertex).matrix


def coweight_matrix(rep: Representation, vertex: int) -> np.ndarray:
    return rep.cartan_element(rep.rs.fundamental_coweights[vertex])


def weight_zero_residual(rep: Representation, M: np.ndarray) -> float:
    """Size of the part of M that does not commute with the Cartan action."""
    return max(float(np.max(np.abs(_comm(hi, M)), initial=0.0)) for hi in rep.h)


def invariance_residual(rep: Representation, M: np.ndarray, B=None) -> float:
    """max |[x, M]| over the Chevalley generators of g_B acting on rep."""
    B = rep.rs.vertices if B is None else frozenset(B)
    res = 0.0
    for i in B:
        for X in (rep.e[i], rep.f[i], rep.h[i]):
            res = max(res, float(np.max(np.abs(_comm(X, M)), initial=0.0)))
    return res


def levi_invariance_residual(rep: Representation, M: np.ndarray, B) -> float:
    """max |[x, M]| over the Levi subalgebra g_B + h."""
    res = invariance_residual(rep, M, B)
    return max(res, weight_zero_residual(rep, M))
