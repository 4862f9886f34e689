"""Nested-set combinatorics of Dynkin diagrams and the De Concini-Procesi charts."""

from __future__ import annotations

import itertools
import json
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import BasisDegenerate, ChartSingular, Disconnected, NotAdapted
from .liealg import RootSystem

Sub = frozenset  # a subdiagram is a frozenset of vertices


@dataclass(frozen=True)
class Diagram:
    n: int
    edges: frozenset[frozenset[int]]
    labels: tuple[tuple[tuple[int, int], int], ...] = ()

    @classmethod
    def from_root_system(cls, rs: RootSystem) -> Diagram:
        A = rs.cartan_matrix
        edges, labels = set(), []
        for i, j in itertools.combinations(range(rs.rank), 2):
            if A[i, j] != 0:
                edges.add(frozenset((i, j)))
                prod = A[i, j] * A[j, i]
                labels.append(((i, j), {1: 3, 2: 4, 3: 6}[prod]))
        return cls(rs.rank, frozenset(edges), tuple(labels))

    @classmethod
    def path(cls, n: int) -> Diagram:
        return cls(n, frozenset(frozenset((i, i + 1)) for i in range(n - 1)),
                   tuple(((i, i + 1), 3) for i in range(n - 1)))

    @classmethod
    def from_file(cls, path: str | Path) -> Diagram:
        data = json.loads(Path(path).read_text())
        n = int(data["vertices"])
        edges = frozenset(frozenset(e) for e in data["edges"])
        for e in edges:
            if len(e) != 2:
                raise ValueError("loops are not allowed")
        labels = []
        for key, m in data.get("labels", {}).items():
            i, j = (int(x) for x in key.split("-"))
            labels.append(((i, j), int(m)))
        return cls(n, edges, tuple(labels))

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def label(self, i: int, j: int) -> int:
        if frozenset((i, j)) not in self.edges:
            return 2
        for (a, b), m in self.labels:
            if {a, b} == {i, j}:
                return m
        return 3

    def adjacent(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self.edges

    def orthogonal(self, B1: Iterable[int], B2: Iterable[int]) -> bool:
        B1, B2 = frozenset(B1), frozenset(B2)
        if B1 & B2:
            return False
        return not any(self.adjacent(a, b) for a in B1 for b in B2)

    def compatible(self, B1: Iterable[int], B2: Iterable[int]) -> bool:
        B1, B2 = frozenset(B1), frozenset(B2)
        return B1 <= B2 or B2 <= B1 or self.orthogonal(B1, B2)

    def is_connected(self, B: Iterable[int]) -> bool:
        B = frozenset(B)
        if not B:
            return False
        start = min(B)
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in B:
                if j not in seen and self.adjacent(i, j):
                    seen.add(j)
                    stack.append(j)
        return seen == B

    def components(self, B: Iterable[int]) -> list[frozenset[int]]:
        left = set(B)
        out = []
        while left:
            start = min(left)
            comp = {start}
            stack = [start]
            while stack:
                i = stack.pop()
                for j in list(left):
                    if j not in comp and self.adjacent(i, j):
                        comp.add(j)
                        stack.append(j)
            left -= comp
            out.append(frozenset(comp))
        return sorted(out, key=lambda c: sorted(c))

    @cached_property
    def connected_subdiagrams(self) -> tuple[frozenset[int], ...]:
        subs = []
        for k in range(1, self.n + 1):
            for c in itertools.combinations(range(self.n), k):
                if self.is_connected(c):
                    subs.append(frozenset(c))
        return tuple(subs)


def _key(B: frozenset[int]) -> tuple:
    return (len(B), sorted(B))


@dataclass(frozen=True)
class MaximalNestedSet:
    elements: frozenset[frozenset[int]]
    marked: tuple[tuple[frozenset[int], int], ...]

    def alpha(self, B: frozenset[int]) -> int:
        for C, v in self.marked:
            if C == B:
                return v
        raise KeyError(B)

    def sorted_elements(self) -> list[frozenset[int]]:
        """Elements from small to large (children before parents)."""
        return sorted(self.elements, key=_key)

    def children(self, B: frozenset[int]) -> list[frozenset[int]]:
        """Maximal proper elements of F contained in B."""
        inside = [C for C in self.elements if C < B]
        return [C for C in inside if not any(C < C2 for C2 in inside)]

    def parent(self, B: frozenset[int]) -> frozenset[int] | None:
        above = [C for C in self.elements if B < C]
        return min(above, key=len) if above else None

    def serialize(self) -> list[list[int]]:
        return [sorted(B) for B in sorted(self.elements, key=_key)]

    def __repr__(self) -> str:
        return "MNS(" + ", ".join("{" + ",".join(str(v + 1) for v in b) + "}" for b in self.serialize()) + ")"


def _nested_sets(D: Diagram) -> list[frozenset[frozenset[int]]]:
    full = D.vertices
    subs = [B for B in D.connected_subdiagrams if B != full]
    out = []

    def grow(current: list[frozenset[int]], start: int):
        out.append(frozenset(current + [full]))
        for k in range(start, len(subs)):
            B = subs[k]
            if all(D.compatible(B, C) for C in current):
                grow(current + [B], k + 1)

    grow([], 0)
    return out


def _mark(D: Diagram, F: frozenset[frozenset[int]]) -> tuple[tuple[frozenset[int], int], ...]:
    marks = []
    for B in sorted(F, key=_key):
        inside = [C for C in F if C < B]
        maximal = [C for C in inside if not any(C < C2 for C2 in inside)]
        covered = frozenset().union(*maximal) if maximal else frozenset()
        rest = B - covered
        if len(rest) != 1:
            raise ValueError("not a maximal nested set")
        marks.append((B, next(iter(rest))))
    return tuple(marks)


@dataclass
class NestedSetData:
    diagram: Diagram
    nested_sets: list[frozenset[frozenset[int]]]
    mns: list[MaximalNestedSet]


def enumerate_nested_sets(D: Diagram) -> NestedSetData:
    if not D.is_connected(D.vertices):
        raise Disconnected("nested sets are defined for connected diagrams")
    sets = _nested_sets(D)
    maximal = [F for F in sets if len(F) == D.n]
    mns = [MaximalNestedSet(F, _mark(D, F)) for F in maximal]
    mns.sort(key=lambda F: F.serialize())
    return NestedSetData(D, sorted(sets, key=lambda F: (len(F), sorted(sorted(B) for B in F))), mns)


# ---------------------------------------------------------------------------
# Bracketings (type A)
# ---------------------------------------------------------------------------


def bracketings(n: int) -> list[str]:
    """All complete bracketings of n letters x."""
    if n == 1:
        return ["x"]
    out = []
    for k in range(1, n):
        for left in bracketings(k):
            for right in bracketings(n - k):
                out.append(f"({left}{right})")
    return out


def _bracketing_intervals(s: str) -> frozenset[tuple[int, int]]:
    """Letter intervals [a, b] spanned by the parenthesised groups of s."""
    stack, out, pos = [], set(), 0
    for ch in s:
        if ch == "(":
            stack.append(pos)
        elif ch == ")":
            a = stack.pop()
            out.add((a, pos - 1))
        else:
            pos += 1
    return frozenset(out)


def bracketing_to_mns(s: str) -> frozenset[frozenset[int]]:
    """Nested set on A_{n-1} for a bracketing of n letters.

    A group spanning letters a..b corresponds to the subdiagram of the gaps
    a..b-1 between them.
    """
    return frozenset(frozenset(range(a, b)) for a, b in _bracketing_intervals(s) if b > a)


def mns_to_bracketing(F: MaximalNestedSet, n_letters: int) -> str:
    groups = {(min(B), max(B) + 1) for B in F.elements}

    def build(a: int, b: int) -> str:
        if a == b:
            return "x"
        for k in range(a, b):
            left_ok = a == k or (a, k) in groups
            right_ok = k + 1 == b or (k + 1, b) in groups
            if left_ok and right_ok:
                return "(" + build(a, k) + build(k + 1, b) + ")"
        raise ValueError("not a bracketing nested set")

    return build(0, n_letters - 1)


# ---------------------------------------------------------------------------
# Pairs of maximal nested sets
# ---------------------------------------------------------------------------


@dataclass
class PairData:
    elementary: bool
    supp: frozenset[int] | None
    zsupp: frozenset[int] | None
    chain: list[MaximalNestedSet]


def _pair_supp(D: Diagram, F: MaximalNestedSet, G: MaximalNestedSet):
    common = F.elements & G.elements
    diff = (F.elements ^ G.elements)
    # unique minimal element of F & G containing the symmetric difference
    cands = [B for B in common if all(C <= B for C in diff)]
    B = min(cands, key=len)
    inside = [C for C in common if C < B]
    maximal = [C for C in inside if not any(C < C2 for C2 in inside)]
    zs = frozenset().union(*maximal) if maximal else frozenset()
    return B, zs


def mns_graph(data: NestedSetData) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {i: [] for i in range(len(data.mns))}
    for i, j in itertools.combinations(range(len(data.mns)), 2):
        if len(data.mns[i].elements ^ data.mns[j].elements) == 2:
            adj[i].append(j)
            adj[j].append(i)
    return adj


def mns_pair_data(F: MaximalNestedSet, G: MaximalNestedSet, data: NestedSetData) -> PairData:
    D = data.diagram
    if F == G:
        return PairData(False, None, None, [F])
    supp, zsupp = _pair_supp(D, F, G)
    if len(F.elements ^ G.elements) == 2:
        return PairData(True, supp, zsupp, [F, G])
    # shortest path with lexicographic tie-break on indices
    idx = {M: k for k, M in enumerate(data.mns)}
    adj = mns_graph(data)
    start, goal = idx[F], idx[G]
    prev = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for w in sorted(adj[v]):
            if w not in prev:
                prev[w] = v
                queue.append(w)
    path = []
    v = goal
    while v is not None:
        path.append(data.mns[v])
        v = prev[v]
    return PairData(False, supp, zsupp, path[::-1])


# ---------------------------------------------------------------------------
# Adapted families and charts
# ---------------------------------------------------------------------------


@dataclass
class AdaptedFamily:
    """x_B in h^* for each connected B, stored as simple-root coordinates."""

    rs: RootSystem
    x: dict[frozenset[int], np.ndarray]
    positive: bool = True

    def value(self, B: frozenset[int], y: np.ndarray) -> complex:
        """x_B(y) for y given by its simple-root values (alpha_1(y), ..., alpha_r(y))."""
        return complex(np.asarray(self.x[B], dtype=complex) @ np.asarray(y, dtype=complex))


def check_adapted(fam: AdaptedFamily, data: NestedSetData) -> None:
    for F in data.mns:
        for B in F.elements:
            below = [C for C in F.elements if C <= B]
            M = np.array([fam.x[C] for C in below], dtype=float)
            cols = sorted(B)
            if np.max(np.abs(np.delete(M, cols, axis=1)), initial=0.0) > 1e-12 or abs(
                np.linalg.det(M[:, cols])
            ) < 1e-12:
                raise BasisDegenerate(f"family is not a basis of h*_B for F={F!r}, B={sorted(B)}")


def default_adapted_family(rs: RootSystem, data: NestedSetData | None = None) -> AdaptedFamily:
    D = Diagram.from_root_system(rs)
    data = data or enumerate_nested_sets(D)
    x = {}
    for B in D.connected_subdiagrams:
        x[B] = np.sum([np.array(a, dtype=float) for a in rs.roots_in(B)], axis=0)
    fam = AdaptedFamily(rs, x, True)
    check_adapted(fam, data)
    return fam


@dataclass
class RootPullback:
    """alpha = a * prod_{C in F, C >= B} u_C * P(u) with P(0) = 1."""

    root: tuple[int, ...]
    B: frozenset[int]
    a: float
    monomials: list[tuple[float, frozenset[frozenset[int]]]]  # P = sum c * prod u_C

    def P(self, u: dict[frozenset[int], complex]) -> complex:
        return sum(c * np.prod([u[C] for C in S]) if S else c for c, S in self.monomials)

    def dP(self, u: dict[frozenset[int], complex], C: frozenset[int]) -> complex:
        out = 0j
        for c, S in self.monomials:
            if C in S:
                out += c * np.prod([u[E] for E in S if E != C]) if len(S) > 1 else c
        return out

    def affine_in(self, u: dict[frozenset[int], complex], C: frozenset[int]) -> tuple[complex, complex]:
        """(p0, p1) with P = p0 + p1 u_C when the other coordinates are frozen."""
        p1 = self.dP(u, C)
        u0 = dict(u)
        u0[C] = 0.0
        return self.P(u0), p1


@dataclass
class BlowupChart:
    F: MaximalNestedSet
    fam: AdaptedFamily
    pullbacks: list[RootPullback]

    @cached_property
    def basis(self) -> list[frozenset[int]]:
        return self.F.sorted_elements()

    @cached_property
    def _X(self) -> np.ndarray:
        return np.array([self.fam.x[B] for B in self.basis], dtype=float)

    def x_from_u(self, u: dict[frozenset[int], complex]) -> dict[frozenset[int], complex]:
        return {B: np.prod([u[C] for C in self.F.elements if C >= B]) for B in self.basis}

    def u_from_x(self, x: dict[frozenset[int], complex]) -> dict[frozenset[int], complex]:
        out = {}
        for B in self.basis:
            P = self.F.parent(B)
            out[B] = x[B] / x[P] if P is not None else x[B]
        return out

    def y_from_x(self, x: dict[frozenset[int], complex]) -> np.ndarray:
        """Simple-root values of the point with the given x_B, B in F."""
        vals = np.array([x[B] for B in self.basis], dtype=complex)
        return np.linalg.solve(self._X.astype(complex), vals)

    def x_from_y(self, y: np.ndarray) -> dict[frozenset[int], complex]:
        return {B: self.fam.value(B, y) for B in self.basis}

    def u_from_y(self, y: np.ndarray) -> dict[frozenset[int], complex]:
        return self.u_from_x(self.x_from_y(y))

    def y_from_u(self, u: dict[frozenset[int], complex]) -> np.ndarray:
        return self.y_from_x(self.x_from_u(u))

    def root_value(self, pb: RootPullback, u) -> complex:
        return pb.a * np.prod([u[C] for C in self.F.elements if C >= pb.B]) * pb.P(u)

    def check_point(self, u) -> None:
        for pb in self.pullbacks:
            if abs(pb.P(u)) < 1e-9:
                raise ChartSingular(f"P_alpha vanishes for alpha={pb.root} at the chosen point")


def blowup_chart(F: MaximalNestedSet, fam: AdaptedFamily) -> BlowupChart:
    rs = fam.rs
    basis = F.sorted_elements()
    X = np.array([fam.x[B] for B in basis], dtype=float)
    if abs(np.linalg.det(X)) < 1e-12:
        raise NotAdapted(f"family is not adapted to {F!r}")
    pbs = []
    for alpha in rs.positive_roots:
        # alpha = sum_B c_B x_B over B in F
        c = np.linalg.solve(X.T, np.array(alpha, dtype=float))
        supp = rs.support(alpha)
        B_alpha = min((B for B in basis if supp <= B), key=len)
        coef = dict(zip(basis, c))
        a = coef[B_alpha]
        if abs(a) < 1e-12:
            raise NotAdapted(f"root {alpha} has no x_B component on its minimal element")
        monos = []
        for C, cc in coef.items():
            if abs(cc) < 1e-14:
                continue
            if not C <= B_alpha:
                raise NotAdapted(f"root {alpha} involves x_C outside its minimal element")
            S = frozenset(E for E in basis if C <= E < B_alpha)
            monos.append((cc / a, S))
        pbs.append(RootPullback(tuple(alpha), B_alpha, float(a), monos))
    return BlowupChart(F, fam, pbs)
