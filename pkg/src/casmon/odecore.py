"""Linear ODE machinery: truncated hbar-series, Taylor transport, regular singular
solutions, the Laplace-contour solver for dh/dz = lambda h + k/z, and formal
solutions at an irregular singularity of Poincare rank one.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad_vec

from .errors import (
    DivergentTail,
    InvalidCase,
    NoSolution,
    PoleTooClose,
    RadiusExceeded,
    Resonant,
    ResonantWeight,
    ToleranceNotMet,
)

NU_TO_HBAR = 1.0 / (np.pi * 1j)


# ---------------------------------------------------------------------------
# Truncated power series in hbar with matrix coefficients
# ---------------------------------------------------------------------------


class HbarSeries:
    """sum_{k<=N} c_k hbar^k with complex array coefficients, truncated at order N."""

    __array_priority__ = 100

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 0:
            c = c.reshape(1)
        self.coeffs = c

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, order: int, shape) -> HbarSeries:
        shape = (shape, shape) if isinstance(shape, int) else tuple(shape)
        return cls(np.zeros((order + 1,) + shape, dtype=complex))

    @classmethod
    def identity(cls, order: int, dim: int) -> HbarSeries:
        s = cls.zeros(order, dim)
        s.coeffs[0] = np.eye(dim)
        return s

    @classmethod
    def constant(cls, M, order: int) -> HbarSeries:
        M = np.asarray(M, dtype=complex)
        s = cls.zeros(order, M.shape)
        s.coeffs[0] = M
        return s

    @classmethod
    def monomial(cls, M, k: int, order: int) -> HbarSeries:
        M = np.asarray(M, dtype=complex)
        s = cls.zeros(order, M.shape)
        if k <= order:
            s.coeffs[k] = M
        return s

    @classmethod
    def from_lift(cls, L: np.ndarray, order: int) -> HbarSeries:
        """Inverse of lift: read the first block column of a block-Toeplitz matrix."""
        d = L.shape[0] // (order + 1)
        return cls(np.array([L[k * d:(k + 1) * d, :d] for k in range(order + 1)]))

    # basic data -------------------------------------------------------
    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coeffs[k]

    def copy(self) -> HbarSeries:
        return HbarSeries(self.coeffs.copy())

    def truncate(self, order: int) -> HbarSeries:
        if order <= self.order:
            return HbarSeries(self.coeffs[: order + 1].copy())
        extra = np.zeros((order - self.order,) + self.shape, dtype=complex)
        return HbarSeries(np.concatenate([self.coeffs, extra]))

    def evaluate(self, hbar: complex) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * hbar + c
        return out

    def substitute_scale(self, s: complex) -> HbarSeries:
        """The series in hbar' = hbar / s, i.e. coefficient k times s**k."""
        return HbarSeries(self.coeffs * (s ** np.arange(self.order + 1)).reshape((-1,) + (1,) * len(self.shape)))

    def norms(self) -> np.ndarray:
        return np.array([float(np.max(np.abs(c), initial=0.0)) for c in self.coeffs])

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> HbarSeries:
        """Apply a linear map coefficientwise."""
        return HbarSeries(np.array([fn(c) for c in self.coeffs]))

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> HbarSeries:
        if isinstance(other, HbarSeries):
            return other
        arr = np.asarray(other, dtype=complex)
        return HbarSeries.constant(np.broadcast_to(arr, self.shape) if arr.ndim == 0 else arr, self.order)

    def _common(self, other: HbarSeries) -> int:
        return min(self.order, other.order)

    def __add__(self, other) -> HbarSeries:
        o = self._coerce(other)
        n = self._common(o)
        return HbarSeries(self.coeffs[: n + 1] + o.coeffs[: n + 1])

    __radd__ = __add__

    def __neg__(self) -> HbarSeries:
        return HbarSeries(-self.coeffs)

    def __sub__(self, other) -> HbarSeries:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> HbarSeries:
        return self._coerce(other) - self

    def __mul__(self, other) -> HbarSeries:
        if isinstance(other, HbarSeries):
            if other.shape == ():
                n = self._common(other)
                out = np.zeros((n + 1,) + self.shape, dtype=complex)
                for k in range(n + 1):
                    for j in range(k + 1):
                        out[k] += other.coeffs[j] * self.coeffs[k - j]
                return HbarSeries(out)
            if self.shape == ():
                return other * self
            raise TypeError("use @ for matrix products of series")
        return HbarSeries(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> HbarSeries:
        return HbarSeries(self.coeffs / other)

    def __matmul__(self, other) -> HbarSeries:
        if not isinstance(other, HbarSeries):
            other = np.asarray(other, dtype=complex)
            return HbarSeries(self.coeffs @ other)
        n = self._common(other)
        out = np.zeros((n + 1, self.shape[0], other.shape[-1]), dtype=complex)
        for k in range(n + 1):
            for j in range(k + 1):
                out[k] += self.coeffs[j] @ other.coeffs[k - j]
        return HbarSeries(out)

    def __rmatmul__(self, other) -> HbarSeries:
        other = np.asarray(other, dtype=complex)
        return HbarSeries(other @ self.coeffs)

    def shift(self, k: int = 1) -> HbarSeries:
        """Multiply by hbar**k (keeping the truncation order)."""
        out = np.zeros_like(self.coeffs)
        if k <= self.order:
            out[k:] = self.coeffs[: self.order + 1 - k]
        return HbarSeries(out)

    def inv(self) -> HbarSeries:
        c0inv = np.linalg.inv(self.coeffs[0])
        out = np.zeros_like(self.coeffs)
        out[0] = c0inv
        for k in range(1, self.order + 1):
            acc = np.zeros(self.shape, dtype=complex)
            for j in range(1, k + 1):
                acc += self.coeffs[j] @ out[k - j]
            out[k] = -c0inv @ acc
        return HbarSeries(out)

    def exp(self) -> HbarSeries:
        """exp of a series with vanishing constant term (exact truncation)."""
        if np.max(np.abs(self.coeffs[0]), initial=0.0) > 0:
            raise ValueError("exp requires a vanishing hbar^0 coefficient")
        d = self.shape[0]
        out = HbarSeries.identity(self.order, d)
        term = HbarSeries.identity(self.order, d)
        for k in range(1, self.order + 1):
            term = (term @ self) / k
            out = out + term
        return out

    def log(self) -> HbarSeries:
        """log of a series with identity constant term."""
        d = self.shape[0]
        X = self - np.eye(d)
        if np.max(np.abs(X.coeffs[0]), initial=0.0) > 1e-12:
            raise ValueError("log requires an identity hbar^0 coefficient")
        out = HbarSeries.zeros(self.order, d)
        term = HbarSeries.identity(self.order, d)
        for k in range(1, self.order + 1):
            term = term @ X
            out = out + term * ((-1) ** (k + 1) / k)
        return out

    def kron(self, other) -> HbarSeries:
        if not isinstance(other, HbarSeries):
            other = np.asarray(other, dtype=complex)
            return HbarSeries(np.array([np.kron(c, other) for c in self.coeffs]))
        n = self._common(other)
        out = []
        for k in range(n + 1):
            acc = 0
            for j in range(k + 1):
                acc = acc + np.kron(self.coeffs[j], other.coeffs[k - j])
            out.append(acc)
        return HbarSeries(np.array(out))

    def rkron(self, other) -> HbarSeries:
        """other (x) self for a constant matrix other."""
        other = np.asarray(other, dtype=complex)
        return HbarSeries(np.array([np.kron(other, c) for c in self.coeffs]))

    def conj(self, P: np.ndarray) -> HbarSeries:
        """P X P^{-1} for a constant invertible P (permutations mostly)."""
        Pinv = np.linalg.inv(P)
        return HbarSeries(P @ self.coeffs @ Pinv)

    def lift(self) -> np.ndarray:
        """Block lower-triangular Toeplitz matrix; products of lifts are lifts of products."""
        N = self.order
        d0, d1 = self.shape
        L = np.zeros(((N + 1) * d0, (N + 1) * d1), dtype=complex)
        for i in range(N + 1):
            for j in range(i + 1):
                L[i * d0:(i + 1) * d0, j * d1:(j + 1) * d1] = self.coeffs[i - j]
        return L

    def max_abs_diff(self, other) -> float:
        o = self._coerce(other)
        n = self._common(o)
        return float(np.max(np.abs(self.coeffs[: n + 1] - o.coeffs[: n + 1]), initial=0.0))

    def per_order_diff(self, other) -> np.ndarray:
        o = self._coerce(other)
        n = self._common(o)
        return np.array([float(np.max(np.abs(self.coeffs[k] - o.coeffs[k]), initial=0.0)) for k in range(n + 1)])

    def __repr__(self) -> str:
        return f"HbarSeries(order={self.order}, shape={self.shape}, norms={np.round(self.norms(), 6).tolist()})"


def nu_series(M, order: int) -> HbarSeries:
    """The series nu * M with nu = hbar / (pi i)."""
    return HbarSeries.monomial(np.asarray(M, dtype=complex) * NU_TO_HBAR, 1, order)


def hbar_series(M, order: int) -> HbarSeries:
    return HbarSeries.monomial(M, 1, order)


def as_lift(M, order: int | None = None) -> np.ndarray:
    """Lift a coefficient (matrix or series) to its block-Toeplitz form."""
    if isinstance(M, HbarSeries):
        if order is not None and M.order != order:
            M = M.truncate(order)
        return M.lift()
    M = np.asarray(M, dtype=complex)
    if order is None:
        return M
    return HbarSeries.constant(M, order).lift()


def expm_log(M: np.ndarray, logz: complex) -> np.ndarray:
    """z**M = exp(M log z) for a prescribed determination of log z."""
    return sla.expm(M * logz)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathInC:
    """Polygonal approximation of a path: consecutive chords of the listed points."""

    points: tuple[complex, ...]
    clearance: float = 0.0

    @classmethod
    def segment(cls, a: complex, b: complex) -> PathInC:
        return cls((complex(a), complex(b)))

    @classmethod
    def arc(cls, center: complex, radius: float, theta0: float, theta1: float, n: int | None = None) -> PathInC:
        span = abs(theta1 - theta0)
        n = n or max(8, int(np.ceil(span / (np.pi / 64))))
        th = np.linspace(theta0, theta1, n + 1)
        return cls(tuple(complex(center + radius * np.exp(1j * t)) for t in th))

    @classmethod
    def circle(cls, center: complex, radius: float, start: float = 0.0) -> PathInC:
        return cls.arc(center, radius, start, start + 2 * np.pi)

    @classmethod
    def polyline(cls, pts: Sequence[complex]) -> PathInC:
        return cls(tuple(complex(p) for p in pts))

    def __add__(self, other: PathInC) -> PathInC:
        if abs(self.points[-1] - other.points[0]) > 1e-12:
            raise ValueError("paths must share an endpoint to concatenate")
        return PathInC(self.points + other.points[1:], max(self.clearance, other.clearance))

    def reversed(self) -> PathInC:
        return PathInC(self.points[::-1], self.clearance)

    @property
    def start(self) -> complex:
        return self.points[0]

    @property
    def end(self) -> complex:
        return self.points[-1]


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    ab = b - a
    if ab == 0:
        return abs(p - a)
    t = ((p - a) * np.conj(ab)).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(a + t * ab - p)


# ---------------------------------------------------------------------------
# Rational linear ODEs and Taylor transport
# ---------------------------------------------------------------------------


@dataclass
class RationalODE:
    """dY/dz = L(z) Y - Y R(z), with L, R sums of simple poles and polynomials.

    poles: list of (p, A) giving A/(z - p) in L.  poly: coefficients [A0, A1, ...]
    giving A0 + A1 z + ... in L.  right_poles / right_poly describe R the same way.
    A commutator-style constant M is recorded by adding M to both poly lists.
    Coefficients may be matrices or HbarSeries; series are handled by lifting.
    """

    poles: list[tuple[complex, object]] = field(default_factory=list)
    poly: list[object] = field(default_factory=list)
    right_poles: list[tuple[complex, object]] = field(default_factory=list)
    right_poly: list[object] = field(default_factory=list)

    @classmethod
    def with_commutator(cls, M, poles=(), right_poles=(), poly=(), right_poly=()) -> RationalODE:
        poly = list(poly) or [0 * np.asarray(M)]
        right_poly = list(right_poly) or [0 * np.asarray(M)]
        poly[0] = poly[0] + M
        right_poly[0] = right_poly[0] + M
        return cls(list(poles), poly, list(right_poles), right_poly)

    def _all(self):
        return [A for _, A in self.poles + self.right_poles] + list(self.poly) + list(self.right_poly)

    @property
    def series_order(self) -> int | None:
        orders = [A.order for A in self._all() if isinstance(A, HbarSeries)]
        return min(orders) if orders else None

    @property
    def has_right(self) -> bool:
        return bool(self.right_poles or self.right_poly)

    def pole_points(self) -> list[complex]:
        pts = {complex(p) for p, _ in self.poles + self.right_poles}
        return sorted(pts, key=lambda z: (z.real, z.imag))

    def _lifted(self, which: str, order: int | None):
        poles = self.poles if which == "left" else self.right_poles
        poly = self.poly if which == "left" else self.right_poly
        return [(complex(p), as_lift(A, order)) for p, A in poles], [as_lift(A, order) for A in poly]

    def left(self, order: int | None = None) -> _LiftedODE:
        return _LiftedODE(*self._lifted("left", order))

    def right(self, order: int | None = None) -> _LiftedODE:
        return _LiftedODE(*self._lifted("right", order))

    def residue(self, p: complex, which: str = "left"):
        poles = self.poles if which == "left" else self.right_poles
        total = None
        for q, A in poles:
            if abs(q - p) < 1e-14:
                total = A if total is None else total + A
        return total

    def evaluate(self, z: complex, which: str = "left", order: int | None = None) -> np.ndarray:
        return (self.left(order) if which == "left" else self.right(order))(z)


@dataclass
class _LiftedODE:
    poles: list[tuple[complex, np.ndarray]]
    poly: list[np.ndarray]

    @property
    def dim(self) -> int:
        for _, A in self.poles:
            return A.shape[0]
        for A in self.poly:
            if np.ndim(A) == 2:
                return A.shape[0]
        raise ValueError("ODE has no matrix coefficients")

    def __call__(self, z: complex) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for p, A in self.poles:
            out += A / (z - p)
        for k, A in enumerate(self.poly):
            out = out + A * z ** k
        return out

    def taylor_coeffs(self, z0: complex, P: int) -> np.ndarray:
        """Coefficients A_k of A(z0 + w) = sum A_k w^k for k < P."""
        d = self.dim
        out = np.zeros((P, d, d), dtype=complex)
        for p, A in self.poles:
            r = 1.0 / (z0 - p)
            scal = r * (-r) ** np.arange(P)
            out += scal[:, None, None] * A[None]
        npoly = len(self.poly)
        for k in range(min(P, npoly)):
            # d^k/dw^k of sum_j A_j (z0 + w)^j / k!
            acc = np.zeros((d, d), dtype=complex)
            for j in range(k, npoly):
                acc = acc + math.comb(j, k) * z0 ** (j - k) * self.poly[j]
            out[k] += acc
        return out


def _min_pole_distance_segment(a: complex, b: complex, poles: Sequence[complex]) -> float:
    if not poles:
        return np.inf
    return min(_segment_distance(a, b, p) for p in poles)


def _taylor_propagate(ode: _LiftedODE, poles: Sequence[complex], a: complex, b: complex, tol: float,
                      P: int = 30, T: np.ndarray | None = None) -> np.ndarray:
    """Transport matrix of dY/dz = A Y along the straight segment a -> b.

    Around each centre z0 a pole term M/(z - p) equals r M / (1 + r w) with
    r = 1/(z0 - p), so with Z = Y / (1 + r w) the Taylor recursion costs one
    product per pole and per polynomial coefficient.
    """
    d = ode.dim
    T = np.eye(d, dtype=complex) if T is None else T
    z = complex(a)
    b = complex(b)
    steps = 0
    npoly = len(ode.poly)
    while abs(b - z) > 1e-15 * max(1.0, abs(b)):
        rs = [1.0 / (z - p) for p, _ in ode.poles]
        Ms = [r * A for r, (_, A) in zip(rs, ode.poles)]
        polys = []
        for k in range(npoly):
            acc = 0
            for j in range(k, npoly):
                acc = acc + math.comb(j, k) * z ** (j - k) * ode.poly[j]
            polys.append(np.asarray(acc, dtype=complex))
        Y = np.zeros((P + 1, d, d), dtype=complex)
        Y[0] = np.eye(d)
        Z = [np.zeros((d, d), dtype=complex) for _ in rs]
        for k in range(P):
            acc = np.zeros((d, d), dtype=complex)
            for i, r in enumerate(rs):
                Z[i] = Y[k] - r * Z[i]
                acc += Ms[i] @ Z[i]
            for j, Aj in enumerate(polys):
                if j <= k and np.ndim(Aj) == 2:
                    acc += Aj @ Y[k - j]
            Y[k + 1] = acc / (k + 1)
        dist = min((abs(z - p) for p in poles), default=np.inf)
        hmax = 0.5 * dist
        nP = np.max(np.abs(Y[P])) + 1e-300
        nP1 = np.max(np.abs(Y[P - 1])) + 1e-300
        herr = min((tol / nP) ** (1.0 / P), (tol / nP1) ** (1.0 / (P - 1)))
        h = min(hmax, herr, abs(b - z))
        if h < 1e-13 * max(1.0, abs(z)):
            raise ToleranceNotMet(f"step size underflow near z = {z}")
        step = h * (b - z) / abs(b - z)
        if abs(b - z) - h < 1e-15 * max(1.0, abs(b)):
            step = b - z
        E = Y[P].copy()
        for k in range(P - 1, -1, -1):
            E = Y[k] + step * E
        T = E @ T
        z = z + step
        steps += 1
        if steps > 200000:
            raise ToleranceNotMet("too many steps")
    return T


def transport_left(ode: _LiftedODE, path: PathInC, tol: float = 1e-13, poles: Sequence[complex] = ()) -> np.ndarray:
    poles = list(poles) or [p for p, _ in ode.poles]
    clearance = path.clearance
    T = np.eye(ode.dim, dtype=complex)
    for a, b in zip(path.points[:-1], path.points[1:]):
        dist = _min_pole_distance_segment(a, b, poles)
        if dist <= max(clearance, 1e-10):
            raise PoleTooClose(f"segment {a} -> {b} passes within {dist:.2e} of a pole")
        T = _taylor_propagate(ode, poles, a, b, tol, T=T)
    return T


def transport(ode: RationalODE, path: PathInC, tol: float = 1e-13):
    """Transport Y(end) = T Y(start) of dY/dz = L(z) Y.

    If ode has right-multiplication terms the pair (U, V) is returned, the
    solution map being Y -> U Y V^{-1}.  Series coefficients give series results.
    """
    order = ode.series_order
    poles = ode.pole_points()
    U = transport_left(ode.left(order), path, tol, poles)
    if order is not None:
        U = HbarSeries.from_lift(U, order)
    if not ode.has_right:
        return U
    V = transport_left(ode.right(order), path, tol, poles)
    if order is not None:
        V = HbarSeries.from_lift(V, order)
    return U, V


# ---------------------------------------------------------------------------
# Regular singular points
# ---------------------------------------------------------------------------


@dataclass
class RegularSingularSolution:
    """Psi(z) = H(z) (branch(z - p))**Res with H holomorphic near p and H(p) = 1."""

    p: complex
    residue: np.ndarray
    H_coeffs: np.ndarray
    radius: float
    ode: RationalODE
    order: int | None
    sign: int = 1

    def _wrap(self, M: np.ndarray):
        return HbarSeries.from_lift(M, self.order) if self.order is not None else M

    def H_lift(self, z: complex) -> np.ndarray:
        w = z - self.p
        if abs(w) > self.radius:
            raise RadiusExceeded(f"|z - p| = {abs(w):.3g} exceeds the certified radius {self.radius:.3g}")
        out = np.zeros_like(self.H_coeffs[0])
        for c in self.H_coeffs[::-1]:
            out = out * w + c
        return out

    def H(self, z: complex):
        return self._wrap(self.H_lift(z))

    def power_lift(self, z: complex, logw: complex | None = None) -> np.ndarray:
        w = self.sign * (z - self.p)
        logw = np.log(w) if logw is None else logw
        return expm_log(self.residue, logw)

    def psi_lift(self, z: complex, logw: complex | None = None) -> np.ndarray:
        return self.H_lift(z) @ self.power_lift(z, logw)

    def psi(self, z: complex, logw: complex | None = None):
        """Evaluate Psi at z, using principal log of sign*(z-p) unless logw is given."""
        return self._wrap(self.psi_lift(z, logw))


def regular_singular_solution(ode: RationalODE, p: complex, tol: float = 1e-14, radius: float | None = None,
                              sign: int = 1, max_terms: int = 600) -> RegularSingularSolution:
    """Normalized solution at a regular singular point of dY/dz = L(z) Y.

    H is computed by the Frobenius recursion (n - ad Res) H_n = sum_k A_k H_{n-1-k}.
    sign = -1 uses (p - z)**Res in place of (z - p)**Res.
    """
    order = ode.series_order
    left = ode.left(order)
    p = complex(p)
    R = sum((A for q, A in left.poles if abs(q - p) < 1e-14), np.zeros((left.dim, left.dim), complex))
    others = [q for q, _ in left.poles if abs(q - p) >= 1e-14]
    conv = min((abs(q - p) for q in others), default=np.inf)
    radius = 0.5 * conv if radius is None else radius
    if radius >= conv and np.isfinite(conv):
        raise RadiusExceeded("requested radius reaches another singularity")
    d = left.dim
    if order is None:
        ev = np.linalg.eigvals(R)
        diffs = ev[:, None] - ev[None, :]
        if np.any(np.abs(diffs.real - np.round(diffs.real)) + np.abs(diffs.imag) < 1e-9) and np.any(
            np.abs(diffs) >= 1 - 1e-9
        ):
            raise Resonant("residue eigenvalues differ by a nonzero integer")
    # Taylor coefficients of the regular part around p
    reg = _LiftedODE([(q, A) for q, A in left.poles if abs(q - p) >= 1e-14], left.poly)
    eval_r = radius if np.isfinite(radius) else 1.0
    coeffs = [np.eye(d, dtype=complex)]
    A_reg: list[np.ndarray] = []
    small = 0
    n = 0
    while n < max_terms:
        n += 1
        while len(A_reg) < n:
            A_reg = list(reg.taylor_coeffs(p, 2 * n + 8)) if reg.poles or reg.poly else [np.zeros((d, d))] * (2 * n + 8)
        rhs = np.zeros((d, d), dtype=complex)
        for k in range(n):
            rhs += A_reg[k] @ coeffs[n - 1 - k]
        # (n - ad R) H_n = rhs  <=>  (R - n) H_n - H_n R = -rhs
        Hn = sla.solve_sylvester(R - n * np.eye(d), -R, -rhs)
        coeffs.append(Hn)
        size = np.max(np.abs(Hn)) * eval_r ** n
        small = small + 1 if size < tol * 1e-2 else 0
        if small >= 3:
            break
    else:
        raise RadiusExceeded("Frobenius series did not converge on the requested radius")
    return RegularSingularSolution(p, R, np.array(coeffs), radius, ode, order, sign)


# ---------------------------------------------------------------------------
# The basic irregular ODE dh/dz = lambda h + k(z)/z
# ---------------------------------------------------------------------------


@dataclass
class LaplaceSolution:
    lam: float
    k: Callable[[complex], np.ndarray]
    R: float
    halfplane: int
    theta: float
    tol: float

    def contour(self):
        """phi(s) and phi'(s) for the reversed contour from 0 to infinity."""
        sgn = self.halfplane
        ray = np.exp(1j * sgn * self.theta)

        def phi(s):
            return sgn * 1j * s if s <= self.R else sgn * 1j * self.R + (s - self.R) * ray

        def dphi(s):
            return sgn * 1j if s <= self.R else ray

        return phi, dphi

    def __call__(self, z: complex) -> np.ndarray:
        z = complex(z)
        if abs(z) <= self.R or np.sign(z.imag) != self.halfplane:
            raise ValueError("z must lie in the half-plane region |z| > R")
        phi, dphi = self.contour()

        def integrand(s):
            t = phi(s)
            w = z + t
            return np.exp(-self.lam * t) * np.asarray(self.k(w), dtype=complex) / w * dphi(s)

        parts = []
        if self.R > 0:
            v, _ = quad_vec(integrand, 0.0, self.R, epsabs=self.tol * 1e-2, epsrel=1e-13, limit=400)
            parts.append(v)
        v, _ = quad_vec(integrand, self.R, np.inf, epsabs=self.tol * 1e-2, epsrel=1e-13, limit=2000)
        if not np.all(np.isfinite(v)):
            raise DivergentTail("Laplace integral diverges along the chosen ray")
        parts.append(v)
        return -sum(parts)


def default_theta(lam: float, k0_zero: bool) -> float:
    if lam > 0:
        return np.pi / 4
    if lam < 0:
        return 3 * np.pi / 4
    return np.pi / 2


def laplace_solve(lam: float, k: Callable[[complex], np.ndarray], k_coeffs: Sequence = (), R: float = 1.0,
                  halfplane: int = 1, tol: float = 1e-12, theta: float | None = None) -> LaplaceSolution:
    """Solution of dh/dz = lam h + k(z)/z decaying at infinity in the half-plane.

    k_coeffs are the asymptotic coefficients k_0, k_1, ... of k at infinity; only
    k_0 matters for the case analysis.
    """
    lam = float(np.real(lam))
    k0 = np.asarray(k_coeffs[0]) if len(k_coeffs) else None
    k0_zero = k0 is None or np.max(np.abs(k0), initial=0.0) == 0
    if lam == 0 and not k0_zero:
        raise NoSolution("k_0 != 0 and lambda = 0: no solution decays at infinity")
    if theta is None:
        theta = default_theta(lam, k0_zero)
    else:
        c = np.cos(theta)
        ok = (0 < theta < np.pi) and (lam * c > 0 or (k0_zero and lam * c >= 0) or (k0_zero and abs(c) < 1e-15))
        if not ok:
            raise DivergentTail(f"contour angle {theta} is not admissible for lambda = {lam}")
    return LaplaceSolution(lam, k, float(R), 1 if halfplane >= 0 else -1, float(theta), tol)


def asymptotic_tail(lam: float, k_coeffs: Sequence, n: int) -> list[np.ndarray]:
    """Coefficients h_1..h_n of h ~ sum h_m z^{-m} at z = infinity."""
    ks = [np.asarray(k, dtype=complex) for k in k_coeffs]
    zero = np.zeros_like(ks[0]) if ks else np.zeros(())
    kk = lambda p: ks[p] if p < len(ks) else zero
    if lam == 0:
        if np.max(np.abs(kk(0)), initial=0.0) != 0:
            raise InvalidCase("lambda = 0 with k_0 != 0 has no decaying solution")
        return [-kk(m) / m for m in range(1, n + 1)]
    out = []
    for m in range(1, n + 1):
        acc = zero.copy()
        for p in range(m):
            acc = acc + kk(p) / math.factorial(p) / (-lam) ** (m - p)
        out.append(math.factorial(m - 1) * acc)
    return out


def asymptotic_tail_lambda(k_coeffs: Sequence, z: complex, n: int) -> list[np.ndarray]:
    """Coefficients a_1..a_n of h ~ sum a_m lam^{-m} as lam -> infinity.

    a_m = -g^{(m-1)}(z) with g = k/z, computed from the Laurent series of k.
    """
    ks = [np.asarray(k, dtype=complex) for k in k_coeffs]
    out = []
    for m in range(1, n + 1):
        j = m - 1
        acc = np.zeros_like(ks[0])
        for q, kq in enumerate(ks):
            # d^j/dz^j z^{-(q+1)} = (-1)^j (q+j)!/q! z^{-(q+1+j)}
            acc = acc + kq * (-1) ** j * math.factorial(q + j) / math.factorial(q) * z ** (-(q + 1 + j))
        out.append(-acc)
    return out


# ---------------------------------------------------------------------------
# Rank-one irregular singularity: dH/dw = [N, H] + P(w) H - H Q(w)
# ---------------------------------------------------------------------------


def _laurent_at_infinity(poles: Sequence[tuple[complex, HbarSeries]], m_max: int, order: int, d: int) -> np.ndarray:
    """Coefficients X[m, n] of w^{-m} hbar^n for sum A/(w - p), m = 0..m_max."""
    X = np.zeros((m_max + 1, order + 1, d, d), dtype=complex)
    for p, A in poles:
        A = A if isinstance(A, HbarSeries) else HbarSeries.constant(A, order)
        A = A.truncate(order)
        for m in range(1, m_max + 1):
            X[m] += (p ** (m - 1)) * A.coeffs
    return X


@dataclass
class StokesSolution:
    """H(w) = 1 + O(hbar) solving dH/dw = [N,H] + P H - H Q, H -> 1 in the half-plane."""

    N: np.ndarray
    C: np.ndarray  # C[m, n] coefficient of w^{-m} hbar^n
    ode: RationalODE
    order: int
    halfplane: int
    tol: float
    lam_min: float
    pole_radius: float

    def _cut(self, w: complex) -> tuple[int, float]:
        sizes = np.array([np.max(np.abs(self.C[m])) for m in range(self.C.shape[0])]) * abs(w) ** (
            -np.arange(self.C.shape[0], dtype=float)
        )
        bad = np.flatnonzero(~np.isfinite(sizes))
        if bad.size:
            sizes = sizes[: bad[0]]
        nz = [m for m in range(1, len(sizes)) if sizes[m] > 0]
        if not nz:
            return 0, 0.0
        best = min(nz, key=lambda m: sizes[m])
        return best, float(sizes[best])

    def formal(self, w: complex) -> HbarSeries:
        """Optimally truncated formal series at w."""
        cut, _ = self._cut(w)
        out = np.zeros(self.C.shape[1:], dtype=complex)
        for m in range(cut + 1):
            out += self.C[m] * w ** (-m)
        return HbarSeries(out)

    def formal_error(self, w: complex) -> float:
        return self._cut(w)[1]

    def start_point(self, w: complex) -> complex:
        L = max(40.0, 45.0 / max(self.lam_min, 1e-3), 4 * self.pole_radius)
        return w + self.halfplane * 1j * L

    def __call__(self, w: complex, tol: float | None = None) -> HbarSeries:
        tol = self.tol if tol is None else tol
        w = complex(w)
        w0 = self.start_point(w)
        H0 = self.formal(w0)
        if self.formal_error(w0) > tol:
            raise ToleranceNotMet(f"formal series at {w0} has error {self.formal_error(w0):.2e}")
        path = PathInC.segment(w0, w)
        U, V = transport(self.ode, path, tol=tol * 1e-2)
        return U @ H0 @ V.inv()

    def residual(self, w: complex, h: float = 1e-3) -> np.ndarray:
        """Per-order residual of the ODE at w by a 4th-order central difference."""
        Hs = [self(w + s * h) for s in (-2, -1, 1, 2)]
        dH = (Hs[0] - Hs[1] * 8 + Hs[2] * 8 - Hs[3]) / (12 * h)
        Hw = self(w)
        L = self.ode.left(self.order)(w)
        R = self.ode.right(self.order)(w)
        rhs = HbarSeries.from_lift(L, self.order) @ Hw - Hw @ HbarSeries.from_lift(R, self.order)
        return (dH - rhs).norms()


def _stokes_recursion(C, Pm, Qm, lam, zero_mask, safe, order: int, m_max: int) -> None:
    d = C.shape[-1]
    for n in range(1, order + 1):
        # S_m = sum_{j=1}^{m+1} (P_j C_{m+1-j} - C_{m+1-j} Q_j) only involves hbar orders < n
        for m in range(m_max):
            S = np.zeros((d, d), dtype=complex)
            for j in range(1, m + 2):
                Cm = C[m + 1 - j]
                for a in range(1, n + 1):
                    S += Pm[j, a] @ Cm[n - a] - Cm[n - a] @ Qm[j, a]
            if m == 0:
                bad = zero_mask & (np.abs(S) > 1e-10)
                if np.any(bad):
                    a, b = np.argwhere(bad)[0]
                    raise ResonantWeight(
                        f"entry ({a},{b}) has vanishing exponent but nonzero source {abs(S[a, b]):.2e}"
                    )
            else:
                C[m, n] = np.where(zero_mask, -S / m, C[m, n])
            C[m + 1, n] = np.where(zero_mask, 0, (-m * C[m, n] - S) / safe)


def stokes_series_solve(N: np.ndarray, P_poles: Sequence[tuple[complex, HbarSeries]],
                        Q_poles: Sequence[tuple[complex, HbarSeries]], order: int, halfplane: int = 1,
                        tol: float = 1e-12, m_max: int = 160) -> StokesSolution:
    """Formal solution at infinity plus integration for dH/dw = [N,H] + P(w) H - H Q(w).

    N must be diagonal with real spectrum; P and Q are sums of simple poles with
    coefficients of hbar-order at least one.  Each entry (a, b) has exponent
    lambda = N_aa - N_bb; the recursion is the entrywise form of the basic ODE.
    """
    N = np.asarray(N, dtype=complex)
    d = N.shape[0]
    nd = np.diag(N)
    if np.max(np.abs(N - np.diag(nd)), initial=0.0) > 1e-14:
        raise ValueError("N must be diagonal")
    lam = nd[:, None] - nd[None, :]
    if np.max(np.abs(lam.imag)) > 1e-9:
        raise ValueError("the exponents N_aa - N_bb must be real")
    lam = lam.real
    zero_mask = np.abs(lam) < 1e-12
    safe = np.where(zero_mask, 1.0, lam)
    Pm = _laurent_at_infinity(P_poles, m_max + 1, order, d)
    Qm = _laurent_at_infinity(Q_poles, m_max + 1, order, d)
    if np.max(np.abs(Pm[:, 0]), initial=0.0) + np.max(np.abs(Qm[:, 0]), initial=0.0) > 0:
        raise ValueError("P and Q must vanish at hbar order zero")
    C = np.zeros((m_max + 1, order + 1, d, d), dtype=complex)
    C[0, 0] = np.eye(d)
    # the formal coefficients grow factorially; overflow past the optimal cut is discarded in _cut
    with np.errstate(over="ignore", invalid="ignore"):
        _stokes_recursion(C, Pm, Qm, lam, zero_mask, safe, order, m_max)
    lam_nz = np.abs(lam[~zero_mask])
    lam_min = float(lam_nz.min()) if lam_nz.size else 1.0
    poles = [p for p, _ in list(P_poles) + list(Q_poles)]
    pole_radius = max((abs(p) for p in poles), default=0.0)
    Ns = HbarSeries.constant(N, order)
    ode = RationalODE(
        poles=[(p, A.truncate(order)) for p, A in P_poles],
        poly=[Ns],
        right_poles=[(p, A.truncate(order)) for p, A in Q_poles],
        right_poly=[Ns],
    )
    return StokesSolution(N, C, ode, order, 1 if halfplane >= 0 else -1, tol, lam_min, pole_radius)
