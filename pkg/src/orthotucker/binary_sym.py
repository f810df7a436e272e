"""Implicit equation of the closure of X_sym inside S^d(R^2).

A symmetric binary tensor is given by ``t_0, ..., t_d`` with
``T[i] = t_{|i|}``. Membership is decided by

    r(t) = Res_z(F(z), z^d F(-1/z)) / (F(i) F(-i)),

with exact rational arithmetic for certificates and floats for pipelines.
"""
from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DimensionError, SymmetryError
from .tensor_core import is_symmetric

#: membership verdict threshold on |r| / ||t||^(2(d-1))
MEMBER_TOL = 1e-8

F_ZERO = "F identically zero"
SPECIAL_LOCUS = "special locus: F(i)F(-i) = 0"


class BudgetExceeded(RuntimeError):
    """Exact computation stopped after exhausting its operation budget."""


# -- coordinates --------------------------------------------------------------

@dataclass(frozen=True)
class BinarySymCoords:
    t: tuple

    def __post_init__(self):
        if len(self.t) < 4:
            raise DimensionError(f"need d >= 3, i.e. at least 4 coordinates, got {len(self.t)}")
        object.__setattr__(self, "t", tuple(self.t))

    @property
    def d(self) -> int:
        return len(self.t) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Rational) for x in self.t)

    def to_tensor(self) -> np.ndarray:
        d = self.d
        weights = np.indices((2,) * d).sum(axis=0)
        return np.asarray([float(x) for x in self.t])[weights]

    @classmethod
    def from_tensor(cls, T, tol: float = 1e-12) -> "BinarySymCoords":
        T = np.asarray(T, dtype=float)
        if T.ndim < 3 or any(n != 2 for n in T.shape):
            raise DimensionError(f"expected a 2x...x2 tensor of order >= 3, got shape {T.shape}")
        if not is_symmetric(T, tol):
            raise SymmetryError("tensor is not symmetric")
        d = T.ndim
        return cls(tuple(float(T[(1,) * k + (0,) * (d - k)]) for k in range(d + 1)))

    def norm_sq(self):
        d = self.d
        return sum(math.comb(d, k) * x * x for k, x in enumerate(self.t))


# -- polynomials --------------------------------------------------------------

@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial, coefficients in ascending order.

    ``coeffs`` keeps its formal length; ``degree`` is the true degree after
    cancellation (-1 for the zero polynomial).
    """

    coeffs: tuple

    @property
    def formal_degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0:
                return k
        return -1

    @property
    def leading(self):
        k = self.degree
        return self.coeffs[k] if k >= 0 else 0

    def is_zero(self) -> bool:
        return self.degree < 0

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc


def F_poly(t) -> UniPoly:
    """``F(z) = sum_k ((k+1) C(d,k+1) t_{k+1} - (d-k+1) C(d,k-1) t_{k-1}) z^k``."""
    t = t.t if isinstance(t, BinarySymCoords) else tuple(t)
    d = len(t) - 1
    if d < 3:
        raise DimensionError(f"need d >= 3, got d={d}")

    def tt(k):
        return t[k] if 0 <= k <= d else 0

    coeffs = []
    for k in range(d + 1):
        up = (k + 1) * math.comb(d, k + 1) * tt(k + 1) if k + 1 <= d else 0
        down = (d - k + 1) * math.comb(d, k - 1) * tt(k - 1) if k >= 1 else 0
        coeffs.append(up - down)
    return UniPoly(tuple(coeffs))


def reversal(F: UniPoly, d: int) -> UniPoly:
    """``z^d F(-1/z)``: coefficient k is ``(-1)^(d-k) F_(d-k)``."""
    if F.degree > d:
        raise ValueError(f"degree {F.degree} exceeds d={d}")
    a = list(F.coeffs) + [0] * (d + 1 - len(F.coeffs))
    return UniPoly(tuple((-1) ** (d - k) * a[d - k] for k in range(d + 1)))


def sylvester_matrix(f: UniPoly, g: UniPoly, m: int | None = None, n: int | None = None) -> list[list]:
    """Sylvester matrix of ``f`` and ``g`` with formal degrees ``m`` and ``n``."""
    m = f.formal_degree if m is None else m
    n = g.formal_degree if n is None else n
    fc = list(f.coeffs) + [0] * (m + 1 - len(f.coeffs))
    gc = list(g.coeffs) + [0] * (n + 1 - len(g.coeffs))
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        for k in range(m + 1):
            row[i + k] = fc[m - k]
        rows.append(row)
    for i in range(m):
        row = [0] * size
        for k in range(n + 1):
            row[i + k] = gc[n - k]
        rows.append(row)
    return rows


def _det_exact(rows: list[list], budget: int | None) -> Fraction:
    A = [[Fraction(x) for x in row] for row in rows]
    size = len(A)
    det = Fraction(1)
    ops = 0
    for c in range(size):
        piv = next((r for r in range(c, size) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, size):
            if A[r][c] == 0:
                continue
            factor = A[r][c] / A[c][c]
            for k in range(c, size):
                A[r][k] -= factor * A[c][k]
            ops += size - c
            if budget is not None and ops > budget:
                raise BudgetExceeded(f"determinant needed more than {budget} operations")
    return det


def sylvester_resultant(
    f: UniPoly,
    g: UniPoly,
    degrees: tuple[int, int] | None = None,
    exact: bool | None = None,
    budget: int | None = None,
):
    """Determinant of the Sylvester matrix.

    Exact (``Fraction``) when every coefficient is rational, unless ``exact``
    says otherwise. Two zero polynomials give 0 with a warning.
    """
    if f.is_zero() and g.is_zero():
        warnings.warn("resultant of two zero polynomials taken as 0", stacklevel=2)
        return Fraction(0) if exact else 0.0
    m, n = degrees if degrees is not None else (f.formal_degree, g.formal_degree)
    rows = sylvester_matrix(f, g, m, n)
    if exact is None:
        exact = all(isinstance(c, Rational) for c in (*f.coeffs, *g.coeffs))
    if exact:
        return _det_exact(rows, budget)
    return float(np.linalg.det(np.array(rows, dtype=float)))


# -- membership ---------------------------------------------------------------

def F_at_i_sq(F: UniPoly):
    """``F(i) F(-i) = |F(i)|^2`` for real coefficients."""
    re = sum((-1) ** (k // 2) * c for k, c in enumerate(F.coeffs) if k % 2 == 0)
    im = sum((-1) ** (k // 2) * c for k, c in enumerate(F.coeffs) if k % 2 == 1)
    return re * re + im * im


@dataclass
class Membership:
    value: object
    normalized: float
    on_variety: bool
    flags: list[str] = field(default_factory=list)


def _as_coords(t, exact: bool) -> BinarySymCoords:
    t = t.t if isinstance(t, BinarySymCoords) else tuple(t)
    if exact:
        t = tuple(Fraction(x) for x in t)
    else:
        t = tuple(float(x) for x in t)
    return BinarySymCoords(t)


def membership_value(t, exact: bool = False, budget: int | None = None, tol: float = MEMBER_TOL) -> Membership:
    """Evaluate ``r(t)`` and decide membership in the closure of X_sym.

    ``normalized`` is ``r / ||t||^(2(d-1))`` with ``||t||`` the Euclidean norm
    of the coordinate vector; the verdict compares it with ``tol`` (exact
    mode: ``r == 0``).
    """
    c = _as_coords(t, exact)
    d = c.d
    F = F_poly(c)
    flags = []
    if F.is_zero():
        flags.append(F_ZERO)
        zero = Fraction(0) if exact else 0.0
        return Membership(zero, 0.0, True, flags)
    res = sylvester_resultant(F, reversal(F, d), (d, d), exact=exact, budget=budget)
    denom = F_at_i_sq(F)
    if denom == 0:
        # F and z^d F(-1/z) share the root i, so the quotient is 0/0; r is a
        # polynomial, so take its value from a line through t instead
        flags.append(SPECIAL_LOCUS)
        value = _r_through_line(tuple(Fraction(x) for x in c.t), budget)
        if not exact:
            value = float(value)
    else:
        value = res / denom
    tn = math.sqrt(float(sum(x * x for x in c.t)))
    normalized = float(value) / tn ** (2 * (d - 1))
    on = value == 0 if exact else abs(normalized) <= tol
    return Membership(value, normalized, bool(on), flags)


def _r_exact_or_none(t: tuple, budget: int | None):
    d = len(t) - 1
    F = F_poly(t)
    denom = F_at_i_sq(F)
    if F.is_zero() or denom == 0:
        return None
    return sylvester_resultant(F, reversal(F, d), (d, d), exact=True, budget=budget) / denom


def _r_through_line(t: tuple, budget: int | None) -> Fraction:
    """``r(t)`` by exact interpolation of ``s -> r(t + s u)`` at s = 0."""
    d = len(t) - 1
    u = tuple(Fraction(k * k + 1, k + 2) for k in range(d + 1))
    xs, ys = [], []
    s = 0
    while len(xs) < 2 * (d - 1) + 1:
        s += 1
        y = _r_exact_or_none(tuple(a + s * b for a, b in zip(t, u)), budget)
        if y is not None:
            xs.append(Fraction(s))
            ys.append(y)
    return _interpolate(xs, ys)[0]


def r_value(t, budget: int | None = None):
    """Exact ``r(t)`` for rational coordinates."""
    return membership_value(t, exact=True, budget=budget).value


# -- reference polynomials ----------------------------------------------------

def quadric_d3(t):
    t0, t1, t2, t3 = t
    return t1 * t1 - t0 * t2 + t2 * t2 - t1 * t3


def cubic_d4(t):
    t0, t1, t2, t3, t4 = t
    return (
        2 * t1**3 - 3 * t0 * t1 * t2 + t0**2 * t3 + 2 * t1**2 * t3 - 3 * t0 * t2 * t3
        - 2 * t1 * t3**2 - 2 * t3**3 + t0 * t1 * t4 + 3 * t1 * t2 * t4 - t0 * t3 * t4
        + 3 * t2 * t3 * t4 - t1 * t4**2
    )


def rotate_coords(t, theta: float) -> BinarySymCoords:
    """Coordinates of ``(R, ..., R) • T`` for the rotation by ``theta``."""
    from .tensor_core import group_action

    c = t if isinstance(t, BinarySymCoords) else BinarySymCoords(tuple(t))
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return BinarySymCoords.from_tensor(group_action([R] * c.d, c.to_tensor()), tol=1e-9)


# -- degree -------------------------------------------------------------------

def _interpolate(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Coefficients (ascending) of the interpolating polynomial, exact."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        new = [Fraction(0)] * n
        for k in range(n - 1):
            new[k + 1] += poly[k]
        for k in range(n):
            new[k] -= xs[i] * poly[k]
        new[0] += coef[i]
        poly = new
    return poly


def _degree(coeffs) -> int:
    for k in range(len(coeffs) - 1, -1, -1):
        if coeffs[k] != 0:
            return k
    return -1


def poly_sqrt(coeffs: list[Fraction]) -> list[Fraction] | None:
    """Monic square root of a polynomial up to its leading constant, or None."""
    deg = _degree(coeffs)
    if deg < 0 or deg % 2:
        return None
    lc = coeffs[deg]
    p = [c / lc for c in coeffs[: deg + 1]]
    h = deg // 2
    s = [Fraction(0)] * (h + 1)
    s[h] = Fraction(1)
    # match coefficients of p from the top down
    for k in range(h - 1, -1, -1):
        acc = sum(s[i] * s[h + k - i] for i in range(k + 1, h))
        s[k] = (p[h + k] - acc) / 2
    sq = [Fraction(0)] * (deg + 1)
    for i, a in enumerate(s):
        for j, b in enumerate(s):
            sq[i + j] += a * b
    return s if sq == p else None


@dataclass
class DegreeReport:
    d: int
    degree: int
    root_degree: int | None
    lines: int

    @property
    def expected(self) -> int:
        return 2 * (self.d - 1)


def degree_check(d: int, lines: int = 3, seed: int = 0, budget: int | None = None) -> DegreeReport:
    """Degree of ``r`` along random rational lines, and of its square root."""
    if not 3 <= d <= 8:
        raise ValueError("degree_check supports 3 <= d <= 8")
    rng = random.Random(seed)
    npts = 2 * d + 3
    xs = [Fraction(k) for k in range(npts)]
    best, root = -1, None
    done = 0
    while done < lines:
        t0 = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(d + 1)]
        t1 = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(d + 1)]
        ys = [r_value([a + s * b for a, b in zip(t0, t1)], budget) for s in xs]
        coeffs = _interpolate(xs, ys)
        deg = _degree(coeffs)
        if deg < best:
            continue  # degenerate line, degree dropped
        best = deg
        sq = poly_sqrt(coeffs)
        root = _degree(sq) if sq is not None else None
        done += 1
    return DegreeReport(d, best, root, lines)


# -- dimension ----------------------------------------------------------------

def _skew_basis(n: int) -> list[np.ndarray]:
    out = []
    for i, j in itertools.combinations(range(n), 2):
        A = np.zeros((n, n))
        A[i, j], A[j, i] = 1.0, -1.0
        out.append(A)
    return out


@dataclass
class DimReport:
    shape: tuple[int, ...]
    symmetric: bool
    expected: int
    measured: int

    @property
    def ok(self) -> bool:
        return self.expected == self.measured


def expected_dim(shape, symmetric: bool = False) -> int:
    shape = tuple(shape)
    d = len(shape)
    if symmetric:
        n = shape[0]
        if d == 2:
            return math.comb(n + 1, 2)
        return math.comb(n + d - 1, d) - math.comb(n, 2)
    if d == 2:
        return shape[0] * shape[1]
    return math.prod(shape) - d * math.comb(shape[0], 2)


def dim_check(shape, symmetric: bool = False, seed: int = 0, rtol: float = 1e-8) -> DimReport:
    """Numerical rank of the Jacobian of ``(Q, S) -> Q . S`` at a random point."""
    from .patterns import pattern_V, pattern_Vsym
    from .tensor_core import group_action, haar_orthogonal, symmetrize

    shape = tuple(int(n) for n in shape)
    if math.prod(shape) > 4096:
        raise ValueError(f"shape {shape} exceeds the 4096-entry limit")
    d = len(shape)
    rng = np.random.default_rng(seed)
    if symmetric:
        n = shape[0]
        if any(m != n for m in shape):
            raise DimensionError(f"symmetric shape must be cubical, got {shape}")
        P = pattern_Vsym(n, d)
        S = np.where(P.zero_mask, 0.0, symmetrize(rng.standard_normal(shape)))
        Q = haar_orthogonal(n, rng)
        Qs = [Q] * d
        cols = []
        for A in _skew_basis(n):
            dQ = Q @ A
            cols.append(sum(_replace(Qs, k, dQ, S) for k in range(d)))
        # tangent of V_sym: symmetric tensors supported off the mask, one per orbit
        seen = set()
        for idx in zip(*np.nonzero(~P.zero_mask)):
            key = tuple(sorted(idx))
            if key in seen:
                continue
            seen.add(key)
            E = np.zeros(shape)
            for perm in set(itertools.permutations(key)):
                E[perm] = 1.0
            cols.append(group_action(Qs, E))
    else:
        if d >= 3:
            P = pattern_V(shape)
            free = ~P.zero_mask
        else:
            free = np.ones(shape, dtype=bool)
        S = np.where(free, rng.standard_normal(shape), 0.0)
        Qs = [haar_orthogonal(n, rng) for n in shape]
        cols = []
        for k, n in enumerate(shape):
            for A in _skew_basis(n):
                cols.append(_replace(Qs, k, Qs[k] @ A, S))
        for idx in zip(*np.nonzero(free)):
            E = np.zeros(shape)
            E[idx] = 1.0
            cols.append(group_action(Qs, E))
    J = np.stack([c.ravel() for c in cols], axis=1)
    s = np.linalg.svd(J, compute_uv=False)
    measured = int(np.sum(s > rtol * s[0]))
    return DimReport(shape, symmetric, expected_dim(shape, symmetric), measured)


def _replace(Qs, k, M, S):
    from .tensor_core import group_action

    Qk = list(Qs)
    Qk[k] = M
    return group_action(Qk, S)
