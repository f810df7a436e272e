"""Certificates for singular vector tuples of small binary tensors.

Covers residual checks, the six singular vector tuples of a diagonal
2x2x2 tensor, the four orthogonal bases of a 2x2x2x2 tensor, the matrix
``M_Q`` whose rank is ``codim((Q . V) ∩ V, V)`` and the binary string
``i(Q)`` for signed permutation tuples.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor_core import contract
from .tuple_search import orthogonal_subsets, singular_tuples

RANK_RTOL = 1e-8

I2 = np.eye(2)
P2 = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class SVTuple:
    vectors: tuple[np.ndarray, ...]
    value: float = float("nan")

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=float) for v in self.vectors)
        for k, v in enumerate(vecs):
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise ValueError(f"mode {k}: singular vector tuples need unit vectors")
        object.__setattr__(self, "vectors", vecs)


def _unit(vectors):
    out = []
    for k, v in enumerate(vectors):
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError(f"mode {k}: zero vector")
        if abs(nv - 1.0) > 1e-10:
            warnings.warn(f"mode {k}: vector of norm {nv:.6g} normalised", stacklevel=3)
            v = v / nv
        out.append(v)
    return out


def svt_residual(T: np.ndarray, vectors) -> tuple[float, float]:
    """Return ``(lambda, residual)`` for a candidate singular vector tuple.

    ``lambda`` is the full contraction ``T(x1, ..., xd)``; ``residual`` is the
    largest ``||T(x1, .., ·, .., xd) - lambda x_k||`` over the modes. Non-unit
    vectors are normalised with a warning.
    """
    if isinstance(vectors, SVTuple):
        vectors = vectors.vectors
    T = np.asarray(T, dtype=float)
    if len(vectors) != T.ndim:
        raise DimensionError(f"got {len(vectors)} vectors for a tensor of order {T.ndim}")
    xs = _unit(vectors)
    for k, x in enumerate(xs):
        if x.shape != (T.shape[k],):
            raise DimensionError(f"mode {k}: vector of length {x.size}, dimension is {T.shape[k]}")
    lam = contract(T, xs)
    res = max(np.linalg.norm(contract(T, xs, skip=k) - lam * xs[k]) for k in range(T.ndim))
    return lam, float(res)


def diag222(l0: float, l1: float) -> np.ndarray:
    T = np.zeros((2, 2, 2))
    T[0, 0, 0] = l0
    T[1, 1, 1] = l1
    return T


def odeco222_tuples(l0: float, l1: float) -> list[SVTuple]:
    """The six singular vector tuples of ``l0 e0⊗e0⊗e0 + l1 e1⊗e1⊗e1``."""
    if l0 == 0 or l1 == 0:
        raise ValueError("both diagonal entries must be nonzero")
    plus = np.array([l1, l0], dtype=float)
    minus = np.array([l1, -l0], dtype=float)
    e0, e1 = I2
    raw = [
        (e0, e0, e0),
        (e1, e1, e1),
        (plus, plus, plus),
        (plus, minus, minus),
        (minus, plus, minus),
        (minus, minus, plus),
    ]
    T = diag222(l0, l1)
    out = []
    for vecs in raw:
        vecs = tuple(v / np.linalg.norm(v) for v in vecs)
        out.append(SVTuple(vecs, contract(T, vecs)))
    return out


def tuples_orthogonal(a, b, tol: float = 1e-10) -> bool:
    """Orthogonal on every factor."""
    va = a.vectors if isinstance(a, SVTuple) else a
    vb = b.vectors if isinstance(b, SVTuple) else b
    return all(abs(float(np.dot(x, y))) <= tol for x, y in zip(va, vb))


def orthogonal_pairs(tuples, tol: float = 1e-10) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i, j in itertools.combinations(range(len(tuples)), 2)
        if tuples_orthogonal(tuples[i], tuples[j], tol)
    ]


# -- order four binary tensors ------------------------------------------------

# for each basis: which tuple (0 or 1) supplies the mode-k vector of the first element
_FOUR_BASES_PATTERNS = ((0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0))


def four_bases(basis, tol: float = 1e-10):
    """The four orthogonal bases generated from one basis of a 2x2x2x2 tensor.

    ``basis`` is a pair of tuples ``(x0, x1)``, each holding four vectors in
    R^2, orthogonal on every mode. Returns four pairs: the input and the three
    bases obtained by exchanging ``x0`` and ``x1`` on modes {3,4}, {2,4} and
    {2,3} (1-based).
    """
    x0, x1 = (b.vectors if isinstance(b, SVTuple) else tuple(b) for b in basis)
    if len(x0) != 4 or len(x1) != 4 or any(np.shape(v) != (2,) for v in (*x0, *x1)):
        raise DimensionError("four_bases needs two tuples of four vectors in R^2")
    if not tuples_orthogonal(x0, x1, tol):
        raise ValueError("the two tuples must be orthogonal on every mode")
    src = (x0, x1)
    out = []
    for pat in _FOUR_BASES_PATTERNS:
        a = tuple(np.asarray(src[p][k], dtype=float) for k, p in enumerate(pat))
        b = tuple(np.asarray(src[1 - p][k], dtype=float) for k, p in enumerate(pat))
        out.append((a, b))
    return out


@dataclass
class BasisCensus:
    """Orthogonal bases of singular vector tuples found numerically for a 2x2x2x2 tensor.

    ``extra`` holds bases outside the four generated by the reference basis;
    any entry there means the tensor is not generic, not that a check failed.
    """

    found: list
    expected: list
    extra: list

    @property
    def ok(self) -> bool:
        return not self.extra and {basis_key(b) for b in self.expected} <= {basis_key(b) for b in self.found}


def basis_census(T, basis, trials: int = 400, seed=0) -> BasisCensus:
    """Enumerate orthogonal bases of singular vector tuples of a 2x2x2x2 ``T``."""
    T = np.asarray(T, dtype=float)
    if T.shape != (2, 2, 2, 2):
        raise DimensionError(f"basis_census needs a 2x2x2x2 tensor, got {T.shape}")
    expected = four_bases(basis)
    tuples = singular_tuples(T, trials=trials, seed=seed)
    found = []
    for pick in orthogonal_subsets(tuples, 2):
        b = tuple(tuples[j][0] for j in pick)
        if basis_key(b) not in {basis_key(x) for x in found}:
            found.append(b)
    known = {basis_key(b) for b in expected}
    extra = [b for b in found if basis_key(b) not in known]
    return BasisCensus(found, expected, extra)


def _canon_vec(v: np.ndarray, digits: int) -> tuple:
    v = np.asarray(v, dtype=float)
    nz = np.flatnonzero(np.abs(v) > 10.0 ** (-digits))
    if nz.size and v[nz[0]] < 0:
        v = -v
    return tuple(np.round(v, digits) + 0.0)


def basis_key(basis, digits: int = 6) -> frozenset:
    """Hashable form of a basis: unordered tuples, each vector up to sign."""
    return frozenset(tuple(_canon_vec(v, digits) for v in t) for t in basis)


def same_basis_set(bases_a, bases_b, digits: int = 6) -> bool:
    return {basis_key(b, digits) for b in bases_a} == {basis_key(b, digits) for b in bases_b}


# -- the matrix M_Q -----------------------------------------------------------

def binary_strings(d: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=d))


def index_set_I(d: int) -> list[tuple[int, ...]]:
    """Binary strings of weight 1 or d-1, lexicographically sorted."""
    return [s for s in binary_strings(d) if sum(s) in (1, d - 1)]


@dataclass(frozen=True)
class MQMatrix:
    d: int
    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...]
    matrix: np.ndarray

    def label(self, s) -> str:
        return "".join(map(str, s))


def build_MQ(Q) -> MQMatrix:
    """``[M_Q]_{i,j} = q1[i1,j1] ... qd[id,jd]`` for rows i outside I and columns j in I."""
    Q = [np.asarray(Qk, dtype=float) for Qk in Q]
    if any(Qk.shape != (2, 2) for Qk in Q):
        raise DimensionError("M_Q is defined for binary formats only (2x2 matrices)")
    d = len(Q)
    if d < 3:
        raise DimensionError("M_Q needs d >= 3")
    cols = index_set_I(d)
    colset = set(cols)
    rows = [s for s in binary_strings(d) if s not in colset]
    R, C = np.array(rows), np.array(cols)
    M = np.ones((len(rows), len(cols)))
    for k in range(d):
        M *= Q[k][R[:, k][:, None], C[:, k][None, :]]
    return MQMatrix(d, tuple(rows), tuple(cols), M)


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def rank_MQ(M) -> int:
    return numerical_rank(M.matrix if isinstance(M, MQMatrix) else M)


def is_signed_permutation(Q: np.ndarray) -> bool:
    Q = np.asarray(Q, dtype=float)
    if not np.all(np.isin(Q, (-1.0, 0.0, 1.0))):
        return False
    nz = Q != 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def iQ(Q) -> tuple[int, ...]:
    """0 where Q_k is diagonal (±1 entries), 1 where it swaps e_0 and e_1."""
    out = []
    for k, Qk in enumerate(Q):
        Qk = np.asarray(Qk, dtype=float)
        if Qk.shape != (2, 2) or not is_signed_permutation(Qk):
            raise ValueError(f"mode {k}: not a 2x2 signed permutation matrix")
        out.append(0 if Qk[0, 0] != 0 else 1)
    return tuple(out)


def sp_tuple(bits) -> tuple[np.ndarray, ...]:
    """Representative signed permutation tuple with the given i(Q)."""
    return tuple(P2 if b else I2 for b in bits)


def expected_codim(d: int, weight: int) -> int:
    """Codimension of ``(Q . V) ∩ V`` in V for Q in SP(2)^d with |i(Q)| = weight."""
    if d == 4:
        return 0 if weight in (0, 2, 4) else 2 * d
    if weight in (0, d):
        return 0
    if weight in (2, d - 2):
        return 2 * d - 4
    return 2 * d


# -- symmetric reduction ------------------------------------------------------

HADAMARD_TYPE = tuple(
    s * np.array(m) / math.sqrt(2)
    for m in ([[1, 1], [1, -1]], [[1, 1], [-1, 1]], [[-1, 1], [1, 1]], [[1, -1], [1, 1]])
    for s in (1, -1)
)


def reduced_MQ(Q: np.ndarray, d: int) -> np.ndarray:
    """The (d-1) x 2 matrix of the symmetric case.

    One row of ``M_(Q,...,Q)`` per weight k in {0, 2, ..., d-2, d} (the row
    string ``1^k 0^(d-k)``), with columns of equal weight (1 or d-1) summed.
    """
    Q = np.asarray(Q, dtype=float)
    weights = [k for k in range(d + 1) if k not in (1, d - 1)]
    cols = index_set_I(d)
    out = np.zeros((len(weights), 2))
    for a, k in enumerate(weights):
        i = (1,) * k + (0,) * (d - k)
        for j in cols:
            val = math.prod(Q[i[m], j[m]] for m in range(d))
            out[a, 0 if sum(j) == 1 else 1] += val
    return out


def expected_sym_codim(Q: np.ndarray, d: int) -> int:
    if is_signed_permutation(np.round(Q, 12)):
        return 0
    if d in (4, 6) and any(np.allclose(Q, H) for H in HADAMARD_TYPE):
        return 1
    return 2


@dataclass
class CodimRow:
    weight: int
    bits: tuple[int, ...]
    expected: int
    measured: int

    @property
    def ok(self) -> bool:
        return self.expected == self.measured


@dataclass
class CodimReport:
    d: int
    rows: list[CodimRow]
    sym_ranks: list[int]
    sym_expected: list[int]
    sym_row_vector: np.ndarray

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows) and self.sym_ranks == self.sym_expected


def codim_table_check(d: int, exhaustive: bool = False) -> CodimReport:
    """Compare ``rank(M_Q)`` with the codimension table for Q in SP(2)^d.

    One representative per weight class ``|i(Q)|`` (or every binary string
    when ``exhaustive``), plus the symmetric reduced matrix for the eight
    Hadamard-type matrices.
    """
    if not 4 <= d <= 8:
        raise ValueError("codim_table_check supports 4 <= d <= 8")
    strings = binary_strings(d) if exhaustive else [(1,) * w + (0,) * (d - w) for w in range(d + 1)]
    rows = []
    for bits in strings:
        w = sum(bits)
        rows.append(CodimRow(w, bits, expected_codim(d, w), rank_MQ(build_MQ(sp_tuple(bits)))))
    sym_ranks = [numerical_rank(reduced_MQ(H, d)) for H in HADAMARD_TYPE]
    sym_expected = [expected_sym_codim(H, d) for H in HADAMARD_TYPE]
    return CodimReport(d, rows, sym_ranks, sym_expected, reduced_MQ(HADAMARD_TYPE[0], d)[:, 0])
