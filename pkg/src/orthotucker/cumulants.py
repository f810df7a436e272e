"""Sample cumulant tensors (k-statistics) of orders 2, 3 and 4."""
from __future__ import annotations

import csv
import io
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CSVFormatError, DimensionError
from .tensor_core import group_action

CHUNK_ROWS = 8192


@dataclass
class SampleMatrix:
    values: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DimensionError(f"samples must be a 2-D array (observations x variables), got ndim={v.ndim}")
        bad = np.argwhere(~np.isfinite(v))
        if bad.size:
            r, c = bad[0]
            raise ValueError(f"non-finite value at row {r + 1}, column {c + 1}")
        self.values = v

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


class _Neumaier:
    """Elementwise compensated sum of arrays."""

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, x: np.ndarray) -> None:
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c += np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    @property
    def total(self) -> np.ndarray:
        return self.s + self.c


def _moment(X: np.ndarray, order: int, chunk: int) -> np.ndarray:
    """``sum_a x_a^{⊗order} / m`` accumulated over row blocks."""
    m, n = X.shape
    left = order // 2
    acc = _Neumaier((n ** left, n ** (order - left)))
    for start in range(0, m, chunk):
        B = X[start:start + chunk]
        # row-wise Kronecker powers, then one matrix product per block
        L = _row_kron(B, left)
        R = _row_kron(B, order - left)
        acc.add(L.T @ R)
    return (acc.total / m).reshape((n,) * order)


def _row_kron(B: np.ndarray, power: int) -> np.ndarray:
    out = B
    for _ in range(power - 1):
        out = (out[:, :, None] * B[:, None, :]).reshape(B.shape[0], -1)
    return out


def _sym_gather(T: np.ndarray) -> np.ndarray:
    """Copy the entry at the sorted index to every permutation: exact symmetry."""
    idx = np.sort(np.indices(T.shape).reshape(T.ndim, -1), axis=0)
    return T[tuple(idx)].reshape(T.shape)


def cumulant_tensor(data, order: int, chunk: int = CHUNK_ROWS) -> np.ndarray:
    """k-statistic estimate of the order-``order`` cumulant tensor.

    With central moments ``mu`` (normalised by m):
      k2 = m/(m-1) mu_ij
      k3 = m^2/((m-1)(m-2)) mu_ijk
      k4 = m^2 [(m+1) mu_ijkl - (m-1)(mu_ij mu_kl + mu_ik mu_jl + mu_il mu_jk)]
           / ((m-1)(m-2)(m-3))
    """
    if order not in (2, 3, 4):
        raise ValueError(f"order must be 2, 3 or 4, got {order}")
    S = data if isinstance(data, SampleMatrix) else SampleMatrix(data)
    m = S.m
    if m < order + 1:
        raise ValueError(f"order {order} needs at least {order + 1} observations, got {m}")
    X = S.values - S.values.mean(axis=0)
    const = np.flatnonzero(np.all(X == 0, axis=0))
    if const.size:
        warnings.warn(f"constant column(s) {', '.join(str(c + 1) for c in const)}: zero variance", stacklevel=2)
    mu = _moment(X, order, chunk)
    if order == 2:
        K = m / (m - 1) * mu
    elif order == 3:
        K = m * m / ((m - 1) * (m - 2)) * mu
    else:
        mu2 = _moment(X, 2, chunk)
        pairs = (
            np.einsum("ij,kl->ijkl", mu2, mu2)
            + np.einsum("ik,jl->ijkl", mu2, mu2)
            + np.einsum("il,jk->ijkl", mu2, mu2)
        )
        K = m * m * ((m + 1) * mu - (m - 1) * pairs) / ((m - 1) * (m - 2) * (m - 3))
    return _sym_gather(K)


@dataclass
class EquivarianceReport:
    order: int
    max_abs_error: float
    scale: float

    @property
    def relative_error(self) -> float:
        return self.max_abs_error / self.scale if self.scale > 0 else self.max_abs_error

    def ok(self, rtol: float = 1e-8) -> bool:
        return self.relative_error <= rtol


def affine_equivariance_check(data, A, order: int) -> EquivarianceReport:
    """Compare ``K(data A^T)`` with ``(A, ..., A) . K(data)``."""
    X = data.values if isinstance(data, SampleMatrix) else np.asarray(data, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.shape != (X.shape[1], X.shape[1]):
        raise DimensionError(f"A must be {X.shape[1]}x{X.shape[1]}, got {A.shape}")
    lhs = cumulant_tensor(X @ A.T, order)
    rhs = group_action([A] * order, cumulant_tensor(X, order))
    return EquivarianceReport(order, float(np.max(np.abs(lhs - rhs))), float(np.max(np.abs(rhs))))


def unique_entries(K: np.ndarray) -> np.ndarray:
    n, d = K.shape[0], K.ndim
    return np.array([K[idx] for idx in itertools.combinations_with_replacement(range(n), d)])


@dataclass
class NullTest:
    order: int
    ratio: float
    mahalanobis: float
    dof: int

    @property
    def threshold(self) -> float:
        return self.dof + 3.0 * np.sqrt(2.0 * self.dof)

    def ok(self, ratio_tol: float = 0.05) -> bool:
        return self.ratio <= ratio_tol and self.mahalanobis <= self.threshold


def gaussian_null_test(data, order: int, n_boot: int = 200, seed=0) -> NullTest:
    """Is the order-3/4 cumulant of ``data`` consistent with zero?

    ``ratio`` is ``||K_d|| / ||K_2||^(d/2)``. The distinct entries of K_d are
    compared against zero in the bootstrap covariance metric; under the null
    the statistic is roughly chi-square with as many degrees of freedom as
    distinct entries, and passes below mean + 3 standard deviations.
    """
    X = data.values if isinstance(data, SampleMatrix) else np.asarray(data, dtype=float)
    K = cumulant_tensor(X, order)
    K2 = cumulant_tensor(X, 2)
    ratio = float(np.linalg.norm(K) / np.linalg.norm(K2) ** (order / 2))
    rng = np.random.default_rng(seed)
    m = X.shape[0]
    boots = np.array([
        unique_entries(cumulant_tensor(X[rng.integers(0, m, m)], order)) for _ in range(n_boot)
    ])
    k = unique_entries(K)
    C = np.cov(boots, rowvar=False)
    stat = float(k @ np.linalg.solve(C, k))
    return NullTest(order, ratio, stat, k.size)


# -- CSV ----------------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_csv(text: str, source: str = "<csv>") -> SampleMatrix:
    """Comma-separated numbers; a non-numeric first row is taken as a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{source}: no data rows")
    labels = None
    if not all(_is_number(c) for c in rows[0]):
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise CSVFormatError(f"{source}: header but no data rows")
    width = len(rows[0])
    if labels is not None and len(labels) != width:
        raise CSVFormatError(f"{source}: header has {len(labels)} columns, data has {width}")
    values = np.empty((len(rows), width))
    line0 = 2 if labels is not None else 1
    for r, row in enumerate(rows):
        if len(row) != width:
            raise CSVFormatError(f"{source}: line {r + line0}: expected {width} columns, found {len(row)}")
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise CSVFormatError(
                    f"{source}: line {r + line0}, column {c + 1}: not a number: {cell.strip()!r}"
                ) from None
            if not np.isfinite(values[r, c]):
                raise CSVFormatError(f"{source}: line {r + line0}, column {c + 1}: non-finite value")
    return SampleMatrix(values, labels)


def read_csv(path) -> SampleMatrix:
    path = Path(path)
    return parse_csv(path.read_text(), str(path))
