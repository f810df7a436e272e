"""Dense tensors, the multilinear change of basis, and symmetric tensors.

Tensors are plain ``numpy.ndarray`` objects in C (row-major) order, so the
last index runs fastest. Modes are 0-based, like numpy axes.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Sequence

import numpy as np

from .config import DEFAULT_TOL
from .errors import DimensionError, OrthogonalityError, SymmetryError


def as_tensor(values, shape: Sequence[int] | None = None) -> np.ndarray:
    """Return ``values`` as a float64 C-contiguous tensor of order >= 2."""
    T = np.ascontiguousarray(values, dtype=float)
    if shape is not None:
        shape = tuple(int(n) for n in shape)
        if T.size != math.prod(shape):
            raise DimensionError(
                f"expected {math.prod(shape)} values for shape {shape}, found {T.size}"
            )
        T = T.reshape(shape)
    if T.ndim < 2:
        raise DimensionError(f"tensors must have order d >= 2, got d = {T.ndim}")
    if any(n < 1 for n in T.shape):
        raise DimensionError(f"all dimensions must be positive, got {T.shape}")
    return T


def mode_product(T: np.ndarray, M: np.ndarray, k: int) -> np.ndarray:
    """Multiply mode ``k`` of ``T`` by the matrix ``M`` (``M`` is m x n_k)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] != T.shape[k]:
        raise DimensionError(
            f"mode {k}: matrix of shape {M.shape} cannot act on dimension {T.shape[k]}"
        )
    Y = np.tensordot(M, T, axes=(1, k))
    return np.moveaxis(Y, 0, k)


def group_action(Q: Sequence[np.ndarray], T: np.ndarray) -> np.ndarray:
    """Apply ``(Q_1, ..., Q_d) . T``.

    Entry ``i`` of the result is ``sum_j Q_1[i_1, j_1] ... Q_d[i_d, j_d] T[j]``.
    The matrices may be rectangular (m_k x n_k); orthogonality is not checked.
    Implemented as d successive mode products.
    """
    T = np.asarray(T, dtype=float)
    if len(Q) != T.ndim:
        raise DimensionError(f"got {len(Q)} matrices for a tensor of order {T.ndim}")
    Y = T
    for k, Qk in enumerate(Q):
        Y = mode_product(Y, Qk, k)
    return np.ascontiguousarray(Y)


def transpose_tuple(Q: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray(Qk).T for Qk in Q)


def sym_action(Q: np.ndarray, T: np.ndarray, tol: float | None = None) -> np.ndarray:
    """``Q • T = (Q, ..., Q) . T`` for a symmetric tensor ``T``.

    The result is re-checked for symmetry; a violation means the action blew
    up numerically and raises :class:`SymmetryError`.
    """
    Q = np.asarray(Q, dtype=float)
    T = np.asarray(T, dtype=float)
    if Q.shape != (T.shape[0], T.shape[0]):
        raise DimensionError(f"sym_action needs an {T.shape[0]}x{T.shape[0]} matrix, got {Q.shape}")
    Y = group_action([Q] * T.ndim, T)
    tol = DEFAULT_TOL.sym if tol is None else tol
    scale = max(1.0, float(np.abs(Y).max(initial=0.0)))
    if not is_symmetric(Y, tol * scale):
        raise SymmetryError("symmetric action produced a non-symmetric tensor")
    return Y


def inner(S: np.ndarray, T: np.ndarray) -> float:
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    if S.shape != T.shape:
        raise DimensionError(f"inner product of shapes {S.shape} and {T.shape}")
    return float(np.dot(S.ravel(), T.ravel()))


def norm(T: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(T, dtype=float).ravel()))


def flatten(T: np.ndarray, k: int) -> np.ndarray:
    """Mode-``k`` flattening: an n_k x (prod of the other n_l) matrix.

    Columns run over the remaining indices in row-major order.
    """
    T = np.asarray(T)
    if not 0 <= k < T.ndim:
        raise DimensionError(f"mode {k} out of range for a tensor of order {T.ndim}")
    return np.moveaxis(T, k, 0).reshape(T.shape[k], -1)


def unflatten(M: np.ndarray, k: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`flatten`."""
    shape = tuple(shape)
    if not 0 <= k < len(shape):
        raise DimensionError(f"mode {k} out of range for a tensor of order {len(shape)}")
    rest = shape[:k] + shape[k + 1:]
    return np.moveaxis(np.asarray(M).reshape((shape[k],) + rest), 0, k)


def rank_one(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Outer product ``x1 ⊗ ... ⊗ xd`` of a sequence of vectors."""
    if len(vectors) < 2:
        raise DimensionError("a rank-one tensor needs at least two factors")
    out = np.asarray(vectors[0], dtype=float)
    for v in vectors[1:]:
        out = np.multiply.outer(out, np.asarray(v, dtype=float))
    return out


def contract(T: np.ndarray, vectors: Sequence[np.ndarray], skip: int | None = None):
    """Contract every mode of ``T`` with ``vectors[k]`` except mode ``skip``.

    With ``skip=None`` the full contraction (a float) is returned, otherwise
    the vector ``T(x1, ..., ·, ..., xd)``.
    """
    Y = np.asarray(T, dtype=float)
    # contract from the last mode down so that axis numbers stay valid
    for k in range(Y.ndim - 1, -1, -1):
        if k == skip:
            continue
        Y = np.tensordot(Y, vectors[k], axes=(k, 0))
    return float(Y) if skip is None else Y


def is_symmetric(T: np.ndarray, tol: float | None = None, rng=None) -> bool:
    """Check ``T[i] == T[sigma(i)]`` for permutations of the modes.

    Orders d <= 4 are checked against every axis permutation; higher orders
    against 200 random (index, permutation) pairs.
    """
    tol = DEFAULT_TOL.sym if tol is None else tol
    T = np.asarray(T)
    d = T.ndim
    if len(set(T.shape)) != 1:
        return False
    if d <= 4:
        return all(
            np.abs(T - T.transpose(p)).max() <= tol for p in itertools.permutations(range(d))
        )
    rng = np.random.default_rng(0) if rng is None else rng
    n = T.shape[0]
    for _ in range(200):
        idx = rng.integers(0, n, size=d)
        perm = rng.permutation(d)
        if abs(T[tuple(idx)] - T[tuple(idx[perm])]) > tol:
            return False
    return True


def check_symmetric(T, tol: float | None = None) -> np.ndarray:
    """Validate and return a symmetric tensor (a read-only float array)."""
    T = as_tensor(T)
    if len(set(T.shape)) != 1:
        raise SymmetryError(f"symmetric tensors need equal dimensions, got {T.shape}")
    if not is_symmetric(T, tol):
        raise SymmetryError("tensor is not symmetric within tolerance")
    T = T.copy()
    T.flags.writeable = False
    return T


def symmetrize(T: np.ndarray) -> np.ndarray:
    """Average ``T`` over all permutations of its modes."""
    T = np.asarray(T, dtype=float)
    perms = list(itertools.permutations(range(T.ndim)))
    return sum(T.transpose(p) for p in perms) / len(perms)


def check_orth_tuple(Q: Sequence[np.ndarray], tol: float | None = None) -> tuple[np.ndarray, ...]:
    """Validate a tuple of square orthogonal matrices."""
    tol = DEFAULT_TOL.orth if tol is None else tol
    out = []
    for k, Qk in enumerate(Q):
        Qk = np.asarray(Qk, dtype=float)
        if Qk.ndim != 2 or Qk.shape[0] != Qk.shape[1]:
            raise DimensionError(f"mode {k}: expected a square matrix, got shape {Qk.shape}")
        defect = orthogonality_defect(Qk)
        if defect > tol:
            raise OrthogonalityError(f"mode {k}: ||Q^T Q - I||_max = {defect:.3e} > {tol:.1e}")
        out.append(Qk)
    return tuple(out)


def orthogonality_defect(Q: np.ndarray) -> float:
    Q = np.asarray(Q, dtype=float)
    return float(np.abs(Q.T @ Q - np.eye(Q.shape[1])).max())


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of O(n) (QR of a Gaussian matrix)."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)
