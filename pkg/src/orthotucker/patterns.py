"""Sparsity-pattern subspaces V, V_sym, V_diag and their complements.

A tensor lies in V when every entry at Hamming distance one from a diagonal
coordinate ``(j, ..., j)`` vanishes. V_diag keeps only the diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import DimensionError

Kind = Literal["V", "V_sym", "V_diag", "V_perp"]


@dataclass(frozen=True)
class PatternIndexSet:
    """Coordinate pattern of a subspace.

    For kinds ``V`` and ``V_sym``, ``indices`` lists the coordinates forced to
    zero. For ``V_diag`` and ``V_perp`` it lists the coordinates allowed to be
    nonzero. Indices are 0-based and sorted lexicographically.
    """

    shape: tuple[int, ...]
    kind: Kind
    indices: tuple[tuple[int, ...], ...] = field(repr=False)

    @cached_property
    def zero_mask(self) -> np.ndarray:
        """Boolean array, True where a tensor in the subspace must vanish."""
        mask = np.zeros(self.shape, dtype=bool)
        if self.indices:
            mask[tuple(np.array(self.indices).T)] = True
        if self.kind in ("V_diag", "V_perp"):
            mask = ~mask
        mask.flags.writeable = False
        return mask

    @property
    def dim(self) -> int:
        """Dimension of the subspace inside the full tensor space."""
        return int(self.zero_mask.size - self.zero_mask.sum())

    def __len__(self) -> int:
        return len(self.indices)


def _check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if len(shape) < 2:
        raise DimensionError(f"need order d >= 2, got shape {shape}")
    if any(n < 2 for n in shape):
        raise DimensionError(f"all dimensions must be >= 2, got {shape}")
    if list(shape) != sorted(shape):
        raise DimensionError(
            f"shape {shape} is not sorted ascending; permute the modes so that n_1 <= ... <= n_d first"
        )
    return shape


def hamming_one_indices(shape: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Coordinates at Hamming distance one from some ``(j, ..., j)``, j < n_1."""
    found = set()
    for j in range(shape[0]):
        for k, nk in enumerate(shape):
            for i in range(nk):
                if i != j:
                    idx = [j] * len(shape)
                    idx[k] = i
                    found.add(tuple(idx))
    return sorted(found)


def pattern_V(shape) -> PatternIndexSet:
    shape = _check_shape(shape)
    return PatternIndexSet(shape, "V", tuple(hamming_one_indices(shape)))


def pattern_Vperp(shape) -> PatternIndexSet:
    shape = _check_shape(shape)
    return PatternIndexSet(shape, "V_perp", tuple(hamming_one_indices(shape)))


def pattern_Vsym(n: int, d: int) -> PatternIndexSet:
    if n < 2 or d < 2:
        raise DimensionError(f"V_sym needs n >= 2 and d >= 2, got n={n}, d={d}")
    shape = (n,) * d
    return PatternIndexSet(shape, "V_sym", tuple(hamming_one_indices(shape)))


def pattern_Vdiag(shape) -> PatternIndexSet:
    shape = _check_shape(shape)
    diag = tuple((j,) * len(shape) for j in range(shape[0]))
    return PatternIndexSet(shape, "V_diag", diag)


def expected_dim_V(shape) -> int:
    """``n_1...n_d - sum_k n_1 (n_k - 1)``; valid for d >= 3."""
    shape = tuple(shape)
    return math.prod(shape) - sum(shape[0] * (nk - 1) for nk in shape)


def _match(T: np.ndarray, P: PatternIndexSet) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.shape != P.shape:
        raise DimensionError(f"tensor of shape {T.shape} does not match pattern shape {P.shape}")
    return T


def project(T: np.ndarray, P: PatternIndexSet) -> np.ndarray:
    """Orthogonal projection onto the subspace: zero the forced coordinates."""
    T = _match(T, P)
    return np.where(P.zero_mask, 0.0, T)


def distance(T: np.ndarray, P: PatternIndexSet) -> float:
    """Frobenius distance from ``T`` to the subspace."""
    T = _match(T, P)
    return float(np.sqrt(np.sum(T[P.zero_mask] ** 2)))
