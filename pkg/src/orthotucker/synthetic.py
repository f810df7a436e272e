"""Random instances with a planted structured decomposition ``T = Q . S``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .patterns import pattern_V, pattern_Vdiag, pattern_Vsym, project
from .tensor_core import group_action, haar_orthogonal, symmetrize

MIN_GAP = 0.1


@dataclass
class Planted:
    T: np.ndarray
    Q: tuple[np.ndarray, ...]
    S: np.ndarray
    diagonal: np.ndarray


def sorted_diagonal(n: int, rng: np.random.Generator, gap: float = MIN_GAP) -> np.ndarray:
    """Strictly decreasing positive values with consecutive gaps >= ``gap``."""
    while True:
        vals = np.sort(np.abs(rng.standard_normal(n)) + gap)[::-1]
        if n == 1 or np.min(-np.diff(vals)) >= gap:
            return vals


def random_core(shape, rng: np.random.Generator, gap: float = MIN_GAP, odeco: bool = False):
    shape = tuple(shape)
    P = pattern_Vdiag(shape) if odeco else pattern_V(shape)
    S = project(rng.standard_normal(shape), P)
    diag = sorted_diagonal(shape[0], rng, gap)
    for j, v in enumerate(diag):
        S[(j,) * len(shape)] = v
    return S, diag


def random_sym_core(n: int, d: int, rng: np.random.Generator, gap: float = MIN_GAP):
    S = project(symmetrize(rng.standard_normal((n,) * d)), pattern_Vsym(n, d))
    diag = sorted_diagonal(n, rng, gap)
    for j, v in enumerate(diag):
        S[(j,) * d] = v
    return S, diag


def planted(shape, seed=None, gap: float = MIN_GAP, odeco: bool = False) -> Planted:
    rng = np.random.default_rng(seed)
    S, diag = random_core(shape, rng, gap, odeco)
    Q = tuple(haar_orthogonal(n, rng) for n in shape)
    return Planted(group_action(Q, S), Q, S, diag)


def planted_sym(n: int, d: int, seed=None, gap: float = MIN_GAP) -> Planted:
    rng = np.random.default_rng(seed)
    S, diag = random_sym_core(n, d, rng, gap)
    Q = haar_orthogonal(n, rng)
    T = symmetrize(group_action([Q] * d, S))
    return Planted(T, (Q,) * d, S, diag)
