"""Structured Tucker decompositions ``T = Q . S`` with ``S`` in V (or V_sym)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .manifold import ObjectiveSpec, OptimizerConfig, OptResult, minimize
from .patterns import pattern_V, pattern_Vdiag, pattern_Vsym, project
from .tensor_core import as_tensor, check_symmetric, group_action, norm, sym_action
from .tuple_search import tuple_start

#: singular values closer than this are reported as non-generic
GAP_TOL = 1e-6

NON_GENERIC = "non-generic: uniqueness not guaranteed"
FOUR_BASES = "format 2x2x2x2: up to four orthogonal bases"


@dataclass
class StructuredDecomposition:
    """Output of :func:`decompose` / :func:`decompose_sym`.

    Only the first n_1 columns of each ``Q[k]`` and the leading n_1^d block of
    ``S`` are determined by ``T`` (generically, up to signs); the remaining
    columns are one arbitrary orthonormal completion.
    """

    Q: tuple[np.ndarray, ...]
    S: np.ndarray
    singular_values: np.ndarray
    tuples: list[tuple[np.ndarray, ...]]
    residual: float
    relative_distance: float
    symmetric: bool = False
    flags: list[str] = field(default_factory=list)
    opt: OptResult | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.S.shape


def reconstruct(dec: StructuredDecomposition) -> np.ndarray:
    return group_action(dec.Q, dec.S)


def _check_sorted(T: np.ndarray) -> None:
    if list(T.shape) != sorted(T.shape):
        raise DimensionError(
            f"shape {T.shape} must satisfy n_1 <= ... <= n_d; permute the modes first"
        )


def normalize(Q, S: np.ndarray, symmetric: bool = False):
    """Reorder and re-sign so the diagonal of ``S`` is sorted.

    Non-symmetric: sort by |diagonal| descending (ties by original index), then
    flip signs on mode 1 so the diagonal is non-negative. Symmetric: the same
    matrix acts on every mode, so for odd d the signs are fixed first and for
    even d only sorting (by value) applies. ``Q . S`` is unchanged.
    """
    Q = [np.array(Qk, dtype=float) for Qk in Q]
    S = np.array(S, dtype=float)
    d = S.ndim
    n1 = S.shape[0]
    diag = np.array([S[(j,) * d] for j in range(n1)])

    if symmetric:
        if d % 2 == 1:
            D = np.where(diag < 0, -1.0, 1.0)
            S = group_action([np.diag(D)] * d, S)
            Q = [Qk * D for Qk in Q]
            diag = diag * D
        order = sorted(range(n1), key=lambda j: (-diag[j], j))
        S = S[np.ix_(*[order] * d)]
        Q = [Qk[:, order] for Qk in Q]
        return tuple(Q), S

    order = sorted(range(n1), key=lambda j: (-abs(diag[j]), j))
    perms = [order + list(range(n1, nk)) for nk in S.shape]
    S = S[np.ix_(*perms)]
    Q = [Qk[:, p] for Qk, p in zip(Q, perms)]
    D = np.where(np.array([S[(j,) * d] for j in range(n1)]) < 0, -1.0, 1.0)
    S = S * D.reshape((n1,) + (1,) * (d - 1))
    Q[0] = Q[0] * D
    return tuple(Q), S


def _flags(values: np.ndarray, shape) -> list[str]:
    flags = []
    if len(values) > 1 and np.min(np.abs(np.diff(values))) < GAP_TOL:
        flags.append(NON_GENERIC)
    if tuple(shape) == (2, 2, 2, 2):
        flags.append(FOUR_BASES)
    return flags


def _tuple_initial(T, config: OptimizerConfig | None):
    Q0 = tuple_start(T, seed=(config or OptimizerConfig()).seed)
    return None if Q0 is None else [Q0]


def decompose(
    T, config: OptimizerConfig | None = None, odeco: bool = False, tuple_seeded: bool = True
) -> StructuredDecomposition:
    """Structured Tucker decomposition of a (not necessarily symmetric) tensor.

    Minimises the distance of ``Q^T . T`` to V over orthogonal tuples, projects
    the core onto V and normalises it. With ``odeco=True`` the core is
    restricted to diagonal tensors instead. A poor fit is reported through
    ``residual``, never raised.

    With ``tuple_seeded`` (V problem only) an orthogonal set of singular vector
    tuples, when one is found, is tried before the Haar-random starts.
    """
    T = as_tensor(T)
    _check_sorted(T)
    P = pattern_Vdiag(T.shape) if odeco else pattern_V(T.shape)
    initial = _tuple_initial(T, config) if tuple_seeded and not odeco and T.ndim > 2 else None
    res = minimize(ObjectiveSpec(T, P), config, initial=initial)
    S = project(group_action([Qk.T for Qk in res.Q], T), P)
    Q, S = normalize(res.Q, S)
    return _finish(T, Q, S, res, symmetric=False)


def decompose_sym(T, config: OptimizerConfig | None = None, odeco: bool = False) -> StructuredDecomposition:
    """Symmetric eigendecomposition ``T = Q • S`` with ``S`` in V_sym.

    The columns of ``Q`` are the eigenvectors and the diagonal of ``S`` the
    eigenvalues, sorted in decreasing order (non-negative for odd d).
    """
    T = check_symmetric(T)
    n, d = T.shape[0], T.ndim
    P = pattern_Vdiag(T.shape) if odeco else pattern_Vsym(n, d)
    res = minimize(ObjectiveSpec(T, P, symmetric=True), config)
    Q = res.Q[0]
    S = project(sym_action(Q.T, T, tol=1e-10), P)
    Qn, S = normalize((Q,), S, symmetric=True)
    return _finish(T, (Qn[0],) * d, S, res, symmetric=True)


def _finish(T, Q, S, res: OptResult, symmetric: bool) -> StructuredDecomposition:
    d = S.ndim
    n1 = S.shape[0]
    values = np.array([S[(j,) * d] for j in range(n1)])
    tuples = [tuple(Qk[:, j].copy() for Qk in Q) for j in range(n1)]
    tnorm = norm(T)
    residual = norm(T - group_action(Q, S)) / tnorm if tnorm > 0 else 0.0
    return StructuredDecomposition(
        Q=tuple(Q),
        S=S,
        singular_values=values,
        tuples=tuples,
        residual=residual,
        relative_distance=res.relative_distance,
        symmetric=symmetric,
        flags=_flags(values, T.shape),
        opt=res,
    )


def relative_distance(
    T,
    symmetric: bool = False,
    odeco: bool = False,
    config: OptimizerConfig | None = None,
    warm_start: bool = True,
    tuple_seeded: bool = True,
) -> tuple[float, OptResult]:
    """``min_Q dist(Q^T . T, V) / ||T||`` (V_sym for symmetric, V_diag for odeco).

    For the V / V_sym problem the best odeco solution (same config and seed) is
    added as an extra starting point when ``warm_start`` is set; since any
    diagonal core lies in V, the result is then never worse than the odeco one.
    ``tuple_seeded`` adds the singular-tuple start of :func:`decompose` in the
    non-symmetric case.
    """
    T = check_symmetric(T) if symmetric else as_tensor(T)
    if not symmetric:
        _check_sorted(T)
    n, d = T.shape[0], T.ndim
    diag = pattern_Vdiag(T.shape)
    full = pattern_Vsym(n, d) if symmetric else pattern_V(T.shape)
    res_odeco = minimize(ObjectiveSpec(T, diag, symmetric), config)
    if odeco:
        return res_odeco.relative_distance, res_odeco
    initial = []
    if warm_start:
        initial.append(res_odeco.Q[0] if symmetric else res_odeco.Q)
    if tuple_seeded and not symmetric and d > 2:
        initial += _tuple_initial(T, config) or []
    res = minimize(ObjectiveSpec(T, full, symmetric), config, initial=initial)
    return res.relative_distance, res


def leading_columns_agree(A: StructuredDecomposition, B: StructuredDecomposition, tol: float = 1e-5) -> bool:
    """Do the leading n_1 columns of every factor agree up to sign and a shared permutation?"""
    n1 = A.S.shape[0]
    used = set()
    for j in range(n1):
        match = None
        for i in range(n1):
            if i in used:
                continue
            if all(
                min(np.abs(a[:, j] - b[:, i]).max(), np.abs(a[:, j] + b[:, i]).max()) <= tol
                for a, b in zip(A.Q, B.Q)
            ):
                match = i
                break
        if match is None:
            return False
        used.add(match)
    return True
