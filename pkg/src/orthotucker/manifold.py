"""Riemannian gradient descent on products of orthogonal groups.

Minimises ``dist(Q^T . T, V)^2``, the squared Frobenius norm of the entries of
``Q^T . T`` that the pattern forces to zero, over ``O(n_1) x ... x O(n_d)``,
or over a single ``O(n)`` acting on every mode for symmetric targets.
"""
from __future__ import annotations

import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, OrthogonalityError
from .patterns import PatternIndexSet
from .tensor_core import (
    flatten,
    group_action,
    haar_orthogonal,
    is_symmetric,
    mode_product,
    orthogonality_defect,
)

#: optimiser drift beyond this is rejected by :func:`objective`
DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class ObjectiveSpec:
    target: np.ndarray
    pattern: PatternIndexSet
    symmetric: bool = False

    def __post_init__(self):
        T = np.asarray(self.target, dtype=float)
        object.__setattr__(self, "target", T)
        if T.shape != self.pattern.shape:
            raise DimensionError(
                f"target shape {T.shape} does not match pattern shape {self.pattern.shape}"
            )
        if self.symmetric and not is_symmetric(T, 1e-10 * max(1.0, float(np.abs(T).max()))):
            raise ValueError("symmetric objective needs a symmetric target")

    @property
    def order(self) -> int:
        return self.target.ndim


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`minimize`.

    ``stop_below`` ends the multi-start loop early once a run reaches that
    relative distance; ``None`` always runs every start. ``polish_tol``
    continues the best start until the Riemannian gradient norm drops below
    it. ``workers`` > 1 runs starts on a thread pool (in fixed-size batches,
    so results only depend on ``seed`` and ``workers``).
    """

    max_iters: int = 2000
    grad_tol: float = 1e-9
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    starts: int = 20
    seed: int = 0
    stop_below: float | None = None
    polish_tol: float | None = 1e-13
    workers: int = 1

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "armijo_c", "initial_step", "starts", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"OptimizerConfig.{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("OptimizerConfig.backtrack must lie in (0, 1)")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ORTHOTUCKER_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class StartRecord:
    index: int
    objective: float
    iterations: int
    converged: bool
    trace: list[float] = field(repr=False)


@dataclass
class OptResult:
    Q: tuple[np.ndarray, ...]
    objective: float
    relative_distance: float
    iterations: int
    converged: bool
    best_start: int
    history: list[StartRecord] = field(repr=False)


# -- objective and derivatives ----------------------------------------------

def _expand(Q, spec: ObjectiveSpec) -> tuple[np.ndarray, ...]:
    if spec.symmetric:
        Q = np.asarray(Q, dtype=float) if not isinstance(Q, (list, tuple)) else np.asarray(Q[0])
        return (Q,) * spec.order
    if len(Q) != spec.order:
        raise DimensionError(f"got {len(Q)} matrices for a tensor of order {spec.order}")
    return tuple(np.asarray(Qk, dtype=float) for Qk in Q)


def _residual(Qfull, T: np.ndarray, mask: np.ndarray):
    Y = group_action([Qk.T for Qk in Qfull], T)
    R = np.where(mask, Y, 0.0)
    return Y, R


def objective(Q, spec: ObjectiveSpec) -> float:
    """``dist(Q^T . T, V)^2``; ``Q`` is one matrix when ``spec.symmetric``."""
    Qfull = _expand(Q, spec)
    for k, Qk in enumerate(Qfull):
        if Qk.shape[0] != Qk.shape[1] or orthogonality_defect(Qk) > DRIFT_TOL:
            raise OrthogonalityError(f"mode {k}: Q is not orthogonal (optimiser drift?)")
    return _objective_unchecked(Qfull, spec)


def _objective_unchecked(Qfull, spec: ObjectiveSpec) -> float:
    _, R = _residual(Qfull, spec.target, spec.pattern.zero_mask)
    return float(np.sum(R * R))


def euclidean_gradient(Q, spec: ObjectiveSpec):
    """Euclidean gradient of the objective, valid for arbitrary square ``Q``.

    Returns one matrix per mode, or the single gradient with respect to the
    shared matrix (the sum over modes) when ``spec.symmetric``.
    """
    Qfull = _expand(Q, spec)
    T = spec.target
    _, R = _residual(Qfull, T, spec.pattern.zero_mask)
    grads = []
    for k in range(spec.order):
        Z = T
        for l, Ql in enumerate(Qfull):
            if l != k:
                Z = mode_product(Z, Ql.T, l)
        grads.append(2.0 * flatten(Z, k) @ flatten(R, k).T)
    return sum(grads) if spec.symmetric else grads


def _manifold_gradient(Qfull, Y, R, symmetric: bool):
    # uses Q_k Q_k^T = I: the partially transformed tensor is Q_k Y_(k)
    grads = [2.0 * Qk @ (flatten(Y, k) @ flatten(R, k).T) for k, Qk in enumerate(Qfull)]
    return [sum(grads)] if symmetric else grads


def _skew(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A - A.T)


def tangent_projection(Q: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Project ``G`` onto the tangent space of O(n) at ``Q``: ``Q skew(Q^T G)``."""
    return Q @ _skew(Q.T @ G)


def retract(Q: np.ndarray, V: np.ndarray) -> np.ndarray | None:
    """QR retraction of ``Q + V``; ``None`` if the factorisation is singular."""
    Qn, R = np.linalg.qr(Q + V)
    diag = np.diag(R)
    if np.min(np.abs(diag)) < 1e-12:
        return None
    return Qn * np.where(diag < 0, -1.0, 1.0)


def riemannian_step(Q: Sequence[np.ndarray], grad: Sequence[np.ndarray], step: float = 1.0):
    """One retracted step against the projected gradient.

    A rank-deficient retraction halves the step and tries again.
    """
    xi = [tangent_projection(Qk, Gk) for Qk, Gk in zip(Q, grad)]
    while step > 1e-30:
        out = [retract(Qk, -step * Xk) for Qk, Xk in zip(Q, xi)]
        if all(o is not None for o in out):
            return tuple(out)
        step *= 0.5
    return tuple(np.asarray(Qk) for Qk in Q)


# -- descent ------------------------------------------------------------------

def _descend(Qs, T, mask, symmetric, cfg: OptimizerConfig, callback=None, start=0):
    d = T.ndim

    def full(Qs_):
        return (Qs_[0],) * d if symmetric else tuple(Qs_)

    def evaluate(Qs_):
        Y, R = _residual(full(Qs_), T, mask)
        return float(np.sum(R * R)), Y, R

    f, Y, R = evaluate(Qs)
    G = _manifold_gradient(full(Qs), Y, R, symmetric)
    xi = [tangent_projection(Qk, Gk) for Qk, Gk in zip(Qs, G)]
    trace = [f]
    step0 = cfg.initial_step
    converged = False
    it = 0
    if callback is not None:
        callback(start, 0, full(Qs), f)
    while it < cfg.max_iters:
        gnorm2 = sum(float(np.sum(X * X)) for X in xi)
        if math.sqrt(gnorm2) <= cfg.grad_tol:
            converged = True
            break
        step = step0
        accepted = None
        while step > 1e-20:
            cand = [retract(Qk, -step * Xk) for Qk, Xk in zip(Qs, xi)]
            if any(c is None for c in cand):
                step *= 0.5
                continue
            fc, Yc, Rc = evaluate(cand)
            if fc <= f - cfg.armijo_c * step * gnorm2:
                accepted = (cand, fc, Yc, Rc)
                break
            step *= cfg.backtrack
        if accepted is None:
            # no decrease representable in floating point any more
            converged = f <= 1e-28
            break
        it += 1
        cand, fc, Yc, Rc = accepted
        Gc = _manifold_gradient(full(cand), Yc, Rc, symmetric)
        xic = [tangent_projection(Qk, Gk) for Qk, Gk in zip(cand, Gc)]
        # Barzilai-Borwein trial step for the next line search
        s = [a - b for a, b in zip(cand, Qs)]
        y = [a - b for a, b in zip(xic, xi)]
        sy = sum(float(np.sum(a * b)) for a, b in zip(s, y))
        ss = sum(float(np.sum(a * a)) for a in s)
        step0 = min(max(ss / sy, 1e-8), 1e8) if sy > 0 else min(2 * step, 1e8)
        Qs, f, xi = cand, fc, xic
        trace.append(f)
        if callback is not None:
            callback(start, it, full(Qs), f)
    return Qs, f, it, converged, trace


def minimize(
    spec: ObjectiveSpec,
    config: OptimizerConfig | None = None,
    initial: Sequence | None = None,
    callback: Callable | None = None,
) -> OptResult:
    """Multi-start Riemannian gradient descent; returns the best start.

    ``initial`` optionally supplies extra starting points (tuples of matrices,
    or single matrices in the symmetric case); they are tried before the
    ``config.starts`` Haar-random ones. ``callback(start, iteration, Q, f)``
    sees every iterate with ``f`` relative to the unit-normalised target.
    Non-convergence is reported through ``OptResult.converged``.
    """
    cfg = config or OptimizerConfig()
    T = spec.target
    tnorm = float(np.linalg.norm(T))
    mask = spec.pattern.zero_mask
    d = spec.order
    if spec.symmetric:
        dims = [T.shape[0]]
    else:
        dims = list(T.shape)
    if tnorm == 0.0:
        Q = tuple(np.eye(n) for n in T.shape)
        return OptResult(Q, 0.0, 0.0, 0, True, 0, [StartRecord(0, 0.0, 0, True, [0.0])])
    Tn = T / tnorm

    starts = []
    for Q0 in initial or ():
        Q0 = [np.asarray(Q0, dtype=float)] if spec.symmetric and np.ndim(Q0) == 2 else [
            np.asarray(q, dtype=float) for q in Q0
        ]
        if spec.symmetric:
            Q0 = Q0[:1]
        starts.append(Q0)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.starts)
    for ss in seeds:
        rng = np.random.default_rng(ss)
        starts.append([haar_orthogonal(n, rng) for n in dims])

    def run(i):
        return _descend(starts[i], Tn, mask, spec.symmetric, cfg, callback, i)

    workers = cfg.workers
    results = []
    for lo in range(0, len(starts), workers):
        batch = range(lo, min(lo + workers, len(starts)))
        if workers > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results.extend(pool.map(run, batch))
        else:
            results.extend(run(i) for i in batch)
        if cfg.stop_below is not None and min(r[1] for r in results) <= cfg.stop_below ** 2:
            break

    best = min(range(len(results)), key=lambda i: (results[i][1], i))
    if cfg.polish_tol is not None and cfg.polish_tol < cfg.grad_tol:
        Qs, f, it, conv, trace = results[best]
        pcfg = replace(cfg, grad_tol=cfg.polish_tol)
        Qp, fp, itp, convp, tracep = _descend(Qs, Tn, mask, spec.symmetric, pcfg, None, best)
        results[best] = (Qp, fp, it + itp, convp or conv, trace + tracep[1:])

    history = [
        StartRecord(i, f * tnorm**2, it, conv, trace)
        for i, (_, f, it, conv, trace) in enumerate(results)
    ]
    Qs, f, it, conv, _ = results[best]
    Qfull = (Qs[0],) * d if spec.symmetric else tuple(Qs)
    return OptResult(
        Q=Qfull,
        objective=f * tnorm**2,
        relative_distance=min(1.0, math.sqrt(max(f, 0.0))),
        iterations=it,
        converged=conv,
        best_start=best,
        history=history,
    )
