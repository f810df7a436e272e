"""Structured starting points built from singular vector tuples.

For j < n_1 the entries of ``Q^T . T`` at Hamming distance one from
``(j, ..., j)`` are exactly the components of ``T(x_j^(-k))`` orthogonal to
``x_j^(k)``, where ``x_j^(k)`` is column j of ``Q_k``. The objective therefore
splits into a sum of per-tuple singular vector residuals, and its zeros are the
sets of n_1 singular vector tuples that are orthogonal in every mode. This
module enumerates singular vector tuples by damped Gauss-Newton from random
points and searches them for such a set.
"""
from __future__ import annotations

import numpy as np

#: squared residual below which a Gauss-Newton run counts as a singular tuple
ACCEPT_SQ = 1e-20
#: entries of the batched broadcast tensor kept in memory at once
CHUNK_ENTRIES = 4_000_000


def tuple_residual_split(T: np.ndarray, Q) -> np.ndarray:
    """Per-column contributions ``||T(x^(-k))||^2 - T(x)^2`` summed over k.

    Their sum equals the squared distance of ``Q^T . T`` to V.
    """
    T = np.asarray(T, dtype=float)
    X = [np.asarray(Qk, dtype=float)[:, : min(T.shape)].T for Qk in Q]
    lam = _contract_batch(T, X, ())
    return sum(np.sum(_contract_batch(T, X, (k,)) ** 2, axis=1) - lam**2 for k in range(T.ndim))


def _contract_batch(T, X, keep):
    """Contract ``T`` with row-batched vectors ``X[k]`` (B, n_k) over modes not in ``keep``."""
    B = X[0].shape[0]
    M = np.broadcast_to(T, (B,) + T.shape)
    # highest mode first so the lower axis numbers stay valid
    for m in sorted(set(range(T.ndim)) - set(keep), reverse=True):
        shp = [B] + [1] * (M.ndim - 1)
        shp[m + 1] = -1
        M = np.sum(M * X[m].reshape(shp), axis=m + 1)
    return M


def _equations(T, X, lam):
    d = T.ndim
    r = [_contract_batch(T, X, (k,)) - lam[:, None] * X[k] for k in range(d)]
    c = [0.5 * (np.sum(x * x, axis=1) - 1.0)[:, None] for x in X]
    return np.concatenate(r + c, axis=1)


def _jacobian(T, X, lam, off):
    d, dims = T.ndim, T.shape
    B, N = X[0].shape[0], off[-1] + 1
    J = np.zeros((B, off[-1] + d, N))
    for k in range(d):
        rows = slice(off[k], off[k + 1])
        for l in range(d):
            cols = slice(off[l], off[l + 1])
            if l == k:
                J[:, rows, cols] = -lam[:, None, None] * np.eye(dims[k])
            elif k < l:
                J[:, rows, cols] = _contract_batch(T, X, (k, l))
            else:
                J[:, rows, cols] = np.swapaxes(_contract_batch(T, X, (l, k)), 1, 2)
        J[:, rows, -1] = -X[k]
        J[:, off[-1] + k, off[k] : off[k + 1]] = X[k]
    return J


def _gauss_newton(T, X, iters):
    dims = T.shape
    off = np.concatenate([[0], np.cumsum(dims)])
    N = off[-1] + 1
    lam = _contract_batch(T, X, ())
    mu = np.full(len(lam), 1e-3)
    r = _equations(T, X, lam)
    for _ in range(iters):
        J = _jacobian(T, X, lam, off)
        A = np.swapaxes(J, 1, 2) @ J + mu[:, None, None] * np.eye(N)
        g = np.einsum("bij,bi->bj", J, r)
        step = -np.linalg.solve(A, g[..., None])[..., 0]
        Xn = [X[k] + step[:, off[k] : off[k + 1]] for k in range(len(dims))]
        ln = lam + step[:, -1]
        rn = _equations(T, Xn, ln)
        better = np.sum(rn * rn, axis=1) < np.sum(r * r, axis=1)
        X = [np.where(better[:, None], a, b) for a, b in zip(Xn, X)]
        lam = np.where(better, ln, lam)
        r = np.where(better[:, None], rn, r)
        mu = np.where(better, mu / 3.0, mu * 4.0)
    return X, lam, np.sum(r * r, axis=1)


def singular_tuples(T, trials: int = 1000, iters: int = 60, seed=0):
    """Distinct singular vector tuples of ``T`` found from ``trials`` random points.

    Returns ``(vectors, value)`` pairs with unit vectors, one per tuple up to
    sign flips. Damped Gauss-Newton on the square-free system also converges to
    tuples that are saddle points of the rank-one fit, which power iteration
    would miss. The list is not guaranteed to be complete.
    """
    T = np.asarray(T, dtype=float)
    scale = float(np.linalg.norm(T))
    if scale == 0.0:
        return []
    T = T / scale
    rng = np.random.default_rng(seed)
    d = T.ndim
    batch = max(1, min(trials, CHUNK_ENTRIES // T.size))
    found = []
    for lo in range(0, trials, batch):
        B = min(batch, trials - lo)
        X = [rng.standard_normal((B, n)) for n in T.shape]
        X = [x / np.linalg.norm(x, axis=1, keepdims=True) for x in X]
        X, lam, res = _gauss_newton(T, X, iters)
        for b in np.flatnonzero(res < ACCEPT_SQ):
            vecs = tuple(X[k][b] / np.linalg.norm(X[k][b]) for k in range(d))
            if not any(all(abs(v @ w) > 1 - 1e-8 for v, w in zip(vecs, f[0])) for f in found):
                found.append((vecs, float(lam[b]) * scale))
    return found


def orthogonal_subsets(tuples, size: int, tol: float = 1e-6, budget: int = 200_000):
    """Yield index lists of ``size`` tuples pairwise orthogonal in every mode.

    Depth-first clique search over the orthogonality graph, giving up after
    ``budget`` visited nodes.
    """
    n = len(tuples)
    if n < size:
        return
    adj = np.ones((n, n), dtype=bool)
    for k in range(len(tuples[0][0])):
        V = np.array([t[0][k] for t in tuples])
        adj &= np.abs(V @ V.T) < tol
    visited = 0

    def grow(chosen, cand):
        nonlocal visited
        visited += 1
        if len(chosen) == size:
            yield chosen
            return
        if visited > budget or len(chosen) + len(cand) < size:
            return
        for pos, c in enumerate(cand):
            yield from grow(chosen + [c], [x for x in cand[pos + 1 :] if adj[c, x]])

    yield from grow([], list(range(n)))


def orthogonal_subset(tuples, size: int, tol: float = 1e-6, budget: int = 200_000):
    """First index list found by :func:`orthogonal_subsets`, or None."""
    return next(orthogonal_subsets(tuples, size, tol, budget), None)


def tuple_start(T, seed=0, trials: int = 1000, iters: int = 60):
    """Orthogonal factor tuple whose first n_1 columns are singular vector tuples of ``T``.

    Columns past n_1 are an orthonormal completion. Returns None when no
    orthogonal set is found, which is the typical outcome for tensors far
    from the orbit of V.
    """
    T = np.asarray(T, dtype=float)
    n1 = min(T.shape)
    tuples = singular_tuples(T, trials, iters, seed)
    pick = orthogonal_subset(tuples, n1)
    if pick is None:
        return None
    Q = []
    for k, n in enumerate(T.shape):
        C = np.array([tuples[j][0][k] for j in pick]).T
        # full QR keeps the chosen columns (up to sign) and completes the basis
        Qk, R = np.linalg.qr(C, mode="complete")
        Qk[:, :n1] *= np.sign(np.diag(R))
        Q.append(Qk)
    return tuple(Q)
