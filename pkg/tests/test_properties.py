"""Property suites for the tensor core, the sparsity patterns and the optimiser."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_group_action, naive_pattern, numerical_gradient
from orthotucker.manifold import (
    ObjectiveSpec,
    OptimizerConfig,
    _descend,
    _objective_unchecked,
    euclidean_gradient,
    objective,
    retract,
    riemannian_step,
    tangent_projection,
)
from orthotucker.patterns import distance, pattern_V, pattern_Vdiag, pattern_Vperp, pattern_Vsym, project
from orthotucker.tensor_core import (
    flatten,
    group_action,
    haar_orthogonal,
    inner,
    is_symmetric,
    norm,
    orthogonality_defect,
    sym_action,
    symmetrize,
    unflatten,
)

CASES = settings(max_examples=100, deadline=None)

seeds = st.integers(0, 2**32 - 1)
shapes = st.lists(st.integers(2, 4), min_size=2, max_size=4).map(lambda s: tuple(sorted(s)))
small_shapes = st.lists(st.integers(2, 3), min_size=2, max_size=3).map(lambda s: tuple(sorted(s)))


# -- tensor core --------------------------------------------------------------

@CASES
@given(shapes, seeds)
def test_action_composes(shape, seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal(shape)
    P = [rng.standard_normal((n, n)) for n in shape]
    Q = [rng.standard_normal((n, n)) for n in shape]
    lhs = group_action(P, group_action(Q, T))
    rhs = group_action([p @ q for p, q in zip(P, Q)], T)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max())


@CASES
@given(shapes, seeds)
def test_orthogonal_action_is_isometry(shape, seed):
    rng = np.random.default_rng(seed)
    S, T = rng.standard_normal(shape), rng.standard_normal(shape)
    Q = [haar_orthogonal(n, rng) for n in shape]
    assert abs(norm(group_action(Q, T)) - norm(T)) <= 1e-12 * norm(T)
    assert abs(inner(group_action(Q, S), group_action(Q, T)) - inner(S, T)) <= 1e-12 * norm(S) * norm(T)


@CASES
@given(small_shapes, seeds)
def test_action_matches_entrywise_sum(shape, seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal(shape)
    Q = [rng.standard_normal((rng.integers(1, 4), n)) for n in shape]
    assert np.allclose(group_action(Q, T), naive_group_action(Q, T), atol=1e-12)


@CASES
@given(shapes, seeds)
def test_flatten_roundtrip(shape, seed):
    T = np.random.default_rng(seed).standard_normal(shape)
    for k in range(len(shape)):
        M = flatten(T, k)
        assert M.shape == (shape[k], T.size // shape[k])
        assert np.array_equal(unflatten(M, k, shape), T)


@CASES
@given(st.integers(2, 4), st.integers(2, 4), seeds)
def test_sym_action_keeps_symmetry(n, d, seed):
    rng = np.random.default_rng(seed)
    T = symmetrize(rng.standard_normal((n,) * d))
    Y = sym_action(haar_orthogonal(n, rng), T)
    assert is_symmetric(Y, 1e-12 * max(1.0, np.abs(Y).max()))


# -- sparsity patterns --------------------------------------------------------

@CASES
@given(shapes, seeds)
def test_projection_pythagoras(shape, seed):
    T = np.random.default_rng(seed).standard_normal(shape)
    P = pattern_V(shape)
    pT = project(T, P)
    assert abs(norm(T) ** 2 - (norm(pT) ** 2 + distance(T, P) ** 2)) <= 1e-12 * norm(T) ** 2
    assert np.allclose(pT + project(T, pattern_Vperp(shape)), T, atol=0)


@CASES
@given(shapes, seeds)
def test_projection_idempotent(shape, seed):
    T = np.random.default_rng(seed).standard_normal(shape)
    for P in (pattern_V(shape), pattern_Vdiag(shape), pattern_Vperp(shape)):
        once = project(T, P)
        assert np.array_equal(project(once, P), once)
        assert distance(once, P) == 0.0


@CASES
@given(shapes)
def test_pattern_matches_brute_force(shape):
    P = pattern_V(shape)
    assert list(P.indices) == naive_pattern(shape)
    if len(shape) >= 3:
        assert P.dim == np.prod(shape) - sum(shape[0] * (nk - 1) for nk in shape)


# -- optimiser ----------------------------------------------------------------

def _spec(shape, rng, symmetric=False):
    if symmetric:
        n, d = shape[0], len(shape)
        return ObjectiveSpec(symmetrize(rng.standard_normal((n,) * d)), pattern_Vsym(n, d), True)
    return ObjectiveSpec(rng.standard_normal(shape), pattern_V(shape))


@CASES
@given(small_shapes, seeds)
def test_gradient_matches_finite_differences(shape, seed):
    rng = np.random.default_rng(seed)
    spec = _spec(shape, rng)
    Q = [rng.standard_normal((n, n)) for n in shape]  # off the manifold on purpose
    G = euclidean_gradient(Q, spec)
    num = numerical_gradient(lambda Qs: _objective_unchecked(Qs, spec), Q)
    for a, b in zip(G, num):
        assert np.allclose(a, b, rtol=1e-5, atol=1e-6 * max(1.0, np.abs(b).max()))


@CASES
@given(st.integers(2, 3), st.integers(3, 4), seeds)
def test_symmetric_gradient_matches_finite_differences(n, d, seed):
    rng = np.random.default_rng(seed)
    spec = _spec((n,) * d, rng, symmetric=True)
    Q = rng.standard_normal((n, n))
    G = euclidean_gradient(Q, spec)
    num = numerical_gradient(lambda Qs: _objective_unchecked((Qs[0],) * d, spec), [Q])[0]
    assert np.allclose(G, num, rtol=1e-5, atol=1e-6 * max(1.0, np.abs(num).max()))


@CASES
@given(shapes, seeds)
def test_riemannian_step_descends_and_stays_orthogonal(shape, seed):
    rng = np.random.default_rng(seed)
    spec = _spec(shape, rng)
    Q = [haar_orthogonal(n, rng) for n in shape]
    G = euclidean_gradient(Q, spec)
    xi = [tangent_projection(q, g) for q, g in zip(Q, G)]
    for q, x in zip(Q, xi):
        A = q.T @ x
        assert np.allclose(A, -A.T, atol=1e-10 * max(1.0, np.abs(A).max()))
    gnorm2 = sum(float(np.sum(x * x)) for x in xi)
    f0 = objective(Q, spec)
    step = 1e-3 / max(1.0, np.sqrt(gnorm2))
    Q1 = riemannian_step(Q, G, step)
    assert all(orthogonality_defect(q) <= 1e-12 for q in Q1)
    assert objective(Q1, spec) <= f0 - 0.5 * step * gnorm2 + 1e-14


@CASES
@given(small_shapes, seeds)
def test_descent_is_monotone(shape, seed):
    rng = np.random.default_rng(seed)
    spec = _spec(shape, rng)
    T = spec.target / norm(spec.target)
    Q0 = [haar_orthogonal(n, rng) for n in shape]
    Qs, f, it, _, trace = _descend(Q0, T, spec.pattern.zero_mask, False, OptimizerConfig(max_iters=30))
    assert all(b <= a + 1e-15 for a, b in zip(trace, trace[1:]))
    assert all(orthogonality_defect(q) <= 1e-10 for q in Qs)


@CASES
@given(st.integers(2, 4), seeds)
def test_retraction_is_orthogonal(n, seed):
    rng = np.random.default_rng(seed)
    Q = haar_orthogonal(n, rng)
    A = rng.standard_normal((n, n))
    R = retract(Q, Q @ (A - A.T))
    assert R is not None and orthogonality_defect(R) <= 1e-12
    assert np.allclose(retract(Q, np.zeros((n, n))), Q, atol=1e-14)


PROPERTY_SUITES = [
    test_action_composes,
    test_orthogonal_action_is_isometry,
    test_action_matches_entrywise_sum,
    test_flatten_roundtrip,
    test_sym_action_keeps_symmetry,
    test_projection_pythagoras,
    test_projection_idempotent,
    test_pattern_matches_brute_force,
    test_gradient_matches_finite_differences,
    test_symmetric_gradient_matches_finite_differences,
    test_riemannian_step_descends_and_stays_orthogonal,
    test_descent_is_monotone,
    test_retraction_is_orthogonal,
]
