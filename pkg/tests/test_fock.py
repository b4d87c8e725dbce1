import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cph import fock as F
from cph.cpmap import apply_power
from cph.errors import DimensionError, PreconditionError
from cph.opcore import opnorm

from families import ginibre, random_contractive

seeds = st.integers(0, 2**32 - 1)

SWAP = [np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])]


def schur_multiplier_norm(M):
    """Norm of the Schur multiplier ``a -> M * a`` via Haagerup's semidefinite characterization."""
    n = M.shape[0]
    Z = cp.Variable((2 * n, 2 * n), symmetric=True)
    t = cp.Variable()
    cp.Problem(cp.Minimize(t), [Z >> 0, Z[:n, n:] == M, cp.diag(Z) <= t]).solve(solver=cp.CLARABEL)
    return float(t.value)


def word_matrix(fock, w):
    """Brute-force oracle for a product of creation operators: e_v -> e_{wv} when it fits."""
    M = np.zeros((fock.dim, fock.dim))
    for v, col in fock.index.items():
        if len(w) + len(v) < fock.N:
            M[fock.index[tuple(w) + v], col] = 1
    return M


# -- Fock space and creation operators ------------------------------------------

def test_fock_indexing():
    f = F.TruncatedFock(2, 3)
    assert f.dim == 7
    assert f.words == [(), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]
    assert f.level_slice(2) == slice(3, 7)
    P = sum(f.level_projection(m) for m in range(3))
    assert np.array_equal(P, np.eye(7))


def test_creation_examples():
    L = F.creation_operator(1, F.TruncatedFock(1, 3))
    assert np.array_equal(L, np.eye(3, k=-1))
    f = F.TruncatedFock(2, 2)
    L1 = F.creation_operator(1, f)
    assert np.array_equal(L1 @ f.vacuum(), f.basis_vector((1,)))
    assert not np.any(L1 @ f.basis_vector((1,))) and not np.any(L1 @ f.basis_vector((2,)))
    with pytest.raises(ValueError):
        F.creation_operator(3, f)


@pytest.mark.parametrize("d,N", [(1, 4), (2, 3), (3, 3), (2, 4)])
def test_creation_relations(d, N):
    f = F.TruncatedFock(d, N)
    L = [F.creation_operator(j, f) for j in range(1, d + 1)]
    top = f.level_projection(N - 1)
    for i in range(d):
        for j in range(d):
            expected = (np.eye(f.dim) - top) if i == j else np.zeros((f.dim, f.dim))
            assert np.array_equal(L[j].conj().T @ L[i], expected)
    for w in F.words(d, N):
        assert np.array_equal(F.word_operator(L, w, f.dim), word_matrix(f, w))


# -- generalized powers -------------------------------------------------------------

def test_generalized_power_examples():
    assert np.array_equal(F.generalized_power(SWAP, 0), np.eye(2))
    c = 0.7 - 0.2j
    for n in range(5):
        assert F.generalized_power([np.array([[c]])], n)[0, 0] == pytest.approx(c ** n, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_generalized_power_identities(seed):
    rng = np.random.default_rng(seed)
    phi = random_contractive(rng, n=int(rng.integers(1, 4)), d=int(rng.integers(1, 3)))
    for n in range(7):
        Tn = F.generalized_power(phi, n)
        assert Tn.shape == (phi.n, phi.d ** n * phi.n)
        assert np.allclose(Tn @ Tn.conj().T, apply_power(phi, np.eye(phi.n), n), atol=1e-12)
    # block order follows word order
    for k, w in enumerate(F.words(phi.d, 3, 3)):
        block = F.generalized_power(phi, 3)[:, k * phi.n:(k + 1) * phi.n]
        assert np.allclose(block, F.word_operator(phi.kraus, w, phi.n), atol=1e-14)
    # semigroup law
    T2, T3 = F.generalized_power(phi, 2), F.generalized_power(phi, 3)
    T5 = T2 @ np.kron(np.eye(phi.d ** 2), T3)
    assert np.allclose(T5, F.generalized_power(phi, 5), atol=1e-12)


# -- dilation -------------------------------------------------------------------------

def test_dilation_zero_scalar():
    res = F.build_dilation([np.zeros((1, 1))], 4)
    assert res.defect_rank == 1 and res.K_dim == 5
    assert np.allclose(res.defect, [[1]])
    assert np.allclose(res.V[0], np.eye(5, k=-1))
    assert res.dilation_defect == 0 and res.isometry_defect <= 1e-15


def test_dilation_scalar():
    c = 0.6
    res = F.build_dilation([np.array([[c]])], 5)
    assert res.defect[0, 0] == pytest.approx(np.sqrt(1 - c * c), abs=1e-15)
    V = res.V[0]
    for n in range(6):
        assert np.linalg.matrix_power(V, n)[0, 0] == pytest.approx(c ** n, abs=1e-12)
    assert res.isometry_defect <= 1e-12


def test_dilation_swap_pair():
    res = F.build_dilation(SWAP, 3)
    assert res.defect_rank == 2
    assert np.allclose(res.defect, np.diag([1, 0, 0, 1]), atol=1e-15)
    assert res.K_dim == 2 + 7 * 2
    assert res.dilation_defect <= 1e-10 and res.isometry_defect <= 1e-10
    assert res.minimality_defect <= 1e-12


def test_dilation_requires_contraction():
    with pytest.raises(PreconditionError):
        F.build_dilation([np.array([[1.5]])], 2)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, N=st.integers(1, 5))
def test_dilation_properties(seed, N):
    rng = np.random.default_rng(seed)
    phi = random_contractive(rng, n=int(rng.integers(1, 4)), d=int(rng.integers(1, 3)))
    res = F.build_dilation(phi, N)
    assert res.isometry_defect <= 1e-10
    assert res.dilation_defect <= 1e-10
    assert res.minimality_defect <= 1e-10
    assert res.words_checked == len(F.words(phi.d, N))
    # defect identity I - T~*T~ = Delta^2
    gram = phi.row.conj().T @ phi.row
    assert np.allclose(res.defect @ res.defect, np.eye(gram.shape[0]) - gram, atol=1e-10)
    # independent check of the power relation on the H corner
    m = phi.n
    for w in F.words(phi.d, min(N, 3)):
        assert np.allclose(F.word_operator(res.V, w, res.K_dim)[:m, :m],
                           F.word_operator(phi.kraus, w, m), atol=1e-10)


# -- c.n.c. subspace and absolute continuity -------------------------------------------

def test_cnc_examples():
    assert F.cnc_subspace([0.5 * np.eye(2)]).rank == 0
    assert F.cnc_subspace(SWAP).rank == 2
    P = F.cnc_subspace([np.diag([1.0, 0.5])])
    assert np.allclose(P.matrix, np.diag([1, 0]), atol=1e-10)


def test_absolute_continuity_examples():
    r = F.is_absolutely_continuous_finite(SWAP)
    assert not r and r.coisometric_rank == 2 and r.consistent
    r = F.is_absolutely_continuous_finite([0.5 * np.eye(2)])
    assert r and r.pac_rank_lo == 2 and r.consistent
    r = F.is_absolutely_continuous_finite([np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert r and r.consistent


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_cnc_equivalence(seed):
    rng = np.random.default_rng(seed)
    phi = random_contractive(rng)
    r = F.is_absolutely_continuous_finite(phi)
    assert r.pac_certified
    assert r.consistent


# -- gauge bands ------------------------------------------------------------------------

def test_band_examples():
    f = F.TruncatedFock(2, 3)
    a = np.kron(F.creation_operator(1, f), np.eye(2))
    for j in range(-2, 3):
        expected = a if j == 1 else 0 * a
        assert np.array_equal(F.fourier_coefficient(a, j, f, 2), expected)
    I = np.eye(f.dim)
    assert np.array_equal(F.fourier_coefficient(I, 0, f), I)
    assert not np.any(F.fourier_coefficient(I, 1, f))
    with pytest.raises(DimensionError):
        F.fourier_coefficient(np.eye(3), 0, f)


@pytest.mark.parametrize("d,N", [(1, 3), (2, 2), (2, 3), (2, 4)])
def test_creation_products_are_bands(d, N):
    f = F.TruncatedFock(d, N)
    L = [F.creation_operator(j, f) for j in range(1, d + 1)]
    for w in F.words(d, N - 1, 1):
        a = F.word_operator(L, w, f.dim)
        for j in range(-(N - 1), N):
            coeff = F.fourier_coefficient(a, j, f)
            assert np.array_equal(coeff, a if j == len(w) else np.zeros_like(a))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 2), N=st.integers(1, 4), h=st.integers(1, 2))
def test_band_completeness(seed, d, N, h):
    rng = np.random.default_rng(seed)
    f = F.TruncatedFock(d, N)
    a = ginibre(rng, f.dim * h, f.dim * h)
    total = sum(F.fourier_coefficient(a, j, f, h) for j in range(-(N - 1), N))
    assert np.array_equal(total, a)


def test_cesaro_examples():
    rng = np.random.default_rng(0)
    f = F.TruncatedFock(2, 3)
    a = ginibre(rng, f.dim, f.dim)
    assert np.array_equal(F.cesaro_mean(a, 1, f), F.fourier_coefficient(a, 0, f))
    b = F.fourier_coefficient(a, 1, f)
    assert np.allclose(F.cesaro_mean(b, 4, f), 0.75 * b, atol=1e-15)
    errs = [opnorm(F.cesaro_mean(a, k, f) - a) for k in (1, 2, 4, 8, 16, 10**6)]
    assert all(x >= y for x, y in zip(errs, errs[1:])) and errs[-1] <= 1e-5 * opnorm(a)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 6])
def test_fejer_multiplier_norm_oracle(N):
    # ||Sigma_k(a) - a|| <= ||M_k||_Schur ||a|| with M_k(p, q) = min(|p - q| / k, 1)
    idx = np.arange(N)
    for k in range(1, 3 * N + 2):
        M = np.minimum(np.abs(idx[:, None] - idx[None, :]) / k, 1.0)
        assert schur_multiplier_norm(M) <= N / k + 1e-7


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 2), N=st.integers(1, 4), k=st.integers(1, 12))
def test_fejer_bound(seed, d, N, k):
    rng = np.random.default_rng(seed)
    f = F.TruncatedFock(d, N)
    a = ginibre(rng, f.dim, f.dim)
    err = opnorm(F.cesaro_mean(a, k, f) - a)
    assert err <= (N / k) * opnorm(a) + 1e-12


# -- wandering vectors -----------------------------------------------------------------------

def test_wandering_examples():
    f = F.TruncatedFock(2, 4)
    L = [F.creation_operator(j, f) for j in (1, 2)]
    assert F.is_wandering(L, f.vacuum(), 3)
    assert F.is_wandering(L, f.basis_vector((1,)), f.N - 2)
    lam = np.exp(0.3j)
    assert not F.is_wandering([np.array([[lam]])], np.array([1.0]), 1)
    assert not F.is_wandering(L, np.zeros(f.dim), 2)
    with pytest.raises(ValueError):
        F.is_wandering(L, f.vacuum(), 0)


def test_mixed_levels_are_not_wandering():
    f = F.TruncatedFock(2, 3)
    L = [F.creation_operator(j, f) for j in (1, 2)]
    x = f.vacuum() + f.basis_vector((1,))
    assert not F.is_wandering(L, x, 1)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, m=st.integers(0, 2))
def test_single_level_vectors_wander(seed, m):
    rng = np.random.default_rng(seed)
    f = F.TruncatedFock(2, 4)
    L = [F.creation_operator(j, f) for j in (1, 2)]
    x = np.zeros(f.dim, dtype=complex)
    x[f.level_slice(m)] = ginibre(rng, 2 ** m)
    assert F.is_wandering(L, x, f.N - 1 - m)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_unitary_eigenvectors_never_wander(seed, n):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(ginibre(rng, n, n))
    _, vecs = np.linalg.eig(U)
    for x in vecs.T:
        assert not F.is_wandering([U], x, 3)
