import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cph import markov
from cph.cpmap import apply, apply_power, is_row_contraction
from cph.errors import DimensionError, DomainError, StructureError
from cph.opcore import matrix_unit
from cph.superharmonic import pac_bounds

from families import random_submarkov

seeds = st.integers(0, 2**32 - 1)


def reachable(A, tol=1e-10):
    """Transitive closure of the support graph (Warshall), an independent oracle."""
    n = A.shape[0]
    R = (np.asarray(A) > tol) | np.eye(n, dtype=bool)
    for k in range(n):
        R = R | (R[:, [k]] & R[[k], :])
    return R


def transient_oracle(A):
    """State i is recurrent iff every state reachable from i reaches i back and no mass leaks there."""
    A = np.asarray(A, dtype=float)
    R = reachable(A)
    out = []
    for i in range(A.shape[0]):
        cls = [j for j in range(A.shape[0]) if R[i, j] and R[j, i]]
        closed = all(not R[i, j] or R[j, i] for j in range(A.shape[0]))
        stochastic = all(abs(A[j].sum() - 1) <= 1e-10 for j in cls)
        if not (closed and stochastic):
            out.append(i)
    return out


# -- canonical form ---------------------------------------------------------------

def test_canonical_examples():
    cf = markov.canonical_form(np.eye(2))
    assert [b.indices for b in cf.recurrent_blocks] == [[0], [1]]
    assert cf.transient_block.indices == []

    cf = markov.canonical_form([[1, 0], [0.5, 0]])
    assert [b.indices for b in cf.recurrent_blocks] == [[0]]
    assert np.allclose(cf.recurrent_blocks[0].left_eigvec, [1])
    assert cf.transient_block.indices == [1] and cf.transient_block.spectral_radius == 0

    cf = markov.canonical_form(np.eye(3) / 2)
    assert cf.recurrent_blocks == [] and cf.transient_block.indices == [0, 1, 2]
    assert cf.transient_block.spectral_radius == pytest.approx(0.5)


def test_canonical_permutation_moves_recurrent_first():
    A = np.array([[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    cf = markov.canonical_form(A)
    assert cf.permutation == [1, 2, 0]
    assert cf.block_sizes == [1, 1, 1]


def test_validation():
    with pytest.raises(DomainError):
        markov.canonical_form([[1.5, 0], [0, 1]])
    with pytest.raises(DomainError):
        markov.canonical_form([[-0.1, 0], [0, 1]])
    with pytest.raises(DomainError):
        markov.markov_to_kraus(np.array([[0.5j, 0], [0, 1]]))
    with pytest.raises(DimensionError):
        markov.canonical_form(np.ones((2, 3)) / 3)


def test_tiny_entries_are_clamped():
    A = np.array([[1.0, 0.0], [1e-12, 1.0 - 1e-12]])
    cf = markov.canonical_form(A)
    assert len(cf.recurrent_blocks) == 2


def test_perron_vector_requires_full_support():
    # a reducible stochastic block: state 0 drains into state 1
    with pytest.raises(StructureError):
        markov.perron_left_vector(np.array([[0.0, 1.0], [0.0, 1.0]]))


# -- P_ac -----------------------------------------------------------------------

def test_pac_examples():
    assert markov.pac_markov(np.eye(2)).rank == 0
    assert np.array_equal(markov.pac_markov([[1, 0], [0.5, 0]]).matrix, np.diag([0, 1]))
    assert np.array_equal(markov.pac_markov(np.eye(3) / 2).matrix, np.eye(3))


# -- Kraus realization ------------------------------------------------------------

def test_kraus_examples():
    phi = markov.markov_to_kraus(np.eye(2))
    assert len(phi) == 2
    assert np.array_equal(phi[0], matrix_unit(2, 0, 0)) and np.array_equal(phi[1], matrix_unit(2, 1, 1))

    phi = markov.markov_to_kraus([[1, 0], [0.5, 0]])
    assert len(phi) == 2
    assert np.allclose(phi[0], matrix_unit(2, 0, 0))
    assert np.allclose(phi[1], matrix_unit(2, 1, 0) / np.sqrt(2))
    d1, d2 = 0.3, 0.9
    assert np.allclose(apply(phi, np.diag([d1, d2])), np.diag([d1, d1 / 2]))

    phi = markov.markov_to_kraus([[0, 1], [1, 0]])
    assert np.array_equal(phi[0], matrix_unit(2, 0, 1)) and np.array_equal(phi[1], matrix_unit(2, 1, 0))


def test_zero_matrix_gives_zero_map():
    phi = markov.markov_to_kraus(np.zeros((2, 2)))
    assert len(phi) == 1 and not np.any(phi[0])


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_kraus_acts_as_chain_on_diagonals(seed):
    rng = np.random.default_rng(seed)
    A = random_submarkov(rng)
    phi = markov.markov_to_kraus(A)
    d = rng.uniform(-1, 1, A.shape[0])
    assert np.allclose(apply(phi, np.diag(d)), np.diag(A @ d), atol=1e-14)
    assert is_row_contraction(phi).is_contraction


# -- invariant vectors ------------------------------------------------------------

def test_invariant_vector_examples():
    z = markov.invariant_vectors(np.eye(2))
    assert np.allclose(z, [[1, 0], [0, 1]])
    assert np.allclose(markov.invariant_vectors([[1, 0], [0.5, 0]]), [[1, 0]])
    assert np.allclose(markov.invariant_vectors([[0, 1], [1, 0]]), [[0.5, 0.5]])


def test_period_two_states_via_square():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = markov.invariant_vectors(A @ A)
    assert np.allclose(z, [[1, 0], [0, 1]])


# -- structural properties --------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(seed=seeds)
def test_canonical_form_properties(seed):
    rng = np.random.default_rng(seed)
    A = random_submarkov(rng)
    n = A.shape[0]
    cf = markov.canonical_form(A)
    p = cf.permutation
    assert sorted(p) == list(range(n))
    # reassembly
    inv = np.argsort(p)
    assert np.array_equal(cf.permuted[np.ix_(inv, inv)], A)
    # block lower triangular: nothing above the block diagonal
    B = cf.permuted
    start = 0
    for size in cf.block_sizes:
        assert np.all(B[start:start + size, start + size:] <= 1e-10)
        start += size
    for b in cf.recurrent_blocks:
        z = b.left_eigvec
        assert np.all(z > 0) and z.sum() == pytest.approx(1)
        assert np.max(np.abs(z @ b.block - z)) <= 1e-10
    assert cf.transient_block.spectral_radius < 1 - 1e-8
    assert cf.transient_block.indices == transient_oracle(A)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_invariant_vectors_are_orthogonal_to_pac(seed):
    rng = np.random.default_rng(seed)
    A = random_submarkov(rng)
    P = markov.pac_markov(A)
    for z in markov.invariant_vectors(A):
        assert np.max(np.abs(z @ A - z)) <= 1e-10
        assert np.all(z[P.diagonal_indices()] == 0)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_transient_mass_drains(seed):
    rng = np.random.default_rng(seed)
    A = random_submarkov(rng)
    phi = markov.markov_to_kraus(A)
    P = markov.pac_markov(A).matrix
    rho = markov.canonical_form(A).transient_block.spectral_radius
    if rho > 0.97:
        return  # drains too slowly for a short check
    tail = apply_power(phi, P, 2000)
    assert np.linalg.norm(tail, 2) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_general_bounds_match_markov(seed):
    rng = np.random.default_rng(seed)
    A = random_submarkov(rng)
    expected = markov.pac_markov(A)
    p = pac_bounds(markov.markov_to_kraus(A))
    assert p.certified_equal
    assert np.allclose(np.diag(p.P_lo.matrix).real, np.diag(expected.matrix).real, atol=1e-8)
    assert np.allclose(np.diag(p.P_hi.matrix).real, np.diag(expected.matrix).real, atol=1e-8)
