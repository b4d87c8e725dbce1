"""Sub-Markov matrices: canonical block form, Perron vectors and Kraus data.

A sub-Markov matrix ``A`` acts on diagonal matrices by
``Phi(d)_j = sum_i a_ji d_i``.  Its states split into recurrent classes,
closed irreducible blocks with a stochastic restriction, and the transient
remainder, whose block has spectral radius below one.  The transient
indices carry the absolutely continuous projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.sparse.csgraph import connected_components

from .cpmap import KrausFamily
from .errors import DimensionError, DomainError, StructureError
from .opcore import DEFAULT_TOL, Projection, ToleranceConfig, spectral_radius

__all__ = [
    "RecurrentBlock",
    "TransientBlock",
    "CanonicalForm",
    "as_submarkov",
    "canonical_form",
    "pac_markov",
    "markov_to_kraus",
    "invariant_vectors",
    "perron_left_vector",
]

_PERRON_SHIFT = 1e-6


@dataclass(frozen=True)
class RecurrentBlock:
    indices: list
    block: np.ndarray = field(repr=False)
    left_eigvec: np.ndarray


@dataclass(frozen=True)
class TransientBlock:
    indices: list
    block: np.ndarray = field(repr=False)
    spectral_radius: float


@dataclass(frozen=True)
class CanonicalForm:
    """Permutation bringing ``A`` to block lower triangular form.

    ``permutation[k]`` is the original index placed at position ``k``;
    recurrent blocks come first, the transient block last.
    """

    A: np.ndarray = field(repr=False)
    permutation: list
    recurrent_blocks: list
    transient_block: TransientBlock

    @property
    def permuted(self) -> np.ndarray:
        p = self.permutation
        return self.A[np.ix_(p, p)]

    @property
    def block_sizes(self) -> list:
        sizes = [len(b.indices) for b in self.recurrent_blocks]
        if self.transient_block.indices:
            sizes.append(len(self.transient_block.indices))
        return sizes


def as_submarkov(A, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate and clean a sub-Markov matrix.

    Entries in ``[-psd_tol, psd_tol]`` are set to zero.  Complex input,
    negative entries and row sums above ``1 + psd_tol`` raise
    :class:`DomainError`.
    """
    M = np.asarray(A)
    if np.iscomplexobj(M):
        if np.any(np.abs(M.imag) > 0):
            raise DomainError("sub-Markov matrices must be real")
        M = M.real
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.size == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    if M.min() < -tol.psd_tol:
        raise DomainError("sub-Markov matrices are entrywise nonnegative",
                          min_entry=float(M.min()))
    M[np.abs(M) <= tol.psd_tol] = 0.0
    sums = M.sum(axis=1)
    if sums.max() > 1 + tol.psd_tol:
        raise DomainError("row sums of a sub-Markov matrix are at most one",
                          max_row_sum=float(sums.max()))
    return M


def perron_left_vector(B, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Left eigenvector of a stochastic irreducible block, normalized to sum one.

    Shifted inverse iteration on ``B^T`` with shift ``1 + 1e-6``; a vector
    with a zero entry raises :class:`StructureError`.
    """
    B = np.asarray(B, dtype=float)
    m = B.shape[0]
    M = B.T - (1 + _PERRON_SHIFT) * np.eye(m)
    lu = sla.lu_factor(M)
    z = np.full(m, 1.0 / m)
    for _ in range(tol.max_iter):
        z_new = sla.lu_solve(lu, z)
        z_new /= z_new.sum()
        if np.max(np.abs(z_new - z)) <= tol.conv_tol:
            z = z_new
            break
        z = z_new
    residual = np.max(np.abs(z @ B - z))
    if residual > tol.conv_tol * 10:
        # refine against the exact null space
        _, s, vh = np.linalg.svd(B.T - np.eye(m))
        z = vh[-1].real
        z = z / z.sum()
    if z.min() <= tol.psd_tol:
        raise StructureError("Perron vector of a recurrent class lacks full support")
    return z


def canonical_form(A, tol: ToleranceConfig = DEFAULT_TOL) -> CanonicalForm:
    """Split the states of ``A`` into recurrent classes and the transient block.

    Classes are the strongly connected components of the support graph
    (edge ``i -> j`` when ``a_ij > psd_tol``).  A class is recurrent when
    each of its rows sums to one inside the class, i.e. no mass leaves it.
    """
    A = as_submarkov(A, tol)
    _, labels = connected_components(A > tol.psd_tol, directed=True, connection="strong")
    classes = {}
    for i, lab in enumerate(labels):
        classes.setdefault(lab, []).append(i)

    recurrent, transient = [], []
    for members in sorted(classes.values(), key=min):
        block = A[np.ix_(members, members)]
        if np.all(np.abs(block.sum(axis=1) - 1) <= tol.psd_tol):
            recurrent.append(RecurrentBlock(members, block, perron_left_vector(block, tol)))
        else:
            transient.extend(members)
    transient.sort()
    Akk = A[np.ix_(transient, transient)]
    rho = spectral_radius(Akk) if transient else 0.0
    if rho >= 1 - tol.eig_tol:
        raise StructureError(f"transient block has spectral radius {rho:.6g}")
    perm = [i for b in recurrent for i in b.indices] + transient
    return CanonicalForm(A, perm, recurrent, TransientBlock(transient, Akk, rho))


def pac_markov(A, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Diagonal projection onto the transient states."""
    cf = canonical_form(A, tol)
    return Projection.diagonal(cf.A.shape[0], cf.transient_block.indices)


def invariant_vectors(A, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """One invariant probability vector per recurrent class, zero-padded."""
    cf = canonical_form(A, tol)
    n = cf.A.shape[0]
    out = []
    for b in cf.recurrent_blocks:
        z = np.zeros(n)
        z[b.indices] = b.left_eigvec
        out.append(z)
    return out


def markov_to_kraus(A, tol: ToleranceConfig = DEFAULT_TOL) -> KrausFamily:
    """Kraus family ``sqrt(a_ji) E_ji`` over the edges ``(j, i)`` of the support.

    Edges are listed in lexicographic order.  On diagonal matrices the map
    is ``Phi(d)_j = sum_i a_ji d_i``.
    """
    A = as_submarkov(A, tol)
    n = A.shape[0]
    ops = []
    for j, i in zip(*np.nonzero(A > tol.psd_tol)):
        E = np.zeros((n, n), dtype=complex)
        E[j, i] = np.sqrt(A[j, i])
        ops.append(E)
    if not ops:
        ops.append(np.zeros((n, n), dtype=complex))
    return KrausFamily(tuple(ops))
