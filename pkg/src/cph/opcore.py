"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Vectorization
is column stacking, so that ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg as sla

from .errors import DimensionError, DomainError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "Projection",
    "as_cmatrix",
    "opnorm",
    "is_hermitian",
    "hermitian_part",
    "is_psd",
    "min_eigenvalue",
    "sqrt_psd",
    "inv_sqrt_psd",
    "range_projection",
    "join_projections",
    "kron",
    "vec",
    "unvec",
    "spectral_radius",
    "matrix_unit",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds.

    ``herm_tol`` and ``psd_tol`` gate Hermiticity and positivity tests,
    ``eig_tol`` is the relative rank / spectral threshold, ``conv_tol``
    bounds the residuals of every iterative procedure.
    """

    herm_tol: float = 1e-10
    psd_tol: float = 1e-10
    eig_tol: float = 1e-8
    conv_tol: float = 1e-10
    max_iter: int = 10000

    def __post_init__(self):
        for name in ("herm_tol", "psd_tol", "eig_tol", "conv_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")

    def with_overrides(self, **overrides) -> "ToleranceConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {
            "herm_tol": self.herm_tol,
            "psd_tol": self.psd_tol,
            "eig_tol": self.eig_tol,
            "conv_tol": self.conv_tol,
            "max_iter": self.max_iter,
        }


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class Projection:
    """An orthogonal projection together with its rank."""

    matrix: np.ndarray = field(repr=False)
    rank: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, n: int) -> "Projection":
        return cls(np.zeros((n, n), dtype=complex), 0)

    @classmethod
    def identity(cls, n: int) -> "Projection":
        return cls(np.eye(n, dtype=complex), n)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Projection":
        """Projection onto the span of the orthonormal columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        return cls(basis @ basis.conj().T, basis.shape[1])

    @classmethod
    def diagonal(cls, n: int, indices) -> "Projection":
        p = np.zeros((n, n), dtype=complex)
        idx = sorted(set(int(i) for i in indices))
        p[idx, idx] = 1.0
        return cls(p, len(idx))

    def complement(self) -> "Projection":
        return Projection(np.eye(self.dim, dtype=complex) - self.matrix, self.dim - self.rank)

    def basis(self, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
        """Orthonormal basis (columns) of the range."""
        if self.rank == 0:
            return np.zeros((self.dim, 0), dtype=complex)
        w, v = np.linalg.eigh(hermitian_part(self.matrix))
        return v[:, np.argsort(w)[::-1][: self.rank]]

    def dominates(self, other: "Projection", tol: float = 1e-8) -> bool:
        """True when ``range(other)`` is contained in ``range(self)``."""
        return bool(np.linalg.norm(self.matrix @ other.matrix - other.matrix, 2) <= tol)

    def diagonal_indices(self, tol: float = 1e-8) -> list[int]:
        """Indices ``i`` with ``P[i, i] == 1`` (meaningful for diagonal projections)."""
        d = np.real(np.diag(self.matrix))
        return [int(i) for i in np.flatnonzero(d > 1 - tol)]


def as_cmatrix(M, square: bool = False) -> np.ndarray:
    """Coerce ``M`` into a 2-D complex array."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def opnorm(M) -> float:
    """Spectral (operator) norm."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_part(M) -> np.ndarray:
    M = np.asarray(M)
    return 0.5 * (M + M.conj().T)


def is_hermitian(M, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    M = as_cmatrix(M, square=True)
    return bool(np.max(np.abs(M - M.conj().T)) <= tol.herm_tol * max(1.0, np.max(np.abs(M))))


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of the Hermitian part of ``M``."""
    M = as_cmatrix(M, square=True)
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def is_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True iff ``M`` is Hermitian and its least eigenvalue is >= ``-psd_tol``."""
    M = as_cmatrix(M, square=True)
    if not is_hermitian(M, tol):
        return False
    return min_eigenvalue(M) >= -tol.psd_tol


def sqrt_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Unique positive semidefinite square root.

    Eigenvalues in ``[-psd_tol * max(1, ||M||), 0)`` are treated as rounding
    noise and clipped; anything more negative raises :class:`DomainError`.
    """
    M = as_cmatrix(M, square=True)
    if not is_hermitian(M, tol):
        raise DomainError("matrix is not Hermitian", min_eigenvalue=float("nan"))
    w, v = np.linalg.eigh(hermitian_part(M))
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol.psd_tol * scale:
        raise DomainError(
            f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})",
            min_eigenvalue=float(w[0]),
        )
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def inv_sqrt_psd(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``M^{-1/2}`` for positive definite ``M``."""
    M = as_cmatrix(M, square=True)
    w, v = np.linalg.eigh(hermitian_part(M))
    if w[0] <= tol.eig_tol * max(1.0, float(w[-1])):
        raise DomainError(
            f"matrix is not positive definite (min eigenvalue {w[0]:.3e})",
            min_eigenvalue=float(w[0]),
        )
    return (v / np.sqrt(w)) @ v.conj().T


def _rank_threshold(M_norm: float, tol: ToleranceConfig) -> float:
    # relative above unit norm, absolute below
    return tol.eig_tol * max(M_norm, 1.0)


def range_projection(M, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Orthogonal projection onto the range of a Hermitian matrix."""
    M = as_cmatrix(M, square=True)
    if not is_hermitian(M, tol):
        raise DomainError("range_projection needs a Hermitian matrix")
    w, v = np.linalg.eigh(hermitian_part(M))
    keep = np.abs(w) > _rank_threshold(float(np.max(np.abs(w))), tol)
    return Projection.from_basis(v[:, keep])


def join_projections(projections, n: int, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Smallest projection dominating every projection in ``projections``."""
    cols = [p.basis(tol) for p in projections if p.rank > 0]
    if not cols:
        return Projection.zero(n)
    stacked = np.hstack(cols)
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    keep = s > tol.eig_tol * max(1.0, s[0])
    return Projection.from_basis(u[:, keep])


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def vec(X) -> np.ndarray:
    """Column-stacking vectorization: ``vec([[a, c], [b, d]]) = (a, b, c, d)``."""
    X = as_cmatrix(X)
    return X.reshape(-1, order="F")


def unvec(column, n: int, m: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`; the result has shape ``(n, m)`` (``m = n`` by default)."""
    column = np.asarray(column, dtype=complex).reshape(-1)
    m = n if m is None else m
    if column.size != n * m:
        raise DimensionError(f"cannot reshape a vector of length {column.size} into {n}x{m}")
    return column.reshape((n, m), order="F")


def spectral_radius(M) -> float:
    M = as_cmatrix(M, square=True)
    return float(np.max(np.abs(sla.eigvals(M))))


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """``E_ij`` with zero-based indices."""
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1.0
    return E
