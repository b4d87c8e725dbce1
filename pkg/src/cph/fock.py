"""Truncated full Fock space over ``C^d`` and the isometric dilation.

The truncated Fock space keeps the levels ``0 .. N-1`` of
``C + C^d + (C^d)^{(x)2} + ...``.  Basis vectors are words over the alphabet
``1..d`` ordered by length, then lexicographically.  On a product space
``Fock (x) H`` the Fock index is the outer one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .cpmap import KrausFamily, _as_family, limit_phi_n_I, require_row_contraction
from .errors import DimensionError
from .opcore import DEFAULT_TOL, Projection, ToleranceConfig, opnorm, sqrt_psd

__all__ = [
    "TruncatedFock",
    "DilationResult",
    "AbsoluteContinuityReport",
    "creation_operator",
    "generalized_power",
    "build_dilation",
    "cnc_subspace",
    "is_absolutely_continuous_finite",
    "fourier_coefficient",
    "cesaro_mean",
    "is_wandering",
    "words",
    "word_operator",
]


def words(d: int, max_len: int, min_len: int = 0) -> list[tuple]:
    """All words over ``1..d`` with ``min_len <= length <= max_len``, graded lexicographic."""
    out = []
    for length in range(min_len, max_len + 1):
        out.extend(product(range(1, d + 1), repeat=length))
    return out


def word_operator(ops, w, dim: int | None = None) -> np.ndarray:
    """``ops[w_1 - 1] @ ... @ ops[w_k - 1]``; the identity for the empty word."""
    if dim is None:
        dim = np.asarray(ops[0]).shape[0]
    M = np.eye(dim, dtype=complex)
    for letter in w:
        M = M @ ops[letter - 1]
    return M


@dataclass(frozen=True)
class TruncatedFock:
    d: int
    N: int

    def __post_init__(self):
        if self.d < 1 or self.N < 1:
            raise ValueError("alphabet size and number of levels must be positive")

    @cached_property
    def words(self) -> list[tuple]:
        return words(self.d, self.N - 1)

    @cached_property
    def index(self) -> dict:
        return {w: k for k, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return sum(self.d ** m for m in range(self.N))

    @cached_property
    def levels(self) -> np.ndarray:
        """Level (word length) of every basis vector."""
        return np.array([len(w) for w in self.words], dtype=int)

    def level_projection(self, m: int) -> np.ndarray:
        return np.diag((self.levels == m).astype(complex))

    def level_slice(self, m: int) -> slice:
        start = sum(self.d ** l for l in range(m))
        return slice(start, start + self.d ** m)

    def vacuum(self) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[0] = 1
        return e

    def basis_vector(self, w) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[self.index[tuple(w)]] = 1
        return e


def creation_operator(j: int, fock: TruncatedFock) -> np.ndarray:
    """Left creation by the letter ``j``; annihilates the top level."""
    if not 1 <= j <= fock.d:
        raise ValueError(f"letter must lie in 1..{fock.d}, got {j}")
    L = np.zeros((fock.dim, fock.dim), dtype=complex)
    for w, col in fock.index.items():
        if len(w) < fock.N - 1:
            L[fock.index[(j,) + w], col] = 1
    return L


def generalized_power(phi, n: int) -> np.ndarray:
    """Row operator of all words of length ``n``, shape ``(m, d^n m)``.

    Column blocks follow the word order of :func:`words`, so the block of
    ``(i_1, ..., i_n)`` is ``T_{i_1} ... T_{i_n}``.
    """
    phi = _as_family(phi)
    if n < 0:
        raise ValueError("n must be nonnegative")
    T = np.eye(phi.n, dtype=complex)
    for _ in range(n):
        T = phi.row @ np.kron(np.eye(phi.d), T)
    return T


# ---------------------------------------------------------------------------
# isometric dilation


@dataclass(frozen=True)
class DilationResult:
    """Truncated isometric dilation on ``K = H + sum_{l<N} (C^d)^{(x)l} (x) D``."""

    H_dim: int
    levels: int
    defect: np.ndarray = field(repr=False)
    defect_rank: int
    defect_basis: np.ndarray = field(repr=False)
    K_dim: int
    V: list = field(repr=False)
    isometry_defect: float
    dilation_defect: float
    words_checked: int
    minimality_defect: float

    @property
    def row(self) -> np.ndarray:
        return np.hstack(self.V)


def _defect_operator(phi: KrausFamily, tol: ToleranceConfig):
    gram = phi.row.conj().T @ phi.row
    Delta = sqrt_psd(np.eye(gram.shape[0]) - gram, tol)
    w, v = np.linalg.eigh(Delta)
    keep = w > tol.eig_tol * max(1.0, float(np.max(np.abs(w))))
    return Delta, v[:, keep]


def build_dilation(phi, levels: int, tol: ToleranceConfig = DEFAULT_TOL) -> DilationResult:
    """Schaffer dilation of a row contraction truncated to ``levels`` defect levels.

    ``V_i`` sends ``h`` in ``H`` to ``T_i h + Delta(e_i (x) h)`` (the second
    term in defect level 0) and ``w (x) delta`` in level ``l`` to
    ``(i w) (x) delta`` in level ``l + 1``; the top level is annihilated.
    """
    phi = _as_family(phi)
    require_row_contraction(phi, tol, "build_dilation")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    m, d = phi.n, phi.d
    Delta, U = _defect_operator(phi, tol)
    r = U.shape[1]
    Dc = U.conj().T @ Delta
    fock = TruncatedFock(d, levels)
    K = m + fock.dim * r
    V = []
    for i in range(d):
        Vi = np.zeros((K, K), dtype=complex)
        Vi[:m, :m] = phi.kraus[i]
        Vi[m:m + r, :m] = Dc[:, i * m:(i + 1) * m]
        Vi[m:, m:] = np.kron(creation_operator(i + 1, fock), np.eye(r))
        V.append(Vi)

    row = np.hstack(V)
    keep = np.ones(K)
    keep[m:] = np.repeat((fock.levels < levels - 1).astype(float), r)
    Pi = np.diag(np.tile(keep, d))
    iso = opnorm(Pi @ (row.conj().T @ row - np.eye(d * K)) @ Pi)

    checked = words(d, levels)
    worst = 0.0
    for w in checked:
        Vw = word_operator(V, w, K)
        worst = max(worst, opnorm(Vw[:m, :m] - word_operator(phi.kraus, w, m)))

    minimality = opnorm((row @ row.conj().T)[:m, :m] - phi.row_gram)
    return DilationResult(
        H_dim=m,
        levels=levels,
        defect=Delta,
        defect_rank=r,
        defect_basis=U,
        K_dim=K,
        V=V,
        isometry_defect=iso,
        dilation_defect=worst,
        words_checked=len(checked),
        minimality_defect=minimality,
    )


# ---------------------------------------------------------------------------
# coisometric part and absolute continuity


def cnc_subspace(phi, tol: ToleranceConfig = DEFAULT_TOL) -> Projection:
    """Projection onto ``{h : ||T_n^* h|| = ||h|| for all n}`` = ``ker(I - lim Phi^n(I))``."""
    L = limit_phi_n_I(phi, tol)
    w, v = np.linalg.eigh(L)
    return Projection.from_basis(v[:, w >= 1 - tol.eig_tol])


@dataclass(frozen=True)
class AbsoluteContinuityReport:
    absolutely_continuous: bool
    coisometric_rank: int
    limit: np.ndarray = field(repr=False)
    pac_rank_lo: int | None = None
    pac_rank_hi: int | None = None
    pac_certified: bool | None = None
    consistent: bool | None = None

    def __bool__(self):
        return self.absolutely_continuous


def is_absolutely_continuous_finite(phi, tol: ToleranceConfig = DEFAULT_TOL,
                                    cross_check: bool = True) -> AbsoluteContinuityReport:
    """Absolute continuity verdict for a row contraction on a finite space.

    With a finite-dimensional commutant the tuple is absolutely continuous
    exactly when it is completely non-coisometric, i.e. when
    :func:`cnc_subspace` is zero.  With ``cross_check`` the verdict is
    compared against :func:`cph.superharmonic.pac_bounds`: it is consistent
    when "true" coincides with certified bounds equal to the identity.
    """
    phi = _as_family(phi)
    L = limit_phi_n_I(phi, tol)
    H1 = cnc_subspace(phi, tol)
    verdict = H1.rank == 0
    if not cross_check:
        return AbsoluteContinuityReport(verdict, H1.rank, L)
    from .superharmonic import pac_bounds

    pac = pac_bounds(phi, tol)
    full = pac.certified_equal and pac.P_lo.rank == phi.n
    return AbsoluteContinuityReport(
        absolutely_continuous=verdict,
        coisometric_rank=H1.rank,
        limit=L,
        pac_rank_lo=pac.P_lo.rank,
        pac_rank_hi=pac.P_hi.rank,
        pac_certified=pac.certified_equal,
        consistent=(verdict == full) if pac.certified_equal else None,
    )


# ---------------------------------------------------------------------------
# gauge bands


def _level_difference(a, fock: TruncatedFock, H_dim: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    size = fock.dim * H_dim
    if a.shape != (size, size):
        raise DimensionError(f"expected a {size}x{size} matrix, got {a.shape}")
    lev = np.repeat(fock.levels, H_dim)
    return a, lev[:, None] - lev[None, :]


def fourier_coefficient(a, j: int, fock: TruncatedFock, H_dim: int = 1) -> np.ndarray:
    """The ``j``-th band ``sum_k (P_{k+j} (x) I) a (P_k (x) I)``."""
    a, diff = _level_difference(a, fock, H_dim)
    return np.where(diff == j, a, 0).astype(a.dtype, copy=False)


def cesaro_mean(a, k: int, fock: TruncatedFock, H_dim: int = 1) -> np.ndarray:
    """Fejer mean ``sum_{|j|<k} (1 - |j|/k) Phi_j(a)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a, diff = _level_difference(a, fock, H_dim)
    weights = np.clip(1 - np.abs(diff) / k, 0, None)
    return weights * a


def is_wandering(ops, x, max_len: int, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Finite wandering test for the vector ``x`` under the operators ``ops``.

    ``S_w x`` and ``S_v x`` must be orthogonal whenever ``|w| != |v|`` and
    both lengths are at most ``max_len``; in particular ``x`` is orthogonal
    to every ``S_w x`` with ``w`` nonempty.  The zero vector is not
    wandering.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ops = [np.asarray(S, dtype=complex) for S in ops]
    x = np.asarray(x, dtype=complex).reshape(-1)
    norm2 = float(np.vdot(x, x).real)
    if norm2 == 0.0:
        return False
    d = len(ops)
    by_length = []
    for length in range(max_len + 1):
        vecs = [word_operator(ops, w, x.size) @ x for w in words(d, length, length)]
        by_length.append(np.array(vecs))
    limit = tol.conv_tol * norm2
    for a in range(max_len + 1):
        for b in range(a + 1, max_len + 1):
            if np.max(np.abs(by_length[a].conj() @ by_length[b].T)) > limit:
                return False
    return True
