"""Completely positive maps given by Kraus families.

A family ``(A_1, ..., A_d)`` of ``n x n`` matrices acts as

    Phi(X) = sum_i A_i X A_i^*

and also encodes the row operator ``[A_1 ... A_d]``.  The superoperator
matrix is ``sum_i conj(A_i) kron A_i`` in column-stacking convention.

Limits of ``Phi^n`` are computed by repeated squaring of the superoperator
and Neumann sums by doubling, so that slowly mixing maps do not cost
``O(max_iter)`` matrix-vector products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import ConvergenceError, DimensionError, DomainError, PreconditionError, StructureError
from .opcore import (
    DEFAULT_TOL,
    Projection,
    ToleranceConfig,
    as_cmatrix,
    hermitian_part,
    is_psd,
    opnorm,
    range_projection,
    unvec,
    vec,
)

# peripheral eigenvalues closer than this are treated as one cluster
_CLUSTER_TOL = 1e-6
MAX_PERIOD = 24


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """An ordered tuple of square matrices of a common size."""

    kraus: tuple
    contraction_flag: bool | None = None

    def __post_init__(self):
        mats = tuple(as_cmatrix(A, square=True) for A in self.kraus)
        if not mats:
            raise DimensionError("a Kraus family needs at least one operator")
        n = mats[0].shape[0]
        for A in mats:
            if A.shape != (n, n):
                raise DimensionError(f"Kraus operators must all be {n}x{n}, got {A.shape}")
            A.setflags(write=False)
        object.__setattr__(self, "kraus", mats)
        if self.contraction_flag:
            witness = opnorm(self.row_gram)
            if witness > 1 + DEFAULT_TOL.psd_tol:
                raise PreconditionError(
                    f"family flagged as a row contraction but ||sum A_i A_i^*|| = {witness:.6g}"
                )

    @classmethod
    def of(cls, *mats, contraction_flag=None) -> "KrausFamily":
        return cls(tuple(mats), contraction_flag)

    @property
    def n(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def d(self) -> int:
        return len(self.kraus)

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(self.kraus)

    def __getitem__(self, i):
        return self.kraus[i]

    @cached_property
    def row_gram(self) -> np.ndarray:
        """``sum_i A_i A_i^*``, i.e. ``Phi(I)``."""
        return sum(A @ A.conj().T for A in self.kraus)

    @cached_property
    def column_gram(self) -> np.ndarray:
        """``sum_i A_i^* A_i``; equals ``I`` iff the map is trace preserving."""
        return sum(A.conj().T @ A for A in self.kraus)

    @cached_property
    def row(self) -> np.ndarray:
        """The row operator ``[A_1 ... A_d]`` of shape ``n x (d n)``."""
        return np.hstack(self.kraus)

    @cached_property
    def superop(self) -> np.ndarray:
        S = sum(np.kron(A.conj(), A) for A in self.kraus)
        S.setflags(write=False)
        return S

    @cached_property
    def spectrum(self) -> "PeripheralSpectrum":
        return PeripheralSpectrum.of(self.superop)

    def power(self, k: int) -> "KrausFamily":
        """Kraus family of ``Phi^k``: one operator ``A_{w_1} ... A_{w_k}`` per word."""
        if k < 0:
            raise ValueError("power must be non-negative")
        if k == 0:
            return KrausFamily((np.eye(self.n, dtype=complex),))
        ops = []
        for word in product(range(self.d), repeat=k):
            M = np.eye(self.n, dtype=complex)
            for i in word:
                M = M @ self.kraus[i]
            ops.append(M)
        return KrausFamily(tuple(ops))

    def scaled(self, c: complex) -> "KrausFamily":
        return KrausFamily(tuple(c * A for A in self.kraus))


@dataclass(frozen=True)
class SuperOperator:
    matrix: np.ndarray = field(repr=False)
    source_dim: int

    def __call__(self, X) -> np.ndarray:
        return unvec(self.matrix @ vec(X), self.source_dim)


@dataclass(frozen=True)
class InvariantStateResult:
    density: np.ndarray = field(repr=False)
    period: int
    support: Projection

    @property
    def mass(self) -> float:
        return float(np.real(np.trace(self.density)))


class RowContraction(NamedTuple):
    is_contraction: bool
    witness: float


@dataclass(frozen=True)
class NeumannResult:
    """Outcome of summing ``sum_n Phi^n(r)``.

    ``value`` is ``None`` when the series was judged divergent.
    """

    value: np.ndarray | None = field(repr=False)
    terms: int
    tail_norm: float
    partial_sum_norm: float

    @property
    def converged(self) -> bool:
        return self.value is not None


def _as_family(phi) -> KrausFamily:
    if isinstance(phi, KrausFamily):
        return phi
    return KrausFamily(tuple(phi))


def _check_square(phi: KrausFamily, X) -> np.ndarray:
    X = as_cmatrix(X)
    if X.shape != (phi.n, phi.n):
        raise DimensionError(f"expected a {phi.n}x{phi.n} matrix, got {X.shape}")
    return X


def apply(phi, X) -> np.ndarray:
    """``sum_i A_i X A_i^*``."""
    phi = _as_family(phi)
    X = _check_square(phi, X)
    return sum(A @ X @ A.conj().T for A in phi.kraus)


def apply_power(phi, X, k: int) -> np.ndarray:
    """``Phi^k(X)`` by ``k``-fold application; ``k = 0`` returns ``X``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    phi = _as_family(phi)
    Y = _check_square(phi, X)
    for _ in range(k):
        Y = apply(phi, Y)
    return Y


def adjoint_apply(phi, rho) -> np.ndarray:
    """Trace dual ``sum_i A_i^* rho A_i``."""
    phi = _as_family(phi)
    rho = _check_square(phi, rho)
    return sum(A.conj().T @ rho @ A for A in phi.kraus)


def superoperator(phi) -> SuperOperator:
    phi = _as_family(phi)
    return SuperOperator(np.array(phi.superop), phi.n)


def cp_spectral_radius(phi) -> float:
    phi = _as_family(phi)
    return phi.spectrum.radius


def is_row_contraction(phi, tol: ToleranceConfig = DEFAULT_TOL) -> RowContraction:
    phi = _as_family(phi)
    witness = opnorm(phi.row_gram)
    return RowContraction(witness <= 1 + tol.psd_tol, witness)


def require_row_contraction(phi: KrausFamily, tol: ToleranceConfig, what: str = "operation"):
    ok, witness = is_row_contraction(phi, tol)
    if not ok:
        raise PreconditionError(
            f"{what} requires a row contraction, but ||sum A_i A_i^*|| = {witness:.6g}"
        )


# ---------------------------------------------------------------------------
# iteration kernels on the superoperator


def neumann_sum(S: np.ndarray, r_vec: np.ndarray, n: int, tol: ToleranceConfig) -> NeumannResult:
    """Sum ``sum_m S^m r`` for a vectorized seed; shared by all Neumann callers.

    The first 64 terms are added one at a time, after which the number of
    terms doubles per step (``sum_{2N} = sum_N + S^N sum_N``).  The series
    is accepted once ``||S^N r|| <= conv_tol`` and declared divergent when
    ``N`` passes ``max_iter`` or the partial sum exceeds ``1 / conv_tol``.
    """
    total = np.zeros_like(r_vec)
    term = r_vec.copy()
    terms = 0
    tail = opnorm(unvec(term, n))
    blowup = 1.0 / tol.conv_tol
    while terms < min(64, tol.max_iter):
        if tail <= tol.conv_tol:
            break
        total = total + term
        term = S @ term
        terms += 1
        tail = opnorm(unvec(term, n))
    if tail > tol.conv_tol and terms < tol.max_iter:
        P = np.linalg.matrix_power(S, terms)
        while True:
            total = total + P @ total
            term = P @ term
            terms *= 2
            tail = opnorm(unvec(term, n))
            if tail <= tol.conv_tol:
                break
            if terms >= tol.max_iter or opnorm(unvec(total, n)) > blowup:
                break
            P = P @ P
    partial = opnorm(unvec(total, n))
    if tail > tol.conv_tol:
        return NeumannResult(None, terms, tail, partial)
    # one extra doubling pushes the truncation error well below conv_tol
    if terms > 0:
        P = np.linalg.matrix_power(S, terms)
        total = total + P @ total
        term = P @ term
        terms *= 2
        tail = opnorm(unvec(term, n))
    value = hermitian_part(unvec(total, n))
    return NeumannResult(value, terms, tail, opnorm(value))


def limit_by_squaring(S: np.ndarray, x_vec: np.ndarray, n: int, tol: ToleranceConfig,
                      max_squarings: int = 64):
    """Limit of ``S^m x`` via the subsequence ``m = 2^j - 1``.

    Returns ``(limit, m)``.  Callers must check that the limit is a fixed
    point, since a periodic orbit can look stationary along this subsequence.
    Settling means ``||S^{2m+1} x - S^m x|| <= conv_tol * max(1, ||x||)``.
    The last doubling starts below ``max_iter``; far higher powers are never
    formed, since rounding in them erodes unimodular eigenvalues and fakes
    convergence.
    """
    max_squarings = min(max_squarings, int(np.log2(tol.max_iter + 1)) + 1)
    diff = float("inf")
    x = x_vec
    P = S
    scale = max(1.0, opnorm(unvec(x_vec, n)))
    for j in range(max_squarings):
        nxt = P @ x
        diff = opnorm(unvec(nxt - x, n))
        x = nxt
        if not np.all(np.isfinite(x)) or opnorm(unvec(x, n)) > scale / tol.conv_tol:
            raise ConvergenceError(
                "iterates of Phi blow up", iterations=2 ** (j + 1) - 1, last_norm=opnorm(unvec(x, n))
            )
        if diff <= tol.conv_tol * scale:
            return x, 2 ** (j + 1) - 1
        P = P @ P
    raise ConvergenceError(
        "Phi^n did not settle", iterations=2 ** max_squarings - 1, last_difference=diff
    )


def power_vec(S: np.ndarray, x_vec: np.ndarray, m: int) -> np.ndarray:
    return np.linalg.matrix_power(S, m) @ x_vec


# ---------------------------------------------------------------------------
# peripheral spectrum


@dataclass(frozen=True, eq=False)
class PeripheralSpectrum:
    """Spectral data of a superoperator near the unit circle.

    ``clusters`` holds one entry per distinct peripheral eigenvalue, with its
    mean value and algebraic multiplicity plus orthonormal bases of right
    and left eigenvectors.  A cluster whose geometric multiplicity falls short of its
    algebraic one is recorded in ``defective``.
    """

    eigenvalues: np.ndarray
    radius: float
    clusters: tuple
    defective: tuple

    @classmethod
    def of(cls, S: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> "PeripheralSpectrum":
        S = np.asarray(S)
        ev = sla.eigvals(S)
        radius = float(np.max(np.abs(ev)))
        per = ev[np.abs(ev) >= 1 - tol.eig_tol]
        # group numerically repeated eigenvalues
        groups: list[list[complex]] = []
        for lam in sorted(per, key=lambda z: (np.angle(z), abs(z))):
            for g in groups:
                if abs(np.mean(g) - lam) <= _CLUSTER_TOL:
                    g.append(lam)
                    break
            else:
                groups.append([lam])
        clusters, defective = [], []
        N = S.shape[0]
        scale = max(1.0, opnorm(S))
        for g in groups:
            mu = complex(np.mean(g))
            m = len(g)
            M = S - mu * np.eye(N)
            u, s, vh = np.linalg.svd(M)
            small = s[N - m:]
            right = vh[N - m:].conj().T
            left = u[:, N - m:]
            geometric = int(np.sum(small <= np.sqrt(tol.eig_tol) * scale * 1e-1))
            if geometric < m:
                defective.append((mu, m, geometric))
            clusters.append((mu, m, right, left))
        return cls(ev, radius, tuple(clusters), tuple(defective))

    def require_power_bounded(self, tol: ToleranceConfig = DEFAULT_TOL):
        if self.radius > 1 + tol.eig_tol:
            raise PreconditionError(
                f"superoperator is not power bounded (spectral radius {self.radius:.6g} > 1)"
            )
        if self.defective:
            mu, m, g = self.defective[0]
            raise StructureError(
                f"peripheral eigenvalue {mu:.6g} is defective "
                f"(algebraic multiplicity {m}, geometric {g}); powers of Phi are unbounded"
            )

    def projection(self, select=lambda mu: True) -> np.ndarray:
        """Spectral projection onto the selected peripheral eigenspaces."""
        chosen = [c for c in self.clusters if select(c[0])]
        N = self.eigenvalues.size
        if not chosen:
            return np.zeros((N, N), dtype=complex)
        V = np.hstack([c[2] for c in chosen])
        W = np.hstack([c[3] for c in chosen])
        G = W.conj().T @ V
        if np.linalg.cond(G) > 1e12:
            raise StructureError("peripheral eigenvectors are numerically dependent (defective spectrum)")
        return V @ np.linalg.solve(G, W.conj().T)

    def orders(self, tol: ToleranceConfig = DEFAULT_TOL) -> list[int]:
        """Orders of the peripheral eigenvalues that are roots of unity (up to ``MAX_PERIOD``)."""
        out = set()
        for mu, *_ in self.clusters:
            frac = Fraction(float(np.angle(mu) / (2 * np.pi))).limit_denominator(MAX_PERIOD)
            root = np.exp(2j * np.pi * float(frac))
            if abs(root - mu) <= _CLUSTER_TOL and abs(abs(mu) - 1) <= tol.eig_tol:
                out.add(frac.denominator)
        return sorted(out)


def candidate_periods(phi, tol: ToleranceConfig = DEFAULT_TOL) -> list[int]:
    """Periods worth searching: divisors of the peripheral root-of-unity orders."""
    phi = _as_family(phi)
    periods = {1}
    for q in phi.spectrum.orders(tol):
        periods.update(k for k in range(1, q + 1) if q % k == 0)
    return sorted(p for p in periods if p <= MAX_PERIOD)


def peripheral_projection(phi, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Spectral projection of the superoperator onto its peripheral eigenspaces."""
    phi = _as_family(phi)
    spectrum = phi.spectrum
    spectrum.require_power_bounded(tol)
    return spectrum.projection()


def fixed_space_projection(phi, k: int = 1, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Projection onto ``ker(S^k - I)`` along ``ran(S^k - I)``.

    For a power-bounded map this is the Cesaro limit
    ``lim_N (1/N) sum_{m<N} S^{k m}``.
    """
    phi = _as_family(phi)
    spectrum = phi.spectrum
    spectrum.require_power_bounded(tol)
    return spectrum.projection(lambda mu: abs(mu ** k - 1) <= _CLUSTER_TOL * max(1, k))


# ---------------------------------------------------------------------------
# limits, Neumann series, invariant states


def neumann_series(phi, r, tol: ToleranceConfig = DEFAULT_TOL) -> NeumannResult:
    """``S(r) = sum_{n>=0} Phi^n(r)`` for PSD ``r``."""
    phi = _as_family(phi)
    r = _check_square(phi, r)
    if not is_psd(r, tol):
        raise DomainError("Neumann seed must be positive semidefinite")
    return neumann_sum(phi.superop, vec(r), phi.n, tol)


def limit_phi_n_I(phi, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Decreasing limit ``L = lim Phi^n(I)`` of a row contraction."""
    phi = _as_family(phi)
    require_row_contraction(phi, tol, "limit_phi_n_I")
    x, _ = limit_by_squaring(phi.superop, vec(np.eye(phi.n)), phi.n, tol)
    L = hermitian_part(unvec(x, phi.n))
    defect = opnorm(apply(phi, L) - L)
    if defect > 10 * tol.conv_tol:
        raise ConvergenceError("limit of Phi^n(I) is not a fixed point", fixed_point_defect=defect)
    return L


def cesaro_invariant_state(phi, k: int = 1, tol: ToleranceConfig = DEFAULT_TOL) -> InvariantStateResult:
    """Cesaro limit of ``(Phi^dagger)^{k m}(I / n)``.

    The limit is the fixed-space projection of ``(Phi^dagger)^k`` applied
    to the maximally mixed state; it may be zero.
    """
    if k < 1:
        raise ValueError("period must be positive")
    phi = _as_family(phi)
    n = phi.n
    P = fixed_space_projection(phi, k, tol)
    # the dual superoperator is S^H, whose Cesaro projection is P^H
    rho = hermitian_part(unvec(P.conj().T @ vec(np.eye(n) / n), n))
    w, v = np.linalg.eigh(rho)
    if w[0] < -max(tol.psd_tol, 1e3 * np.finfo(float).eps):
        raise StructureError(f"Cesaro limit is not positive (min eigenvalue {w[0]:.3e})")
    rho = (v * np.clip(w, 0, None)) @ v.conj().T
    Sk_dual = np.linalg.matrix_power(phi.superop.conj().T, k)
    defect = opnorm(unvec(Sk_dual @ vec(rho), n) - rho)
    if defect > tol.conv_tol:
        raise ConvergenceError(
            "Cesaro limit is not invariant", period=k, fixed_point_defect=defect
        )
    support = range_projection(rho, tol) if np.max(w) > tol.conv_tol else Projection.zero(n)
    return InvariantStateResult(rho, k, support)
