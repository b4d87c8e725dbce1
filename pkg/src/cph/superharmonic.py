"""Superharmonic operators with their Riesz decomposition, plus bounds on P_ac.

``Q`` is superharmonic for ``Phi`` when ``Q >= 0`` and ``Phi(Q) <= Q``; it
is pure when ``Phi^n(Q) -> 0`` and harmonic when ``Phi(Q) = Q``.  The
absolutely continuous projection ``P_ac`` is the smallest projection
dominating the ranges of all pure superharmonic operators.

:func:`pac_bounds` brackets ``P_ac`` between the join of the ranges of
explicitly constructed pure superharmonic witnesses (``P_lo``) and the
orthocomplement of the supports of all invariant and periodic states
(``P_hi``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cpmap
from .cpmap import KrausFamily, _as_family, apply, neumann_sum
from .errors import ConvergenceError, DimensionError, DomainError, PreconditionError
from .fock import TruncatedFock, creation_operator, generalized_power
from .opcore import (
    DEFAULT_TOL,
    Projection,
    ToleranceConfig,
    as_cmatrix,
    hermitian_part,
    is_hermitian,
    is_psd,
    join_projections,
    opnorm,
    range_projection,
    unvec,
    vec,
)

__all__ = [
    "SuperharmonicReport",
    "PacResult",
    "TruncatedIntertwiner",
    "ReverseIntertwinerCheck",
    "analyze",
    "is_pure_superharmonic",
    "factor",
    "intertwiner_defect",
    "reverse_intertwiner_is_zero",
    "reverse_intertwiners",
    "seed_set",
    "pac_bounds",
]


@dataclass(frozen=True)
class SuperharmonicReport:
    """Riesz decomposition of a Hermitian ``Q`` with respect to ``Phi``.

    ``harmonic_part`` is ``lim Phi^n(Q)`` and ``pure_part`` is
    ``Q - harmonic_part``.  ``decay_iterations`` is the first ``m`` of the
    form ``2^j - 1`` with ``||Phi^m(pure_part)|| <= conv_tol`` (``None`` if
    not reached).
    """

    Q: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    is_superharmonic: bool
    harmonic_part: np.ndarray = field(repr=False)
    pure_part: np.ndarray = field(repr=False)
    purity_defect: float
    iterations: int
    decay_iterations: int | None

    @property
    def is_pure(self) -> bool:
        return self.is_superharmonic and self.purity_defect <= DEFAULT_TOL.conv_tol


@dataclass(frozen=True)
class PacResult:
    P_lo: Projection
    P_hi: Projection
    certified_equal: bool
    witnesses: list = field(repr=False)
    witness_sources: list
    recurrent_support: Projection
    periods: list
    invariant_states: list = field(repr=False)


@dataclass(frozen=True)
class TruncatedIntertwiner:
    """``C`` maps ``Fock_N (x) C^k`` to ``H`` with ``C C^* = Q - Phi^N(Q)``."""

    levels: int
    C: np.ndarray = field(repr=False)
    residual_norm: float
    fock: TruncatedFock
    multiplicity: int


@dataclass(frozen=True)
class ReverseIntertwinerCheck:
    applicable: bool
    is_zero: bool
    norm: float
    defect: float
    level_norms: list
    level_bounds: list

    def __bool__(self):
        return self.is_zero


def _hermitian_input(phi: KrausFamily, Q, tol) -> np.ndarray:
    Q = as_cmatrix(Q, square=True)
    if Q.shape[0] != phi.n:
        raise DimensionError(f"expected a {phi.n}x{phi.n} matrix, got {Q.shape}")
    if not is_hermitian(Q, tol):
        raise DomainError("superharmonic analysis needs a Hermitian operator")
    return hermitian_part(Q)


def analyze(phi, Q, tol: ToleranceConfig = DEFAULT_TOL) -> SuperharmonicReport:
    """Test superharmonicity of ``Q`` and split it into pure and harmonic parts."""
    phi = _as_family(phi)
    Q = _hermitian_input(phi, Q, tol)
    n = phi.n
    residual = Q - apply(phi, Q)
    superharmonic = is_psd(Q, tol) and is_psd(residual, tol)
    x, iterations = cpmap.limit_by_squaring(phi.superop, vec(Q), n, tol)
    harmonic = hermitian_part(unvec(x, n))
    fixed_defect = opnorm(apply(phi, harmonic) - harmonic)
    if fixed_defect > 10 * tol.conv_tol * max(1.0, opnorm(Q)):
        raise ConvergenceError(
            "Phi^n(Q) does not converge to a fixed point", fixed_point_defect=fixed_defect
        )
    pure = Q - harmonic
    return SuperharmonicReport(
        Q=Q,
        residual=residual,
        is_superharmonic=superharmonic,
        harmonic_part=harmonic,
        pure_part=pure,
        purity_defect=opnorm(harmonic),
        iterations=iterations,
        decay_iterations=_decay_iterations(phi.superop, pure, n, tol),
    )


def _decay_iterations(S, X, n, tol) -> int | None:
    """First ``m <= max_iter`` with ``||Phi^m(X)|| <= conv_tol``."""
    x = vec(X)
    for m in range(tol.max_iter + 1):
        if m:
            x = S @ x
        fro = np.linalg.norm(x)
        # the spectral norm is bounded by the Frobenius norm
        if fro <= tol.conv_tol or (
            fro <= np.sqrt(n) * tol.conv_tol and opnorm(unvec(x, n)) <= tol.conv_tol
        ):
            return m
        if fro > 1.0 / tol.conv_tol:
            return None
    return None


def is_pure_superharmonic(phi, Q, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    report = analyze(phi, Q, tol)
    return report.is_superharmonic and report.purity_defect <= tol.conv_tol * max(1.0, opnorm(Q))


# ---------------------------------------------------------------------------
# factorization through the truncated Fock space


def _compressed_root(M):
    """``r'`` with ``r'^* r' = M`` and orthogonal rows spanning ``ran(M)``.

    Only eigenvalues at round-off level are dropped, so the telescoping
    identity for :func:`factor` stays exact to working precision.
    """
    w, v = np.linalg.eigh(hermitian_part(M))
    cutoff = 10 * M.shape[0] * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    keep = w > cutoff
    return np.sqrt(w[keep])[:, None] * v[:, keep].conj().T


def factor(phi, Q, levels: int, tol: ToleranceConfig = DEFAULT_TOL) -> TruncatedIntertwiner:
    """Truncated intertwiner ``C`` with ``C C^* = Q - Phi^N(Q)``.

    Level ``m`` of ``C^*`` is ``(I_{d^m} (x) r) T_m^*`` where ``r`` is the
    square root of ``Q - Phi(Q)`` compressed to its range and ``T_m`` the
    ``m``-th generalized power of the row operator.
    """
    phi = _as_family(phi)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    Q = _hermitian_input(phi, Q, tol)
    if not is_pure_superharmonic(phi, Q, tol):
        raise PreconditionError("factor needs a pure superharmonic operator")
    n, d = phi.n, phi.d
    r = _compressed_root(Q - apply(phi, Q))
    k = r.shape[0]
    blocks = []
    for m in range(levels):
        Tm = generalized_power(phi, m)
        blocks.append(Tm @ np.kron(np.eye(d ** m), r.conj().T))
    C = np.hstack(blocks) if k else np.zeros((n, 0), dtype=complex)
    tail = cpmap.power_vec(phi.superop, vec(Q), levels)
    return TruncatedIntertwiner(
        levels=levels,
        C=C,
        residual_norm=opnorm(unvec(tail, n)),
        fock=TruncatedFock(d, levels),
        multiplicity=k,
    )


def _level_slices(fock: TruncatedFock, k: int):
    start = 0
    for m in range(fock.N):
        width = fock.d ** m * k
        yield m, slice(start, start + width)
        start += width


def intertwiner_defect(phi, C, levels: int, include_top: bool = False) -> float:
    """Largest ``||T_i C - C (L_i (x) I)||`` on the Fock levels below the top.

    ``L_i`` are the truncated creation operators; they kill the top level, so
    the relation can only hold there when ``T_i C`` vanishes on it too.  Pass
    ``include_top=True`` to test that as well.
    """
    phi = _as_family(phi)
    C = np.asarray(C, dtype=complex)
    fock = TruncatedFock(phi.d, levels)
    if C.shape[0] != phi.n or C.shape[1] % fock.dim:
        raise DimensionError(f"C has shape {C.shape}, incompatible with {fock.dim} Fock modes")
    k = C.shape[1] // fock.dim
    if k == 0:
        return 0.0
    worst = 0.0
    for i in range(phi.d):
        L = np.kron(creation_operator(i + 1, fock), np.eye(k))
        D = phi.kraus[i] @ C - C @ L
        for m, sl in _level_slices(fock, k):
            if m == levels - 1 and not include_top:
                continue
            worst = max(worst, opnorm(D[:, sl]))
    return worst


def reverse_intertwiners(phi, levels: int, k: int = 1, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """Basis of all ``C: H -> Fock_N (x) C^k`` with ``C T_i = (L_i (x) I) C``."""
    phi = _as_family(phi)
    fock = TruncatedFock(phi.d, levels)
    n, D = phi.n, fock.dim * k
    blocks = []
    for i in range(phi.d):
        L = np.kron(creation_operator(i + 1, fock), np.eye(k))
        # vec(C T_i - L C) = (T_i^T kron I - I kron L) vec(C)
        blocks.append(np.kron(phi.kraus[i].T, np.eye(D)) - np.kron(np.eye(n), L))
    A = np.vstack(blocks)
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol.eig_tol * max(1.0, s[0])))
    return [unvec(v.conj(), D, n) for v in vh[rank:]]


def reverse_intertwiner_is_zero(phi, C_rev, levels: int,
                                tol: ToleranceConfig = DEFAULT_TOL) -> ReverseIntertwinerCheck:
    """Check that a reverse intertwiner of a strict row contraction vanishes.

    For an exact reverse intertwiner the level-``l`` block obeys
    ``||C_l|| <= ||C|| ||T||^(N-1-l)``; the per-level norms and bounds are
    returned alongside the verdict.  A ``C_rev`` that does not intertwine
    (defect above ``conv_tol``) is reported as not applicable.
    """
    phi = _as_family(phi)
    gram = opnorm(phi.row_gram)
    if gram >= 1 - tol.eig_tol:
        raise PreconditionError(f"needs ||sum A_i A_i^*|| < 1, got {gram:.6g}")
    fock = TruncatedFock(phi.d, levels)
    C = np.asarray(C_rev, dtype=complex)
    if C.shape[1] != phi.n or C.shape[0] % fock.dim:
        raise DimensionError(f"C_rev has shape {C.shape}, incompatible with {fock.dim} Fock modes")
    k = C.shape[0] // fock.dim
    defect = 0.0
    for i in range(phi.d):
        L = np.kron(creation_operator(i + 1, fock), np.eye(k))
        defect = max(defect, opnorm(C @ phi.kraus[i] - L @ C))
    norm = opnorm(C)
    row_norm = np.sqrt(gram)
    level_norms = [opnorm(C[sl, :]) for _, sl in _level_slices(fock, k)]
    level_bounds = [norm * row_norm ** (levels - 1 - m) for m in range(levels)]
    applicable = defect <= tol.conv_tol
    return ReverseIntertwinerCheck(
        applicable=applicable,
        is_zero=applicable and norm <= tol.conv_tol,
        norm=norm,
        defect=defect,
        level_norms=level_norms,
        level_bounds=level_bounds,
    )


# ---------------------------------------------------------------------------
# P_ac bounds


def _positive_part(M):
    w, v = np.linalg.eigh(hermitian_part(M))
    return (v * np.clip(w, 0, None)) @ v.conj().T


def seed_set(n: int, rng: np.random.Generator | None = None, n_random: int = 8) -> list:
    """Deterministic PSD seeds plus ``n_random`` random PSD matrices.

    The deterministic part is the diagonal matrix units followed by the
    positive parts of ``E_ij + E_ji`` and ``i (E_ij - E_ji)`` for ``i < j``.
    """
    seeds = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1
        seeds.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            R = np.zeros((n, n), dtype=complex)
            R[i, j] = R[j, i] = 1
            seeds.append(_positive_part(R))
            Im = np.zeros((n, n), dtype=complex)
            Im[i, j], Im[j, i] = 1j, -1j
            seeds.append(_positive_part(Im))
    if rng is not None:
        for _ in range(n_random):
            G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            P = G @ G.conj().T
            seeds.append(P / np.trace(P).real)
    return seeds


def _pure_witness(phi, Q, tol):
    if Q is None or opnorm(Q) <= tol.conv_tol:
        return None
    try:
        return Q if is_pure_superharmonic(phi, Q, tol) else None
    except ConvergenceError:
        return None


def pac_bounds(phi, tol: ToleranceConfig = DEFAULT_TOL, seed: int = 0,
               exhaustive: bool = False) -> PacResult:
    """Certified lower and upper bounds on the absolutely continuous projection.

    Witness sources, tried in order until ``P_lo`` reaches ``P_hi`` (or all
    of them when ``exhaustive``):

    ``identity``
        pure part of the Riesz decomposition of ``I`` (when ``Phi(I) <= I``);
    ``seed``
        Neumann sums ``S(r)`` over :func:`seed_set`;
    ``power-k``
        Neumann sums for ``Phi^k`` at each candidate period, pushed back to
        ``Phi`` as ``Q + Phi(Q) + ... + Phi^{k-1}(Q)``;
    ``complement``
        ``S(1 - recurrent_support)``.

    The map must be power bounded (every row contraction is).
    """
    phi = _as_family(phi)
    n = phi.n
    phi.spectrum.require_power_bounded(tol)
    rng = np.random.default_rng(seed)
    periods = cpmap.candidate_periods(phi, tol)

    states = [cpmap.cesaro_invariant_state(phi, k, tol) for k in periods]
    recurrent = join_projections([s.support for s in states], n, tol)
    P_hi = recurrent.complement()

    witnesses, sources = [], []
    P_lo = Projection.zero(n)

    def add(Q, source):
        nonlocal P_lo
        W = _pure_witness(phi, Q, tol)
        if W is None:
            return
        rp = range_projection(W, tol)
        joined = join_projections([P_lo, rp], n, tol)
        if joined.rank > P_lo.rank or exhaustive:
            witnesses.append(W)
            sources.append(source)
            P_lo = joined

    def done():
        return not exhaustive and P_lo.rank >= P_hi.rank

    S = phi.superop
    if not done() and opnorm(phi.row_gram - np.eye(n)) >= 0 and is_psd(np.eye(n) - phi.row_gram, tol):
        add(analyze(phi, np.eye(n), tol).pure_part, "identity")

    if not done():
        for r in seed_set(n, rng):
            if done():
                break
            res = neumann_sum(S, vec(r), n, tol)
            if res.converged:
                add(res.value, "seed")

    for k in periods:
        if k == 1 or done():
            continue
        Sk = np.linalg.matrix_power(S, k)
        for r in seed_set(n, rng):
            if done():
                break
            res = neumann_sum(Sk, vec(r), n, tol)
            if not res.converged:
                continue
            Q = res.value
            R = Q.copy()
            X = Q
            for _ in range(k - 1):
                X = apply(phi, X)
                R = R + X
            add(hermitian_part(R), f"power-{k}")

    if not done() and P_hi.rank > 0:
        res = neumann_sum(S, vec(P_hi.matrix), n, tol)
        if res.converged:
            add(res.value, "complement")

    return PacResult(
        P_lo=P_lo,
        P_hi=P_hi,
        certified_equal=P_lo.rank == P_hi.rank,
        witnesses=witnesses,
        witness_sources=sources,
        recurrent_support=recurrent,
        periods=periods,
        invariant_states=states,
    )
