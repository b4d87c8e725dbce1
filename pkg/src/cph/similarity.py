"""Similarity of a Kraus family to contractions of various strengths.

Each test searches for an invertible superharmonic certificate ``R``
(``R > 0`` and ``Phi(R) <= R``).  Conjugating by ``W = R^{-1/2}`` gives
the family ``W A_i W^{-1}`` with ``sum_i W A_i W^{-1} (W A_i W^{-1})^*
= W Phi(R) W <= I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cpmap
from .cpmap import KrausFamily, _as_family, apply, neumann_series, neumann_sum
from .errors import CphError, DomainError
from .opcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    hermitian_part,
    inv_sqrt_psd,
    is_psd,
    join_projections,
    min_eigenvalue,
    opnorm,
    range_projection,
    unvec,
    vec,
)
from .superharmonic import seed_set

__all__ = [
    "SimilarityCertificate",
    "conjugate",
    "verify_certificate",
    "similar_to_contraction",
    "similar_to_c00",
    "similar_to_strict",
]

_SDP_BOUND = 1e6


@dataclass(frozen=True)
class SimilarityCertificate:
    """Outcome of a similarity search.

    ``kind`` is ``"contraction"``, ``"c00"``, ``"strict"`` or ``"none"``.
    ``method`` names the construction that produced ``R``; ``indeterminate``
    marks a ``"none"`` that is not backed by a proof of impossibility.
    """

    kind: str
    R: np.ndarray | None = field(default=None, repr=False)
    W: np.ndarray | None = field(default=None, repr=False)
    conjugated: KrausFamily | None = field(default=None, repr=False)
    achieved_norm: float | None = None
    method: str | None = None
    indeterminate: bool = False
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.kind != "none"


def conjugate(phi, W, tol: ToleranceConfig = DEFAULT_TOL) -> KrausFamily:
    """The family ``W A_i W^{-1}``."""
    phi = _as_family(phi)
    W = np.asarray(W, dtype=complex)
    if W.shape != (phi.n, phi.n):
        raise DomainError(f"conjugator must be {phi.n}x{phi.n}, got {W.shape}")
    s = np.linalg.svd(W, compute_uv=False)
    if s[-1] <= tol.eig_tol:
        raise DomainError("conjugator is numerically singular", min_singular_value=float(s[-1]))
    Winv = np.linalg.inv(W)
    return KrausFamily(tuple(W @ A @ Winv for A in phi.kraus))


def _none(reason, indeterminate=False):
    return SimilarityCertificate("none", indeterminate=indeterminate, reason=reason)


def verify_certificate(phi, R, tol: ToleranceConfig = DEFAULT_TOL):
    """Check ``R >= eig_tol I`` and ``Phi(R) <= R``; return ``(ok, W, conjugated, norm)``."""
    phi = _as_family(phi)
    R = hermitian_part(R)
    if min_eigenvalue(R) < tol.eig_tol:
        return False, None, None, None
    scale = max(1.0, opnorm(R))
    if min_eigenvalue(R - apply(phi, R)) < -tol.psd_tol * scale:
        return False, None, None, None
    W = inv_sqrt_psd(R, tol)
    conj = conjugate(phi, W, tol)
    norm = opnorm(conj.row_gram)
    return norm <= 1 + tol.psd_tol * scale, W, conj, norm


def _certify(phi, R, kind, method, tol):
    ok, W, conj, norm = verify_certificate(phi, R, tol)
    if not ok:
        return None
    return SimilarityCertificate(kind, hermitian_part(R), W, conj, norm, method)


def _boundary_candidates(phi, tol):
    """Invertible superharmonic candidates when the spectral radius is one."""
    n = phi.n
    S = phi.superop
    P = cpmap.fixed_space_projection(phi, 1, tol)
    H = hermitian_part(unvec(P @ vec(np.eye(n)), n))
    supports = []
    try:
        periods = cpmap.candidate_periods(phi, tol)
        states = [cpmap.cesaro_invariant_state(phi, k, tol) for k in periods]
        supports.append(("recurrent", join_projections([s.support for s in states], n, tol)))
    except CphError:
        pass
    if is_psd(H, tol):
        supports.append(("fixed-support", range_projection(H, tol)))
    for label, p in supports:
        rest = np.eye(n) - p.matrix
        res = neumann_sum(S, vec(rest), n, tol)
        if res.converged:
            yield f"boundary-{label}", H + res.value


def _sdp_candidate(phi, tol):
    try:
        import cvxpy as cp
    except ImportError:  # pragma: no cover
        return None
    n = phi.n
    R = cp.Variable((n, n), hermitian=True)
    image = sum(A @ R @ A.conj().T for A in phi.kraus)
    constraints = [
        R >> np.eye(n),
        R - image >> 0,
        R << _SDP_BOUND * np.eye(n),
    ]
    problem = cp.Problem(cp.Minimize(cp.real(cp.trace(R))), constraints)
    try:
        problem.solve(solver=cp.CLARABEL)
    except Exception:
        return None
    if problem.status not in ("optimal", "optimal_inaccurate") or R.value is None:
        return None
    return np.asarray(R.value, dtype=complex)


def similar_to_contraction(phi, tol: ToleranceConfig = DEFAULT_TOL,
                           use_sdp: bool = True) -> SimilarityCertificate:
    """Search for an invertible superharmonic ``R``.

    Tried in order: ``R = I`` when ``Phi(I) <= I``; the Neumann sum
    ``S(I)`` when the spectral radius is below one; at spectral radius one,
    the fixed part of ``I`` plus a Neumann sum over the complement of the
    recurrent (then of the fixed) support; finally a semidefinite program.
    A spectral radius above one, or a Jordan block on the unit circle,
    rules similarity out.
    """
    phi = _as_family(phi)
    n = phi.n
    I = np.eye(n)
    if is_psd(I - phi.row_gram, tol):
        cert = _certify(phi, I, "contraction", "identity", tol)
        if cert:
            return cert
    spectrum = phi.spectrum
    if spectrum.radius < 1 - tol.eig_tol:
        res = neumann_series(phi, I, tol)
        if res.converged:
            cert = _certify(phi, res.value, "contraction", "neumann", tol)
            if cert:
                return cert
    if spectrum.radius > 1 + tol.eig_tol:
        return _none(f"spectral radius {spectrum.radius:.6g} exceeds one")
    if spectrum.defective:
        return _none("Jordan block on the unit circle: powers are unbounded")
    try:
        for method, R in _boundary_candidates(phi, tol):
            cert = _certify(phi, R, "contraction", method, tol)
            if cert:
                return cert
    except CphError:
        pass
    if use_sdp:
        R = _sdp_candidate(phi, tol)
        if R is not None:
            cert = _certify(phi, R, "contraction", "sdp", tol)
            if cert:
                return cert
    return _none("no invertible superharmonic operator found at spectral radius one",
                 indeterminate=True)


def _pure_seed_search(phi, tol, seed, accept):
    n = phi.n
    seeds = [np.eye(n)] + seed_set(n, np.random.default_rng(seed))
    for r in seeds:
        res = neumann_series(phi, r, tol)
        if res.converged and accept(res.value, r):
            yield res.value, r


def similar_to_c00(phi, tol: ToleranceConfig = DEFAULT_TOL, seed: int = 0) -> SimilarityCertificate:
    """Search for an invertible pure superharmonic ``R = sum Phi^n(r)``.

    The conjugated family is checked to be a row contraction with
    ``Phi'^n(I) -> 0``.
    """
    phi = _as_family(phi)
    for R, _ in _pure_seed_search(phi, tol, seed,
                                  lambda R, r: min_eigenvalue(R) >= tol.eig_tol):
        cert = _certify(phi, R, "c00", "neumann", tol)
        if cert is None:
            continue
        L = cpmap.limit_phi_n_I(cert.conjugated, tol)
        if opnorm(L) <= tol.conv_tol:
            return cert
    return _none("no seed gives an invertible convergent Neumann sum")


def similar_to_strict(phi, tol: ToleranceConfig = DEFAULT_TOL, seed: int = 0) -> SimilarityCertificate:
    """Search for a pure superharmonic ``Q`` with ``Q - Phi(Q)`` invertible.

    With ``W = Q^{-1/2}`` the conjugated family satisfies
    ``||sum A'_i A'_i^*|| <= 1 - lambda_min(Q - Phi(Q)) / ||Q||``.
    """
    phi = _as_family(phi)

    def accept(Q, r):
        return min_eigenvalue(Q) >= tol.eig_tol and min_eigenvalue(Q - apply(phi, Q)) >= tol.eig_tol

    for Q, _ in _pure_seed_search(phi, tol, seed, accept):
        cert = _certify(phi, Q, "strict", "neumann", tol)
        if cert is not None and cert.achieved_norm <= 1 - tol.eig_tol:
            return cert
    return _none("no pure superharmonic operator with invertible defect")
