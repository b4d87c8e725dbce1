"""
Superharmonic operators and the absolutely continuous part
==========================================================

A block diagonal row contraction: a coisometric corner that never loses
mass, next to a strictly contractive corner that drains.  We split the
identity into harmonic and pure pieces and locate the absolutely
continuous projection.
"""

import numpy as np
from scipy.linalg import block_diag

import cph
from cph.superharmonic import analyze, factor, pac_bounds

rng = np.random.default_rng(0)

# coisometric 1x1 corner (a unimodular scalar) and a strict 2x2 corner
top = [np.array([[np.exp(0.4j)]])]
G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
bottom = [0.8 * G / np.linalg.norm(G, 2)]
phi = cph.KrausFamily(tuple(block_diag(a, b) for a, b in zip(top, bottom)))

print("row contraction:", cph.is_row_contraction(phi).is_contraction)
print("spectral radius of Phi:", round(cph.cp_spectral_radius(phi), 6))

# %%
# Riesz split of the identity.  The harmonic part is the limit of Phi^n(I);
# what is left over decays to zero.
rep = analyze(phi, np.eye(3))
np.set_printoptions(precision=4, suppress=True)
print("harmonic part:\n", rep.harmonic_part.real)
print("pure part:\n", rep.pure_part.real)
print("steps until the pure part is below tolerance:", rep.decay_iterations)

# %%
# The pure part factors through a truncated Fock space.  The gap
# Q - C C^* is exactly Phi^N(Q).
Q = rep.pure_part
for N in (1, 3, 6):
    f = factor(phi, Q, N)
    gap = np.linalg.norm(Q - f.C @ f.C.conj().T, 2)
    print(f"N={N}: ||Q - C C*|| = {gap:.3e},  ||Phi^N(Q)|| = {f.residual_norm:.3e}")

# %%
# Absolutely continuous projection.  The lower bound comes from ranges of
# pure superharmonic witnesses, the upper bound from supports of invariant
# and periodic states.  Here they meet on the draining corner.
pac = pac_bounds(phi)
print("P_ac ranks (lower, upper):", pac.P_lo.rank, pac.P_hi.rank, "certified:", pac.certified_equal)
print("P_ac diagonal:", np.diag(pac.P_lo.matrix).real)
print("witness sources:", pac.witness_sources)

# %%
# On a finite space absolute continuity is the same as having no
# coisometric part.
ac = cph.is_absolutely_continuous_finite(phi)
print("absolutely continuous:", ac.absolutely_continuous, "coisometric rank:", ac.coisometric_rank)
