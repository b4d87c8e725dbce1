"""
Sub-Markov chains as completely positive maps
=============================================

A nonnegative matrix with row sums at most one becomes a Kraus family with
one matrix unit per edge.  The absolutely continuous projection is then
the indicator of the transient states.
"""

import numpy as np

from cph import markov
from cph.superharmonic import pac_bounds

# a period-two cycle, an absorbing state, a state leaking into both,
# and a state that loses mass outright
A0 = np.array([
    [0.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.3, 0.0, 0.3, 0.4, 0.0],
    [0.0, 0.0, 0.0, 0.5, 0.2],
])
# shuffle the labels so the canonical form has work to do
shuffle = [3, 0, 4, 2, 1]
A = A0[np.ix_(shuffle, shuffle)]
print(A)

cf = markov.canonical_form(A)
print("permutation (recurrent first):", [i + 1 for i in cf.permutation])
for block in cf.recurrent_blocks:
    print("recurrent class", [i + 1 for i in block.indices], "stationary vector", block.left_eigvec)
print("transient states:", [i + 1 for i in cf.transient_block.indices],
      "spectral radius", round(cf.transient_block.spectral_radius, 4))

# %%
# Reordered matrix: block lower triangular, recurrent classes on top.
np.set_printoptions(precision=2, suppress=True)
print(cf.permuted)

# %%
# Invariant probability vectors, one per recurrent class.
for z in markov.invariant_vectors(A):
    print("invariant:", z)

# %%
# The same projection from the general machinery, which knows nothing
# about the chain structure.
phi = markov.markov_to_kraus(A)
pac = pac_bounds(phi)
print("from the chain:  ", np.diag(markov.pac_markov(A).matrix).real)
print("general bounds:  ", np.diag(pac.P_lo.matrix).real.round(10), np.diag(pac.P_hi.matrix).real.round(10))
print("certified equal:", pac.certified_equal, "periods searched:", pac.periods)
