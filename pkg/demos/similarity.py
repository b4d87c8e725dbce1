"""
Similarity certificates
=======================

A Kraus family that is not a row contraction may still become one after a
change of basis ``A_i -> W A_i W^{-1}``.  The certificate is an invertible
``R`` with ``Phi(R) <= R`` and ``W = R^{-1/2}``.
"""

import numpy as np

from cph.similarity import conjugate, similar_to_c00, similar_to_contraction, similar_to_strict

T = [np.array([[0.0, 2.0], [0.0, 0.0]])]
print("||T T*|| =", np.linalg.norm(T[0] @ T[0].T, 2))

for fn in (similar_to_contraction, similar_to_c00, similar_to_strict):
    cert = fn(T)
    print(f"{fn.__name__}: kind={cert.kind}, method={cert.method}, "
          f"achieved norm={cert.achieved_norm:.4f}")
print("R =\n", similar_to_strict(T).R.real)

# %%
# Conjugating by W = diag(1/sqrt5, 1) by hand gives the same contraction.
W = np.diag([1 / np.sqrt(5), 1.0])
print(conjugate(T, W)[0].real)

# %%
# A unitary seen through a skewed basis sits on the boundary: spectral
# radius one, not a contraction as given, but similar to one.
rng = np.random.default_rng(1)
U, _ = np.linalg.qr(rng.standard_normal((3, 3)))
skewed = conjugate([U], np.diag([1.0, 4.0, 0.5]))
cert = similar_to_contraction(skewed)
print("boundary case:", cert.kind, "via", cert.method, "norm", round(cert.achieved_norm, 10))
print("c00:", similar_to_c00(skewed).kind, " strict:", similar_to_strict(skewed).kind)

# %%
# Expanding maps admit nothing.
big = [np.sqrt(2) * np.eye(2)]
print([fn(big).kind for fn in (similar_to_contraction, similar_to_c00, similar_to_strict)])
print(similar_to_contraction(big).reason)
