"""
Isometric dilation and gauge bands on the Fock space
====================================================

Every row contraction is the compression of a row isometry built from
shifts on a Fock space.  On a truncation the isometry holds away from the
top level.
"""

import numpy as np

from cph import KrausFamily, TruncatedFock
from cph.fock import (
    build_dilation,
    cesaro_mean,
    creation_operator,
    fourier_coefficient,
    is_wandering,
    word_operator,
)

rng = np.random.default_rng(2)
ops = [rng.standard_normal((2, 2)) for _ in range(2)]
scale = np.sqrt(0.9 / np.linalg.norm(sum(A @ A.T for A in ops), 2))
phi = KrausFamily(tuple(scale * A for A in ops))

res = build_dilation(phi, levels=4)
print("H dim", res.H_dim, "defect rank", res.defect_rank, "K dim", res.K_dim)
print(f"isometry defect {res.isometry_defect:.1e}, dilation defect {res.dilation_defect:.1e}"
      f" over {res.words_checked} words")

# %%
# Compressing a word in the dilation recovers the same word in T.
w = (1, 2, 2, 1)
Vw = word_operator(res.V, w, res.K_dim)[:2, :2]
print(np.allclose(Vw, word_operator(phi.kraus, w, 2)))

# %%
# Fourier bands split an operator by how many levels it raises.
f = TruncatedFock(2, 3)
L1, L2 = creation_operator(1, f), creation_operator(2, f)
a = L1 @ L2 + L1.T + 0.5 * np.eye(f.dim)
for j in (-1, 0, 1, 2):
    print(f"band {j:+d}: norm {np.linalg.norm(fourier_coefficient(a, j, f), 2):.3f}")

# %%
# Fejer means converge to the operator at rate N/k.
for k in (1, 2, 4, 16):
    err = np.linalg.norm(cesaro_mean(a, k, f) - a, 2)
    print(f"k={k:2d}: ||Sigma_k(a) - a|| = {err:.3f}  bound {3 / k * np.linalg.norm(a, 2):.3f}")

# %%
# The vacuum wanders under the creation operators.
print("vacuum wandering:", is_wandering([L1, L2], f.vacuum(), 2))
