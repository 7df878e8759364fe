"""
Defect operators, the rotation matrix and the minimal isometric dilation
=========================================================================

A contraction T on C^d has defect operators D = (I - T*T)^{1/2} and
D_* = (I - TT*)^{1/2}. The block matrix R = [[T, D_*], [D, -T*]] restricted
to the defect spaces is unitary, and stacking copies of it gives the
dilation U whose compressions to H are the powers of T.
"""

import numpy as np

from beurlinglab.contraction import defect_data, random_contraction
from beurlinglab.dilation import DilationVector, power_factorization_residual
from beurlinglab.numeric import unitarity_defect

rng = np.random.default_rng(0)
T = random_contraction(rng, 3)
dd = defect_data(T)
print("defect ranks:", dd.defect_dim, dd.defect_star_dim)
print("||R*R - I|| =", unitarity_defect(dd.R))

# a vector in H + (levels of D) with room for eight more steps
h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
f = np.zeros((12, dd.defect_dim), dtype=complex)
f[:4] = rng.standard_normal((4, dd.defect_dim))
v = DilationVector.make(h, f)

# U^n splits into n legs, each a copy of R on a shifted pair of levels
for n in (1, 3, 8):
    print(f"n = {n}: U^n versus product of legs", power_factorization_residual(dd, n, v))

# a norm-one singular value: the defect spaces lose a dimension
T1 = np.diag([1.0, 0.4, 0.2])
print("ranks with a unit singular value:", defect_data(T1).defect_dim)
