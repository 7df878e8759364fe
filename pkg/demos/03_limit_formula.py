"""
Undoing the legs one at a time
==============================

Applying R_0*, R_1*, ... to a vector h + f moves it into the Hardy space of
the defect of T*. The limit is W(h + f) = C h + Theta f, and the distance at
step n is controlled by ||T*^n||.
"""

import numpy as np

from beurlinglab.charfun import limit_product_What
from beurlinglab.contraction import defect_data
from beurlinglab.dilation import DilationVector
from beurlinglab.instances import random_star_stable
from beurlinglab.numeric import dag, opnorm

rng = np.random.default_rng(2)
dd = defect_data(random_star_stable(rng, 3, radius=0.8))
f = np.zeros((60, dd.defect_dim), dtype=complex)
f[:3] = rng.standard_normal((3, dd.defect_dim))
v = DilationVector.make(rng.standard_normal(3), f)

lp = limit_product_What(dd, 60, v)
ts = dag(dd.T)
for n in (5, 10, 20, 40, 60):
    print(f"{n:3d}  error {lp.errors[n - 1]:.3e}   ||T*^n|| {opnorm(np.linalg.matrix_power(ts, n)):.3e}")
print("observed constant:", lp.constant)
print("closed form of the partial products matches to", lp.induction_residual)
