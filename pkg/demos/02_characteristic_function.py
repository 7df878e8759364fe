"""
The characteristic function as a matrix-valued power series
===========================================================

Theta(z) = -T + z D_* (I - z T*)^{-1} D maps the defect space of T into
that of T*. For a scalar T = c it is the Blaschke factor (z - c)/(1 - conj(c) z).
When the powers of T* go to zero it is inner: unitary on the circle.
"""

import numpy as np

from beurlinglab.charfun import (beurling_residual, default_degree, inner_defect,
                                 theta_coefficients, theta_eval)
from beurlinglab.contraction import defect_data, truncation_degree
from beurlinglab.instances import random_star_stable

c = 0.6 * np.exp(0.7j)
dd = defect_data(np.array([[c]]))
cf = theta_coefficients(dd, truncation_degree(dd.T, 1e-12))
for z in (0.0, 0.5j, -0.9, np.exp(2.0j)):
    print(z, theta_eval(cf, z)[0, 0], (z - c) / (1 - np.conj(c) * z))

rng = np.random.default_rng(1)
dd = defect_data(random_star_stable(rng, 3, radius=0.85))
N = default_degree(dd)
zs = np.exp(2j * np.pi * np.linspace(0, 1, 16, endpoint=False))
print("degree", N, " max ||Theta(z)*Theta(z) - I|| on the circle:", inner_defect(dd, zs, N))

# the embedded copy of H is the orthocomplement of Theta H^2
print("range splitting residual:", beurling_residual(dd))
