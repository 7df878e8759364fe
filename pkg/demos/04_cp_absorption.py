"""
Absorbing states of unital CP maps
==================================

A unital CP map Z with an invariant vector state <delta, . delta> is ergodic
when its fixed points are the scalars. The state is absorbing when every
initial state is driven to it. The two properties coincide, and the
projection onto the complement of delta decreases monotonically under Z.
"""

import numpy as np

from beurlinglab.cpmaps import KrausMap, equivalence_report
from beurlinglab.instances import (amplitude_damping_kraus, random_invariant_kraus,
                                   random_nonergodic_kraus)

rng = np.random.default_rng(3)
cases = {
    "amplitude damping": (KrausMap(amplitude_damping_kraus(0.75)), [1.0, 0.0]),
    "pure phase": (KrausMap(np.diag([1.0, 1j])[None]), [1.0, 0.0]),
    "random invariant": random_invariant_kraus(rng, 4, 3),
    "block diagonal": random_nonergodic_kraus(rng, 4, 3),
}
for name, (Z, delta) in cases.items():
    r = equivalence_report(Z, delta)
    print(f"{name:18s} ergodic={r.is_ergodic!s:5s} absorbing={r.is_absorbing!s:5s} "
          f"slack={r.monotone_slack:+.1e}")
