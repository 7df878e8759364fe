"""
A unitary cocycle on a truncated Fock space
===========================================

The generator u acts on H (x) C^m; the cocycle u_n = u_[1] ... u_[n]
acts on n copies of the field. For amplitude damping the vacuum is
absorbing, the gauged cocycle converges to an isometry, and the conjugated
shift restricts to the expected subspace.
"""

from beurlinglab.cocycle import convergence_analyze, gauge_modify, ergodic_chain
from beurlinglab.instances import amplitude_damping_cocycle, nonergodic_cocycle

c = amplitude_damping_cocycle(N=40)
cert = convergence_analyze(gauge_modify(c))
print("Delta_n:", cert.delta_curve[:6])
print("q defect:", cert.q_defect)

chain = ergodic_chain(c)
print({k: chain[k] for k in "abcde"}, "coherent:", chain["coherent"])
print("exactness residuals:", chain["exactness"])

# a diagonal generator keeps a second fixed point; every clause fails together
ne = ergodic_chain(nonergodic_cocycle(20))
print({k: ne[k] for k in "abcde"}, "coherent:", ne["coherent"])
