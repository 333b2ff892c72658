"""Reference plans used by the tests and the scripts.

All three have a cusp at 0 and balance to Lambda = -1/3, i.e. mu = -1.
"""

from .existence import ConicalMax, Cusp, SingularityPlan

# cusped football: one cusp, one smooth maximum; alpha_max = 2 pi
CONFIG_A = SingularityPlan(cusps=(Cusp(0, 1 / 3),), smooth_maxima=(1,))

# two smooth maxima force a simple zero of omega at z = 4/3 (a saddle of angle 4 pi)
CONFIG_B = SingularityPlan(cusps=(Cusp(0, 2 / 3),), smooth_maxima=(1, 2), saddles=(2,))

# conical maximum of angle pi; alpha_max = pi
CONFIG_C = SingularityPlan(cusps=(Cusp(0, 1 / 6),), conical_maxima=(ConicalMax(1, 0.5),))

# symmetric smooth maxima at +-1: the saddle sits at infinity
CONFIG_SYMMETRIC = SingularityPlan(cusps=(Cusp(0, 2 / 3),), smooth_maxima=(1, -1), saddles=(2,))

REFERENCE = {"A": CONFIG_A, "B": CONFIG_B, "C": CONFIG_C, "symmetric": CONFIG_SYMMETRIC}
