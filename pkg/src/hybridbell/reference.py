"""Reference values that the recomputed tables are compared against.

Values carry two or three decimals; ``TOLERANCE`` is the agreement band used
for all of them.
"""

from __future__ import annotations

import math

TOLERANCE = 0.01
CROSSING_TOLERANCE = 0.005

# max |<B>| on H_N = {|0>, ..., |N>}^2, with the reference optimal interval
TABLE_I = {
    1: (2.29, (-0.10, math.inf)),
    2: (2.46, (-0.08, math.inf)),
    4: (2.56, (-0.05, math.inf)),
    6: (2.61, (-0.04, math.inf)),
    12: (2.67, (0.0, math.inf)),
    18: (2.70, (0.0, math.inf)),
    36: (2.74, (0.0, math.inf)),
    100: (2.77, (0.0, math.inf)),
}
LONG_ROWS = frozenset({100})

# N00N states: best violation and the analytic upper bound 2 + (int |phi_0 phi_N|)^2
TABLE_II = {
    2: (2.25, 2.0 + 4.0 / (math.pi * math.e)),
    4: (2.02, 2.0 + 4.0 / (math.pi * math.e ** 3)
        * (math.sqrt(3) + 3 * math.cosh(math.sqrt(6)) - math.sqrt(6) * math.sinh(math.sqrt(6)))),
    6: (2.0, 2.26),
}

# {|0>, |N>}^2 maximal-violation fixtures
TABLE_III = {"chi1": 2.29, "chi2": 2.34, "chi3": 2.09, "chi4": 2.11}

# minimal critical efficiency per even subspace: fixture |<B>| at eta = 1, eta_c
TABLE_IV = {
    "psi2": (2.037, 0.48), "psi4": (2.109, 0.36), "psi6": (2.170, 0.29), "psi8": (2.212, 0.25),
}
PI_MINUS_ETA = {"symmetric": 0.26, "half-line": 0.55}
CHI2_TYPE_ETA = 0.66
GAMMA_ETA = 0.32  # theta = 1.12, alpha = 2.36i

# dark-count robust fixtures: |<B>|, eta threshold, delta threshold
TABLE_V = {
    "phi2": (2.30, 0.65, 0.92), "phi4": (2.23, 0.45, 0.94),
    "phi6": (2.20, 0.34, 0.95), "phi8": (2.15, 0.28, 0.96),
}

# minimal critical transmittance per even subspace: fixture |<B>|, fixture eta, t_c
TABLE_VI = {
    "xi2": (2.18, 0.57, 0.78), "xi4": (2.18, 0.57, 0.75),
    "xi6": (2.13, 0.58, 0.74), "xi8": (2.07, 0.59, 0.74),
}

# transmittance of the gamma state and the dark-count robust fixtures: |<B>|, eta, t
TABLE_VII = {
    "gamma+": (2.38, 0.38, 0.88),
    "phi2": (2.30, 0.65, 0.81), "phi4": (2.23, 0.45, 0.87),
    "phi6": (2.20, 0.34, 0.91), "phi8": (2.15, 0.28, 0.95),
}

# cat-based optima: |<B>| at the reference (theta, alpha)
GAMMA_OPTIMA = {"even": (2.45, 1.05, 2.06j), "odd": (2.51, 1.18, 1.15j)}

# figure reference lines: eta crossing of phi8, t crossing of phi2
FIGURE_CROSSINGS = {1: ("phi8", 0.278), 2: ("phi2", 0.812)}

W_MERMIN = 1.0 + 4.0 / math.pi
W_ETA = 0.86
