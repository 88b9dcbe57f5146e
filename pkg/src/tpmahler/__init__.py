"""Exact and rigorous computations with T_p(z) = prod_{j>=1} (1 - z^(p^j))^(-1/p^j).

Submodules
----------
arith      rationals, p-adic valuations, heights
series     truncated power series over Q
coeffs     Taylor coefficients t_p(n) and their invariants
evaluate   certified evaluation inside the unit disk
linalg     exact nullspaces
auxiliary  vanishing auxiliary functions, decay and height ledgers
"""
from .arith import *  # noqa: F401,F403
from .auxiliary import *  # noqa: F401,F403
from .coeffs import *  # noqa: F401,F403
from .evaluate import *  # noqa: F401,F403
from .linalg import *  # noqa: F401,F403
from .series import *  # noqa: F401,F403

__version__ = "0.1.0"
