"""Ground-state phase diagram of 1D hard-core lattice bosons with power-law repulsion.

Analytic strong-coupling expressions for the devil's staircase and its
melting under hopping, cross-validated by exact diagonalization of finite
chains.
"""

from .classical import (
    CrystalConfiguration,
    Filling,
    PowerLawModel,
    StaircaseStep,
    brute_force_ring_ground,
    build_staircase,
    check_convex,
    hubbard_configuration,
    mu0_closed,
    mu0_series,
    potential,
)
from .errors import ConvergenceError, SectorCapError, WindowError
from .specfun import SpecialFunctionConfig, hurwitz_zeta, polygamma, riemann_zeta

__version__ = "0.1.0"
