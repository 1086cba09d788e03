"""Physical constants used throughout, taken from scipy at import time."""

from scipy.constants import h as PLANCK  # J s
from scipy.constants import k as BOLTZMANN  # J/K
from scipy.constants import physical_constants as _pc

#: Magnetic flux quantum h/2e in Wb.
PHI0 = _pc["mag. flux quantum"][0]

__all__ = ["PLANCK", "BOLTZMANN", "PHI0"]
