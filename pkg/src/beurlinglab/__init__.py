"""Numerical checks for contraction dilations, characteristic functions,
unital CP maps and toy-Fock unitary cocycles."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .numeric import DEFAULT_TOL, Tolerance
from .contraction import defect_data, validate_contraction
from .cpmaps import KrausMap
from .cocycle import ToyCocycle
