"""Degree and local Morse cohomology of proper gradient vector fields on R^n.

The Brouwer degree of a proper gradient field equals the Euler characteristic
of its local Morse cohomology, but the cohomology carries more: two gradient
fields of equal degree may still fail to be connected through gradient fields.
This package computes both invariants numerically and compares them.
"""

__version__ = "0.1.0"

from .errors import (BoundarySquareNonzero, DegenerateCriticalPoint, ExprSyntaxError, IsolationViolation,
                     MorseflowError, NonTransverseSuspicion, R1NotFound, UnresolvedOrbit)
from .expr import differentiate, evaluate, parse, simplify, to_string
from .field import FieldFamily, ScalarField, load_field, make_field, properness_screen
from .critical import CriticalPoint, brouwer_degree, find_critical_points
from .flow import Trajectory, integrate, omega_limit
from .isolate import IsolatingBall, isolating_ball, validate_isolation
from .morse import (MorseComplex, MorseReport, Verdict, betti_numbers, build_complex, count_connections,
                    euler_characteristic, obstruction_verdict)
from .pipeline import Settings, analyze, compare

__all__ = [
    "BoundarySquareNonzero", "DegenerateCriticalPoint", "ExprSyntaxError", "IsolationViolation",
    "MorseflowError", "NonTransverseSuspicion", "R1NotFound", "UnresolvedOrbit",
    "differentiate", "evaluate", "parse", "simplify", "to_string",
    "FieldFamily", "ScalarField", "load_field", "make_field", "properness_screen",
    "CriticalPoint", "brouwer_degree", "find_critical_points",
    "Trajectory", "integrate", "omega_limit",
    "IsolatingBall", "isolating_ball", "validate_isolation",
    "MorseComplex", "MorseReport", "Verdict", "betti_numbers", "build_complex", "count_connections",
    "euler_characteristic", "obstruction_verdict",
    "Settings", "analyze", "compare",
]
