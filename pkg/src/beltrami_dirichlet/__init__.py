"""Dirichlet problems for degenerate Beltrami equations with two characteristics."""
from .coefficients import (CoefficientPair, DilatationField, TruncationLadder, build_ladder,
                           builtin_family, dilatation, truncate)
from .conformal import DiskMap, JordanBoundary, map_to_disk
from .dirichlet import DirichletProblem, SolveReport, SolverSettings, solve, solve_bounded
from .grid import ComplexField, GridSpec, RealField

__version__ = "0.1.0"
