"""Null steering for a paraboloidal reflector with a phase-reconfigurable rim."""
from .geometry import FeedModel, ReflectorModel, SegmentArray, build_reflector, tile_rim
from .pofield import PatternCut, RimReflector, gain_dbi
from .solvers import (
    ConstraintSet,
    SolverReport,
    WeightVector,
    build_constraints,
    gradient_projection,
    min_norm_multi,
    optimal_single,
    serial_search,
    simulated_annealing,
)

__version__ = "0.1.0"
