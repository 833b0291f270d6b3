"""Workbench for the Lee-metric syndrome decoding problem over Z/p^s Z."""

__version__ = "0.1.0"

from .ring import LeeVector, RingSpec, lee_distance, lee_weight
from .counting import (count_ball, count_fitting_compositions, count_sphere,
                       count_sphere_restricted, enumerate_sphere_restricted,
                       sample_sphere, sample_sphere_batch,
                       sample_sphere_restricted)
from .code_algebra import (SdpInstance, gv_weight, partial_gaussian_elimination,
                           random_instance, read_instance, read_solution,
                           syndrome, write_instance, write_solution)
from .isd import (SolutionReport, SolverParams, bjmm_large_weights,
                  bjmm_small_balls, brute_force_solve, default_params,
                  last_merge, merge_concatenate, solve)

__all__ = [
    "__version__", "LeeVector", "RingSpec", "lee_distance", "lee_weight",
    "count_ball", "count_fitting_compositions", "count_sphere",
    "count_sphere_restricted", "enumerate_sphere_restricted", "sample_sphere",
    "sample_sphere_restricted", "sample_sphere_batch", "SdpInstance", "gv_weight",
    "partial_gaussian_elimination", "random_instance", "read_instance",
    "read_solution", "syndrome", "write_instance", "write_solution",
    "SolutionReport", "SolverParams", "bjmm_large_weights",
    "bjmm_small_balls", "brute_force_solve", "default_params", "last_merge",
    "merge_concatenate", "solve",
]
