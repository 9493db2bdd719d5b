"""Restart schemes for first-order methods, scaling for augmentation, and
threshold greedy for submodular maximization, with brute-force checks."""

from .augmentation import (
    AugmentInstance,
    ImprovingOracle,
    augment,
    bit_scaling,
    brute_force_opt,
    geometric_scaling,
    make_cube_powers,
    make_random_01_polytope,
)
from .first_order import regularized_reduction, restarted_minimize, run_agd, run_gd, run_subgradient
from .oracles import DiagonalQuadratic, L1PlusQuadratic, LogSumExp
from .schedule import RestartSchedule, TraceRecord, halving_schedule, phase_count, run_restart_scheme
from .submodular import CoverageInstance, SetFunctionOracle, brute_force_submax, greedy, threshold_greedy

__version__ = "0.1.0"
