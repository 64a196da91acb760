"""Distributed dual proximal gradient: synchronous, accelerated and gossip solvers."""

from .asyncsim import ActivationClock, TimerModel, awake_update, run_async
from .dualcore import (
    DualState,
    ProblemInstance,
    StepSizes,
    dual_gradient,
    dual_objective,
    run_fista,
    run_sync,
    step_sizes,
    sync_step,
    theorem1_step_size,
    theorem2_lipschitz,
)
from .graph import Graph, erdos_renyi_connected, is_connected, neighbors
from .oracles import BoxOracle, PolytopeOracle, QuadraticOracle, ZeroOracle
from .ucdc import BlockProblem, dual_block_problem, run_ucdc, ucdc_step

__version__ = "0.1.0"
