"""Planning drop targets for sensors scattered from a drone.

The planner greedily maximizes the expected mutual-information gain of a
Gaussian-process sensor model, taking the expectation over each dropped
sensor's landing deviation.
"""

from .deviation import DeviationModel, DeviationSampleSet, build_sample_set, sample_landing, sigma_dev
from .errors import CapacityError, ConfigError, DegenerateInputError, LogValidationError, SumossError
from .experiments import SweepSpec, compare_methods, comparison_seeds, sensitivity_sweep
from .gp import KernelModel, Position, build_cov, conditional_variance, delta_gain, kernel_cov, mi_exact
from .planners import CandidateSet, PlanState, plan_baseline, plan_random, plan_sumoss
from .simulator import AreaSpec, MissionConfig, MissionLog, PlannerSpec, evaluate_log, run_mission

__version__ = "0.1.0"
