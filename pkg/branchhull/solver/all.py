from .problem import ProblemInstance, SolverConfig, Solution, BalancedPoint, balanced_scaling, objective, feasibility_violation
from .quartic import Quartic, real_roots, companion_roots, polish_real_roots
from .projection import HyperbolaBranch, project2, project3, project_set, projection_case
from .admm import SplitOperators, SolverState, soft_threshold, initial_state, admm_step, residuals, iterate, solve
