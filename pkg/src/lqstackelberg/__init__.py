"""Linear-quadratic leader-follower games with one-step-memory closed-loop strategies."""
from .errors import (DefinitenessError, DeltaSingular, DimensionError, DimensionTooLarge,
                     GammaLNotPD, GammaNotPD, LeaderStagePDFailure, NonFiniteValue,
                     ParseError, SearchBudgetExceeded, SolverError, StackelbergError,
                     StageOutOfRange)
from .model import (GainSchedule, GameProblem, ValidationReport, dump_problem,
                    evaluate_strategy, load_problem, read_problem, scalar_problem,
                    validate, write_problem)
from .follower import (FollowerRecursion, FollowerStageData, follower_backward,
                       follower_cost, follower_stage)
from .leader import (LeaderRecursion, LeaderStageData, leader_backward, leader_cost,
                     leader_stage, reduced_system)
from .closed_loop import (ClosedLoopSolution, effective_trajectory_identity_check,
                          solve_closed_loop)
from .feedback import (FeedbackStackelbergSolution, LqrSolution, constrained_lqr,
                       solve_feedback_stackelberg, standard_lqr)
from .simulate import Trajectory, attach_costates, rollout
from .benchmark import benchmark_problem

__version__ = "0.1.0"
