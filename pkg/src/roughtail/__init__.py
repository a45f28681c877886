"""roughtail: grid rough paths, variation controls, and tail experiments.

The package builds rough-path lifts of sampled paths, evaluates their
p-variation control exactly over grid dissections, forms greedy threshold
partitions and the accumulated local variation, solves differential
equations (including the Jacobian of the solution flow) driven by the
lifts, samples Brownian and fractional Brownian drivers exactly, and runs
Monte Carlo tail experiments with explicit constants.
"""

from .errors import (BoundViolationError, ConfigError, DimensionMismatchError,
                     ExplosionError, FeasibilityError, GridError, NumericError,
                     RoughTailError)
from .tensor_algebra import (GroupElement, dilate, homogeneous_norm,
                             identity_element, inverse, mul, segment_exp)
from .rough_path import (PiecewiseLinearPath, RoughPathGrid, increment, lift,
                         read_path_csv, translate, write_path_csv)
from .variation import (ControlQuery, CovarianceGrid, control,
                        covariance_rho_variation, p_variation)
from .partition import (GreedyPartition, InequalityReport,
                        LocalVariationResult, accumulated_local_variation,
                        check_m_n_inequality, greedy_partition)
from .rde import (Trajectory, VectorFieldSet, constant_fields, custom_fields,
                  euler_increment, fields_from_spec, jacobian_flow,
                  linear_fields, polynomial_fields, solve_rde)
from .gaussian import (GaussianModel, ParamPlan, bm_model,
                       cameron_martin_embedding_check, fbm_covariance,
                       fbm_model, plan_parameters, sample_path, sample_paths)
from .experiments import (ExperimentConfig, TailReport,
                          admissible_moment_eta, clopper_pearson,
                          constant_c_pq, fit_tail_shape,
                          jacobian_tail_experiment, moment_estimate,
                          n_tail_experiment, power_moment, riemann_zeta)

__version__ = "0.1.0"

__all__ = [
    "BoundViolationError", "ConfigError", "DimensionMismatchError",
    "ExplosionError", "FeasibilityError", "GridError", "NumericError",
    "RoughTailError",
    "GroupElement", "dilate", "homogeneous_norm", "identity_element",
    "inverse", "mul", "segment_exp",
    "PiecewiseLinearPath", "RoughPathGrid", "increment", "lift",
    "read_path_csv", "translate", "write_path_csv",
    "ControlQuery", "CovarianceGrid", "control", "covariance_rho_variation",
    "p_variation",
    "GreedyPartition", "InequalityReport", "LocalVariationResult",
    "accumulated_local_variation", "check_m_n_inequality", "greedy_partition",
    "Trajectory", "VectorFieldSet", "constant_fields", "custom_fields",
    "euler_increment", "fields_from_spec", "jacobian_flow", "linear_fields",
    "polynomial_fields", "solve_rde",
    "GaussianModel", "ParamPlan", "bm_model", "cameron_martin_embedding_check",
    "fbm_covariance", "fbm_model", "plan_parameters", "sample_path",
    "sample_paths",
    "ExperimentConfig", "TailReport", "admissible_moment_eta",
    "clopper_pearson", "constant_c_pq", "fit_tail_shape",
    "jacobian_tail_experiment", "moment_estimate", "n_tail_experiment",
    "power_moment", "riemann_zeta",
]
