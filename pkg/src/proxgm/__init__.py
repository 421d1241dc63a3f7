# Copyright 2026 The proxgm developers
#
# This file is part of proxgm.
#
# proxgm is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# proxgm is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY
# or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU General Public
# License for more details.
#
# You should have received a copy of the GNU General Public License
# along with proxgm.  If not, see <http://www.gnu.org/licenses/>

"""Graph matching by proximal steps on the entropic relaxation of the quadratic assignment problem.

Classical baselines (spectral matching, random walk, graduated
assignment, integer projected fixed point), reverse mode gradients
through the unrolled solvers, a learnable node affinity and synthetic
instance generators.
"""

from .log import logger
from .config import configuration, default_solver_params, default_sinkhorn_params, \
  default_baseline_params, default_train_params, default_synthetic_params, \
  default_point_cloud_params
from .exception import ProxgmError, InvalidInput, ConfigurationError, \
  SizeLimitExceeded, NumericalOverflow, InvalidTape, TrainingDiverged
from .time_utils import Timer, format_seconds
from .core import GraphInstance, Mask, PermutationMatching, MatchingState, \
  AffinityDecomposition, KeypointPairSample, qap_objective, relaxed_objective, \
  matching_accuracy, pad_to_equal_size, discretize, brute_force_qap
from .sinkhorn import SinkhornConfig, sinkhorn_normalize
from .dpgm import SolverParams, SolverTrace, DpgmResult, dpgm_solve, \
  init_state, proximal_step, algorithm_step, lipschitz_bound, \
  ConvergenceReport, convergence_report
from .baselines import METHODS, BaselineConfig, spectral_match, rrwm, gagm, ipfp, solve
from .grad import Tape, dpgm_backward, record, LinearLoss, QuadraticMap, \
  finite_diff_check, expand_pairwise_gradient
from .learn import WeightMatrix, TrainConfig, node_affinity, edge_affinity, \
  sample_affinity, cross_entropy_loss, train, evaluate, gen_metric_dataset, \
  save_weights, load_weights
from .data import SyntheticSpec, PointCloudSpec, gen_er_pair, gen_point_pair, \
  synthetic_affinity, house_affinity, delaunay, load_instance, dump_instance, \
  load_dataset, dump_dataset, load_landmarks, frames_pair
try:
    from ._version import __version__
except:
    pass
