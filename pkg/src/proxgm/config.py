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

import logging
import os
import sys

from .exception import ConfigurationError

def _is_terminal(stream):
    try:
        return stream.isatty()
    except (AttributeError, ValueError):
        return False

TRACE = 12
DETAIL = 15

# _STARTOF_ configuration
configuration = {
    'log_level': logging.INFO,
    'dense_max_n': 80,
    'brute_force_max_n': 10,
    'brute_force_chunk': 40320,
    'tie_break_tol': 1e-12,
    'exponent_clip': 30.0,
    'delaunay_tol': 1e-10,
    'default_workers': 1,
    'color_mode': _is_terminal(sys.stderr),
    'color_styles': {
        'log_header': ('yellow',),
        'object_repr': ('blue',),
        'emph': ('cyan',),
        'method': ('blue', 'bold'),
        'value': ('green', 'bold'),
        'report_warn': ('magenta',),
        'report_error': ('red', 'bold'),
        logging.DEBUG: ('green',),
        TRACE: ('green', 'bold',),
        DETAIL: ('magenta', 'bold'),
        logging.INFO: ('magenta',),
        logging.WARNING: ('cyan',),
        logging.ERROR: ('red',),
        logging.CRITICAL: ('yellow', 'on_red')
        },
    }
# _ENDOF_ configuration
"""Global proxgm configuration parameters.

- ``log_level``: the log level (see module `logging`)

- ``dense_max_n``: largest node count for which the n²×n² affinity
  matrix may be composed densely (`proxgm.core.AffinityDecomposition.dense`)

- ``brute_force_max_n``: largest node count accepted by
  `proxgm.core.brute_force_qap`

- ``brute_force_chunk``: number of permutations scored per numpy batch
  during exhaustive enumeration

- ``tie_break_tol``: relative tolerance under which two assignment
  values are considered equal by `proxgm.core.discretize`

- ``exponent_clip``: exponents of the learnable affinities are clipped
  at this value before exp

- ``delaunay_tol``: relative tolerance of the empty circumcircle test

- ``default_workers``: size of the harness work pool

- ``color_mode``: whether to colorize output (with ansi escape
  sequences)

- ``color_styles``: mapping of identifiers to iterables of ansi
  attributes identifiers (see `proxgm.log.ANSI_CODES`)
"""

def make_default_solver_params():
# _STARTOF_ default_solver_params
    default_solver_params = {
        'lambda_':        1.0,
        'lambda_decay':   0.9,
        'lambda_min':     0.05,
        'beta':           1.0,
        'max_iters':      200,
        'tol':            1e-8,
        'sinkhorn_iters': 30,
        'sinkhorn_tol':   1e-9,
        'epsilon_log':    1e-30,
        'fixed_unroll':   False,
        }
# _ENDOF_ default_solver_params
    return default_solver_params

default_solver_params = make_default_solver_params()
"""Default parameters of the proximal solver (`proxgm.dpgm.SolverParams`).

- ``lambda_``: entropy weight (temperature) of the first iteration

- ``lambda_decay``: per iteration factor applied to the temperature of
  a free running solve, down to ``lambda_min``. ``beta`` is scaled by
  the inverse ratio so that λβ is unchanged. 1.0 keeps the temperature
  constant. Fixed unrolls always run at ``lambda_``

- ``lambda_min``: temperature floor of the decay

- ``beta``: proximal weight, a number or a list used as a per
  iteration schedule (last value repeated)

- ``max_iters``: maximum number of proximal steps

- ``tol``: stop when the sup norm of the iterate change falls below

- ``sinkhorn_iters``: depth of the projection after each step

- ``sinkhorn_tol``: row / column sum deviation at which the projection
  stops early

- ``epsilon_log``: clamp floor of log arguments

- ``fixed_unroll``: run exactly ``max_iters`` steps and
  ``sinkhorn_iters`` projections, needed to differentiate the solve
"""

def make_default_sinkhorn_params():
# _STARTOF_ default_sinkhorn_params
    default_sinkhorn_params = {
        'max_iters': 1000,
        'tol':       1e-9,
        'epsilon':   1e-30,
        }
# _ENDOF_ default_sinkhorn_params
    return default_sinkhorn_params

default_sinkhorn_params = make_default_sinkhorn_params()
"""Default parameters of standalone Sinkhorn projections."""

def make_default_baseline_params():
# _STARTOF_ default_baseline_params
    default_baseline_params = {
        'method':         'sm',
        'max_iters':      300,
        'tol':            1e-8,
        'rrwm_alpha':     0.2,
        'rrwm_beta':      30.0,
        'gagm_beta0':     0.5,
        'gagm_growth':    1.075,
        'gagm_beta_max':  200.0,
        'sinkhorn_iters': 30,
        'dense':          False,
        'fixed_unroll':   False,
        }
# _ENDOF_ default_baseline_params
    return default_baseline_params

default_baseline_params = make_default_baseline_params()
"""Default parameters of the baseline solvers (`proxgm.baselines.BaselineConfig`)."""

def make_default_train_params():
# _STARTOF_ default_train_params
    default_train_params = {
        'learning_rate': 1e-2,
        'epochs':        50,
        'batch_size':    8,
        'rng_seed':      0,
        'method':        'dpgm',
        'unroll':        10,
        'init_scale':    1.0,
        }
# _ENDOF_ default_train_params
    return default_train_params

default_train_params = make_default_train_params()
"""Default parameters of `proxgm.learn.train`.

- ``unroll``: number of unrolled solver iterations of the matching
  layer

- ``method``: differentiable matching layer, one of ``dpgm``, ``sm``,
  ``rrwm``, ``gagm``
"""

def make_default_synthetic_params():
# _STARTOF_ default_synthetic_params
    default_synthetic_params = {
        'n_in':     30,
        'n_out':    0,
        'p_edge':   0.7,
        'sigma':    0.0,
        'dim':      20,
        'rng_seed': 0,
        }
# _ENDOF_ default_synthetic_params
    return default_synthetic_params

default_synthetic_params = make_default_synthetic_params()
"""Default parameters of Erdos-Renyi instance pairs (`proxgm.data.SyntheticSpec`).

- ``n_in``, ``n_out``: inlier and outlier node counts

- ``p_edge``: edge probability

- ``sigma``: standard deviation of the gaussian noise added to inlier
  features of the second graph

- ``dim``: feature dimension
"""

def make_default_point_cloud_params():
# _STARTOF_ default_point_cloud_params
    default_point_cloud_params = {
        'n_points':     30,
        'inlier_count': 30,
        'frame_gap':    1.0,
        'extent':       256.0,
        'rng_seed':     0,
        }
# _ENDOF_ default_point_cloud_params
    return default_point_cloud_params

default_point_cloud_params = make_default_point_cloud_params()
"""Default parameters of rotating point cloud pairs (`proxgm.data.PointCloudSpec`).

- ``frame_gap``: distance between the two frames; the second frame
  is rotated by frame_gap·π/6 around the centroid and jittered by a
  gaussian of standard deviation frame_gap·extent/100

- ``extent``: side of the square the points are drawn in
"""

def make_params(params, default_params):
    """Merge user parameters over defaults.

    :param params: a dict of overrides, or None

    :param default_params: the dict of defaults, also the list of
      accepted keys
    """
    result = default_params.copy()
    if params:
        unknown = sorted(set(params).difference(default_params))
        if unknown:
            raise ConfigurationError("unknown parameter(s): %s" % (", ".join(unknown),))
        result.update(params)
    return result

USER_CONF_FILE = os.path.join(os.path.expanduser("~"), ".proxgm.conf.py")
"""Python file executed at import; each dict it defines under the name of
a dict of this module (``configuration``, ``default_solver_params``...)
is merged into it."""

def load_configuration(filename, dicts_confs):
    """Merge the dicts defined by a python file into ours.

    :param filename: the python file, silently ignored if missing

    :param dicts_confs: couples (target dict, name of the dict in the
      file)

    Errors in the file are reported on stderr and leave the dicts
    untouched.
    """
    if not filename or not os.path.isfile(filename):
        return
    namespace = {}
    try:
        with open(filename, "rb") as f:
            exec(compile(f.read(), filename, 'exec'), namespace)
    except Exception as exc:
        sys.stderr.write("error in proxgm configuration file %s: %s\n" % (filename, exc))
        return
    for target, name in dicts_confs:
        target.update(namespace.get(name, {}))

load_configuration(USER_CONF_FILE, [
    (configuration, 'configuration'),
    (default_solver_params, 'default_solver_params'),
    (default_sinkhorn_params, 'default_sinkhorn_params'),
    (default_baseline_params, 'default_baseline_params'),
    (default_train_params, 'default_train_params'),
    (default_synthetic_params, 'default_synthetic_params'),
    (default_point_cloud_params, 'default_point_cloud_params'),
    ])
