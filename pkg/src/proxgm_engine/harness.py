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

"""Benchmark sweeps over synthetic matching instances.

A sweep varies one instance parameter (``sigma``, ``n_out`` or
``p_edge`` of Erdos-Renyi pairs, ``inlier_ratio`` or ``frame_gap`` of
point cloud pairs) over a list of values. For each value and trial
seed, one instance is generated and solved by every method; each
solve gives a `proxgm_engine.harness.ResultRecord`. Records are
written in (sweep value, method, seed) order whatever the number of
workers.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
import hashlib
import json

from proxgm.baselines import METHODS, BaselineConfig, solve
from proxgm.config import configuration, default_point_cloud_params, make_params
from proxgm.core import brute_force_qap, matching_accuracy, qap_objective
from proxgm.data import (HOUSE_SCALE, SYNTHETIC_SCALE, PointCloudSpec, SyntheticSpec,
                         gen_er_pair, gen_point_pair, house_affinity, synthetic_affinity)
from proxgm.dpgm import SolverParams
from proxgm.exception import ConfigurationError
from proxgm.log import style
from proxgm.time_utils import Timer, format_seconds
from .log import logger
from .report import SweepReport
from .sweep import HashableDict, geom, igeom, sweep

FIELDS = ('method', 'sweep_var', 'sweep_value', 'seed', 'accuracy', 'objective', 'oracle_ratio', 'wall_ms', 'iters')
"""Columns of the result files, in order."""

SWEEP_VARS = {'sigma': 'er', 'n_out': 'er', 'p_edge': 'er',
              'inlier_ratio': 'points', 'frame_gap': 'points'}
"""Sweepable parameters and the instance kind they apply to."""

ALL_METHODS = ('dpgm',) + METHODS

_UNRECORDED_FIELDS = ('name', 'output', 'format', 'workers', 'trials', 'seeds', 'base_seed', 'values')

_PROGRESSIONS = {'geom': geom, 'igeom': igeom}

def expand_values(values):
    """Sweep values of a configuration: a list, or a one key progression dict.

    >>> expand_values({"igeom": [10, 40, 3]})
    [10, 20, 40]
    """
    if isinstance(values, dict):
        if len(values) != 1 or next(iter(values)) not in _PROGRESSIONS:
            raise ConfigurationError("value progression must be one of %s, got %r" % (", ".join(sorted(_PROGRESSIONS)), values))
        kind, bounds = next(iter(values.items()))
        try:
            lo, hi, steps = bounds
            lo, hi, steps = float(lo), float(hi), int(steps)
        except (TypeError, ValueError):
            raise ConfigurationError("%s progression takes [min, max, steps], got %r" % (kind, bounds))
        if not (0 < lo <= hi) or steps < 1:
            raise ConfigurationError("%s progression needs 0 < min <= max and steps >= 1, got %r" % (kind, bounds))
        return _PROGRESSIONS[kind](lo, hi, steps)
    try:
        return list(values)
    except TypeError:
        raise ConfigurationError("sweep values must be a list, got %r" % (values,))

default_experiment_params = {
    'name':          'noise',
    'sweep_var':     'sigma',
    'values':        [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
    'methods':       list(ALL_METHODS),
    'trials':        20,
    'seeds':         None,
    'base_seed':     0,
    'instance':      'er',
    'spec':          {'n_in': 30, 'n_out': 0, 'p_edge': 0.7},
    'scale':         None,
    'oracle':        True,
    'record_timing': True,
    'workers':       None,
    'output':        None,
    'format':        'csv',
    'solver':        {},
    'baseline':      {},
    }
"""Defaults of `proxgm_engine.harness.ExperimentConfig`.

- ``values``: the values taken by ``sweep_var``, either a list or
  ``{"geom": [min, max, steps]}`` (``"igeom"`` for distinct integers)

- ``trials``: number of seeds per value, ``base_seed``, ``base_seed +
  1``...; an explicit ``seeds`` list takes precedence

- ``spec``: fixed fields of the instance spec
  (`proxgm.data.SyntheticSpec` or `proxgm.data.PointCloudSpec`)

- ``scale``: kernel scale of the affinity, None for the kind's
  default (2900 for er, 2500 for points)

- ``oracle``: compute the ratio to the brute force optimum when n is
  at most ``configuration['brute_force_max_n']``

- ``record_timing``: when False, ``wall_ms`` is written as 0 so that
  repeated runs give identical files

- ``workers``: size of the trial pool, None for
  ``configuration['default_workers']``

- ``solver``, ``baseline``: overrides of the dpgm and baseline
  parameters
"""

PRESETS = {
    'noise': {},
    'noise-full': {'name': 'noise-full',
                   'spec': {'n_in': 100, 'n_out': 0, 'p_edge': 0.7}},
    'outlier': {'name': 'outlier',
                'sweep_var': 'n_out',
                'values': [0, 10, 20, 30, 40, 50],
                'spec': {'n_in': 35, 'sigma': 0.1, 'p_edge': 0.7}},
    'inlier-ratio': {'name': 'inlier-ratio',
                     'instance': 'points',
                     'sweep_var': 'inlier_ratio',
                     'values': [30, 25, 20],
                     'spec': {'n_points': 30}},
    }
"""Named experiments, as overrides of `proxgm_engine.harness.default_experiment_params`."""

class ExperimentConfig(object):

    """Description of a sweep.

    Built over `proxgm_engine.harness.default_experiment_params`. For
    ``inlier_ratio`` sweeps, values are inlier counts out of
    ``n_points``.
    """

    def __init__(self, **params):
        p = make_params(params, default_experiment_params)
        self.name = str(p['name'])
        self.sweep_var = p['sweep_var']
        self.values = expand_values(p['values'])
        self.methods = [str(m).lower() for m in p['methods']]
        self.seeds = None if p['seeds'] is None else [int(s) for s in p['seeds']]
        self.trials = len(self.seeds) if self.seeds is not None else int(p['trials'])
        self.base_seed = int(p['base_seed'])
        self.instance = p['instance']
        self.spec = dict(p['spec'])
        self.scale = None if p['scale'] is None else float(p['scale'])
        self.oracle = bool(p['oracle'])
        self.record_timing = bool(p['record_timing'])
        self.workers = int(p['workers'] or configuration['default_workers'])
        self.output = p['output']
        self.format = p['format']
        self.solver = dict(p['solver'])
        self.baseline = dict(p['baseline'])
        if self.sweep_var not in SWEEP_VARS:
            raise ConfigurationError("unknown sweep variable %r, expected one of %s" % (self.sweep_var, ", ".join(sorted(SWEEP_VARS))))
        if self.instance not in ('er', 'points'):
            raise ConfigurationError("unknown instance kind %r, expected er or points" % (self.instance,))
        if SWEEP_VARS[self.sweep_var] != self.instance:
            raise ConfigurationError("sweep variable %s applies to %s instances, not %s" % (self.sweep_var, SWEEP_VARS[self.sweep_var], self.instance))
        if not self.values:
            raise ConfigurationError("empty sweep value list")
        if not self.methods:
            raise ConfigurationError("empty method list")
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown:
            raise ConfigurationError("unknown method(s) %s, expected among %s" % (", ".join(unknown), ", ".join(ALL_METHODS)))
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1, got %i" % (self.trials,))
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1, got %i" % (self.workers,))
        if self.format not in ('csv', 'json'):
            raise ConfigurationError("unknown result format %r, expected csv or json" % (self.format,))
        if self.scale is not None and not self.scale > 0:
            raise ConfigurationError("kernel scale must be > 0, got %r" % (self.scale,))
        for value in self.values:
            self.instance_spec(value, self.base_seed)
        self.solver_params()
        self.baseline_params()

    @classmethod
    def preset(cls, name, **overrides):
        """Build the named experiment of `proxgm_engine.harness.PRESETS`, with overrides."""
        if name not in PRESETS:
            raise ConfigurationError("unknown preset %r, expected one of %s" % (name, ", ".join(sorted(PRESETS))))
        params = dict(PRESETS[name])
        params.update(overrides)
        return cls(**params)

    @classmethod
    def from_dict(cls, d):
        """Build from a JSON object mirroring the field names; a ``preset`` key selects the base experiment."""
        if not isinstance(d, dict):
            raise ConfigurationError("an experiment configuration is a JSON object")
        d = dict(d)
        name = d.pop('preset', None)
        if name is not None:
            return cls.preset(name, **d)
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    @property
    def trial_seeds(self):
        if self.seeds is not None:
            return list(self.seeds)
        return [self.base_seed + t for t in range(self.trials)]

    def instance_spec(self, value, seed):
        """Spec of the instance of one sweep value and seed."""
        var = 'inlier_count' if self.sweep_var == 'inlier_ratio' else self.sweep_var
        params = dict(self.spec)
        params.update({var: value, 'rng_seed': seed})
        if self.instance == 'er':
            return SyntheticSpec(**params)
        # every point is an inlier unless told otherwise
        params.setdefault('inlier_count', params.get('n_points', default_point_cloud_params['n_points']))
        return PointCloudSpec(**params)

    def solver_params(self):
        return SolverParams(**self.solver)

    def baseline_params(self):
        return BaselineConfig(**self.baseline)

    def as_dict(self):
        return {k: getattr(self, k) for k in default_experiment_params}

    def fingerprint(self):
        """Digest of the fields that change the records of an instance.

        Output location, format, pool size, name, sweep values and seeds
        are left out; a journal entry names its own value and seed.
        """
        d = self.as_dict()
        for k in _UNRECORDED_FIELDS:
            d.pop(k)
        blob = json.dumps(d, sort_keys = True, default = repr)
        return hashlib.sha1(blob.encode("utf-8")).hexdigest()[:16]

    def __repr__(self):
        return "ExperimentConfig(name=%r, %s over %r, methods=%r, trials=%i, instance=%r)" % (
            self.name, self.sweep_var, self.values, self.methods, self.trials, self.instance)

class ResultRecord(object):

    """Outcome of one method on one instance.

    ``oracle_ratio`` is None when the brute force optimum was not
    computed; a failed solve keeps its ``error`` message and None
    results.
    """

    def __init__(self, method, sweep_var, sweep_value, seed, accuracy = None, objective = None,
                 oracle_ratio = None, wall_ms = None, iters = None, error = None):
        self.method = method
        self.sweep_var = sweep_var
        self.sweep_value = sweep_value
        self.seed = seed
        self.accuracy = accuracy
        self.objective = objective
        self.oracle_ratio = oracle_ratio
        self.wall_ms = wall_ms
        self.iters = iters
        self.error = error

    def as_dict(self):
        d = {k: getattr(self, k) for k in FIELDS}
        if self.error is not None:
            d['error'] = self.error
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def __eq__(self, other):
        return isinstance(other, ResultRecord) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "ResultRecord(%s)" % (", ".join("%s=%r" % (k, v) for k, v in self.as_dict().items()),)

def _build_affinity(cfg, sample):
    if cfg.instance == 'er':
        return synthetic_affinity(sample, cfg.scale or SYNTHETIC_SCALE)
    return house_affinity(sample, cfg.scale or HOUSE_SCALE)

def make_instance(cfg, value, seed):
    """Return ``(sample, affinity)`` of one sweep value and seed."""
    spec = cfg.instance_spec(value, seed)
    if cfg.instance == 'er':
        sample, _ = gen_er_pair(spec)
    else:
        sample = gen_point_pair(spec)
    return sample, _build_affinity(cfg, sample)

def _method_params(cfg, method):
    return cfg.solver_params() if method == 'dpgm' else cfg.baseline_params()

def _run_unit(cfg, value, seed):
    # one instance, every method
    def failed(method, e):
        logger.warning("%s failed on %s=%s seed %i: %s", style.method(method), cfg.sweep_var, value, seed, e)
        return ResultRecord(method, cfg.sweep_var, value, seed, error = str(e))
    try:
        sample, aff = make_instance(cfg, value, seed)
        optimum = None
        if cfg.oracle and aff.n <= configuration['brute_force_max_n']:
            _, optimum = brute_force_qap(aff)
    except Exception as e:
        return [failed(m, e) for m in cfg.methods]
    records = []
    for method in cfg.methods:
        try:
            timer = Timer()
            state, matching = solve(method, aff, _method_params(cfg, method))
            wall_ms = timer.elapsed_ms() if cfg.record_timing else 0.0
            objective = qap_objective(aff, matching)
            ratio = None
            if optimum is not None and optimum > 0:
                ratio = objective / optimum
            records.append(ResultRecord(method, cfg.sweep_var, value, seed,
                                        accuracy = matching_accuracy(matching, sample.truth, sample.mask),
                                        objective = objective,
                                        oracle_ratio = ratio,
                                        wall_ms = wall_ms,
                                        iters = state.iters))
        except Exception as e:
            records.append(failed(method, e))
    return records

def _format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)

class ResultWriter(object):

    """Streams records to a csv or json file, in the order given."""

    def __init__(self, path, format = 'csv'):
        if format not in ('csv', 'json'):
            raise ConfigurationError("unknown result format %r, expected csv or json" % (format,))
        self.path = path
        self.format = format
        self.__file = open(path, "w", newline = "")
        self.__count = 0
        if format == 'csv':
            self.__csv = csv.writer(self.__file, lineterminator = "\n")
            self.__csv.writerow(FIELDS)
        else:
            self.__file.write("[")

    def write(self, records):
        for r in records:
            if self.format == 'csv':
                self.__csv.writerow([_format_value(getattr(r, k)) for k in FIELDS])
            else:
                self.__file.write((",\n" if self.__count else "\n") + json.dumps(r.as_dict()))
            self.__count += 1
        self.__file.flush()

    def close(self):
        if self.format == 'json':
            self.__file.write("\n]\n")
        self.__file.close()

    def __enter__(self):
        return self

    def __exit__(self, t, v, traceback):
        self.close()
        return False

def emit_results(records, path, format = 'csv'):
    """Write records to a csv file (header `proxgm_engine.harness.FIELDS`, failed fields empty) or a json array."""
    with ResultWriter(path, format) as writer:
        writer.write(records)

def emit_trace(trace, path):
    """Write the per iteration trace of a solve as csv rows iter,objective,delta_sq."""
    delta_sq = getattr(trace, 'delta_sq', None)
    with open(path, "w", newline = "") as f:
        w = csv.writer(f, lineterminator = "\n")
        w.writerow(("iter", "objective", "delta_sq"))
        for t, objective in enumerate(trace.objective):
            w.writerow((t, repr(float(objective)), "" if delta_sq is None else repr(float(delta_sq[t]))))

def run_sweep(cfg, journal = None):
    """Run every (sweep value, method, trial) of an experiment.

    :param cfg: an `proxgm_engine.harness.ExperimentConfig`

    :param journal: optional `proxgm_engine.sweep.SweepJournal`;
      instances recorded there under the same
      `ExperimentConfig.fingerprint` are not solved again

    Trials of a sweep value run in a pool of ``cfg.workers`` threads;
    the records of each value are written to ``cfg.output`` (if set)
    as soon as the value is finished. Returns all records.
    """
    timer = Timer()
    seeds = cfg.trial_seeds
    combinations = sweep({'value': cfg.values, 'seed': seeds})
    logger.info("%s: %i instances, methods %s", style.emph(cfg.name), len(combinations), ", ".join(cfg.methods))

    fingerprint = cfg.fingerprint()

    def unit(combination):
        key = HashableDict(combination, config = fingerprint)
        if journal is not None:
            cached = journal.get(key)
            if cached is not None:
                return [ResultRecord.from_dict(d) for d in cached]
        records = _run_unit(cfg, combination['value'], combination['seed'])
        if journal is not None:
            journal.done(key, [r.as_dict() for r in records])
        return records

    writer = ResultWriter(cfg.output, cfg.format) if cfg.output else None
    all_records = []
    try:
        with ThreadPoolExecutor(max_workers = cfg.workers) as pool:
            for value in cfg.values:
                block = [HashableDict(value = value, seed = s) for s in seeds]
                per_seed = list(pool.map(unit, block))
                ordered = [per_seed[k][m] for m in range(len(cfg.methods)) for k in range(len(seeds))]
                if writer:
                    writer.write(ordered)
                all_records.extend(ordered)
                logger.detail("%s = %s done", cfg.sweep_var, value)
    finally:
        if writer:
            writer.close()
    logger.info("%s finished in %s\n%s", style.emph(cfg.name), format_seconds(timer.elapsed()),
                SweepReport(all_records).to_string())
    return all_records
