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

"""The ``proxgm`` command.

Subcommands:

- ``solve INSTANCE --method M``: match one instance JSON file

- ``bench-sweep --config CFG | --preset NAME``: run a benchmark sweep

- ``gradcheck``: compare tape gradients with finite differences

- ``train --dataset DATA``: learn the node affinity weights

- ``generate --kind er|points|metric``: write instance JSON files

Exit code is 0 on success, 1 on a configuration or input error, 2 on
an I/O error.
"""

import csv
import json
import os
import sys

from proxgm.baselines import BaselineConfig, solve
from proxgm.core import matching_accuracy, qap_objective
from proxgm.data import (HOUSE_SCALE, SYNTHETIC_SCALE, PointCloudSpec, SyntheticSpec, dump_dataset,
                         dump_instance, gen_er_pair, gen_point_pair, house_affinity, load_dataset,
                         load_instance, random_affinity, synthetic_affinity)
from proxgm.dpgm import SolverParams, convergence_report
from proxgm.exception import ConfigurationError, InvalidInput, ProxgmError
from proxgm.grad import LinearLoss, QuadraticMap, finite_diff_check
from proxgm.learn import TrainConfig, gen_metric_dataset, load_weights, sample_affinity, save_weights, train
from proxgm.log import style
from proxgm.time_utils import Timer
from .engine import Engine
from .harness import ALL_METHODS, PRESETS, ExperimentConfig, emit_trace, run_sweep
from .log import logger
from .sweep import SweepJournal

def _solver_config(method, max_iters = None, lambda_ = None, beta = None, fixed_unroll = False,
                   lambda_decay = None):
    overrides = {}
    if max_iters is not None:
        overrides['max_iters'] = max_iters
    if fixed_unroll:
        overrides['fixed_unroll'] = True
    if method == 'dpgm':
        if lambda_ is not None:
            overrides['lambda_'] = lambda_
        if beta is not None:
            overrides['beta'] = beta
        if lambda_decay is not None:
            overrides['lambda_decay'] = lambda_decay
        return SolverParams(**overrides)
    if lambda_ is not None or beta is not None or lambda_decay is not None:
        raise ConfigurationError("--lambda, --lambda-decay and --beta only apply to dpgm")
    return BaselineConfig(method = method, **overrides)

def _add_solver_options(parser):
    parser.add_argument("--method", default = "dpgm", choices = ALL_METHODS,
                        help = "matching method. Default = %(default)s")
    parser.add_argument("--max-iters", dest = "max_iters", type = int, default = None,
                        help = "maximum number of solver iterations")
    parser.add_argument("--lambda", dest = "lambda_", type = float, default = None,
                        help = "dpgm entropy weight")
    parser.add_argument("--lambda-decay", dest = "lambda_decay", type = float, default = None,
                        help = "dpgm temperature decay per iteration, 1 for a constant temperature")
    parser.add_argument("--beta", type = float, default = None,
                        help = "dpgm proximal weight")

class CommandEngine(Engine):

    """Base of the subcommand engines; ``exit_code`` is returned by `proxgm_engine.cli.main`."""

    def __init__(self, prog = None):
        super(CommandEngine, self).__init__(prog)
        self.exit_code = 0

    def output_path(self, path, default_name):
        """``path`` if given, else ``default_name`` in the result directory."""
        if path:
            return path
        return os.path.join(self.create_result_dir(), default_name)

class SolveEngine(CommandEngine):

    description = "match the two graphs of an instance JSON file"

    def __init__(self, prog = None):
        super(SolveEngine, self).__init__(prog)
        p = self.args_parser
        p.add_argument("instance", help = "instance JSON file")
        _add_solver_options(p)
        p.add_argument("--kernel", default = "synthetic", choices = ("synthetic", "house", "learned"),
                       help = "edge affinity: feature distance kernel, 2-D point distance kernel, or learned node affinity. Default = %(default)s")
        p.add_argument("--scale", type = float, default = None,
                       help = "kernel scale. Default = %i (synthetic), %i (house)" % (SYNTHETIC_SCALE, HOUSE_SCALE))
        p.add_argument("--weights", default = None,
                       help = "W checkpoint JSON, for --kernel learned")
        p.add_argument("--out", default = None,
                       help = "result JSON file. Default = stdout")
        p.add_argument("--trace", default = None,
                       help = "write the per iteration trace (iter,objective,delta_sq) to this csv file")

    def affinity(self, sample):
        args = self.args
        if args.kernel == "learned":
            if not args.weights:
                raise ConfigurationError("--kernel learned needs --weights")
            return sample_affinity(sample, load_weights(args.weights))
        if args.weights:
            raise ConfigurationError("--weights only applies to --kernel learned")
        if args.scale is not None and not args.scale > 0:
            raise ConfigurationError("--scale must be > 0")
        if args.kernel == "house":
            return house_affinity(sample, args.scale or HOUSE_SCALE)
        return synthetic_affinity(sample, args.scale or SYNTHETIC_SCALE)

    def run(self):
        args = self.args
        cfg = _solver_config(args.method, args.max_iters, args.lambda_, args.beta,
                                 lambda_decay = args.lambda_decay)
        sample = load_instance(args.instance)
        aff = self.affinity(sample)
        timer = Timer()
        state, matching = solve(args.method, aff, cfg)
        wall_ms = timer.elapsed_ms()
        result = {
            'method': args.method,
            'matching': matching.tolist(),
            'objective': qap_objective(aff, matching),
            'iters': state.iters,
            'converged': state.converged,
            'wall_ms': wall_ms,
            }
        if sample.truth is not None:
            result['accuracy'] = matching_accuracy(matching, sample.truth, sample.mask)
        logger.info("%s on %s: objective %s%s", style.method(args.method), args.instance,
                    style.value("%.6g" % result['objective']),
                    "" if 'accuracy' not in result else ", accuracy %.3f" % result['accuracy'])
        if args.method == 'dpgm':
            logger.detail("convergence:\n%s", convergence_report(state.trace).to_string())
        if args.trace:
            if state.trace is None:
                raise ConfigurationError("%s records no trace" % (args.method,))
            emit_trace(state.trace, args.trace)
        if args.out:
            with open(args.out, "w") as f:
                json.dump(result, f)
        else:
            json.dump(result, sys.stdout)
            sys.stdout.write("\n")

class SweepEngine(CommandEngine):

    description = "run a benchmark sweep"

    def __init__(self, prog = None):
        super(SweepEngine, self).__init__(prog)
        p = self.args_parser
        p.add_argument("--config", default = None,
                       help = "experiment JSON file, keys as the ExperimentConfig fields")
        p.add_argument("--preset", default = None, choices = sorted(PRESETS),
                       help = "named experiment")
        p.add_argument("--out", default = None,
                       help = "result file. Default = output of the configuration, or results.<format> in the result directory")
        p.add_argument("--format", default = None, choices = ("csv", "json"),
                       help = "result format")
        p.add_argument("--trials", type = int, default = None, help = "number of trials per sweep value")
        p.add_argument("--workers", type = int, default = None, help = "size of the trial pool")
        p.add_argument("--resume", action = "store_true", default = False,
                       help = "keep a journal in the result directory and skip the instances it holds")

    def config(self):
        args = self.args
        if args.config and args.preset:
            raise ConfigurationError("--config and --preset are exclusive")
        overrides = {}
        for key in ('format', 'trials', 'workers'):
            if getattr(args, key) is not None:
                overrides[key] = getattr(args, key)
        if args.config:
            with open(args.config) as f:
                d = json.load(f)
            if not isinstance(d, dict):
                raise ConfigurationError("%s: an experiment configuration is a JSON object" % (args.config,))
            d.update(overrides)
            cfg = ExperimentConfig.from_dict(d)
        else:
            cfg = ExperimentConfig.preset(args.preset or 'noise', **overrides)
        if args.out:
            cfg.output = args.out
        elif not cfg.output:
            cfg.output = self.output_path(None, "results." + cfg.format)
        return cfg

    def run(self):
        cfg = self.config()
        journal = None
        if self.args.resume:
            journal = SweepJournal(os.path.join(self.create_result_dir(), "journal"))
        records = run_sweep(cfg, journal)
        failed = sum(1 for r in records if r.error is not None)
        logger.info("%i records written to %s%s", len(records), cfg.output,
                    "" if not failed else style.report_error(", %i failed" % failed))

class GradcheckEngine(CommandEngine):

    description = "check reverse mode gradients against central finite differences"

    def __init__(self, prog = None):
        super(GradcheckEngine, self).__init__(prog)
        p = self.args_parser
        p.add_argument("--method", default = "dpgm", choices = ('dpgm', 'sm', 'rrwm', 'gagm', 'polynomial'),
                       help = "differentiable solver, or polynomial for the quadratic test map. Default = %(default)s")
        p.add_argument("--n", type = int, default = 5, help = "node count. Default = %(default)s")
        p.add_argument("--unroll", type = int, default = 5, help = "unrolled iterations. Default = %(default)s")
        p.add_argument("--seed", type = int, default = 0, help = "instance and loss seed. Default = %(default)s")
        p.add_argument("--h", type = float, default = 1e-5, help = "finite difference step. Default = %(default)s")
        p.add_argument("--samples", type = int, default = 20, help = "checked coordinates. Default = %(default)s")
        p.add_argument("--tol", type = float, default = 1e-4, help = "pass threshold. Default = %(default)s")

    def run(self):
        args = self.args
        if args.n < 2 or args.unroll < 1 or args.samples < 1:
            raise ConfigurationError("need --n >= 2, --unroll >= 1 and --samples >= 1")
        aff = random_affinity(args.n, seed = args.seed)
        if args.method == 'polynomial':
            method, cfg = 'dpgm', None
            loss = QuadraticMap(LinearLoss.random(args.n, args.seed).r)
        else:
            method = args.method
            cfg = _solver_config(method, args.unroll, fixed_unroll = True)
            loss = LinearLoss.random(args.n, args.seed)
        err = finite_diff_check(aff, cfg, loss, args.h, method = method, samples = args.samples, seed = args.seed)
        passed = err <= args.tol
        print("max relative error %.3e" % (err,))
        print("PASS" if passed else "FAIL")
        if not passed:
            self.exit_code = 1

class TrainEngine(CommandEngine):

    description = "learn the node affinity weights W on a dataset"

    def __init__(self, prog = None):
        super(TrainEngine, self).__init__(prog)
        p = self.args_parser
        p.add_argument("--dataset", required = True, help = "dataset JSON file (array of instances)")
        p.add_argument("--heldout", default = None, help = "held-out dataset JSON file")
        p.add_argument("--epochs", type = int, default = None)
        p.add_argument("--lr", type = float, default = None, help = "learning rate")
        p.add_argument("--batch", type = int, default = None, help = "batch size")
        p.add_argument("--seed", type = int, default = None, help = "shuffling seed")
        p.add_argument("--method", default = None, help = "matching layer (dpgm, sm, rrwm, gagm)")
        p.add_argument("--unroll", type = int, default = None, help = "unrolled iterations of the matching layer")
        p.add_argument("--init", default = None, help = "initial W checkpoint. Default = scaled identity")
        p.add_argument("--out", default = None,
                       help = "W checkpoint JSON. Default = weights.json in the result directory")
        p.add_argument("--curve", default = None,
                       help = "training curve csv (epoch,mean_loss,train_accuracy,heldout_accuracy)")

    def run(self):
        args = self.args
        overrides = {}
        for key, name in (('epochs', 'epochs'), ('lr', 'learning_rate'), ('batch', 'batch_size'),
                          ('seed', 'rng_seed'), ('method', 'method'), ('unroll', 'unroll')):
            if getattr(args, key) is not None:
                overrides[name] = getattr(args, key)
        cfg = TrainConfig(**overrides)
        dataset = load_dataset(args.dataset)
        heldout = load_dataset(args.heldout) if args.heldout else None
        w0 = load_weights(args.init) if args.init else None
        w, curve = train(dataset, cfg, heldout = heldout, w0 = w0)
        out = self.output_path(args.out, "weights.json")
        save_weights(w, out)
        logger.info("W written to %s", out)
        if args.curve:
            with open(args.curve, "w", newline = "") as f:
                writer = csv.writer(f, lineterminator = "\n")
                writer.writerow(('epoch', 'mean_loss', 'train_accuracy', 'heldout_accuracy'))
                for row in curve:
                    writer.writerow((row['epoch'], repr(row['mean_loss']), repr(row['train_accuracy']),
                                     "" if row['heldout_accuracy'] is None else repr(row['heldout_accuracy'])))

class GenerateEngine(CommandEngine):

    description = "write generated instances as JSON"

    def __init__(self, prog = None):
        super(GenerateEngine, self).__init__(prog)
        p = self.args_parser
        p.add_argument("--kind", default = "er", choices = ("er", "points", "metric"),
                       help = "Erdos-Renyi pair, rotating point clouds, or learnable metric pairs. Default = %(default)s")
        p.add_argument("--out", required = True, help = "JSON file")
        p.add_argument("--count", type = int, default = 1,
                       help = "number of instances; more than one writes a dataset array. Default = %(default)s")
        p.add_argument("--seed", type = int, default = 0, help = "seed of the first instance. Default = %(default)s")
        p.add_argument("--nin", type = int, default = None, help = "inlier count (er, metric)")
        p.add_argument("--nout", type = int, default = None, help = "outlier count (er)")
        p.add_argument("--pedge", type = float, default = None, help = "edge probability (er)")
        p.add_argument("--sigma", type = float, default = None, help = "feature noise (er, metric)")
        p.add_argument("--dim", type = int, default = None, help = "feature dimension (er, metric)")
        p.add_argument("--npoints", type = int, default = None, help = "point count (points)")
        p.add_argument("--inliers", type = int, default = None, help = "corresponding point count (points)")
        p.add_argument("--frame-gap", dest = "frame_gap", type = float, default = None,
                       help = "rotation and jitter magnitude (points)")

    def _overrides(self, names):
        return {name: getattr(self.args, key) for key, name in names if getattr(self.args, key) is not None}

    def run(self):
        args = self.args
        if args.count < 1:
            raise ConfigurationError("--count must be >= 1")
        seeds = range(args.seed, args.seed + args.count)
        if args.kind == 'er':
            spec = SyntheticSpec(**self._overrides((('nin', 'n_in'), ('nout', 'n_out'), ('pedge', 'p_edge'),
                                                    ('sigma', 'sigma'), ('dim', 'dim'))))
            samples = [gen_er_pair(spec.replace(rng_seed = s))[0] for s in seeds]
        elif args.kind == 'points':
            spec = PointCloudSpec(**self._overrides((('npoints', 'n_points'), ('inliers', 'inlier_count'),
                                                     ('frame_gap', 'frame_gap'))))
            samples = [gen_point_pair(spec.replace(rng_seed = s)) for s in seeds]
        else:
            samples = gen_metric_dataset(args.count, seed = args.seed,
                                         **self._overrides((('nin', 'n_in'), ('sigma', 'sigma'), ('dim', 'dim'))))
        if args.count == 1:
            dump_instance(samples[0], args.out)
        else:
            dump_dataset(samples, args.out)
        logger.info("%i %s instance(s) written to %s", len(samples), args.kind, args.out)

COMMANDS = {
    'solve': SolveEngine,
    'bench-sweep': SweepEngine,
    'gradcheck': GradcheckEngine,
    'train': TrainEngine,
    'generate': GenerateEngine,
    }

def _usage():
    return "usage: proxgm {%s} [options]\n(proxgm <command> -h for help on a command)" % (",".join(COMMANDS),)

def main(argv = None):
    """Run the ``proxgm`` command, return its exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_usage())
        return 0 if argv else 1
    command = argv[0]
    if command not in COMMANDS:
        logger.error("unknown command %r\n%s", command, _usage())
        return 1
    try:
        engine = COMMANDS[command](prog = "proxgm " + command)
        engine.start(argv[1:])
        return engine.exit_code
    except json.JSONDecodeError as e:
        logger.error("invalid JSON: %s", e)
        return 2
    except (ProxgmError, InvalidInput, ConfigurationError) as e:
        logger.error("%s", e)
        return 1
    except EnvironmentError as e:
        logger.error("%s", e)
        return 2
    except (TypeError, ValueError) as e:
        logger.error("invalid configuration value: %s", e)
        return 1
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0

if __name__ == "__main__":
    sys.exit(main())
