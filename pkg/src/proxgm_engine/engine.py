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

import inspect
import logging
import os
import re
import shlex
import sys
import time
import unicodedata
from argparse import ArgumentParser

from proxgm.exception import ConfigurationError
from proxgm.log import LevelFormatter, logger as root_logger
from .log import logger

def slugify(value):
    """Lowercase ascii rendering of a value, usable as a file name.

    >>> slugify("Noise sweep: σ 0.5")
    'noise-sweep-05'
    """
    value = unicodedata.normalize('NFKD', str(value)).encode('ascii', 'ignore').decode('ascii')
    value = re.sub(r'[^\w\s-]', '', value).strip().lower()
    return re.sub(r'[-\s]+', '-', value)

def _call_up_the_mro(engine, method_name):
    # each Engine class of the hierarchy, base first, runs its own definition
    for cls in reversed(inspect.getmro(type(engine))):
        if issubclass(cls, Engine) and method_name in cls.__dict__:
            cls.__dict__[method_name](engine)

class EngineArgumentParser(ArgumentParser):

    """An ArgumentParser raising `proxgm.exception.ConfigurationError` instead of exiting on bad arguments."""

    def error(self, message):
        raise ConfigurationError("%s: %s" % (self.prog, message))

class Engine(object):

    """Base class of the proxgm commands.

    Offers, to subclasses:

    - central handling of options and arguments in
      `proxgm_engine.engine.Engine.args_parser`, parsed into
      `proxgm_engine.engine.Engine.args`

    - log level selection (``-l``)

    - a result directory (``-c DIR``, or a directory named after the
      run in the current directory), created on demand by
      `proxgm_engine.engine.Engine.create_result_dir`

    - a copy of the log in the result directory (``-L``)

    A subclass registers its options in its ``__init__``, after
    calling the base ``__init__``, and overrides
    `proxgm_engine.engine.Engine.init` and
    `proxgm_engine.engine.Engine.run`. ``init`` and ``run`` of all
    engine ancestors are called in order, ancestors first.
    """

    description = None

    def __init__(self, prog = None):
        self.args_parser = EngineArgumentParser(prog = prog, description = self.description or self.__class__.__name__)
        self.args_parser.add_argument(
            "-l", dest = "log_level", default = None,
            help = "log level (int or string). Default = inherit proxgm logger level")
        self.args_parser.add_argument(
            "-L", dest = "copy_log", action = "store_true", default = False,
            help = "copy the log to the file 'log' of the result directory")
        self.args_parser.add_argument(
            "-c", dest = "use_dir", default = None, metavar = "DIR",
            help = "use result directory DIR")
        self.args_parser.add_argument(
            "--name", dest = "run_name", default = None,
            help = "name of the run. Default = engine class name and date")
        self.args = None
        """Parsed command line, available in ``init`` and ``run``."""
        self.run_name = None
        self.result_dir = None
        """Full path of the result directory. Only created by
        `proxgm_engine.engine.Engine.create_result_dir`."""
        self.__log_handler = None

    def create_result_dir(self):
        """Ensure the result dir exists and return its path."""
        os.makedirs(self.result_dir, exist_ok = True)
        return self.result_dir

    def start(self, engineargs = None):
        """Parse ``engineargs`` (default: ``sys.argv[1:]``) and run the engine."""
        if engineargs is None:
            engineargs = sys.argv[1:]
        self.args = self.args_parser.parse_args(args = engineargs)
        previous_level = root_logger.level
        if self.args.log_level is not None:
            try:
                log_level = int(self.args.log_level)
            except ValueError:
                log_level = self.args.log_level.upper()
            try:
                root_logger.setLevel(log_level)
            except ValueError as e:
                raise ConfigurationError("invalid log level %r: %s" % (self.args.log_level, e))
        try:
            self.setup_run_name()
            if self.args.use_dir:
                self.result_dir = os.path.abspath(self.args.use_dir)
                self.create_result_dir()
            else:
                self.setup_result_dir()
            if self.args.copy_log:
                self.create_result_dir()
                self.__log_handler = logging.FileHandler(os.path.join(self.result_dir, "log"))
                self.__log_handler.setFormatter(LevelFormatter())
                root_logger.addHandler(self.__log_handler)
                logger.info("copy log to %s", os.path.join(self.result_dir, "log"))
            logger.detail("command line: %s", " ".join([shlex.quote(arg) for arg in engineargs]))
            _call_up_the_mro(self, "init")
            _call_up_the_mro(self, "run")
        finally:
            if self.__log_handler is not None:
                root_logger.removeHandler(self.__log_handler)
                self.__log_handler.close()
                self.__log_handler = None
            root_logger.setLevel(previous_level)

    def setup_run_name(self):
        """Set the run name: ``--name`` if given, else class name and date."""
        if self.args.run_name:
            self.run_name = slugify(self.args.run_name)
        else:
            self.run_name = self.__class__.__name__ + "_" + time.strftime("%Y%m%d_%H%M%S_%z")

    def setup_result_dir(self):
        """Set the result directory: subdirectory named after the run in the current directory."""
        self.result_dir = os.path.abspath(self.run_name)

    def init(self):
        """Experiment init method, does nothing by default."""
        pass

    def run(self):
        """Experiment run method, does nothing by default."""
        pass
