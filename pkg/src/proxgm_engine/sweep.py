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

"""Parameter combinations and their persistent journal."""

import contextlib
import fcntl
import itertools
import os
import pickle
import threading

import numpy as np

from .log import logger

def geom(range_min, range_max, num_steps):
    """``num_steps`` floats in geometric progression, both bounds included.

    >>> geom(1, 100, 3)
    [1.0, 10.0, 100.0]
    """
    if num_steps < 1:
        return []
    return [float(x) for x in np.geomspace(range_min, range_max, int(num_steps))]

def igeom(range_min, range_max, num_steps):
    """Distinct rounded values of `geom`, sorted.

    >>> igeom(1, 50, 4)
    [1, 4, 14, 50]
    """
    return sorted({int(round(x)) for x in geom(range_min, range_max, num_steps)})

class HashableDict(dict):

    """dict usable as a key, as long as it is not mutated afterwards."""

    def __hash__(self):
        return hash(tuple(sorted(self.items())))

def sweep(parameters):
    """Cartesian product of parameter values.

    :param parameters: dict mapping each parameter to its list of
      values. A dict in place of the list sweeps its keys, each key
      carrying its own sub-parameters which are only combined with
      that key.

    The order of the given values is kept, the last parameter varying
    fastest. Empty value lists are skipped.

    >>> sweep({"method": ["dpgm", "sm"], "sigma": [0.0, 0.5]})
    [{'method': 'dpgm', 'sigma': 0.0}, {'method': 'dpgm', 'sigma': 0.5}, {'method': 'sm', 'sigma': 0.0}, {'method': 'sm', 'sigma': 0.5}]
    >>> sweep({"instance": {"er": {"sigma": [0.0, 1.0]}, "points": {"inlier_ratio": [20]}}})
    [{'instance': 'er', 'sigma': 0.0}, {'instance': 'er', 'sigma': 1.0}, {'instance': 'points', 'inlier_ratio': 20}]
    """
    axes = []
    for key, values in parameters.items():
        if not values:
            continue
        if isinstance(values, dict):
            axes.append([dict({key: choice}, **sub)
                         for choice, subparams in values.items()
                         for sub in sweep(subparams)])
        else:
            axes.append([{key: v} for v in values])
    combinations = []
    for parts in itertools.product(*axes):
        combination = HashableDict()
        for part in parts:
            combination.update(part)
        combinations.append(combination)
    return combinations

@contextlib.contextmanager
def _locked(path):
    # "ab+" allows both lockf and reading back
    with open(path, "ab+") as f:
        fcntl.lockf(f, fcntl.LOCK_EX)
        try:
            yield f
        finally:
            f.flush()
            os.fsync(f.fileno())
            fcntl.lockf(f, fcntl.LOCK_UN)

class SweepJournal(object):

    """Persistent, thread safe record of finished combinations.

    Each finished combination is appended with its results as one
    pickle to ``<directory>/done``. Reopening the same directory
    reloads them, so an interrupted sweep resumes where it stopped. A
    truncated trailing entry is cut off on load.
    """

    def __init__(self, directory):
        self.__lock = threading.RLock()
        self.__directory = directory
        self.__path = os.path.join(directory, "done")
        os.makedirs(directory, exist_ok = True)
        self.__done = {}
        self.__load()

    def __load(self):
        with _locked(self.__path) as f:
            f.seek(0)
            good = 0
            while True:
                try:
                    combination, results = pickle.load(f)
                except Exception:
                    f.truncate(good)
                    break
                self.__done[combination] = results
                good = f.tell()
        if self.__done:
            logger.info("journal %s: %i combinations already done", self.__directory, len(self.__done))

    def done(self, combination, results):
        with self.__lock:
            with _locked(self.__path) as f:
                pickle.dump((combination, results), f)
            self.__done[combination] = results

    def get(self, combination):
        """Recorded results of ``combination``, None if it is not done."""
        with self.__lock:
            return self.__done.get(combination)

    def __contains__(self, combination):
        with self.__lock:
            return combination in self.__done

    def __len__(self):
        with self.__lock:
            return len(self.__done)

    def __repr__(self):
        return "SweepJournal(%r, <%i done>)" % (self.__directory, len(self))
