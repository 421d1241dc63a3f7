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

from .log import logger
from .engine import Engine, slugify
from .sweep import HashableDict, sweep, SweepJournal, geom, igeom
from .report import SweepReport
from .harness import ExperimentConfig, ResultRecord, PRESETS, run_sweep, \
  emit_results, emit_trace, make_instance
from proxgm.core import matching_accuracy
