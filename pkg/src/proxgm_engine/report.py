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

import numpy as np

from proxgm.log import style

class SweepReport(object):

    """Summary of the `proxgm_engine.harness.ResultRecord` of a sweep.

    Records are grouped by (sweep value, method), groups keeping the
    order in which they first appear.
    """

    def __init__(self, records = None):
        self.__groups = {}
        self.name = self.__class__.__name__
        if records:
            self.add(records)

    def add(self, records):
        for r in records:
            self.__groups.setdefault((r.sweep_value, r.method), []).append(r)

    @staticmethod
    def _mean(values):
        values = [v for v in values if v is not None]
        return float(np.mean(values)) if values else None

    def stats(self):
        """Return one dict per group.

        Each holds ``sweep_value``, ``method``, ``num_trials``,
        ``num_failed`` and the means over successful trials of
        ``accuracy``, ``objective``, ``oracle_ratio`` (None when never
        computed), ``wall_ms`` and ``iters``.
        """
        result = []
        for (value, method), records in self.__groups.items():
            ok = [r for r in records if r.error is None]
            result.append({
                'sweep_value': value,
                'method': method,
                'num_trials': len(records),
                'num_failed': len(records) - len(ok),
                'accuracy': self._mean([r.accuracy for r in ok]),
                'objective': self._mean([r.objective for r in ok]),
                'oracle_ratio': self._mean([r.oracle_ratio for r in ok]),
                'wall_ms': self._mean([r.wall_ms for r in ok]),
                'iters': self._mean([r.iters for r in ok]),
                })
        return result

    def __repr__(self):
        return "<SweepReport(<%i groups>, name=%r)>" % (len(self.__groups), self.name)

    def to_string(self, wide = False):
        """Return a fixed width table of the group statistics.

        :param wide: if False (default), fits 80 columns; if True, also
          show the mean objective and iteration count.
        """
        def fmt(v, spec):
            return "-" if v is None else spec % v
        if wide:
            header = "%-12s %-6s %-6s %-6s %-9s %-15s %-9s %-10s %-8s\n" % (
                "value", "method", "trials", "failed", "accuracy", "objective", "oracle", "wall_ms", "iters")
        else:
            header = "%-12s %-6s %-6s %-6s %-9s %-9s %-10s\n" % (
                "value", "method", "trials", "failed", "accuracy", "oracle", "wall_ms")
        rule = "-" * (len(header) - 1) + "\n"
        output = header + rule
        for s in self.stats():
            if wide:
                line = "%-12s %-6s %-6i %-6i %-9s %-15s %-9s %-10s %-8s\n" % (
                    "%g" % s['sweep_value'], s['method'], s['num_trials'], s['num_failed'],
                    fmt(s['accuracy'], "%.4f"), fmt(s['objective'], "%.6g"), fmt(s['oracle_ratio'], "%.4f"),
                    fmt(s['wall_ms'], "%.1f"), fmt(s['iters'], "%.1f"))
            else:
                line = "%-12s %-6s %-6i %-6i %-9s %-9s %-10s\n" % (
                    "%g" % s['sweep_value'], s['method'], s['num_trials'], s['num_failed'],
                    fmt(s['accuracy'], "%.4f"), fmt(s['oracle_ratio'], "%.4f"), fmt(s['wall_ms'], "%.1f"))
            if s['num_failed'] == s['num_trials']:
                line = style.report_error(line)
            elif s['num_failed'] > 0:
                line = style.report_warn(line)
            output += line
        output += rule
        return output
