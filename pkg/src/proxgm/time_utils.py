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

"""Wall clock measurement of solves and sweeps."""

import time

def format_seconds(secs, showms = False):
    """Format a duration as days, hours, minutes and seconds.

    Leading zero units are omitted. With ``showms``, the seconds carry
    a three digit millisecond fraction when it is not zero.

    >>> format_seconds(3725)
    '1h2m5s'
    >>> format_seconds(90061)
    '1d1h1m1s'
    >>> format_seconds(0.25, showms = True)
    '0.250s'
    >>> format_seconds(None) is None
    True
    """
    if secs is None:
        return None
    rest = float(secs)
    parts = []
    for unit, width in (('d', 86400), ('h', 3600), ('m', 60)):
        count, rest = divmod(rest, width)
        if secs >= width:
            parts.append("%i%s" % (count, unit))
    whole = int(rest)
    millis = int(round(rest - whole, 3) * 1000)
    if showms and millis:
        parts.append("%i.%03is" % (whole, millis))
    else:
        parts.append("%is" % whole)
    return "".join(parts)

class Timer(object):

    """Stopwatch on `time.perf_counter`, started at creation."""

    def __init__(self):
        self.__start = time.perf_counter()

    def elapsed(self):
        """Seconds since the timer was created."""
        return time.perf_counter() - self.__start

    def elapsed_ms(self):
        return 1000.0 * self.elapsed()
