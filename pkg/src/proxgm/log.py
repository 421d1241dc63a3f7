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

"""Logging setup shared by the library and the engine.

Messages go to stderr through a single handler attached to the
``proxgm`` logger. Two levels sit below INFO: ``DETAIL`` for per solve
summaries and ``TRACE`` for per iteration output.
"""

from .config import configuration, TRACE, DETAIL
import functools
import logging
import sys

ANSI_CODES = {
    'default': 0,
    'bold': 1,
    'underline': 4,
    'reverse': 7,
    'red': 31,
    'green': 32,
    'yellow': 33,
    'blue': 34,
    'magenta': 35,
    'cyan': 36,
    'on_red': 41,
}
"""SGR codes of the attributes usable in ``configuration['color_styles']``."""

def _escape(attrs):
    return "".join("\033[%im" % ANSI_CODES[a] for a in attrs)

def _style_attrs(key):
    if not configuration.get('color_mode'):
        return ()
    return configuration['color_styles'].get(key, ())

def colorize(key, string):
    """Wrap ``string`` in the ansi sequences of style ``key``.

    The string is returned unchanged when ``color_mode`` is off or the
    style is unknown.
    """
    attrs = _style_attrs(key)
    if not attrs:
        return string
    return "%s%s%s" % (_escape(attrs), string, _escape(('default',)))

class Styler(object):

    """``style.value(s)`` is ``colorize('value', s)``."""

    def __getattr__(self, key):
        if key.startswith('__'):
            raise AttributeError(key)
        return functools.partial(colorize, key)

style = Styler()

logging.addLevelName(TRACE, 'TRACE')
logging.addLevelName(DETAIL, 'DETAIL')

class Logger(logging.getLoggerClass()):

    def trace(self, message, *args, **kwargs):
        if self.isEnabledFor(TRACE):
            kwargs.setdefault("stacklevel", 2)
            self._log(TRACE, message, args, **kwargs)

    def detail(self, message, *args, **kwargs):
        if self.isEnabledFor(DETAIL):
            kwargs.setdefault("stacklevel", 2)
            self._log(DETAIL, message, args, **kwargs)

def get_logger(name):
    """Return the `Logger` called ``name``."""
    previous = logging.getLoggerClass()
    logging.setLoggerClass(Logger)
    try:
        return logging.getLogger(name)
    finally:
        logging.setLoggerClass(previous)

logger = get_logger("proxgm")

class LevelFormatter(logging.Formatter):

    """Colors the level name. Thread and function names are added below DETAIL."""

    def format(self, record):
        level = record.levelname
        attrs = _style_attrs(record.levelno)
        if attrs:
            level = "%s%s%s" % (_escape(attrs), level, _escape(('default',)))
        if logger.getEffectiveLevel() < DETAIL:
            origin = style.log_header("%s - %s:" % (record.threadName, record.funcName))
            head = "%s %s" % (level, origin)
        else:
            head = level + ":"
        when = style.log_header(self.formatTime(record))
        text = "%s %s %s" % (when, head, record.getMessage())
        if record.exc_info:
            text += "\n" + self.formatException(record.exc_info)
        return text

logger_handler = logging.StreamHandler(sys.stderr)
logger_handler.setFormatter(LevelFormatter())
logger.addHandler(logger_handler)
logger.setLevel(configuration.get('log_level'))
