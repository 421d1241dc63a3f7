#!/usr/bin/env python

# Copyright 2026 The proxgm developers
# This file is part of proxgm, released under the GNU General Public
# License, version 3 or later.

import os
import re
import subprocess
import textwrap

from setuptools import setup
from setuptools.command.build_py import build_py as _build_py
from setuptools.command.install import install as _install
from setuptools.command.sdist import sdist as _sdist

try:
    from sphinx.setup_command import BuildDoc
except ImportError:
    BuildDoc = None

VERSION_FILE = os.path.join("src", "proxgm", "_version.py")
CONF_SOURCE = os.path.join("src", "proxgm", "config.py")
CONF_SECTIONS = ("configuration", "default_solver_params", "default_sinkhorn_params",
                 "default_baseline_params", "default_train_params",
                 "default_synthetic_params", "default_point_cloud_params")

def git_describe():
    """Tag or sha of the working tree, None outside a git checkout."""
    try:
        out = subprocess.run(["git", "describe", "--tags", "--dirty", "--always"],
                             capture_output = True, text = True, check = True)
    except (OSError, subprocess.CalledProcessError):
        return None
    return out.stdout.strip() or None

def write_version_file():
    # tarballs ship the file, keep it when git is absent
    version = git_describe()
    if version is None and os.path.isfile(VERSION_FILE):
        return
    with open(VERSION_FILE, "w") as f:
        f.write("# generated by setup.py, do not edit\n__version__ = %r\n" % (version or "0+unknown",))

def get_version():
    version = git_describe()
    if version:
        return version
    if os.path.isfile(VERSION_FILE):
        with open(VERSION_FILE) as f:
            mo = re.search(r"^__version__ = '([^']*)'", f.read(), re.M)
        if mo:
            return mo.group(1)
    return "0+unknown"

def read_lines(filename, start = None, end = None):
    """Lines of a file, or only those strictly between two marker lines."""
    with open(filename, encoding = "utf-8") as f:
        lines = [l.rstrip() for l in f]
    if start is not None:
        lines = lines[lines.index(start) + 1:]
    if end is not None and end in lines:
        lines = lines[:lines.index(end)]
    return lines

def first_paragraph(filename):
    lines = read_lines(filename)
    body = lines[lines.index("") + 1:]
    return " ".join(body[:body.index("")]) if "" in body else " ".join(body)

def generate_conf_template(datadir):
    target = os.path.join(datadir, "share", "proxgm")
    os.makedirs(target, exist_ok = True)
    with open(os.path.join(target, "proxgm.conf.py.sample"), "w") as fh:
        fh.write("# sample proxgm user configuration\n"
                 "# copy this file to ~/.proxgm.conf.py and uncomment what you change\n\n"
                 "# import logging\n\n")
        for section in CONF_SECTIONS:
            block = textwrap.dedent("\n".join(read_lines(CONF_SOURCE, "# _STARTOF_ " + section,
                                                         "# _ENDOF_ " + section)))
            fh.write("".join("# %s\n" % l for l in block.splitlines()) + "\n")

class build_py(_build_py):
    def run(self):
        write_version_file()
        _build_py.run(self)

class sdist(_sdist):
    def run(self):
        write_version_file()
        _sdist.run(self)

class install(_install):
    def run(self):
        _install.run(self)
        self.execute(generate_conf_template, (self.install_data,),
                     msg = "Generate proxgm configuration template")

if __name__ == "__main__":

    cmdclass = {'build_py': build_py,
                'sdist': sdist,
                'install': install}
    if BuildDoc is not None:
        cmdclass['build_doc'] = BuildDoc

    setup(cmdclass = cmdclass,
          name = 'proxgm',
          license = 'GNU GPL v3',
          version = get_version(),
          description = first_paragraph("README"),
          long_description = "\n".join(read_lines("README")),
          author = 'The proxgm developers',
          package_dir = {'': 'src'},
          packages = ['proxgm', 'proxgm_engine'],
          python_requires = '>=3.8',
          install_requires = ['numpy', 'scipy', 'networkx'],
          extras_require = {'test': ['pytest'],
                            'doc': ['sphinx']},
          entry_points = {'console_scripts': ['proxgm = proxgm_engine.cli:main']},
          classifiers = ['Development Status :: 4 - Beta',
                         'Environment :: Console',
                         'Intended Audience :: Science/Research',
                         'Operating System :: POSIX :: Linux',
                         'Programming Language :: Python :: 3',
                         'Topic :: Scientific/Engineering :: Mathematics'],
          platforms = ['unix']
          )
