# Sphinx configuration of the proxgm documentation

import os
import sys

here = os.path.dirname(os.path.abspath(__file__))
sys.path[:0] = [os.path.join(here, '..', 'src'), os.path.join(here, '..')]

from setup import get_version

project = 'proxgm'
author = 'The proxgm developers'
copyright = '2026, ' + author
version = release = get_version()

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest', 'sphinx.ext.inheritance_diagram']
master_doc = 'index'
exclude_patterns = ['_build']
default_role = 'obj'
autoclass_content = 'both'
autodoc_member_order = 'bysource'

html_theme = 'alabaster'
html_title = '%s %s' % (project, release)
html_show_sourcelink = False
