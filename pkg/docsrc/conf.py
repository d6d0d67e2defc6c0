# -*- coding: utf-8 -*-
#
# spinotto documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import logging
import os
import sys
from logging import StreamHandler

sys.path.insert(0, os.path.dirname(os.path.abspath('.')))


# Sweep progress and convergence messages show up in the built pages.
class PrintHandler(StreamHandler):
    def __init__(self):
        StreamHandler.__init__(self)

    def emit(self, record):
        msg = self.format(record)
        print('INFO:spinotto:' + msg)


logging.basicConfig(level=logging.INFO)
logger = logging.getLogger('spinotto')
logger.addHandler(PrintHandler())

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autosummary',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    'sphinx.ext.autodoc',
    'sphinx.ext.imgmath',
    'sphinx_copybutton',
]

numpydoc_show_class_members = False

autodoc_default_options = {'members': True}
autodoc_member_order = 'groupwise'
autodoc_typehints = 'description'

templates_path = ['_templates']
autosummary_generate = True
source_suffix = '.rst'
master_doc = 'index'

project = 'spinotto'
copyright = '2020, spinotto developers'

from spinotto import __version__  # noqa

version = __version__
release = __version__

exclude_patterns = ['_build', '_templates']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'pydata_sphinx_theme'
html_theme_options = {
    "navbar_start": ["title"],
    "page_sidebar_items": ["search-field", "page-toc"],
    "show_toc_level": 2,
}
html_sidebars = {"**": []}
htmlhelp_basename = 'spinottodoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}
latex_documents = [
    (
        'index',
        'spinotto.tex',
        u'spinotto Documentation',
        u'spinotto developers',
        'manual',
    )
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (
        'index',
        'spinotto',
        u'spinotto Documentation',
        [u'spinotto developers'],
        1,
    )
]

napoleon_preprocess_types = True
napoleon_type_aliases = {
    "array": ":term:`array`",
    "Dataset": "~xarray.Dataset",
    "ndarray": "~numpy.ndarray",
    "DataFrame": "~pandas.DataFrame",
    "CycleSpec": "~spinotto.CycleSpec",
    "CycleRecord": "~spinotto.CycleRecord",
    "SweepResult": "~spinotto.SweepResult",
}

intersphinx_mapping = {
    'python': (
        'https://docs.python.org/{.major}'.format(sys.version_info),
        None,
    ),
    'numpy': ('https://docs.scipy.org/doc/numpy/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/pandas-docs/stable/', None),
    'xarray': ('https://xarray.pydata.org/en/stable/', None),
}

copybutton_prompt_text = r">>> |\.\.\. |\$ "
copybutton_prompt_is_regexp = True
