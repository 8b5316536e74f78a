# Sphinx configuration of the phaserng docs.
# Build with: sphinx-build -b html docs/source docs/build

import os
import sys

sys.path.insert(0, os.path.abspath("../../src"))

project = "phaserng"
copyright = "2024, phaserng developers"
author = "phaserng developers"
release = "0.3.0"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx_autodoc_typehints",
    "sphinx_toolbox.confval",
]

# numpydoc-style docstrings only
napoleon_google_docstring = False
napoleon_numpy_docstring = True

autosummary_generate = True
add_module_names = False
autodoc_member_order = "bysource"

# Types in signatures link to the libraries they come from.
intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
    "pandas": ("https://pandas.pydata.org/docs", None),
    "matplotlib": ("https://matplotlib.org/stable", None),
}

html_theme = "furo"
html_title = "phaserng"
