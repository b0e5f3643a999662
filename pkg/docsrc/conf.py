# Sphinx configuration for the uniprov documentation.
#
# Build with: sphinx-build -b html docsrc docs/_build

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

project = "uniprov"
copyright = "2026, uniprov developers"
author = "uniprov developers"
version = "0.1.0"
release = "0.1.0"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "myst_parser",  # release notes are Markdown
]

source_suffix = [".rst", ".md"]
master_doc = "index"
language = "en"
exclude_patterns = ["_build"]

html_theme = "furo"
html_title = "uniprov"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
}

# -- autodoc ------------------------------------------------------------------

autodoc_default_options = {"members": True, "show-inheritance": True}
autodoc_mock_imports = ["networkx"]
autodoc_typehints = "none"
add_module_names = False

napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_attr_annotations = True
