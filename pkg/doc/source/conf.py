# Configuration file for the Sphinx documentation builder.
#
# For the full list of options see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# pylint: skip-file

# -- Project information -----------------------------------------------------
import timescale_leitmann

project = "timescale_leitmann"
copyright = "2024, the timescale-leitmann developers"
author = "the timescale-leitmann developers"
version = release = timescale_leitmann.__version__


# -- General configuration ---------------------------------------------------

extensions = [
    "myst_parser",
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
]

# Napoleon settings
napoleon_include_init_with_doc = True
napoleon_google_docstring = False

templates_path = ["_templates"]
exclude_patterns: list[str] = []


# -- Options for HTML output -------------------------------------------------

html_theme = "nature"
html_title = project + " v" + version + " documentation"
