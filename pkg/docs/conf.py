import os
import sys

import sphinx_rtd_theme

from plaplab import __author__, __copyright__, __name__, __version__


sys.path.insert(0, os.path.abspath("../plaplab"))


# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = __name__
copyright = __copyright__
author = __author__
version = __version__
release = version
language = "en"

exclude_patterns = ["_build"]
pygments_style = "sphinx"
autodoc_member_order = "bysource"


# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = ["_static"]
htmlhelp_basename = "plaplabdoc"


# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, "plaplab", "plaplab Documentation", [author], 1)]


# ------------------------------------------------------------------------

rp_builtin = """
.. |False| replace:: :py:obj:`False`
.. |True| replace:: :py:obj:`True`
.. |None| replace:: :py:obj:`None`
.. |bool| replace:: :py:class:`bool`
.. |int| replace:: :py:class:`int`
.. |float| replace:: :py:class:`float`
.. |str| replace:: :py:class:`str`
"""

rp_class = """
.. |DiscreteField| replace:: :py:class:`~plaplab.DiscreteField`
.. |EnergySpec| replace:: :py:class:`~plaplab.EnergySpec`
.. |MorseData| replace:: :py:class:`~plaplab.MorseData`
.. |ProblemConfig| replace:: :py:class:`~plaplab.ProblemConfig`
.. |TableData| replace:: :py:class:`~tabledata.TableData`
"""

rst_prolog = rp_builtin + rp_class
