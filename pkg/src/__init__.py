"""Top-level package for bvs_glm: Bayesian variable selection for GLMs and its simulation harness."""

__author__ = "David Cruz Gómez"
__email__ = "david97torrejon@alumnos.cei.es"
__version__ = "2.0.0"

PACKAGE_NAME = "bvs_glm"
