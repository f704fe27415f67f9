"""Densities, sampling and likelihood fitting for nested Archimedean copulas."""

from .density import cdf, cdf_details, logpdf, logpdf2, pdf, pdf2
from .errors import (
    BoundaryError,
    ConfigurationError,
    DataError,
    DslError,
    NacError,
    PrecisionWarning,
    UnsupportedStructureError,
)
from .generators import Family, Generator, amh, clayton, frank, gumbel, joe, tilted_outer_power
from .signedlog import SignedLog
from .tree import NacTree, format_tree, nac, parse

__version__ = "0.1.0"

__all__ = [
    "BoundaryError",
    "ConfigurationError",
    "DataError",
    "DslError",
    "Family",
    "Generator",
    "NacError",
    "NacTree",
    "PrecisionWarning",
    "SignedLog",
    "UnsupportedStructureError",
    "amh",
    "cdf",
    "cdf_details",
    "clayton",
    "format_tree",
    "frank",
    "gumbel",
    "joe",
    "logpdf",
    "logpdf2",
    "nac",
    "parse",
    "pdf",
    "pdf2",
    "tilted_outer_power",
]
