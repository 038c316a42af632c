"""Finite nondegeneracy of real hypersurfaces and normalization of CR-transversal maps.

Polynomials are stored in polarized form (holomorphic and conjugate slots as
independent variables) with exact Gaussian-rational coefficients.
"""

from .dsl import Document, load_document, parse_document
from .errors import CapExceeded, CRError, NormalizationError, ParseError, UsageError, ValidationError
from .gaussian import GaussianRational, gr
from .hypersurface import Hypersurface, cr_basis, gradient_row, sample_points, validate_point
from .mapping import MapJet, Radical, check_map, compose_defining, map_nondegeneracy_order
from .mapping import transversality_certificate
from .nondegen import (deg_det, degeneracy_ideal, delta, e_space, generic_order,
                       nondegeneracy_order)
from .normalize import (apply_normalization, build_D, diagonalize_U, extract_jet, normalize_pair,
                        normalize_source, verify_hermitian_identity)
from .poly import PolarizedPoly

__version__ = "0.1.0"

__all__ = [
    "CRError", "CapExceeded", "Document", "GaussianRational", "Hypersurface", "MapJet", "NormalizationError",
    "ParseError", "PolarizedPoly", "Radical", "UsageError", "ValidationError", "apply_normalization",
    "build_D", "check_map", "compose_defining", "cr_basis", "deg_det", "degeneracy_ideal", "delta",
    "diagonalize_U", "e_space", "extract_jet", "generic_order", "gr", "gradient_row", "load_document",
    "map_nondegeneracy_order", "nondegeneracy_order", "normalize_pair", "normalize_source", "parse_document",
    "sample_points", "transversality_certificate", "validate_point", "verify_hermitian_identity",
]
