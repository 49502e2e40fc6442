"""Gromov products and cross ratios on flag manifolds of SL(n), rank-one spaces and products."""

from .cartan import FaceSignature, TypeVector, make_type
from .crossratio import CrValue, Quadruple, cr_scalar, cr_vector, gromov_closed
from .flags import Flag, make_flag
from .spdspace import IdealPoint, SpdPoint

__all__ = [
    "CrValue",
    "FaceSignature",
    "Flag",
    "IdealPoint",
    "Quadruple",
    "SpdPoint",
    "TypeVector",
    "cr_scalar",
    "cr_vector",
    "gromov_closed",
    "make_flag",
    "make_type",
]
