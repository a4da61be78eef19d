"""Darboux transforms of isothermic surfaces in the quaternionic model.

Modules
-------
quaternion   quaternion arithmetic and 2x2 quaternionic matrices
surface      sampled surfaces, Gauss map, mean curvature, dual, export
connection   retraction forms, the family ``d + lam eta``, holonomy, spectra
darboux      one-step transforms, Riccati equation, simple factor dressing
permute      Bianchi permutability and the cross-ratio
sym          Sym-type sections and equal-parameter two-step transforms
cylinder     closed forms for the round cylinder
cli          command-line front end
"""
from .errors import (
    DegenerateError,
    GridError,
    IsodtError,
    NonConformalError,
    NotClosedError,
    NotParallelError,
    SingularMatrixError,
    SingularQuaternionError,
)
from .quaternion import HEndo2, HVector2, Quaternion
from .surface import SurfaceGrid
from .connection import ConnectionFamily, SectionField
from .darboux import DarbouxResult, DressedFamily, darboux_transform, dress_family

__version__ = "0.1.0"

__all__ = [
    "Quaternion",
    "HVector2",
    "HEndo2",
    "SurfaceGrid",
    "ConnectionFamily",
    "SectionField",
    "DarbouxResult",
    "DressedFamily",
    "darboux_transform",
    "dress_family",
    "IsodtError",
    "SingularQuaternionError",
    "SingularMatrixError",
    "GridError",
    "NonConformalError",
    "NotClosedError",
    "NotParallelError",
    "DegenerateError",
]
