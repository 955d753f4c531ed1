"""Quaternionic plurisubharmonic functions on flat H^n.

Exact quaternion and hyperhermitian algebra, a symbolic exterior algebra
with the twisted operator ``del_J``, psh tests, Monge-Ampere experiments,
positive cones and HKT potentials.
"""

from .quat import Quaternion, QuaternionMatrix, RealMatrix, realize
from .hherm import HyperhermitianMatrix, mixed_det, moore_det, positivity
from .forms import Form, parse_form, t_inv, t_map, top_ratio
from .fields import Grid, ScalarField, parse_field, quat_hessian, ddj_potential

__version__ = "0.1.0"

__all__ = [
    "Quaternion",
    "QuaternionMatrix",
    "RealMatrix",
    "realize",
    "HyperhermitianMatrix",
    "mixed_det",
    "moore_det",
    "positivity",
    "Form",
    "parse_form",
    "t_inv",
    "t_map",
    "top_ratio",
    "Grid",
    "ScalarField",
    "parse_field",
    "quat_hessian",
    "ddj_potential",
]
