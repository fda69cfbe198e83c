"""Numerical laboratory for a Ginzburg-Landau model of light-matter
interaction in nematic liquid crystals."""

from .fields import (
    GridSpec,
    ModelParams,
    ScalarField,
    VectorField2,
    el_residual,
    energy,
    f_eval,
    mu_eval,
    renormalized_energy,
)
from .minimize import MinimizeOptions, MinimizeResult, Seed, minimize, minimize_from_seed, multistart_global
from .radial import RadialGrid, RadialProfile, solve_equivariant_radial, solve_gl_vortex, solve_scalar_radial
from .painleve import PainleveSpec, extract_layer, minimize_p2_strip, solve_p2
from .analyze import analyze, classify, find_zeros, winding_number

__version__ = "0.1.0"
