"""Baby Verma modules for reductive Lie algebras with p-character in standard Levi form."""

from .lattice import Box, LeviDatum, RootDatum, default_box, fundamental_box
from .scalars import DVR, PrimeField, RationalFunctionField
from .uchi import GradedModule, StructuralMap, build_verma, make_structural_map
from .verma import composition_factors, iso_test, simple_module

__version__ = "0.1.0"
