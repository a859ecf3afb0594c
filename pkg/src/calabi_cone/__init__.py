"""Crepant resolutions of Gorenstein toric cones, Reeb vector volume minimization
and the topology of hypersurface links."""

from .errors import GeometryError
from .fan import Fan, load_fan, save_fan, gorenstein_gamma, section_polytope, is_terminal
from .resolve import crepant_resolve, toric_invariants, quotient_fan, spq_fan, QuotientSpec
from .reeb import char_volume, minimize_volume, quasi_regularity
from .links import (WeightedHypersurface, milnor_poincare, steenbrink_hodge, SeifertData,
                    seifert_cohomology, blowup_discrepancy, terminalize_family, milnor_orlik_betti)

__version__ = "0.1.0"
