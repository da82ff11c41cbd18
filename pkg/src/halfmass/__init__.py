"""Numerical checks for initial data sets on a half-space chart."""

from . import (charges, cli, clifford, constraints, dirac, families,
               geometry, mots, quadrature, stencils)
from .charges import (ChargeReport, adm_energy_flux, adm_momentum_flux,
                      compute_charges, energy_momentum_functional,
                      invariance_test, tilted_vector)
from .clifford import (SpinorRep, build_rep, chirality_operator, choose_phi0,
                       eigenspinor, verify_defining_relations,
                       verify_q_identities)
from .constraints import (check_capillary_dec, check_interior_dec,
                          check_tilted_boundary_dec, current_density,
                          energy_density)
from .dirac import (boundary_lemma_convergence, dirac_witten, sl_convergence,
                    witten_flux)
from .errors import DomainError
from .families import family_names, make_family
from .geometry import (Chart, GridPatch, InitialDataSet, boundary_geometry,
                       christoffel, orthonormal_frame, ricci_tensor,
                       scalar_curvature, transform_data)
from .mots import (GraphSurface, boundary_trace_identity, boundary_Z_term,
                   flat_graph, null_expansion, sphere_cap,
                   stability_functional, stability_spectrum, tilted_graph)

__version__ = "1.0.0"

__all__ = [
    "ChargeReport", "Chart", "DomainError", "GraphSurface", "GridPatch",
    "InitialDataSet", "SpinorRep", "adm_energy_flux", "adm_momentum_flux",
    "boundary_Z_term", "boundary_geometry", "boundary_lemma_convergence",
    "boundary_trace_identity", "build_rep", "charges", "check_capillary_dec",
    "check_interior_dec", "check_tilted_boundary_dec", "chirality_operator",
    "choose_phi0", "christoffel", "cli", "clifford", "compute_charges",
    "constraints", "current_density", "dirac", "dirac_witten",
    "eigenspinor", "energy_density", "energy_momentum_functional",
    "families", "family_names", "flat_graph", "geometry", "invariance_test",
    "make_family", "mots", "null_expansion", "orthonormal_frame",
    "quadrature", "ricci_tensor", "scalar_curvature", "sl_convergence",
    "sphere_cap", "stability_functional", "stability_spectrum", "stencils",
    "tilted_graph", "tilted_vector", "transform_data",
    "verify_defining_relations", "verify_q_identities", "witten_flux",
]
