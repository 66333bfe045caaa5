"""Finite-element eigenpairs, nodal sets and Bessel constants."""

from .bessel import j0, j1, sector_constants, sector_nodal_ratio
from .fem import (EigenResult, assemble, mixed_eigenpairs, mixed_first_eigenvalue,
                  multiplicity_estimate, smallest_eigenpairs)
from .mesh import DIRICHLET, Mesh, read_mesh_text, submesh, triangulate, write_mesh_text
from .nodal import (NodalDomain, NodalSet, SecondMode, nodal_domain, nodal_set,
                    second_eigenfunction, second_modes, sign_components)

__all__ = [
    "DIRICHLET", "EigenResult", "Mesh", "NodalDomain", "NodalSet", "SecondMode",
    "assemble", "j0", "j1", "mixed_eigenpairs", "mixed_first_eigenvalue",
    "multiplicity_estimate", "nodal_domain", "nodal_set", "read_mesh_text",
    "second_eigenfunction", "second_modes", "sector_constants", "sector_nodal_ratio",
    "sign_components", "smallest_eigenpairs", "submesh", "triangulate", "write_mesh_text",
]
