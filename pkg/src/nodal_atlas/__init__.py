"""Nodal lines of second Neumann eigenfunctions in planar polygons.

Two independent routes: simulated mirror couplings of reflected Brownian
motions (:mod:`nodal_atlas.coupling`) and piecewise-linear finite
elements (:mod:`nodal_atlas.spectral`).  :mod:`nodal_atlas.verify`
combines both into claim reports.
"""

__version__ = "0.1.0"
