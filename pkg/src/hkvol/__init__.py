"""Heisenberg-group geometry and boundary-volume approximation toolkit.

Subpackages:

- ``heis``: group law, Koranyi gauge, boxes, lattices, gauge balls
- ``integrate``: seeded Monte-Carlo / quadrature plumbing
- ``siegel``: model domains, boundary cuts, f-polyhedra, gap volumes
- ``powerdiag``: Euclidean and horizontal power diagrams, gap functional
- ``tilings``: lattice cut families, covering bounds, best-cover optimizer
- ``domains``: defining functions, Levi data, boundary measure, convexification
- ``darboux``: numeric contact straightening and composite boundary maps
- ``gallery``: worked planar/bidisc examples and trend reports
"""

from . import darboux, domains, gallery, heis, integrate, powerdiag, siegel, tilings

__version__ = "0.1.0"

__all__ = [
    "heis",
    "integrate",
    "siegel",
    "powerdiag",
    "tilings",
    "domains",
    "darboux",
    "gallery",
    "__version__",
]
