"""Stochastic voter circle model of partisan gerrymandering with compact districts.

Modules
-------
voter_model      vote generation and the optimal circular gerrymander
exact_analysis   exact ``Pr(D_n = 2)`` and the walk/IVT characterizations
limit_constants  the limit ``1/(1 + e^pi)`` by closed form, series and quadrature
monte_carlo      seeded simulation of ``D_n`` and of the limiting walk event
geometry         polygons, half-plane clipping and the smallest enclosing disk
compactness      compactness scores and the half-disk optimality checks
splitline        recursive split-line districting with a partisan objective
"""

__version__ = "0.1.0"
