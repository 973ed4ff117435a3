"""Numerical experiments on the density of weighted function families.

Modules
-------
numerics
    Quadrature rules, integration with error estimates, L_p and sup norms.
funcmodel
    Expression fields with forward-mode derivatives, coordinate maps, weights.
spaces
    L_p, C^m and Schwartz-type spaces with their seminorm panels.
families
    Basis families and admissibility checks.
approx
    Best approximation (L_2, IRLS, Lawson), decay analysis, annihilator witnesses.
verify
    Numerical checks of the holomorphy and Fourier identities.
cli
    The ``density-lab`` command line runner.
"""

__version__ = "0.1.0"
