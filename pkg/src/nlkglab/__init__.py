"""Numerical laboratory for one-dimensional soliton stability.

Submodules:

- ``fields``: half-line grids, parity fields, derivatives, quadrature
- ``soliton``: model constants, nonlinearity, standing-wave profile
- ``spectrum``: factorized linearization, bound states, conjugation chain
- ``weights``: cutoff and exponential weight families, weighted norms
- ``refined``: modulation frame, refined profile, quadratic source
- ``scattering``: distorted planewave and resonance coefficient
- ``evolution``: time stepping, modulation decomposition, shooting
- ``virial``: monitored functionals and their time-derivative budgets
- ``cli``: command-line entry points writing CSV
"""

__version__ = "0.1.0"
