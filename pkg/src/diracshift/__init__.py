"""Numerical toolkit for Dirac-type kernels and spectral shift diagnostics.

Subpackages are flat modules: `clifford` (alpha-matrix representations),
`specfun` (Bessel/Hankel machinery), `green` (free Green's kernels),
`potential` (matrix potentials and polar factors), `discretize` (Nystrom
operators), `regdet` (regularized determinants), `ssf` (spectral shift and
Witten index), `resolvalg` (resolvent algebra), `cli` (command line).
"""

__version__ = "0.1.0"

from . import clifford, specfun, green, potential, discretize, regdet, ssf, resolvalg, cli

__all__ = [
    "__version__",
    "clifford",
    "specfun",
    "green",
    "potential",
    "discretize",
    "regdet",
    "ssf",
    "resolvalg",
    "cli",
]
