"""lsvlab: a Monte Carlo laboratory for least-singular-value statistics.

Deterministic machinery (secular rank-one updates, correction factors,
torus-norm/LCD structure measures, regularity events, a smooth bump function
with compactly supported transform) plus reproducible seeded experiments that
estimate P(sigma_n(M) <= eps * n^(-1/2)) across subgaussian entry laws and
compare it with the Gaussian reference.
"""

from . import bump, corrector, ensemble, events, harness, secular, spectra, stats, structure
from .harness import __version__

__all__ = [
    "bump",
    "corrector",
    "ensemble",
    "events",
    "harness",
    "secular",
    "spectra",
    "stats",
    "structure",
    "__version__",
]
