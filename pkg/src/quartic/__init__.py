"""Circle-method computations for quartic hypersurfaces.

Exact exponential sums and local densities, singular series and singular
integral, point counting (brute force and meet-in-the-middle), finite-field
singular-locus geometry, and executable verifiers for the bounds driving the
main-term analysis.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    circle,
    counting,
    expsums,
    forms,
    geometry,
    oscillatory,
    verify,
    weights,
)
