"""High-precision Toeplitz spectra built from Taylor coefficients of zeta*(z) = 2(z-1)zeta(z)."""

__version__ = "0.1.0"

# bumped whenever generated coefficients could change; stale cache files are ignored
GENERATOR_VERSION = "zetalab-coeffs-1"
