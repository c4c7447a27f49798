"""Time operators for a particle in a box: construction, spectra, dynamics
and symmetry checks."""

__version__ = "0.1.0"
