"""Long-time asymptotics of defocusing MKdV: scattering data, asymptotic
formulas, a reference spectral solver and a comparison harness."""

__version__ = "0.1.0"
