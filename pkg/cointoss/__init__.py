"""L^q spectra, Gibbs reweighting and phase transitions of inhomogeneous
Bernoulli product measures on the dyadic tree."""

__version__ = "0.1.0"
