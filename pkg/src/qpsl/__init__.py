"""Spectral toolkit for -y'' + q(x) y on [0, 1] with y(1) = e^{it} y(0), y'(1) = e^{it} y'(0)."""

from .analysis import (AmbarzumyanReport, BandStructure, Variant, Verdict, Wave,
                       asymptotic_residuals_decay, band_structure, check_ambarzumyan,
                       cos_moment, estimate_q0, rayleigh_quotient)
from .errors import (BracketingFailed, InsufficientSpectrum, IntegrationDrift, NonHermitianInput,
                     NotConverged, QuadratureMismatch, SpectralError)
from .floquet import TransferMatrix, discriminant, integrate_fundamental, spectrum_shooting
from .galerkin import (DiscretizationConfig, Method, PhaseParameter, Spectrum, assemble_matrix,
                       hermitian_eigenvalues, spectrum_galerkin)
from .potential import Potential, PotentialKind, mathieu, parse_builtin, shifted, two_mode, zero

__version__ = "0.1.0"
