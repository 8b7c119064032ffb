"""Exception hierarchy shared by the solvers and the CLI."""


class SpectralError(Exception):
    """Base class for numerical failures (CLI exit status 3)."""


class NonHermitianInput(SpectralError):
    pass


class NotConverged(SpectralError):
    """Galerkin truncation did not settle; increase N."""


class IntegrationDrift(SpectralError):
    """Wronskian of the fundamental system drifted away from 1."""


class BracketingFailed(SpectralError):
    """The eigenvalue scan ended before enough roots were found."""


class InsufficientSpectrum(SpectralError):
    pass


class QuadratureMismatch(SpectralError):
    pass
