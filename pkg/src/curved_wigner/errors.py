"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class CurvedWignerError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CurvedWignerError, ValueError):
    """A point or parameter lies outside the chart / physical domain."""


class PhotonSphereError(DomainError):
    """Circular orbit requested at or inside the photon sphere R <= 3M."""


class NoCircularOrbit(DomainError):
    """Angular momentum too small for any circular orbit, (l/M)^2 < 12."""


class FrameMismatch(CurvedWignerError, ValueError):
    """Vector and tetrad live at different base points."""


class SingularTetrad(CurvedWignerError, ValueError):
    pass


class IntegrationFailure(CurvedWignerError, RuntimeError):
    pass


class NotALorentzTransform(CurvedWignerError, ValueError):
    pass


class OrthogonalityViolation(CurvedWignerError, ValueError):
    """Acceleration not orthogonal to momentum in the local frame."""


class StepTooCoarse(CurvedWignerError, ValueError):
    pass


class NotAState(CurvedWignerError, ValueError):
    pass


class ConfigError(CurvedWignerError, ValueError):
    pass
