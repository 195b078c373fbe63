"""Exception hierarchy shared by every module."""


class PdmDiracError(Exception):
    """Base class for all solver errors."""


class InvalidParameter(PdmDiracError, ValueError):
    """Non-finite input, non-positive wavelength, zero or non-integer kappa."""


class SupercriticalCoupling(PdmDiracError):
    """The radicand (kappa/lambda)^2 + mu^2 - Z^2 is negative."""


class NoPositiveCosine(PdmDiracError):
    """Neither sign choice t gives a rotation cosine in (0, 1]."""


class NonNormalizable(PdmDiracError):
    """Effective orbital number ell <= -1."""


class ComplexEnergy(PdmDiracError):
    """1 + lambda^2 (Z^2 - mu^2) / N^2 is negative."""


class DomainError(PdmDiracError, ValueError):
    """Special-function argument outside its supported domain."""


class NonConvergent(PdmDiracError):
    """Quadrature did not settle when the rule size was doubled."""


class ZeroCoupling(PdmDiracError):
    """Effective charge Z*eps + mu is exactly zero."""


class StateConstructionError(PdmDiracError):
    """A BoundState cannot be assembled for the requested level."""


class NonBinding(StateConstructionError):
    """Effective charge is not attractive (Z*eps + mu >= 0)."""


class ImaginaryPrefactor(StateConstructionError):
    """|eps| > C, so one of sqrt((C +- eps) / 2C) is imaginary."""


class DegenerateDenominator(PdmDiracError):
    """C -+ eps vanishes in the component relation."""


class OracleError(PdmDiracError):
    """Base class for failures of the finite-difference oracle."""


class NoBoundState(OracleError):
    """Requested eigenvalue is not negative."""


class GridTooSmall(OracleError):
    """Eigenvector tail at the outer boundary is not negligible."""


class NoRoot(OracleError):
    """The self-consistency function has no matching sign change."""
