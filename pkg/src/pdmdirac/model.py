"""Physical parameters of the position-dependent-mass Dirac-Coulomb model.

Atomic units (hbar = m0 = e = 1).  The mass profile is
``m(r) = 1 + mu * lam**2 / r`` and the potential is ``V(r) = Z / r``; the
Compton wavelength ``lam = 1/c`` is an explicit input so that the
nonrelativistic limit can be approached numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter, SupercriticalCoupling

PLUS = 1
MINUS = -1


def parse_sign(value) -> int:
    """Convert ``'+'``, ``'-'``, ``+1`` or ``-1`` to an integer sign."""
    if value in ("+", "+1", 1, "1"):
        return PLUS
    if value in ("-", "-1", -1):
        return MINUS
    raise InvalidParameter(f"expected '+' or '-', got {value!r}")


def sign_str(value: int) -> str:
    return "+" if value > 0 else "-"


@dataclass(frozen=True)
class ModelParams:
    """Charge ``Z`` (signed), mass scale ``mu`` and Compton wavelength ``lam``."""

    Z: float
    mu: float
    lam: float

    def __post_init__(self):
        for name in ("Z", "mu", "lam"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameter(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameter(f"{name} must be finite, got {value!r}")
        if self.lam <= 0:
            raise InvalidParameter(f"lambda must be strictly positive, got {self.lam!r}")

    def mass(self, r):
        """Position-dependent mass ``1 + mu lam^2 / r``."""
        return 1.0 + self.mu * self.lam**2 / r

    def replace(self, **changes) -> "ModelParams":
        fields = {"Z": self.Z, "mu": self.mu, "lam": self.lam}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class ChannelSpec:
    """Spin-orbit number, constraint branch and the component that is solved.

    ``branch`` is the sign on the right-hand side of the rotation constraint
    ``C mu + S kappa / lam = branch * Z``.  ``component`` is +1 for the upper
    rotated component and -1 for the lower one.
    """

    kappa: int
    branch: int = PLUS
    component: int = PLUS

    def __post_init__(self):
        k = self.kappa
        if isinstance(k, bool) or not isinstance(k, (int, float)) or not math.isfinite(k):
            raise InvalidParameter(f"kappa must be a nonzero integer, got {k!r}")
        if k != int(k) or k == 0:
            raise InvalidParameter(f"kappa must be a nonzero integer, got {k!r}")
        object.__setattr__(self, "kappa", int(k))
        object.__setattr__(self, "branch", parse_sign(self.branch))
        object.__setattr__(self, "component", parse_sign(self.component))


@dataclass(frozen=True)
class ValidatedChannel:
    params: ModelParams
    channel: ChannelSpec
    discriminant: float


def discriminant(params: ModelParams, kappa: int) -> float:
    """Radicand ``(kappa/lam)^2 + mu^2 - Z^2`` of the rotation cosine."""
    return (kappa / params.lam) ** 2 + params.mu**2 - params.Z**2


def validate(params: ModelParams, channel: ChannelSpec) -> ValidatedChannel:
    """Check that a real rotation exists for this channel.

    Raises
    ------
    SupercriticalCoupling
        If the radicand is negative.
    """
    if not isinstance(params, ModelParams) or not isinstance(channel, ChannelSpec):
        raise InvalidParameter("validate expects ModelParams and ChannelSpec")
    disc = discriminant(params, channel.kappa)
    if disc < 0:
        raise SupercriticalCoupling(
            f"kappa={channel.kappa}: (kappa/lambda)^2 + mu^2 - Z^2 = {disc:.6g} < 0"
        )
    return ValidatedChannel(params, channel, disc)
