"""Global SU(2) rotation that makes the radial equations Schroedinger-like.

The rotation angle ``theta = lam * eta`` must satisfy the linear constraint
``C mu + S kappa / lam = branch * Z`` with ``C = cos(theta) > 0``.  Only C, S
and the effective angular parameter gamma are needed downstream; the angle
itself is exposed for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPositiveCosine, SupercriticalCoupling
from .model import PLUS, ValidatedChannel, discriminant


@dataclass(frozen=True)
class RotationSolution:
    C: float
    S: float
    t: int
    gamma: float
    branch: int

    @property
    def angle(self) -> float:
        return math.atan2(self.S, self.C)

    @property
    def half_cos(self) -> float:
        return math.sqrt((1.0 + self.C) / 2.0)

    @property
    def half_sin(self) -> float:
        return math.copysign(math.sqrt(max(1.0 - self.C, 0.0) / 2.0), self.S)


def _cosine(vc: ValidatedChannel, t: int) -> float:
    p = vc.params
    b = vc.channel.kappa / p.lam
    rhs = vc.channel.branch * p.Z
    root = math.sqrt(vc.discriminant)
    return (p.mu * rhs + t * abs(b) * root) / (p.mu**2 + b**2)


def cosine_candidates(vc: ValidatedChannel) -> dict[int, float]:
    """Both roots of the constraint, keyed by the sign choice t."""
    return {t: _cosine(vc, t) for t in (PLUS, -PLUS)}


def solve_rotation(vc: ValidatedChannel, t: int | None = None) -> RotationSolution:
    """Solve the rotation constraint for one channel.

    Parameters
    ----------
    vc : ValidatedChannel
    t : {+1, -1}, optional
        Force the sign in front of the square root.  By default t = +1 is
        used whenever it gives a positive cosine, otherwise t = -1.

    Raises
    ------
    NoPositiveCosine
        If the requested (or every) choice of t gives C outside (0, 1].
    """
    if vc.discriminant < 0:
        raise SupercriticalCoupling(f"negative discriminant {vc.discriminant}")
    p = vc.params
    kappa = vc.channel.kappa
    branch = vc.channel.branch
    choices = (PLUS, -PLUS) if t is None else (int(t),)
    for tt in choices:
        C = _cosine(vc, tt)
        # rounding can push C a few ulp past 1 when the constraint is trivial
        if 1.0 < C <= 1.0 + 1e-14:
            C = 1.0
        if 0.0 < C <= 1.0:
            break
    else:
        raise NoPositiveCosine(
            f"kappa={kappa}, branch={branch:+d}: no t in {choices} gives 0 < C <= 1"
        )
    S = p.lam * (branch * p.Z - C * p.mu) / kappa
    gamma = tt * math.copysign(1.0, kappa) * p.lam * math.sqrt(vc.discriminant)
    return RotationSolution(C=C, S=S, t=tt, gamma=gamma, branch=branch)


def constraint_residual(vc: ValidatedChannel, rot: RotationSolution) -> float:
    """``C mu + S kappa/lam - branch Z`` scaled by the largest term."""
    p = vc.params
    k = vc.channel.kappa
    raw = rot.C * p.mu + rot.S * k / p.lam - rot.branch * p.Z
    return abs(raw) / max(1.0, abs(p.Z), abs(p.mu), abs(k) / p.lam)


def gamma_squared_expected(vc: ValidatedChannel) -> float:
    p = vc.params
    return vc.channel.kappa**2 + p.lam**2 * (p.mu**2 - p.Z**2)


def rotate(g, f, rot: RotationSolution):
    """Map physical radial components (g, f) to the rotated pair (phi+, phi-)."""
    c, s = rot.half_cos, rot.half_sin
    g = np.asarray(g, dtype=float)
    f = np.asarray(f, dtype=float)
    return c * g + s * f, -s * g + c * f


def unrotate(phi_plus, phi_minus, rot: RotationSolution):
    """Inverse of :func:`rotate`."""
    c, s = rot.half_cos, rot.half_sin
    phi_plus = np.asarray(phi_plus, dtype=float)
    phi_minus = np.asarray(phi_minus, dtype=float)
    return c * phi_plus - s * phi_minus, s * phi_plus + c * phi_minus


__all__ = [
    "RotationSolution",
    "solve_rotation",
    "cosine_candidates",
    "constraint_residual",
    "gamma_squared_expected",
    "rotate",
    "unrotate",
    "discriminant",
]
