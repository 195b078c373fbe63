"""Closed-form relativistic spectrum and its limits.

Each rotated component obeys a Coulomb-like radial equation whose orbital
number ``ell`` is one of gamma, -gamma-1 (upper) or gamma-1, -gamma (lower),
effective charge ``q = Z eps + mu`` and energy ``(eps^2 - 1) / 2 lam^2``.
Matching to the hydrogen levels ``-q^2 / 2 N^2`` gives a quadratic in eps,

    (eps^2 - 1) N^2 + lam^2 (Z eps + mu)^2 = 0,      N = n + ell + 1,

whose two roots are the energies returned here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ComplexEnergy, InvalidParameter, NonNormalizable
from .model import (
    PLUS,
    ChannelSpec,
    ModelParams,
    ValidatedChannel,
    validate,
)
from .rotation import RotationSolution, solve_rotation


@dataclass(frozen=True)
class EffectiveQuantumNumbers:
    ell_eff: float
    n: int
    N: float


@dataclass(frozen=True)
class EnergyLevel:
    epsilon: float
    E_equiv: float
    q_eff: float
    qn: EffectiveQuantumNumbers
    sign_branch: int
    binding: bool
    offset: float  # (epsilon - sign_branch) / lam^2, free of cancellation
    lam: float
    kappa: int = 0
    component: int = PLUS
    branch: int = PLUS

    @property
    def omega(self) -> float:
        """Radial scale ``2 |q| / N`` of the matching hydrogen function."""
        return 2.0 * abs(self.q_eff) / self.qn.N


def ell_from_gamma(gamma: float, kappa: int, component: int) -> float:
    if component > 0:
        return gamma if kappa > 0 else -gamma - 1.0
    return gamma - 1.0 if kappa > 0 else -gamma


def effective_ell(rot: RotationSolution, channel: ChannelSpec) -> float:
    """Orbital number of the hydrogen problem matched by one component.

    Raises
    ------
    NonNormalizable
        If the mapped ell is <= -1.
    """
    ell = ell_from_gamma(rot.gamma, channel.kappa, channel.component)
    if ell <= -1.0:
        raise NonNormalizable(
            f"kappa={channel.kappa}, component={channel.component:+d}: ell = {ell:.6g} <= -1"
        )
    return ell


def energy_offset(Z: float, mu: float, lam: float, N: float, sign: int) -> float:
    """``(eps - sign) / lam^2`` for the root with the given sign.

    Algebraically identical to subtracting ``sign`` from the closed-form root,
    rearranged so that no O(1) terms cancel when lam is small.
    """
    if N <= 0:
        raise InvalidParameter(f"N must be positive, got {N}")
    # u vanishes where the attraction cancels; factoring it out keeps full precision
    u, v = Z + sign * mu, Z - sign * mu
    radicand = 1.0 + lam**2 * u * v / N**2
    if radicand < 0:
        raise ComplexEnergy(f"1 + lam^2 (Z^2 - mu^2) / N^2 = {radicand:.6g} < 0")
    root = math.sqrt(radicand)
    a = 1.0 + (lam * Z / N) ** 2
    bracket = -sign * u**2 * (1.0 + lam**2 * Z * v / (N**2 * (1.0 + root))) / (1.0 + root)
    return bracket / (a * N**2)


def relativistic_energy(Z: float, mu: float, lam: float, N: float, sign: int) -> float:
    """Energy root for principal combination N and sign branch."""
    return sign + lam**2 * energy_offset(Z, mu, lam, N, sign)


def nonrel_energy(q: float, ell: float, n: int) -> float:
    """Hydrogen-like level ``-q^2 / 2 (n + ell + 1)^2``."""
    if n < 0 or int(n) != n:
        raise InvalidParameter(f"n must be a nonnegative integer, got {n!r}")
    N = n + ell + 1.0
    if N <= 0:
        raise InvalidParameter(f"n + ell + 1 must be positive, got {N}")
    return -(q**2) / (2.0 * N**2)


def energy_level(
    vc: ValidatedChannel, rot: RotationSolution, n: int, sign_branch: int
) -> EnergyLevel:
    """Energy of radial level n in the channel's component.

    Non-binding roots (``Z eps + mu >= 0``) are returned with ``binding=False``.
    """
    if n < 0 or int(n) != n:
        raise InvalidParameter(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    p = vc.params
    ell = effective_ell(rot, vc.channel)
    N = n + ell + 1.0
    offset = energy_offset(p.Z, p.mu, p.lam, N, sign_branch)
    eps = sign_branch + p.lam**2 * offset
    q = sign_branch * (p.Z + sign_branch * p.mu) + p.Z * p.lam**2 * offset
    E_equiv = offset * (eps + sign_branch) / 2.0
    return EnergyLevel(
        epsilon=eps,
        E_equiv=E_equiv,
        q_eff=q,
        qn=EffectiveQuantumNumbers(ell, n, N),
        sign_branch=sign_branch,
        binding=q < 0,
        offset=offset,
        lam=p.lam,
        kappa=vc.channel.kappa,
        component=vc.channel.component,
        branch=vc.channel.branch,
    )


def level_for(
    params: ModelParams,
    kappa: int,
    component: int,
    n: int,
    sign_branch: int,
    branch: int = PLUS,
    t: int | None = None,
):
    """Convenience wrapper: validate, rotate and evaluate one level."""
    vc = validate(params, ChannelSpec(kappa, branch, component))
    rot = solve_rotation(vc, t)
    return vc, rot, energy_level(vc, rot, n, sign_branch)


def quadratic_residual(level: EnergyLevel, params: ModelParams) -> float:
    """Relative residual of the defining quadratic at the level's energy."""
    eps, N = level.epsilon, level.qn.N
    raw = (eps**2 - 1.0) * N**2 + params.lam**2 * (params.Z * eps + params.mu) ** 2
    return abs(raw) / max(1.0, eps**2 * N**2)


# -- limits -----------------------------------------------------------------


@dataclass(frozen=True)
class LimitCheck:
    name: str
    values: tuple[float, ...]
    references: tuple[float, ...]
    residual: float


@dataclass(frozen=True)
class NonrelativisticLimit:
    lambdas: tuple[float, ...]
    offsets: tuple[float, ...]
    extrapolated: float
    reference: float
    observed_order: float
    relative_error: float


@dataclass(frozen=True)
class LimitReport:
    non_renormalization: LimitCheck
    nonrelativistic: NonrelativisticLimit
    scalar_potential: LimitCheck


def _both_signs(params: ModelParams, channel: ChannelSpec, n: int, t):
    vc = validate(params, channel)
    rot = solve_rotation(vc, t)
    return [energy_level(vc, rot, n, s) for s in (PLUS, -PLUS)]


def limit_suite(
    params: ModelParams,
    channel: ChannelSpec,
    n: int,
    lambdas=(1e-2, 1e-3, 1e-4),
    sign_branch: int = PLUS,
    t: int | None = None,
) -> LimitReport:
    """Check the three limiting cases of the spectrum for one channel.

    (a) mu = 0 against ``+-[1 + (lam Z / N)^2]^(-1/2)``;
    (b) ``(eps - s) / lam^2`` along a geometric lam sequence, Richardson
        extrapolated and compared with ``-s (s Z + mu)^2 / 2 N0^2``;
    (c) Z = 0 against ``+-sqrt(1 - lam^2 mu^2 / N^2)``.
    """
    levels = _both_signs(params.replace(mu=0.0), channel, n, t)
    vals, refs = [], []
    for lev in levels:
        N = lev.qn.N
        vals.append(lev.epsilon)
        refs.append(lev.sign_branch / math.sqrt(1.0 + (params.lam * params.Z / N) ** 2))
    non_renorm = LimitCheck(
        "mu->0", tuple(vals), tuple(refs), max(abs(v - r) for v, r in zip(vals, refs))
    )

    levels = _both_signs(params.replace(Z=0.0), channel, n, t)
    vals, refs = [], []
    for lev in levels:
        N = lev.qn.N
        vals.append(lev.epsilon)
        refs.append(lev.sign_branch * math.sqrt(1.0 - (params.lam * params.mu / N) ** 2))
    scalar = LimitCheck(
        "Z->0", tuple(vals), tuple(refs), max(abs(v - r) for v, r in zip(vals, refs))
    )

    lambdas = tuple(float(x) for x in lambdas)
    if len(lambdas) < 3:
        raise InvalidParameter("need at least three wavelengths for the order estimate")
    offsets = []
    rot = None
    for lam in lambdas:
        vc = validate(params.replace(lam=lam), channel)
        rot = solve_rotation(vc, t)
        offsets.append(energy_level(vc, rot, n, sign_branch).offset)
    gamma0 = rot.t * channel.kappa
    N0 = n + _ell0(gamma0, channel) + 1.0
    reference = -sign_branch * (sign_branch * params.Z + params.mu) ** 2 / (2.0 * N0**2)
    ratio = lambdas[-2] / lambdas[-1]
    v1, v2, v3 = offsets[-3:]
    extrapolated = (ratio**2 * v3 - v2) / (ratio**2 - 1.0)
    d12, d23 = v1 - v2, v2 - v3
    if d23 == 0.0 or d12 == 0.0:
        order = math.inf
    else:
        order = math.log(abs(d12 / d23)) / math.log(lambdas[-3] / lambdas[-2])
    scale = max(abs(reference), 1e-300)
    nonrel = NonrelativisticLimit(
        lambdas=lambdas,
        offsets=tuple(offsets),
        extrapolated=extrapolated,
        reference=reference,
        observed_order=order,
        relative_error=abs(extrapolated - reference) / scale,
    )
    return LimitReport(non_renorm, nonrel, scalar)


def _ell0(gamma0: float, channel: ChannelSpec) -> float:
    return ell_from_gamma(gamma0, channel.kappa, channel.component)
