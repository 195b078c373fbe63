"""Radial spinor components built from hydrogen-like templates.

Each rotated component is a prefactor times the unit-normalized hydrogen
function of its mapped problem (orbital number ``ell``, charge ``q``).  The
first-order relation between the components, the second-order radial
equation and the quadrature normalization are exposed as residual checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDenominator,
    ImaginaryPrefactor,
    InvalidParameter,
    NonBinding,
    NonNormalizable,
    StateConstructionError,
    ZeroCoupling,
)
from .model import MINUS, PLUS, ChannelSpec, ModelParams, ValidatedChannel, parse_sign, validate
from .rotation import RotationSolution, solve_rotation, unrotate
from .spectrum import EnergyLevel, effective_ell, energy_level
from .special import integrate_radial, laguerre, laguerre_derivative, log_gamma

PAIRINGS = ("same", "offset")
PREFACTOR_TOL = 1e-12
DEGENERATE_TOL = 1e-14


# -- hydrogen-like template --------------------------------------------------


def _check_template(n, ell, q_eff):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise InvalidParameter(f"n must be a nonnegative integer, got {n!r}")
    if not ell > -1.0:
        raise NonNormalizable(f"ell = {ell!r} <= -1")
    if q_eff == 0:
        raise ZeroCoupling("effective charge is zero")


def _log_norm(n: int, ell: float, rho: float) -> float:
    N = n + ell + 1.0
    return 0.5 * (
        math.log(rho) + log_gamma(n + 1.0) - math.log(2.0 * N) - log_gamma(n + 2.0 * ell + 2.0)
    )


def radial_template(n: int, ell: float, q_eff: float, r, derivatives: int = 0):
    """Unit-normalized hydrogen radial function and its r-derivatives.

    ``Phi(r) = A x**(ell+1) exp(-x/2) L_n^(2 ell + 1)(x)`` with ``x = rho r``,
    ``rho = 2|q| / (n + ell + 1)`` and ``A`` chosen so that the integral of
    ``Phi**2`` over ``(0, inf)`` is one.

    Parameters
    ----------
    derivatives : {0, 1, 2}
        Highest derivative returned.

    Returns
    -------
    tuple of numpy.ndarray
        ``(Phi,)``, ``(Phi, Phi')`` or ``(Phi, Phi', Phi'')``.
    """
    _check_template(n, ell, q_eff)
    n = int(n)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InvalidParameter("radii must be positive")
    N = n + ell + 1.0
    rho = 2.0 * abs(q_eff) / N
    x = rho * r
    p = ell + 1.0
    alpha = 2.0 * ell + 1.0
    # prefactor and power-exponential envelope combined in log space
    envelope = np.exp(_log_norm(n, ell, rho) + p * np.log(x) - 0.5 * x)
    L = laguerre(n, alpha, x)
    out = [envelope * L]
    if derivatives >= 1:
        L1 = laguerre_derivative(n, alpha, x)
        a = p / x - 0.5
        out.append(rho * envelope * (a * L + L1))
        if derivatives >= 2:
            L2 = laguerre_derivative(n, alpha, x, order=2)
            out.append(rho**2 * envelope * ((a * a - p / x**2) * L + 2.0 * a * L1 + L2))
    return tuple(out)


def nonrel_radial(n: int, ell: float, q_eff: float, r):
    """Normalized hydrogen-like radial function ``Phi_n`` at radius ``r``.

    Raises
    ------
    NonNormalizable
        For ``ell <= -1``.
    ZeroCoupling
        For ``q_eff == 0``.
    """
    value = radial_template(n, ell, q_eff, r)[0]
    return value if np.ndim(value) else float(value)


# -- bound states ------------------------------------------------------------


@dataclass(frozen=True)
class ComponentForm:
    """One rotated component: prefactor times a unit template.

    ``level`` is None when the component vanishes identically.
    """

    component: int
    level: EnergyLevel | None
    prefactor: float

    @property
    def vanishes(self) -> bool:
        return self.level is None or self.prefactor == 0.0

    def evaluate(self, r, derivatives: int = 0):
        r = np.asarray(r, dtype=float)
        if self.level is None:
            return tuple(np.zeros_like(r) for _ in range(derivatives + 1))
        lev = self.level
        vals = radial_template(lev.qn.n, lev.qn.ell_eff, lev.q_eff, r, derivatives)
        return tuple(self.prefactor * v for v in vals)


@dataclass(frozen=True)
class BoundState:
    vc: ValidatedChannel
    rot: RotationSolution
    level: EnergyLevel
    plus: ComponentForm
    minus: ComponentForm
    pairing: str

    @property
    def omega(self) -> float:
        return self.level.omega

    @property
    def prefactor_plus(self) -> float:
        return self.plus.prefactor

    @property
    def prefactor_minus(self) -> float:
        return self.minus.prefactor

    @property
    def primary(self) -> int:
        return self.level.component

    def form(self, component) -> ComponentForm:
        return self.plus if parse_sign(component) == PLUS else self.minus


def _prefactor(C: float, eps: float, component: int) -> float:
    """``sqrt((C + component * eps) / 2C)``; rejects |eps| > C beyond rounding."""
    if abs(eps) - C > PREFACTOR_TOL * C:
        raise ImaginaryPrefactor(
            f"|eps| = {abs(eps):.17g} exceeds C = {C:.17g}; a prefactor would be imaginary"
        )
    num = C + component * eps
    # eps = +-C up to rounding is a lowest state; its vanishing component is exact
    if num <= 2.0 * PREFACTOR_TOL * C:
        return 0.0
    return math.sqrt(num / (2.0 * C))


def partner_n(n: int, ell_primary: float, ell_partner: float, pairing: str) -> int:
    """Radial index of the partner component for a pairing convention."""
    if pairing == "same":
        return n
    if pairing == "offset":
        return n + int(round(ell_primary - ell_partner))
    raise InvalidParameter(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")


def _assemble(vc, rot, level, pairing) -> BoundState:
    p = vc.params
    c = level.component
    primary = ComponentForm(c, level, _prefactor(rot.C, level.epsilon, c))
    partner_vc = validate(p, ChannelSpec(vc.channel.kappa, vc.channel.branch, -c))
    ell_partner = effective_ell(rot, partner_vc.channel)
    n_partner = partner_n(level.qn.n, level.qn.ell_eff, ell_partner, pairing)
    if n_partner < 0:
        if _prefactor(rot.C, level.epsilon, -c) > 0.0:
            raise StateConstructionError(
                f"pairing {pairing!r} leaves no partner level (n = {n_partner}) "
                "but its prefactor is nonzero"
            )
        partner = ComponentForm(-c, None, 0.0)
    else:
        plevel = energy_level(partner_vc, rot, n_partner, level.sign_branch)
        if not plevel.binding:
            raise NonBinding(
                f"partner component {-c:+d} at n={n_partner} is not bound "
                f"(Z eps + mu = {plevel.q_eff:.6g})"
            )
        partner = ComponentForm(-c, plevel, _prefactor(rot.C, plevel.epsilon, -c))
    if primary.vanishes and partner.vanishes:
        raise StateConstructionError(
            f"both components vanish for pairing {pairing!r} (zero prefactor, no partner level)"
        )
    plus, minus = (primary, partner) if c == PLUS else (partner, primary)
    return BoundState(vc, rot, level, plus, minus, pairing)


def make_bound_state(
    params: ModelParams,
    kappa: int,
    component,
    n: int,
    sign_branch,
    branch=PLUS,
    pairing: str = "auto",
    t: int | None = None,
) -> BoundState:
    """Build the two-component state whose ``component`` sits at level ``n``.

    Parameters
    ----------
    pairing : {"auto", "same", "offset"}
        How the partner component's radial index is chosen.  ``"auto"``
        builds every constructible convention and keeps the one with the
        smaller compatibility residual.

    Raises
    ------
    NonBinding
        If the primary (or partner) effective charge is not attractive.
    ImaginaryPrefactor
        If ``|eps| > C`` for either component.
    """
    component = parse_sign(component)
    sign_branch = parse_sign(sign_branch)
    vc = validate(params, ChannelSpec(kappa, branch, component))
    rot = solve_rotation(vc, t)
    level = energy_level(vc, rot, n, sign_branch)
    if not level.binding:
        raise NonBinding(
            f"kappa={kappa}, component={component:+d}, n={n}, sign {sign_branch:+d}: "
            f"Z eps + mu = {level.q_eff:.6g} >= 0"
        )
    if pairing != "auto":
        return _assemble(vc, rot, level, pairing)
    candidates, failures = [], []
    for choice in PAIRINGS:
        try:
            candidates.append(_assemble(vc, rot, level, choice))
        except StateConstructionError as exc:
            failures.append(exc)
    if not candidates:
        raise failures[0]
    return min(candidates, key=_auto_score)


def _auto_score(state: BoundState) -> float:
    try:
        return compatibility_check(state)
    except DegenerateDenominator:
        return math.inf


def spinor_component(state: BoundState, component, r):
    """Value of the rotated component ``phi^component`` at ``r``."""
    value = state.form(component).evaluate(r)[0]
    return value if np.ndim(value) else float(value)


# -- residual diagnostics ----------------------------------------------------


def check_radii(omega: float, count: int = 50, lo: float = 0.1, hi: float = 30.0):
    """Log-spaced radii over ``[lo, hi] / omega``."""
    return np.geomspace(lo / omega, hi / omega, count)


def relation_operator(rot: RotationSolution, lam: float, target: int, source_values, r):
    """``lam * (t S / lam - t gamma / r + d/dr) phi^-t`` for target ``t``.

    Parameters
    ----------
    source_values : tuple
        ``(phi, phi')`` of the source component at ``r``.
    """
    phi, dphi = source_values
    r = np.asarray(r, dtype=float)
    return lam * ((target * rot.S / lam - target * rot.gamma / r) * phi + dphi)


def derive_component(rot: RotationSolution, lam: float, epsilon: float, target: int,
                     source_values, r):
    """Apply the first-order relation that maps ``phi^-target`` to ``phi^target``.

    ``phi^t = lam / (C - t eps) * (t S / lam - t gamma / r + d/dr) phi^-t``
    """
    denom = rot.C - target * epsilon
    if abs(denom) < DEGENERATE_TOL:
        raise DegenerateDenominator(
            f"C - ({target:+d}) eps = {denom:.3g}; relation degenerates for this direction"
        )
    return relation_operator(rot, lam, target, source_values, r) / denom


def compatibility_residual(state: BoundState, r, target=None):
    """``phi^target`` minus the value derived from the other component.

    By default the partner component is derived from the primary one.

    Raises
    ------
    DegenerateDenominator
        When ``|C - target*eps| < 1e-14``.
    """
    target = -state.primary if target is None else parse_sign(target)
    source = state.form(-target).evaluate(r, derivatives=1)
    derived = derive_component(state.rot, state.vc.params.lam, state.level.epsilon,
                               target, source, r)
    value = state.form(target).evaluate(r)[0] - derived
    return value if np.ndim(value) else float(value)


def compatibility_check(state: BoundState, radii=None, target=None) -> float:
    """Max compatibility residual over ``radii`` relative to the component scale."""
    target = -state.primary if target is None else parse_sign(target)
    radii = check_radii(state.omega, 200) if radii is None else np.asarray(radii, float)
    res = compatibility_residual(state, radii, target)
    closed = state.form(target).evaluate(radii)[0]
    source = state.form(-target).evaluate(radii)[0]
    scale = max(np.max(np.abs(closed)), np.max(np.abs(source)), 1e-300)
    return float(np.max(np.abs(res)) / scale)


def shape_residual(rot: RotationSolution, lam: float, primary: EnergyLevel,
                   partner: EnergyLevel | None, radii=None) -> float:
    """Scale-free mismatch between a derived partner and a closed-form template.

    The partner derived from the unit primary template is fitted to the
    partner template by least squares; the residual is the remaining maximum
    deviation relative to the derived function.  It ignores prefactors, so
    it applies to levels whose prefactors are not real.  When the relation
    degenerates (``C = target * eps``) the residual is that of the multiplied
    form ``lam * D phi = 0``, which does not involve the partner at all.
    """
    radii = check_radii(primary.omega, 200) if radii is None else np.asarray(radii, float)
    target = -primary.component
    src = radial_template(primary.qn.n, primary.qn.ell_eff, primary.q_eff, radii, 1)
    try:
        derived = derive_component(rot, lam, primary.epsilon, target, src, radii)
    except DegenerateDenominator:
        # 0 * partner = lam * D phi: any partner fits iff D annihilates the source
        scaled = relation_operator(rot, lam, target, src, radii)
        return float(np.max(np.abs(scaled)) / np.max(np.abs(src[0])))
    dmax = float(np.max(np.abs(derived)))
    smax = float(np.max(np.abs(src[0])))
    if partner is None:
        return dmax / smax
    if dmax <= 1e-12 * smax:
        # the derived partner vanishes; the closed form agrees only if its prefactor does
        return 0.0 if abs(rot.C + partner.component * partner.epsilon) <= PREFACTOR_TOL else 1.0
    tmpl = radial_template(partner.qn.n, partner.qn.ell_eff, partner.q_eff, radii)[0]
    scale = float(np.dot(derived, tmpl) / np.dot(tmpl, tmpl))
    return float(np.max(np.abs(derived - scale * tmpl)) / dmax)


def level_ode_residual(level: EnergyLevel, gamma: float, r):
    """Second-order radial operator applied to the unit template of ``level``.

    ``[-d2/dr2 + gamma (gamma + c) / r^2 + 2 (Z eps + mu) / r - (eps^2 - 1) / lam^2] Phi``
    with ``c`` the level's component.
    """
    r = np.asarray(r, dtype=float)
    phi, _, d2 = radial_template(level.qn.n, level.qn.ell_eff, level.q_eff, r, 2)
    centrifugal = gamma * (gamma + level.component)
    return -d2 + (centrifugal / r**2 + 2.0 * level.q_eff / r - 2.0 * level.E_equiv) * phi


def _operator(params, gamma, component, eps, r, phi, d2):
    q = params.Z * eps + params.mu
    two_e = (eps**2 - 1.0) / params.lam**2
    return -d2 + (gamma * (gamma + component) / r**2 + 2.0 * q / r - two_e) * phi


def ode_residual(state: BoundState, component, r, epsilon: float | None = None):
    """Radial-equation residual of one component at ``r`` (unnormalized).

    ``epsilon`` replaces the component's own energy inside the operator,
    for sensitivity checks.
    """
    component = parse_sign(component)
    form = state.form(component)
    r = np.asarray(r, dtype=float)
    if form.level is None:
        out = np.zeros_like(r)
        return out if out.ndim else float(out)
    phi, _, d2 = form.evaluate(r, derivatives=2)
    if epsilon is None:
        # stable form: (eps^2 - 1)/lam^2 = 2 E_equiv
        lev = form.level
        out = -d2 + (
            state.rot.gamma * (state.rot.gamma + component) / r**2
            + 2.0 * lev.q_eff / r
            - 2.0 * lev.E_equiv
        ) * phi
    else:
        out = _operator(state.vc.params, state.rot.gamma, component, epsilon, r, phi, d2)
    return out if np.ndim(out) else float(out)


def ode_scale(state: BoundState, component, radii=None) -> float:
    """``|eps^2 - 1| / lam^2 * max|phi|`` over the check window."""
    form = state.form(component)
    if form.level is None:
        return 0.0
    radii = check_radii(form.level.omega, 400) if radii is None else radii
    phi = form.evaluate(radii)[0]
    return 2.0 * abs(form.level.E_equiv) * float(np.max(np.abs(phi)))


def ode_check(state: BoundState, component, radii=None) -> float:
    """Normalized max ODE residual of one component (0 for a vanishing one)."""
    form = state.form(component)
    if form.vanishes:
        return 0.0
    radii = check_radii(form.level.omega) if radii is None else np.asarray(radii, float)
    res = ode_residual(state, component, radii)
    return float(np.max(np.abs(res)) / ode_scale(state, component, radii))


def template_ode_check(level: EnergyLevel, gamma: float, radii=None) -> float:
    """Normalized ODE residual of a level's unit template over 50 log radii."""
    radii = check_radii(level.omega) if radii is None else np.asarray(radii, float)
    res = level_ode_residual(level, gamma, radii)
    phi = radial_template(level.qn.n, level.qn.ell_eff, level.q_eff, radii)[0]
    return float(np.max(np.abs(res)) / (2.0 * abs(level.E_equiv) * np.max(np.abs(phi))))


def normalization(state: BoundState, component) -> float:
    """Integral of ``phi^2`` over ``(0, inf)`` by Gauss-Laguerre quadrature."""
    form = state.form(component)
    if form.level is None:
        return 0.0
    lev = form.level
    # the weight x^(2 ell + 2) e^-x leaves a polynomial of degree 2n
    alpha = 2.0 * lev.qn.ell_eff + 2.0
    size = max(16, lev.qn.n + 8)
    return integrate_radial(lambda r: form.evaluate(r)[0] ** 2, lev.omega, size, alpha)


def template_normalization(level: EnergyLevel) -> float:
    alpha = 2.0 * level.qn.ell_eff + 2.0
    size = max(16, level.qn.n + 8)
    return integrate_radial(
        lambda r: radial_template(level.qn.n, level.qn.ell_eff, level.q_eff, r)[0] ** 2,
        level.omega,
        size,
        alpha,
    )


def native_pair(vc: ValidatedChannel, rot: RotationSolution, level: EnergyLevel, r):
    """Rotated pair built from the unit template and its derived partner.

    The template component is taken as exact and the other one follows from
    the first-order relation.  With the template component equal to the
    constraint branch the pair solves the first-order radial system exactly.

    Returns
    -------
    (phi_plus, phi_minus) : tuple of numpy.ndarray
    """
    if level.component != rot.branch:
        raise InvalidParameter(
            "the template component must equal the constraint branch "
            f"(got component {level.component:+d}, branch {rot.branch:+d})"
        )
    r = np.asarray(r, dtype=float)
    c = level.component
    src = radial_template(level.qn.n, level.qn.ell_eff, level.q_eff, r, 1)
    other = derive_component(rot, vc.params.lam, level.epsilon, -c, src, r)
    return (src[0], other) if c == PLUS else (other, src[0])


# -- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class RadialSample:
    r: float
    phi_plus: float
    phi_minus: float
    g: float
    f: float
    ode_residual_plus: float
    ode_residual_minus: float
    compat_residual: float

    def as_row(self) -> dict:
        return dict(self.__dict__)


COLUMNS = (
    "r",
    "phi_plus",
    "phi_minus",
    "g",
    "f",
    "ode_residual_plus",
    "ode_residual_minus",
    "compat_residual",
)


def make_radii(r_min: float, r_max: float, count: int, spacing: str = "log") -> np.ndarray:
    if not (0 < r_min < r_max):
        raise InvalidParameter(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if count < 2:
        raise InvalidParameter(f"need at least two points, got {count}")
    if spacing == "log":
        radii = np.geomspace(r_min, r_max, count)
    elif spacing == "linear":
        radii = np.linspace(r_min, r_max, count)
    else:
        raise InvalidParameter(f"spacing must be 'linear' or 'log', got {spacing!r}")
    radii[0], radii[-1] = r_min, r_max
    return radii


def sample_grid(state: BoundState, r_min: float, r_max: float, count: int,
                spacing: str = "log") -> list[RadialSample]:
    """Evaluate both components, un-rotate and attach normalized residuals.

    ODE residuals are divided by ``|eps^2-1|/lam^2 * max|phi|`` of their
    component; the compatibility residual by the larger component maximum.
    A degenerate relation gives NaN in that column.
    """
    radii = make_radii(r_min, r_max, count, spacing)
    pp = state.plus.evaluate(radii)[0]
    pm = state.minus.evaluate(radii)[0]
    g, f = unrotate(pp, pm, state.rot)
    residuals = {}
    for comp in (PLUS, MINUS):
        scale = ode_scale(state, comp)
        raw = ode_residual(state, comp, radii)
        residuals[comp] = raw / scale if scale > 0 else np.zeros_like(radii)
    try:
        ref = check_radii(state.omega, 400)
        comp_scale = max(
            float(np.max(np.abs(state.plus.evaluate(ref)[0]))),
            float(np.max(np.abs(state.minus.evaluate(ref)[0]))),
        )
        compat = compatibility_residual(state, radii) / comp_scale
    except DegenerateDenominator:
        compat = np.full_like(radii, np.nan)
    return [
        RadialSample(
            float(radii[i]), float(pp[i]), float(pm[i]), float(g[i]), float(f[i]),
            float(residuals[PLUS][i]), float(residuals[MINUS][i]), float(compat[i]),
        )
        for i in range(len(radii))
    ]
