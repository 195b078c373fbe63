"""Finite-difference eigensolver and self-consistent energy search.

This path shares no special-function code with the closed-form spectrum.
The radial operator ``-d2/dr2 + ell(ell+1)/r^2 + 2q/r`` is discretized on a
uniform grid and its k-th eigenvalue is extracted by index from a symmetric
tridiagonal matrix.  Because the effective charge ``q = Z eps + mu`` depends
on the energy, the relativistic level is the root in eps of

    F(eps) = (eps^2 - 1) / 2 lam^2 - E_n(Z eps + mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import GridTooSmall, InvalidParameter, NoBoundState, NoRoot
from .model import ValidatedChannel, parse_sign
from .rotation import RotationSolution
from .spectrum import effective_ell

SCHEMES = ("weighted", "plain")
TAIL_TOL = 1e-8


@dataclass(frozen=True)
class FdGrid:
    """Uniform grid on ``(0, r_max)`` with ``count`` interior unknowns.

    The step is ``h = r_max / (count + 1)``.  The plain scheme uses nodes
    ``i h``; the weighted scheme uses cell centres ``(i - 1/2) h``.
    Halving the step maps to ``count -> 2 count + 1``.
    """

    r_max: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise InvalidParameter(f"r_max must be positive, got {self.r_max!r}")
        if int(self.count) != self.count or self.count < 100:
            raise InvalidParameter(f"count must be an integer >= 100, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def spacing(self) -> float:
        return self.r_max / (self.count + 1)

    def refined(self) -> "FdGrid":
        return FdGrid(self.r_max, 2 * self.count + 1)

    def nodes(self, scheme: str = "weighted") -> np.ndarray:
        i = np.arange(1, self.count + 1, dtype=float)
        if scheme == "weighted":
            return (i - 0.5) * self.spacing
        return i * self.spacing


def _matrix(ell: float, q: float, grid: FdGrid, scheme: str):
    h = grid.spacing
    r = grid.nodes(scheme)
    if scheme == "plain":
        diag = 2.0 / h**2 + ell * (ell + 1.0) / r**2 + 2.0 * q / r
        off = np.full(grid.count - 1, -1.0 / h**2)
        return r, diag, off
    if scheme != "weighted":
        raise InvalidParameter(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    # u = r^(ell+1) v turns the centrifugal term into a flux with weight r^p;
    # symmetrizing by sqrt(r^p) at the nodes gives back u itself
    p = 2.0 * ell + 2.0
    log_w = p * np.log(r)
    faces = np.arange(1, grid.count + 1, dtype=float) * h
    log_f = p * np.log(faces)
    log_f_inner = np.concatenate(([-np.inf], log_f[:-1]))
    diag = (np.exp(log_f_inner - log_w) + np.exp(log_f - log_w)) / h**2 + 2.0 * q / r
    off = -np.exp(log_f[:-1] - 0.5 * (log_w[:-1] + log_w[1:])) / h**2
    return r, diag, off


def _check_inputs(ell, k):
    if not ell > -1.0:
        raise InvalidParameter(f"ell must exceed -1, got {ell!r}")
    if int(k) != k or k < 0:
        raise InvalidParameter(f"k must be a nonnegative integer, got {k!r}")


def _eigenvalue(ell, q, k, grid, scheme) -> float:
    _, diag, off = _matrix(ell, q, grid, scheme)
    w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(k, k))
    return 0.5 * float(w[0])


def solve_radial_eigen(ell: float, q: float, k: int, grid: FdGrid,
                       scheme: str = "weighted") -> float:
    """k-th eigenvalue ``E_k`` of the discretized radial problem (2E convention).

    Converges to ``-q^2 / 2 (k + ell + 1)^2`` at rate O(h^2).

    Raises
    ------
    NoBoundState
        If the k-th eigenvalue is not negative.
    GridTooSmall
        If the eigenvector at the last node exceeds 1e-8 of its maximum.
    """
    return radial_eigenpair(ell, q, k, grid, scheme).energy


@dataclass(frozen=True)
class Eigenpair:
    energy: float
    radii: np.ndarray
    u: np.ndarray  # normalized so that h * sum(u^2) = 1
    residual: float  # |H u - 2E u| / |u| / 2
    tail: float


def radial_eigenpair(ell: float, q: float, k: int, grid: FdGrid,
                     scheme: str = "weighted", check_tail: bool = True) -> Eigenpair:
    """Eigenvalue and normalized eigenvector; see :func:`solve_radial_eigen`."""
    _check_inputs(ell, k)
    r, diag, off = _matrix(ell, q, grid, scheme)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(k, k))
    lam2, y = float(w[0]), v[:, 0]
    if lam2 >= 0:
        raise NoBoundState(f"eigenvalue {k} is {lam2 / 2:.6g} >= 0 (ell={ell}, q={q})")
    hy = diag * y
    hy[:-1] += off * y[1:]
    hy[1:] += off * y[:-1]
    residual = 0.5 * float(np.linalg.norm(hy - lam2 * y) / np.linalg.norm(y))
    peak = int(np.argmax(np.abs(y)))
    if y[peak] < 0:
        y = -y
    tail = float(abs(y[-1]) / abs(y[peak]))
    if check_tail and tail > TAIL_TOL:
        raise GridTooSmall(f"tail/max = {tail:.3g} at r_max = {grid.r_max:.6g}")
    u = y / math.sqrt(grid.spacing * float(np.sum(y * y)))
    return Eigenpair(0.5 * lam2, r, u, residual, tail)


def convergence_order(ell: float) -> float:
    """Leading power of h in the eigenvalue error; u ~ r^(ell+1) caps it below 2."""
    return min(2.0, 2.0 + 2.0 * ell)


def richardson_energy(ell, q, k, grid, scheme="weighted") -> tuple[float, float, float]:
    """``(E_h, E_h/2, extrapolated)`` for the k-th level, leading error cancelled."""
    coarse = _eigenvalue(ell, q, k, grid, scheme)
    fine = _eigenvalue(ell, q, k, grid.refined(), scheme)
    factor = 2.0 ** convergence_order(ell)
    return coarse, fine, (factor * fine - coarse) / (factor - 1.0)


def decay_radius(ell: float, n: int, q: float, digits: float = 30.0) -> float:
    """Radius beyond which level n has decayed by about ``exp(-digits)``."""
    N = n + ell + 1.0
    power = max(N + n, 1.0)
    # solve power*ln(x) - x = -digits on the decaying side
    g = lambda x: power * math.log(x) - x + digits
    lo = max(power, 1.0)
    hi = lo + digits
    while g(hi) > 0:
        hi *= 2.0
    x = brentq(g, lo, hi) if g(lo) > 0 else lo
    return 1.1 * x * N / abs(q)


def binding_interval(Z: float, mu: float) -> tuple[float, float]:
    """Open subinterval of (-1, 1) where ``Z eps + mu < 0``."""
    lo, hi = -1.0, 1.0
    if Z > 0:
        hi = min(hi, -mu / Z)
    elif Z < 0:
        lo = max(lo, -mu / Z)
    elif mu >= 0:
        raise NoRoot("Z = 0 and mu >= 0: no energy gives an attractive coupling")
    if not lo < hi:
        raise NoRoot(f"no energy in (-1, 1) gives Z eps + mu < 0 (Z={Z}, mu={mu})")
    return lo, hi


def self_consistency_function(Z, mu, lam, ell, n, grid, scheme="weighted",
                              extrapolate=True):
    """``F(eps) = (eps^2 - 1)/2 lam^2 - E_n(Z eps + mu)`` with caching.

    Where the coupling is not attractive or the grid holds no n-th bound
    level, ``E_n`` is taken as 0, the continuum edge.
    """

    @lru_cache(maxsize=None)
    def energy(eps: float) -> float:
        q = Z * eps + mu
        if q >= 0:
            return 0.0
        if extrapolate:
            e_h, e_h2, e_x = richardson_energy(ell, q, n, grid, scheme)
            return min(e_x, 0.0) if e_h < 0 and e_h2 < 0 else min(e_h2, 0.0)
        return min(_eigenvalue(ell, q, n, grid, scheme), 0.0)

    def F(eps: float) -> float:
        eps = float(eps)
        return (eps - 1.0) * (eps + 1.0) / (2.0 * lam**2) - energy(eps)

    F.energy = energy
    return F


@dataclass(frozen=True)
class OracleResult:
    epsilon: float
    iterations: int
    eig_residual: float
    grid_estimate: float
    energy: float
    fixed_point_residual: float
    ell: float
    n: int
    sign_branch: int
    grid: FdGrid


def _crossing(F, points, sign):
    values = [F(x) for x in points]
    for a, b, fa, fb in zip(points, points[1:], values, values[1:]):
        if sign > 0 and fa < 0 < fb:
            return a, b
        if sign < 0 and fa > 0 > fb:
            return a, b
    return None


def _matches(F, lo, hi, sign):
    fa, fb = F(lo), F(hi)
    return (fa < 0 < fb) if sign > 0 else (fa > 0 > fb)


def self_consistent_epsilon(
    vc: ValidatedChannel,
    rot: RotationSolution,
    n: int,
    sign_branch,
    grid: FdGrid | None = None,
    count: int = 2000,
    scheme: str = "weighted",
    xtol: float = 1e-13,
) -> OracleResult:
    """Solve for the relativistic energy with the finite-difference eigensolver.

    Upward sign changes of ``F`` belong to the ``+`` branch and downward ones
    to the ``-`` branch.  A cheap single-grid scan locates the crossing, the
    bracket is then confirmed on the extrapolated function and refined by
    Brent's method.

    Parameters
    ----------
    grid : FdGrid, optional
        Defaults to ``count`` points out to a radius scaled to the level.

    Raises
    ------
    NoRoot
        If no matching sign change exists in the attractive part of (-1, 1).
    GridTooSmall
        If the converged eigenvector is not negligible at ``r_max``.
    """
    sign = parse_sign(sign_branch)
    p = vc.params
    ell = effective_ell(rot, vc.channel)
    lo, hi = binding_interval(p.Z, p.mu)
    if grid is None:
        q_ref = p.Z * sign + p.mu
        if q_ref >= 0:
            q_ref = -max(abs(p.Z), abs(p.mu))
        grid = FdGrid(decay_radius(ell, n, q_ref), count)
    span = hi - lo
    edge = 1e-12 * span
    cheb = lo + 0.5 * span * (1.0 - np.cos(np.pi * np.arange(1, 32) / 32))
    points = sorted({lo + edge, hi - edge, *map(float, cheb)})

    coarse_grid = FdGrid(grid.r_max, max(100, grid.count // 5))
    F_scan = self_consistency_function(p.Z, p.mu, p.lam, ell, n, coarse_grid, scheme, False)
    bracket = _crossing(F_scan, points, sign)
    if bracket is None:
        raise NoRoot(f"no {'upward' if sign > 0 else 'downward'} crossing of F in ({lo}, {hi})")
    guess = brentq(F_scan, *bracket, xtol=1e-12)

    F = self_consistency_function(p.Z, p.mu, p.lam, ell, n, grid, scheme, True)
    delta = 1e-8
    for _ in range(20):
        a, b = max(guess - delta, lo + edge), min(guess + delta, hi - edge)
        if _matches(F, a, b, sign):
            break
        delta *= 8.0
    else:
        raise NoRoot("extrapolated self-consistency function does not change sign near the scan root")
    eps, info = brentq(F, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, full_output=True)

    q = p.Z * eps + p.mu
    fine_grid = grid.refined()
    pair = radial_eigenpair(ell, q, n, fine_grid, scheme)
    e_h, e_h2, e_x = richardson_energy(ell, q, n, grid, scheme)
    factor = 2.0 ** convergence_order(ell)
    grid_estimate = p.lam**2 * abs(e_h2 - e_h) / ((factor - 1.0) * abs(eps))
    return OracleResult(
        epsilon=float(eps),
        iterations=int(info.iterations),
        eig_residual=pair.residual,
        grid_estimate=grid_estimate,
        energy=e_x,
        fixed_point_residual=abs(F(eps)),
        ell=ell,
        n=int(n),
        sign_branch=sign,
        grid=grid,
    )
