import os
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdmdirac.errors import ComplexEnergy, NonNormalizable
from pdmdirac.model import MINUS, PLUS, ChannelSpec, ModelParams, validate
from pdmdirac.rotation import RotationSolution, solve_rotation
from pdmdirac.spectrum import (
    effective_ell,
    energy_level,
    energy_offset,
    level_for,
    limit_suite,
    nonrel_energy,
    quadratic_residual,
    relativistic_energy,
)


def _fake_rot(gamma):
    return RotationSolution(C=1.0, S=0.0, t=1, gamma=gamma, branch=PLUS)


@pytest.mark.parametrize("gamma, component, kappa, ell", [
    (0.99, PLUS, 1, 0.99),
    (-0.99, PLUS, -1, -0.01),
    (-0.99, MINUS, -1, 0.99),
    (0.99, MINUS, 1, -0.01),
])
def test_effective_ell_cases(gamma, component, kappa, ell):
    assert effective_ell(_fake_rot(gamma), ChannelSpec(kappa, PLUS, component)) == pytest.approx(ell)


def test_non_normalizable_map():
    with pytest.raises(NonNormalizable):
        effective_ell(_fake_rot(0.5), ChannelSpec(-1, PLUS, PLUS))


def test_free_particle():
    for s in (PLUS, MINUS):
        vc, rot, lev = level_for(ModelParams(0.0, 0.0, 0.3), -2, PLUS, 0, s)
        assert lev.epsilon == s
        assert not lev.binding


def test_scalar_potential_example():
    for s in (PLUS, MINUS):
        eps = relativistic_energy(0.0, 0.5, 0.1, 1.0, s)
        assert eps == pytest.approx(s * math.sqrt(0.9975), abs=1e-15)
    assert relativistic_energy(0.0, 0.5, 0.1, 1.0, PLUS) == pytest.approx(0.99874922, abs=1e-8)
    # through a channel the map fixes N = |gamma| for kappa = -1, n = 0
    vc, rot, lev = level_for(ModelParams(0.0, 0.5, 0.1), -1, PLUS, 0, PLUS)
    assert lev.qn.N == pytest.approx(abs(rot.gamma))
    assert lev.epsilon == pytest.approx(math.sqrt(1 - (0.05 / lev.qn.N) ** 2), abs=1e-15)


@pytest.mark.parametrize("Z", [1.0, -1.0])
def test_dirac_coulomb_ground_state(Z):
    # same energy for either sign of Z; only Z < 0 binds with eps > 0
    vc, rot, lev = level_for(ModelParams(Z, 0.0, 0.1), -1, PLUS, 0, PLUS)
    assert lev.epsilon == pytest.approx(math.sqrt(0.99), abs=1e-15)
    assert lev.binding == (Z < 0)


@pytest.mark.parametrize("q, ell, n, E", [
    (-1.0, 0.0, 0, -0.5),
    (0.0, 0.3, 2, 0.0),
    (-2.0, 1.0, 1, -4.0 / 18.0),
])
def test_nonrel_energy(q, ell, n, E):
    assert nonrel_energy(q, ell, n) == pytest.approx(E)


def test_complex_energy():
    with pytest.raises(ComplexEnergy):
        energy_offset(0.0, 5.0, 1.0, 1.0, PLUS)


def test_offset_agrees_with_direct_root():
    Z, mu, lam, N = -1.3, 0.4, 0.2, 2.3
    direct = (-(lam**2) * mu * Z / N**2 + math.sqrt(1 + lam**2 * (Z**2 - mu**2) / N**2)) / (
        1 + (lam * Z / N) ** 2
    )
    assert relativistic_energy(Z, mu, lam, N, PLUS) == pytest.approx(direct, rel=1e-15)


def test_levels_increase_with_n():
    p = ModelParams(-1.0, 0.0, 0.1)
    eps = [level_for(p, -1, PLUS, n, PLUS)[2].epsilon for n in range(6)]
    assert np.all(np.diff(eps) > 0) and eps[-1] < 1


@settings(max_examples=int(os.environ.get("HYPOTHESIS_EXAMPLES", 300)), deadline=None)
@given(
    Z=st.floats(-2, 2), mu=st.floats(-1, 1), lam=st.floats(1e-3, 0.5),
    kappa=st.sampled_from([-3, -2, -1, 1, 2, 3]), branch=st.sampled_from([PLUS, MINUS]),
    component=st.sampled_from([PLUS, MINUS]), n=st.integers(0, 4),
    sign=st.sampled_from([PLUS, MINUS]),
)
def test_level_invariants(Z, mu, lam, kappa, branch, component, n, sign):
    p = ModelParams(Z, mu, lam)
    try:
        vc, rot, lev = level_for(p, kappa, component, n, sign, branch)
    except Exception as exc:  # channels without a real rotation or normalizable map
        assert type(exc).__name__ in {"SupercriticalCoupling", "NoPositiveCosine",
                                      "NonNormalizable", "ComplexEnergy"}
        return
    assert quadratic_residual(lev, p) <= 1e-12
    # q = Z eps + mu cancels near eps = -mu/Z; allow its propagated rounding
    q_err = 4e-16 * (abs(Z) + abs(mu))
    floor = max(abs(lev.q_eff) * q_err / lev.qn.N**2, 1e-300)  # subnormal underflow
    assert lev.E_equiv == pytest.approx(-lev.q_eff**2 / (2 * lev.qn.N**2), rel=1e-12, abs=floor)
    bound = 1 + abs(lam**2 * mu * Z) / lev.qn.N**2 + math.sqrt(1 + lam**2 * (Z**2 + mu**2) / lev.qn.N**2)
    assert abs(lev.epsilon) <= bound
    assert lev.binding == (Z * lev.epsilon + mu < 0)


def test_limit_suite_reports():
    rep = limit_suite(ModelParams(-1.0, 0.1, 0.1), ChannelSpec(-1), 1)
    assert rep.non_renormalization.residual < 1e-12
    assert rep.scalar_potential.residual < 1e-12
    nr = rep.nonrelativistic
    assert nr.observed_order == pytest.approx(2.0, abs=1e-3)
    assert nr.relative_error < 1e-8
    # reference uses the lam -> 0 orbital number (|kappa| - 1 = 0 here, N0 = 2)
    assert nr.reference == pytest.approx(-(0.9**2) / 8)
