"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line with the measured value and runtime; the
lines are printed together in the terminal summary (see ``conftest.py``).
"""

import pytest

from pdmdirac import verify

# (id, check, runtime budget in seconds)
CRITERIA = [
    ("1 quadratic-root identity", verify.quadratic_root_check, 1.0),
    ("2 mu = 0 relativistic spectrum", verify.mu_zero_check, 1.0),
    ("3 Z = 0 scalar-potential spectrum", verify.z_zero_check, 1.0),
    ("4 nonrelativistic limit", verify.nonrel_limit_check, 1.0),
    ("5 finite-difference oracle", verify.oracle_check, 120.0),
    ("6 ODE residual", verify.ode_check, 10.0),
    ("7 compatibility pairing", verify.compatibility_check_suite, 10.0),
    ("8 normalization", verify.normalization_check, 10.0),
    ("9 special-function oracles", verify.special_function_check, 1.0),
]

RESULTS: list[str] = []


@pytest.mark.parametrize("label, run, budget", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, run, budget):
    check = run()
    within = check.seconds < budget
    timing = f"{check.seconds:.2f} s of {budget:g} s" + ("" if within else " OVER BUDGET")
    RESULTS.append(f"criterion {label} | {check.line()} | {timing}")
    print(RESULTS[-1])
    assert check.passed, check.line()
    assert within, f"runtime {check.seconds:.2f} s exceeds {budget:g} s"
