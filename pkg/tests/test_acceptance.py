"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected into the terminal summary.
"""

import pytest

from twospin import validation

RESULTS = []

CRITERIA = [
    ("1 table1", validation.table1_reproduction),
    ("2 excitation-transfer PT", validation.excitation_transfer_pt),
    ("3 weak-coupling closed form", validation.weak_coupling_closed_form),
    ("4 finite-basis closed forms", validation.finite_basis_closed_forms),
    ("5 energy-exchange PT", validation.energy_exchange_pt),
    ("6 property suites", validation.property_suites),
    ("7 resonance curve family", validation.curve_family),
]


@pytest.mark.parametrize("label,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(label, check):
    result = check()
    line = f"criterion {label}: {result.line()}"
    RESULTS.append(line)
    print(line)
    if label.startswith("6"):
        for sub in result.values["checks"]:
            print("    " + sub.line())
    assert result.passed, line

