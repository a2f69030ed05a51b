"""Acceptance criteria; each test prints one PASS/FAIL line per check.

Run alone with ``pytest -s tests/test_acceptance.py`` or ``suval selftest``.
"""

from functools import lru_cache

import pytest

from suval import selftest

SEED = 0


@lru_cache(maxsize=None)
def results(name, *args):
    return tuple(getattr(selftest, name)(*args, seed=SEED))


def report(capsys, checks):
    with capsys.disabled():
        print()
        for c in checks:
            print("   ", c.line())


def assert_all(checks):
    bad = [c.line() for c in checks if not c.passed]
    assert not bad, "\n".join(bad)


def is_complement(c):
    return "W-perp" in c.name


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_1_orbit_invariants(n, capsys):
    checks = results("criterion_1", n)
    report(capsys, checks)
    assert_all([c for c in checks if not is_complement(c)])


def test_criterion_1_complement_law_n2(capsys):
    assert_all([c for c in results("criterion_1", 2) if is_complement(c)])


@pytest.mark.xfail(strict=True, reason="for odd n the complement carries an extra factor i: "
                                       "Theta(W-perp) = i Theta(W) mod sign, so the stated law fails at n = 3")
def test_criterion_1_complement_law_n3():
    assert_all([c for c in results("criterion_1", 3) if is_complement(c)])


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_1_corrected_complement_law(n, capsys):
    c = selftest.corrected_complement_law(n, seed=SEED)
    report(capsys, [c])
    assert c.passed


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_2_form_identities(n, capsys):
    checks = results("criterion_2", n)
    report(capsys, checks)
    assert_all(checks)


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_3_normalizations(n, capsys):
    checks = results("criterion_3", n)
    report(capsys, checks)
    assert_all(checks)


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_4_rumin_data(n, capsys):
    checks = results("criterion_4", n)
    report(capsys, checks)
    assert_all(checks)


@pytest.mark.parametrize("number", [5, 6, 7, 8, 9, 10, 11, 12])
def test_criteria_5_to_12(number, capsys):
    checks = results(f"criterion_{number}")
    report(capsys, checks)
    assert_all(checks)


def test_criterion_13_dimensions(capsys):
    checks = selftest.criterion_13()
    report(capsys, checks)
    assert_all(checks)
