"""The acceptance battery: one test per criterion, each printing a single pass/fail line."""

import pytest

from xratio import acceptance


def _report(capsys, result):
    with capsys.disabled():
        print(f"\n{result.line()}")
    assert result.passed, result.to_json()


def test_oracle_equivalence_and_calibration(capsys):
    _report(capsys, acceptance.check_oracle())


def test_basepoint_independence(capsys):
    _report(capsys, acceptance.check_basepoint_independence())


def test_basepoint_change_identity(capsys):
    _report(capsys, acceptance.check_basepoint_change())


def test_gromov_product_as_busemann_of_retraction(capsys):
    _report(capsys, acceptance.check_busemann_retract())


def test_symmetries_and_cocycles(capsys):
    _report(capsys, acceptance.check_symmetries())


def test_vector_cross_ratio_machinery(capsys):
    _report(capsys, acceptance.check_vector_machinery())


def test_periods_of_hyperbolic_elements(capsys):
    _report(capsys, acceptance.check_periods())


def test_geometric_interpretation(capsys):
    _report(capsys, acceptance.check_geometric_interpretation())


def test_product_spaces(capsys):
    _report(capsys, acceptance.check_products())


def test_trees(capsys):
    _report(capsys, acceptance.check_trees())


def test_moebius_audit(capsys):
    _report(capsys, acceptance.check_moebius_audit())


def test_degeneracy_handling(capsys):
    _report(capsys, acceptance.check_degeneracy())


def test_battery_covers_every_criterion_in_sorted_order():
    names = sorted(acceptance.CHECKS)
    assert len(names) == 12
    assert [int(n[:2]) for n in names] == list(range(1, 13))
