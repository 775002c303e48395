"""The nine-point acceptance gate, one test and one printed line per point.

Each test runs its criterion at the stated tolerance and prints the
``criterion N (...): PASS|FAIL`` line; run pytest with ``-s`` (or read the
captured output of a failure) to see them.  The same suite backs the
``nilsphere selftest`` subcommand.
"""

from nilsphere import acceptance


def _check(result) -> None:
    print(result.line())
    assert result.passed, result.details


def test_criterion_1_conservation():
    _check(acceptance.criterion_1_conservation())


def test_criterion_2_commutation():
    _check(acceptance.criterion_2_commutation())


def test_criterion_3_independence():
    _check(acceptance.criterion_3_independence())


def test_criterion_4_cross_validation():
    _check(acceptance.criterion_4_cross_validation())


def test_criterion_5_cover_dynamics():
    _check(acceptance.criterion_5_cover_dynamics())


def test_criterion_6_lyapunov():
    _check(acceptance.criterion_6_lyapunov())


def test_criterion_7_fibration():
    _check(acceptance.criterion_7_fibration())


def test_criterion_8_integrator_quality():
    _check(acceptance.criterion_8_integrator_quality())


def test_criterion_9_determinism(tmp_path):
    _check(acceptance.criterion_9_determinism(tmp_path))
