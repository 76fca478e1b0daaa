import pytest

from gaussmix import checks


@pytest.mark.parametrize("name", list(checks.CHECKS))
def test_check_passes(name):
    result = checks.run_check(name, samples=40)
    assert result.passed, result.line()
    assert result.samples == 40
    assert result.worst <= result.tol


def test_check_is_seeded():
    a = checks.run_check("emin-oracle", samples=20, seed=5)
    b = checks.run_check("emin-oracle", samples=20, seed=5)
    assert a.worst == b.worst


def test_unknown_check():
    with pytest.raises(KeyError):
        checks.run_check("no-such-check")
