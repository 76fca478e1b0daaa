import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussmix.core import SingleModeState
from gaussmix.errors import BracketError
from gaussmix.measures import nonclassical_depth
from gaussmix.thresholds import (
    effective_nc,
    effective_nc_at_tau,
    effective_nc_batch,
    effective_nc_closed_form,
    effective_nc_from_depth,
    p_threshold_ns,
    p_threshold_nt,
    ppt_lambda_minus,
    sep_threshold_ns,
    sep_threshold_point,
    sep_threshold_vs_p_threshold,
)

SQ2 = math.sqrt(2)
log_photons = st.floats(min_value=-3.0, max_value=2.0).map(lambda x: 10 ** x)
open_taus = st.floats(min_value=1e-3, max_value=1 - 1e-3)


@pytest.mark.parametrize("n_t, n_s", [(0, 0), (1, 1 / 3), (3, 9 / 7)])
def test_p_threshold_ns_examples(n_t, n_s):
    assert p_threshold_ns(n_t) == pytest.approx(n_s, rel=1e-15)


@pytest.mark.parametrize("n_s, n_t", [(0, 0), (1 / 3, 1), (1, 1 + SQ2), (9 / 7, 3)])
def test_p_threshold_nt_examples(n_s, n_t):
    assert p_threshold_nt(n_s) == pytest.approx(n_t, abs=1e-12)


@given(st.floats(min_value=0, max_value=100))
def test_inverse_pair(n_t):
    assert abs(p_threshold_nt(p_threshold_ns(n_t)) - n_t) <= 1e-10


def test_thresholds_reject_negative():
    for fn in (p_threshold_ns, p_threshold_nt):
        with pytest.raises(ValueError):
            fn(-1.0)


# separability threshold with a thermal reference

@given(log_photons, open_taus)
def test_sep_threshold_vacuum_reference(n_t, tau):
    assert sep_threshold_ns(n_t, 0.0, tau) == pytest.approx(p_threshold_ns(n_t), rel=1e-12)


@given(log_photons, open_taus)
def test_sep_threshold_squeezed_vacuum(n2, tau):
    assert sep_threshold_ns(0.0, n2, tau) == pytest.approx(n2 ** 2 / (1 + 2 * n2), rel=1e-12)


def test_sep_threshold_example():
    assert sep_threshold_ns(1, 1, 0.5) == pytest.approx(16 / 9, rel=1e-15)
    assert ppt_lambda_minus(16 / 9, 1, 1, 0.5) == pytest.approx(0.5, abs=1e-12)
    pt = sep_threshold_point(1, 1, 0.5)
    assert pt.n_s_threshold == pytest.approx(16 / 9) and (pt.n_t, pt.n2, pt.tau) == (1, 1, 0.5)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.2, 1.5])
def test_sep_threshold_rejects_closed_tau(tau):
    with pytest.raises(ValueError):
        sep_threshold_ns(1.0, 1.0, tau)


@settings(max_examples=300)
@given(log_photons, log_photons, open_taus)
def test_sep_threshold_is_the_boundary(n_t, n2, tau):
    ns = sep_threshold_ns(n_t, n2, tau)
    assert ns >= 0
    assert ppt_lambda_minus(ns, n_t, n2, tau) == pytest.approx(0.5, abs=1e-9)
    assert ppt_lambda_minus(0.99 * ns, n_t, n2, tau) > 0.5
    assert ppt_lambda_minus(1.01 * ns, n_t, n2, tau) < 0.5


@given(log_photons, open_taus)
def test_sep_threshold_nondecreasing_in_n2(n_t, tau):
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e2, 30)])
    vals = [sep_threshold_ns(n_t, x, tau) for x in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_sep_threshold_tau_independent_for_vacuum_reference():
    for n_t in (0.01, 1.0, 7.5, 100.0):
        vals = [sep_threshold_ns(n_t, 0.0, t) for t in np.linspace(0.1, 0.9, 9)]
        assert max(vals) - min(vals) <= 1e-12 * max(1.0, vals[0])


def test_sep_vs_p_threshold_examples():
    for n_s_p in (0.0, 0.3, 2.0):
        assert sep_threshold_vs_p_threshold(n_s_p, 0.0) == pytest.approx(n_s_p, abs=1e-12)
    for n2 in (0.1, 1.0, 10.0):
        assert sep_threshold_vs_p_threshold(0.0, n2) == pytest.approx(n2 ** 2 / (1 + 2 * n2))
    assert sep_threshold_vs_p_threshold(p_threshold_ns(1), 1) == pytest.approx(16 / 9, abs=1e-12)


@given(log_photons, log_photons)
def test_sep_vs_p_threshold_consistent(n_t, n2):
    a = sep_threshold_vs_p_threshold(p_threshold_ns(n_t), n2)
    b = sep_threshold_ns(n_t, n2, 0.5)
    assert a == pytest.approx(b, rel=1e-10)


# effective nonclassicality

def test_effective_nc_at_tau_examples():
    assert effective_nc_at_tau(SingleModeState(0.2, 1.0), 0.5) == 0.0
    st_ = SingleModeState(1, 0)
    assert effective_nc_at_tau(st_, 0.5) == pytest.approx(1 + SQ2, abs=1e-10)
    assert effective_nc_at_tau(st_, 0.3) <= effective_nc_at_tau(st_, 0.5) + 1e-12


def test_effective_nc_at_tau_thermal_input_below():
    st_ = SingleModeState(1.0, 0.5)
    assert effective_nc_at_tau(st_, 0.3) < effective_nc_at_tau(st_, 0.5)
    with pytest.raises(ValueError):
        effective_nc_at_tau(st_, 1.0)


def test_effective_nc_at_tau_is_the_boundary():
    st_ = SingleModeState(0.7, 0.2)
    for tau in (0.2, 0.5, 0.8):
        n2 = effective_nc_at_tau(st_, tau)
        assert ppt_lambda_minus(0.7, 0.2, n2, tau) == pytest.approx(0.5, abs=1e-12)
        assert ppt_lambda_minus(0.7, 0.2, n2 * 0.99, tau) < 0.5


def test_effective_nc_examples():
    e = effective_nc(SingleModeState(1, 0))
    assert e.value == pytest.approx(1 + SQ2, abs=1e-8)
    assert e.tau_star == 0.5
    tm = nonclassical_depth(SingleModeState(1, 0))
    assert tm / (1 - 2 * tm) == pytest.approx(1 + SQ2, abs=1e-12)

    e = effective_nc(SingleModeState(1, 0.5))
    assert e.value == pytest.approx((0.5 + SQ2) / 2, abs=1e-8)
    assert e.value == pytest.approx(0.95711, abs=1e-5)
    assert abs(e.tau_star - 0.5) < 1e-4

    e = effective_nc(SingleModeState(0.1, 2.0))
    assert e.value == 0.0
    assert effective_nc_from_depth(0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(log_photons, log_photons)
def test_depth_identity(n_s, n_t):
    st_ = SingleModeState(n_s, n_t)
    e = effective_nc(st_)
    assert e.value == pytest.approx(effective_nc_from_depth(nonclassical_depth(st_)), abs=1e-8)
    assert e.value == pytest.approx(effective_nc_closed_form(st_), abs=1e-8)
    assert abs(e.tau_star - 0.5) <= 1e-4


def test_effective_nc_divergence():
    assert effective_nc_from_depth(0.5) == math.inf
    assert effective_nc_from_depth(0.5 - 1e-13) == math.inf
    assert math.isfinite(effective_nc_from_depth(0.49))


def test_effective_nc_batch_matches_scalar():
    ns, nt = np.array([1.0, 0.3, 2.0]), np.array([0.0, 0.1, 0.7])
    val, arg = effective_nc_batch(ns, nt)
    for k in range(3):
        assert val[k] == pytest.approx(effective_nc(SingleModeState(ns[k], nt[k])).value, abs=1e-12)
    assert np.all(np.abs(arg[1:] - 0.5) < 1e-4)


def test_ppt_lambda_monotone_in_n2():
    grid = np.geomspace(1e-3, 1e3, 80)
    for ns, nt, tau in [(1, 0, 0.5), (0.5, 0.3, 0.2), (20, 1, 0.9)]:
        vals = np.array([ppt_lambda_minus(ns, nt, x, tau) for x in grid])
        assert np.all(np.diff(vals) >= 0)


def test_bracket_error_type():
    assert issubclass(BracketError, RuntimeError)
