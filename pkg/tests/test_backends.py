import os
import subprocess
import sys

import numpy as np
import pytest

from gaussmix import kernels
from gaussmix.core import SingleModeState, invariants_from_params, output_cm

py = kernels.python_backend
cy = kernels.compiled_backend()
needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def _params(n, seed=0):
    rng = np.random.default_rng(seed)
    ph = [10 ** rng.uniform(-3, 2, n) for _ in range(3)]
    return (*ph, rng.uniform(0.01, 0.99, n))


def test_selected_backend_is_known():
    assert kernels.BACKEND in ("python", "cython")
    assert py.BACKEND == "python"


@needs_ext
def test_compiled_is_default():
    assert kernels.BACKEND == "cython"


@needs_ext
def test_scalar_kernels_agree():
    for x in (0.5, 0.7, 3.0, 1e3):
        assert cy.entropy_f(x) == pytest.approx(py.entropy_f(x), rel=1e-14, abs=1e-300)
    for args in ((1.2, 0.9, 0.3, 0.8), (4.0, 4.0, 3.5, 0.3)):
        assert cy.emin_closed(*args) == pytest.approx(py.emin_closed(*args), rel=1e-13)
    for args in ((1.0, 0.2, 0.3, 0.4), (0.0, 5.0, 1.0, 0.9)):
        assert cy.ppt_lambda_params(*args) == pytest.approx(py.ppt_lambda_params(*args), rel=1e-13)
        assert cy.emin_params(*args) == pytest.approx(py.emin_params(*args), rel=1e-13)
    for args in ((1.0, 0.0, 0.5), (1.0, 0.5, 0.3)):
        assert cy.effective_nc_at_tau(*args) == pytest.approx(py.effective_nc_at_tau(*args),
                                                              rel=1e-12)


@needs_ext
def test_measures_agree():
    p = _params(200)
    a, b = cy.measures_params(*p), py.measures_params(*p)
    inv = np.array([invariants_from_params(*q).as_tuple() for q in zip(*p)])
    c, d = cy.measures_batch(inv), py.measures_batch(inv)
    for key in a:
        np.testing.assert_allclose(a[key], b[key], rtol=1e-12, atol=1e-14)
    for key in c:
        np.testing.assert_allclose(c[key], d[key], rtol=1e-12, atol=1e-14)


@needs_ext
def test_oracle_agrees():
    ns, nt, n2, tau = _params(8, seed=1)
    ms = np.array([output_cm(SingleModeState(*q[:2]), q[2], q[3]).matrix
                   for q in zip(ns, nt, n2, tau)])
    for measured in (1, 2):
        a = np.asarray(cy.emin_oracle_batch(ms, measured)[0])
        b = np.asarray(py.emin_oracle_batch(ms, measured)[0])
        np.testing.assert_allclose(a, b, rtol=1e-10)


@needs_ext
def test_effective_nc_agrees():
    ns, nt = _params(20, seed=2)[:2]
    for x, y in zip(cy.effective_nc_batch(ns, nt), py.effective_nc_batch(ns, nt)):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, GAUSSMIX_PURE_PYTHON="1")
    code = "import gaussmix; print(gaussmix.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env=env, check=True).stdout.strip()
    assert out == "python"
