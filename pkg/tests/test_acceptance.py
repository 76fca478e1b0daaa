"""Acceptance suite: one PASS/FAIL line per criterion with the measured values.

Run under pytest (lines go to the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import contextlib
import io
import math
import os
import tempfile
import time

import numpy as np
import pytest

from gaussmix import cli, kernels, sweeps
from gaussmix.core import SingleModeState, output_cm, symplectic_invariants
from gaussmix.measures import emin_closed_form, measures_from_params, nonclassical_depth
from gaussmix.sweeps import make_spec
from gaussmix.thresholds import (
    effective_nc_batch,
    effective_nc_closed_form,
    effective_nc_from_depth,
    p_threshold_ns,
    ppt_lambda_minus,
    sep_threshold_ns,
)

SEED = 20240601
LN2 = math.log(2)
LINES = []


def _photons(rng, n, lo=-3.0, hi=2.0):
    return 10 ** rng.uniform(lo, hi, n)


def _open_tau(rng, n):
    return rng.uniform(1e-9, 1 - 1e-9, n)


def crit_01():
    rng = np.random.default_rng(SEED + 1)
    nt, tau = rng.uniform(0, 100, 1000), _open_tau(rng, 1000)
    worst, missing = 0.0, 0
    for x, t in zip(nt, tau):
        ns = x * x / (1 + 2 * x)
        worst = max(worst, abs(ppt_lambda_minus(ns, x, 0.0, t) - 0.5))
        if ns > 0 and not ppt_lambda_minus(0.99 * ns, x, 0.0, t) > 0.5 > ppt_lambda_minus(1.01 * ns, x, 0.0, t):
            missing += 1
    ok = worst <= 1e-9 and missing == 0
    return ok, f"max |λ̃₋ − 1/2| = {worst:.2e} (tol 1e-9), verdict flips missing at ±1%: {missing}/1000"


def crit_02():
    d = measures_from_params(0.0, 1e3, 0.0, 0.5)["discord_1g2"][0]
    return 0.99 * LN2 <= d <= 1.01 * LN2, f"D = {d:.6f}, D/ln2 = {d / LN2:.5f} (band [0.99, 1.01])"


def crit_03():
    spec = make_spec("asymptote", family="p_threshold", ranges={"N": [1, 1e4, 41, "log"]})
    rows = sweeps.run(spec)
    n = np.array([r["N"] for r in rows])
    d = np.array([r["discord_1g2"] for r in rows])
    inc = bool(np.all(np.diff(d) > 0))
    d3, d4 = d[np.argmin(np.abs(n - 1e3))], d[-1]
    conv = abs(d4 - d3) < 0.01
    cands = {"0.2067": 0.2067, "0.3616": 0.5 * math.log(3 + 2 * math.sqrt(2)) - 1.5 * math.log(math.sqrt(2))}
    match = min(cands, key=lambda k: abs(cands[k] - d4))
    return inc and conv, (f"increasing: {inc}, D(1e3) = {d3:.6f}, D(1e4) = {d4:.6f}, "
                          f"|Δ| = {abs(d4 - d3):.1e} (tol 0.01); limit matches {match} "
                          f"(|D − 0.2067| = {abs(d4 - 0.2067):.1e}, |D − 0.3616| = {abs(d4 - cands['0.3616']):.1e})")


def crit_04():
    n = 1e4
    m = measures_from_params(n, 0.0, 0.0, 0.5)
    d, lam = m["discord_1g2"][0], m["ppt_lambda_minus"][0]
    dev_d = abs(d - (math.log(math.sqrt(n) / 2) + 1)) / d
    dev_l = abs(lam - 1 / (4 * math.sqrt(n))) / lam
    return dev_d <= 0.05 and dev_l <= 0.05, f"rel dev D = {dev_d:.2e}, rel dev λ̃₋ = {dev_l:.2e} (tol 5e-2)"


def crit_05():
    rows = sweeps.run(make_spec("scatter", seed=42, samples=20000, n2=0.0))
    d = np.array([r["discord_1g2"] for r in rows])
    lam = np.array([r["ppt_lambda_minus"] for r in rows])
    viol = int(np.sum((lam >= 0.5) & (d > 1 + 1e-9)))
    hi_d = d >= 1.2
    band = (lam[hi_d] >= np.exp(-d[hi_d]) / 4 * 0.85) & (lam[hi_d] <= np.exp(1 - d[hi_d]) / 8 * 1.15)
    frac = band.mean() if hi_d.any() else 1.0
    ok = len(rows) == 20000 and viol == 0 and frac >= 0.99
    return ok, (f"{len(rows)} rows, separable rows with D > 1: {viol}; "
                f"in band {int(band.sum())}/{int(hi_d.sum())} = {100 * frac:.2f}% (need ≥ 99%)")


def crit_06():
    rng = np.random.default_rng(SEED + 6)
    nt, tau = _photons(rng, 1000), rng.uniform(0, 1, 1000)
    c = max(np.abs(output_cm(SingleModeState(0.0, x), x, t).c).max() for x, t in zip(nt, tau))
    m = measures_from_params(0.0, nt, nt, tau)
    d = max(np.abs(m["discord_1g2"]).max(), np.abs(m["discord_2g1"]).max())
    mi = np.abs(m["mutual_info"]).max()
    ok = max(c, d, mi) <= 1e-12
    return ok, f"max |c±| = {c:.1e}, max |D| = {d:.1e}, max |I_M| = {mi:.1e} (tol 1e-12)"


def crit_07():
    rows = sweeps.run(make_spec("imbalance", N=5.0, tau=[0.5, 0.8, 0.99],
                                ranges={"d": [0, 5, 101]}))
    parts = []
    ok = len(rows) == 303
    for t in (0.5, 0.8, 0.99):
        d = np.array([r["discord_1g2"] for r in rows if r["tau"] == t])
        drop = max(0.0, -np.diff(d).min())
        ok &= drop == 0.0 and abs(d[0]) <= 1e-12
        parts.append(f"τ={t}: D(0) = {d[0]:.1e}, max drop = {drop:.1e}")
    return ok, "; ".join(parts)


def crit_08():
    rng = np.random.default_rng(SEED + 8)
    ns, nt = [], []
    while len(ns) < 1000:
        a, b = _photons(rng, 1)[0], _photons(rng, 1)[0]
        if a > p_threshold_ns(b):
            ns.append(a)
            nt.append(b)
    ns, nt = np.array(ns), np.array(nt)
    val, arg = effective_nc_batch(ns, nt)
    ident = np.array([effective_nc_from_depth(nonclassical_depth(SingleModeState(a, b)))
                      for a, b in zip(ns, nt)])
    closed = np.array([effective_nc_closed_form(SingleModeState(a, b)) for a, b in zip(ns, nt)])
    e1, e2 = np.abs(val - ident).max(), np.abs(val - closed).max()
    et = np.abs(arg - 0.5).max()
    ok = e1 <= 1e-6 and e2 <= 1e-6 and et <= 1e-4
    return ok, (f"1000 P-nonclassical states: max |E − τ_m/(1−2τ_m)| = {e1:.1e}, "
                f"max |E − closed form| = {e2:.1e} (tol 1e-6), max |τ* − 1/2| = {et:.1e} (tol 1e-4)")


def crit_09():
    rng = np.random.default_rng(SEED + 9)
    n = 10000
    ns, nt, n2, tau = _photons(rng, n), _photons(rng, n), _photons(rng, n), _open_tau(rng, n)
    cms = [output_cm(SingleModeState(a, b), c, t) for a, b, c, t in zip(ns, nt, n2, tau)]
    mats = np.array([cm.matrix for cm in cms])
    e_or = kernels.backend.emin_oracle_batch(mats, 2)[0]
    e_cf = np.array([emin_closed_form(symplectic_invariants(cm)) for cm in cms])
    worst = np.abs(e_cf - e_or).max()
    return worst <= 1e-6, f"{n} states: worst |E_closed − E_oracle| = {worst:.2e} (tol 1e-6)"


def crit_10():
    rng = np.random.default_rng(SEED + 10)
    ns, nt, n2 = _photons(rng, 1000), _photons(rng, 1000), _photons(rng, 1000)
    m = measures_from_params(ns, nt, n2, 0.5)
    sym = np.abs(m["discord_1g2"] - m["discord_2g1"]).max()
    taus = np.linspace(0, 1, 101)
    swap = 0.0
    for k in range(50):
        a = measures_from_params(ns[k], nt[k], n2[k], taus)
        b = measures_from_params(ns[k], nt[k], n2[k], 1 - taus)
        swap = max(swap, np.abs(a["discord_2g1"] - b["discord_1g2"]).max())
    ok = sym <= 1e-10 and swap <= 1e-10
    return ok, f"max |D12 − D21| at τ=1/2 = {sym:.1e}, max |D21(τ) − D12(1−τ)| = {swap:.1e} (tol 1e-10)"


def crit_11():
    rng = np.random.default_rng(SEED + 11)
    taus = np.linspace(0.01, 0.99, 99)
    w0 = wt = 0.0
    for x in _photons(rng, 100):
        ref = x * x / (1 + 2 * x)
        for t in taus:
            w0 = max(w0, abs(sep_threshold_ns(x, 0.0, t) - ref) / max(1.0, ref))
            wt = max(wt, abs(sep_threshold_ns(0.0, x, t) - ref) / max(1.0, ref))
    ok = w0 <= 1e-12 and wt <= 1e-12
    return ok, f"n2=0 vs P-threshold: {w0:.1e}; n_t=0 vs n2²/(1+2n2) over τ grid: {wt:.1e} (tol 1e-12)"


def crit_12():
    specs = [
        make_spec("surface", ranges={"n_s": [0, 3, 11], "n_t": [0, 3, 11]}),
        make_spec("tau_scan"),
        make_spec("scatter", seed=42, samples=2000, n2="random"),
        make_spec("imbalance"),
        make_spec("asymptote"),
        make_spec("threshold_curve"),
    ]
    same = [sweeps.to_csv(sweeps.run(s), s).encode() == sweeps.to_csv(sweeps.run(s), s).encode()
            for s in specs]
    # the same through the command line, written to disk
    argv = ["sweep", "scatter", "--samples", "20000", "--seed", "42", "--n2", "random"]
    with tempfile.TemporaryDirectory() as tmp, contextlib.redirect_stdout(io.StringIO()):
        paths = [os.path.join(tmp, f"run{k}.csv") for k in (1, 2)]
        codes = [cli.main(argv + ["--out", p]) for p in paths]
        with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
            files_same = codes == [0, 0] and a.read() == b.read()
    ok = all(same) and files_same
    return ok, (f"{sum(same)}/{len(specs)} sweep kinds byte-identical across two runs; "
                f"CLI scatter files identical: {files_same}")


CRITERIA = [
    (1, "threshold coincidence (vacuum)", crit_01, 1),
    (2, "thermal discord asymptote", crit_02, 1),
    (3, "threshold-curve discord limit", crit_03, 5),
    (4, "squeezed-vacuum asymptotics", crit_04, 1),
    (5, "scatter structure", crit_05, 30),
    (6, "transparency", crit_06, 1),
    (7, "imbalance monotonicity", crit_07, 1),
    (8, "effective-nonclassicality identity", crit_08, 60),
    (9, "oracle equivalence", crit_09, 120),
    (10, "balanced-BS discord symmetry", crit_10, 5),
    (11, "thermal-threshold reductions", crit_11, 1),
    (12, "determinism", crit_12, None),
]


def evaluate(num, name, fn, budget):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        ok = False
        detail += f"; runtime {dt:.2f} s exceeds {budget} s"
    line = f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {name}: {detail}  ({dt:.2f} s)"
    return ok, line


@pytest.fixture(scope="module", autouse=True)
def _summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None and LINES:
        reporter.write_sep("=", "acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s[7:9])):
            reporter.write_line(line)


@pytest.mark.parametrize("num, name, fn, budget", CRITERIA,
                         ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, name, fn, budget):
    ok, line = evaluate(num, name, fn, budget)
    LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
