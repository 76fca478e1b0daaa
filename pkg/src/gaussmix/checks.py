"""Numerical cross-checks run by ``gaussmix verify``.

Every check draws its own states from a seeded PCG64 generator, compares
two independent routes to the same quantity and reports the worst
residual against a fixed tolerance.  Photon numbers are log-uniform on
``[1e-3, 1e2]`` and ``τ`` uniform on ``(0, 1)`` unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    BeamSplitter,
    Invariants,
    SingleModeState,
    apply_beam_splitter,
    cm_single_mode,
    cm_thermal,
    invariants_array,
    output_cm,
    symplectic_eigenvalues,
    symplectic_invariants,
    williamson_eigenvalues,
)
from .measures import (
    emin_closed_form,
    measures_from_params,
    nonclassical_depth,
    nonclassical_depth_from_variance,
)
from .thresholds import (
    TAU_EPS,
    TAU_TOL,
    effective_nc_closed_form,
    effective_nc_from_depth,
    p_threshold_ns,
    p_threshold_nt,
    ppt_lambda_minus,
    sep_threshold_ns,
)

DEFAULT_SEED = 20240601
PHOTONS = (1e-3, 1e2)


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    worst: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<28} samples={self.samples:<6d} worst={self.worst:.3e}  tol={self.tol:.0e}"
        return text + (f"  ({self.detail})" if self.detail else "")


def _photons(rng, n):
    lo, hi = np.log10(PHOTONS[0]), np.log10(PHOTONS[1])
    return 10 ** rng.uniform(lo, hi, n)


def _tau(rng, n):
    # open interval; uniform() can return 0
    return rng.uniform(1e-9, 1 - 1e-9, n)


def _result(name, n, worst, tol, detail="", passed=None):
    worst = float(worst)
    if passed is None:
        passed = bool(worst <= tol)
    return CheckResult(name, int(n), worst, tol, passed, detail)


def _eq7(n_s, n_t, n2, tau):
    """Output CM assembled entrywise from the closed-form a±, b±, c±."""
    st = SingleModeState(n_s, n_t)
    hi, lo, ref = 0.5 + st.n1 + st.delta, 0.5 + st.n1 - st.delta, 0.5 + n2
    k = math.sqrt(tau * (1 - tau))
    m = np.zeros((4, 4))
    m[0, 0], m[1, 1] = ref * (1 - tau) + hi * tau, ref * (1 - tau) + lo * tau
    m[2, 2], m[3, 3] = ref * tau + hi * (1 - tau), ref * tau + lo * (1 - tau)
    m[0, 2] = m[2, 0] = (ref - hi) * k
    m[1, 3] = m[3, 1] = (ref - lo) * k
    return m


def check_congruence(n, rng):
    """S_τ congruence against the entrywise closed form, scaled by max(1, |Σ|)."""
    worst = 0.0
    for ns, nt, n2, t in zip(_photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n)):
        out = output_cm(SingleModeState(ns, nt), n2, t).matrix
        ref = _eq7(ns, nt, n2, t)
        worst = max(worst, np.abs(out - ref).max() / max(1.0, np.abs(ref).max()))
    return _result("congruence", n, worst, 1e-12, "relative to max entry")


def check_spectrum(n, rng):
    """Invariant-formula spectrum of the output vs the input local spectrum."""
    worst = 0.0
    for ns, nt, n2, t in zip(_photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n)):
        cm = output_cm(SingleModeState(ns, nt), n2, t)
        exact = np.array(sorted([0.5 + nt, 0.5 + n2], reverse=True))
        got = np.array(symplectic_eigenvalues(symplectic_invariants(cm)))
        will = williamson_eigenvalues(cm.matrix)
        scale = max(1.0, exact[0])
        worst = max(worst, np.abs(got - exact).max() / scale, np.abs(will - exact).max() / scale)
    return _result("spectrum-preservation", n, worst, 1e-10, "relative to max(1, λ₊)")


def check_energy(n, rng):
    worst = 0.0
    for ns, nt, n2, t in zip(_photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n)):
        c1, c2 = cm_single_mode(SingleModeState(ns, nt)), cm_thermal(n2)
        out = apply_beam_splitter(c1, c2, BeamSplitter(t)).matrix
        before = np.trace(c1.matrix) + np.trace(c2.matrix)
        worst = max(worst, abs(np.trace(out) - before) / max(1.0, before))
    return _result("energy", n, worst, 1e-12, "relative to input trace")


def check_exchange(n, rng):
    """``I1(τ) = I2(1 − τ)`` with ``I3``, ``I4`` unchanged."""
    ns, nt, n2, t = _photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n)
    a, b = invariants_array(ns, nt, n2, t), invariants_array(ns, nt, n2, 1 - t)
    scale = np.maximum(1.0, np.abs(a).max(axis=1))
    worst = max(np.max(np.abs(a[:, 0] - b[:, 1]) / scale), np.max(np.abs(a[:, 1] - b[:, 0]) / scale),
                np.max(np.abs(a[:, 2:] - b[:, 2:]).max(axis=1) / scale))
    return _result("exchange", n, worst, 1e-12, "relative to max invariant")


def check_purity(n, rng):
    worst = 0.0
    for ns, nt in zip(_photons(rng, n), _photons(rng, n)):
        st = SingleModeState(ns, nt)
        mu = 1 / (2 * math.sqrt(np.linalg.det(cm_single_mode(st).matrix)))
        worst = max(worst, abs(mu - st.purity), abs(st.purity - 1 / (1 + 2 * nt)))
    return _result("purity", n, worst, 1e-12)


def check_emin_oracle(n, rng):
    """Closed-form ``E^min`` vs the brute-force oracle, both measured parties."""
    ns, nt, n2, t = _photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n)
    cms = np.array([output_cm(SingleModeState(*p[:2]), p[2], p[3]).matrix
                    for p in zip(ns, nt, n2, t)])
    worst = 0.0
    for measured in (2, 1):
        e_or = kernels.backend.emin_oracle_batch(cms, measured)[0]
        e_cf = np.array([emin_closed_form(symplectic_invariants(_cm4(m)), measured) for m in cms])
        worst = max(worst, np.abs(e_cf - e_or).max())
    return _result("emin-oracle", n, worst, 1e-6, "absolute, both parties")


def _cm4(m):
    from .core import CovMat4

    return CovMat4(m, check=False)


def check_discord_bounds(n, rng):
    """``I_M ≥ D ≥ 0`` in both directions."""
    m = measures_from_params(_photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n))
    viol = 0.0
    for key in ("discord_1g2", "discord_2g1"):
        viol = max(viol, np.max(-m[key]), np.max(m[key] - m["mutual_info"]))
    return _result("discord-bounds", n, max(viol, 0.0), 1e-9, "largest violation")


def check_separable_discord(n, rng):
    m = measures_from_params(_photons(rng, n), _photons(rng, n), _photons(rng, n), _tau(rng, n))
    sep = m["ppt_lambda_minus"] >= 0.5
    excess = np.max(m["discord_1g2"][sep] - 1, initial=-np.inf)
    return _result("separable-discord", n, max(excess, 0.0), 1e-9,
                   f"{int(sep.sum())} separable, max D = {np.max(m['discord_1g2'][sep], initial=0):.4f}")


def check_entanglement_p(n, rng):
    """Vacuum reference: entangled iff the input is P-nonclassical."""
    ns, nt, t = _photons(rng, n), _photons(rng, n), _tau(rng, n)
    lt = measures_from_params(ns, nt, 0.0, t)["ppt_lambda_minus"]
    gap = ns - nt * nt / (1 + 2 * nt)
    # decide only where the margin beats rounding
    clear = np.abs(gap) > 1e-9 * (1 + ns)
    bad = int(np.sum(np.sign(0.5 - lt[clear]) != np.sign(gap[clear])))
    return _result("entanglement-iff-p", n, bad, 0, f"{bad} disagreements")


def check_depth_agreement(n, rng):
    worst = 0.0
    for ns, nt in zip(_photons(rng, n), _photons(rng, n)):
        st = SingleModeState(ns, nt)
        worst = max(worst, abs(nonclassical_depth(st) - nonclassical_depth_from_variance(st)))
    return _result("depth-agreement", n, worst, 1e-12)


def check_threshold(n, rng):
    """``λ̃₋ = 1/2`` at the separability threshold, and the verdict flips at ±1 %."""
    worst, flips = 0.0, 0
    for nt, n2, t in zip(_photons(rng, n), _photons(rng, n), _tau(rng, n)):
        ns = sep_threshold_ns(nt, n2, t)
        worst = max(worst, abs(ppt_lambda_minus(ns, nt, n2, t) - 0.5))
        if not (ppt_lambda_minus(0.99 * ns, nt, n2, t) > 0.5 > ppt_lambda_minus(1.01 * ns, nt, n2, t)):
            flips += 1
    return _result("threshold-correctness", n, worst, 1e-9, f"{flips} missing flips",
                   passed=worst <= 1e-9 and flips == 0)


def check_tau_independence(n, rng):
    taus = np.linspace(0.1, 0.9, 9)
    worst = 0.0
    for nt in _photons(rng, n):
        vals = np.array([sep_threshold_ns(nt, 0.0, t) for t in taus])
        worst = max(worst, np.abs(vals - p_threshold_ns(nt)).max() / max(1.0, p_threshold_ns(nt)))
    return _result("tau-independence", n, worst, 1e-12, "relative, τ = 0.1..0.9")


def check_depth_identity(n, rng):
    """Numerical max over τ vs the depth identity and the closed form."""
    ns, nt = _photons(rng, n), _photons(rng, n)
    val, arg = kernels.backend.effective_nc_batch(ns, nt, TAU_EPS, TAU_TOL)
    worst, worst_tau = 0.0, 0.0
    for k in range(n):
        st = SingleModeState(ns[k], nt[k])
        ident = effective_nc_from_depth(nonclassical_depth(st))
        worst = max(worst, abs(val[k] - ident), abs(val[k] - effective_nc_closed_form(st)))
        if val[k] > 0 and nt[k] > 0:
            worst_tau = max(worst_tau, abs(arg[k] - 0.5))
    return _result("depth-identity", n, worst, 1e-8, f"max |τ* − 1/2| = {worst_tau:.1e}",
                   passed=worst <= 1e-8 and worst_tau <= 1e-4)


def check_sep_monotone(n, rng):
    """``n_s^sep`` nondecreasing in ``n2`` along a grid."""
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e2, 40)])
    worst = 0.0
    for nt, t in zip(_photons(rng, n), _tau(rng, n)):
        vals = np.array([sep_threshold_ns(nt, n2, t) for n2 in grid])
        worst = max(worst, np.max(vals[:-1] - vals[1:]))
    return _result("sep-monotonicity", n, max(worst, 0.0), 0.0, "largest decrease")


def check_inverse_pair(n, rng):
    worst = 0.0
    for nt in rng.uniform(0, 100, n):
        worst = max(worst, abs(p_threshold_nt(p_threshold_ns(nt)) - nt))
    return _result("inverse-pair", n, worst, 1e-10)


def check_balanced_symmetry(n, rng):
    """``D_{1|2} = D_{2|1}`` at τ = 1/2 and ``D_{2|1}(τ) = D_{1|2}(1 − τ)``."""
    ns, nt, n2 = _photons(rng, n), _photons(rng, n), _photons(rng, n)
    m = measures_from_params(ns, nt, n2, 0.5)
    worst = np.max(np.abs(m["discord_1g2"] - m["discord_2g1"]))
    t = _tau(rng, n)
    a, b = measures_from_params(ns, nt, n2, t), measures_from_params(ns, nt, n2, 1 - t)
    worst = max(worst, np.max(np.abs(a["discord_2g1"] - b["discord_1g2"])))
    return _result("balanced-symmetry", n, worst, 1e-10)


def check_transparency(n, rng):
    """Equal thermal inputs leave no correlations."""
    nt, t = _photons(rng, n), _tau(rng, n)
    worst = 0.0
    for x, tau in zip(nt, t):
        c = output_cm(SingleModeState(0.0, x), x, tau).c
        worst = max(worst, np.abs(c).max())
    m = measures_from_params(0.0, nt, nt, t)
    worst = max(worst, np.max(np.abs(m["discord_1g2"])), np.max(np.abs(m["mutual_info"])))
    return _result("transparency", n, worst, 1e-12)


def check_ppt_monotone_n2(n, rng):
    """``λ̃₋`` nondecreasing in ``n2``, the precondition of the n2 bisection."""
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 60)])
    worst = 0.0
    for ns, nt, t in zip(_photons(rng, n), _photons(rng, n), _tau(rng, n)):
        vals = np.array([ppt_lambda_minus(ns, nt, x, t) for x in grid])
        worst = max(worst, np.max((vals[:-1] - vals[1:]) / vals[1:]))
    return _result("ppt-monotone-n2", n, max(worst, 0.0), 1e-13, "largest relative decrease")


def check_tau_unimodal(n, rng):
    """``E(τ)`` has a single local maximum on a 41-point τ grid."""
    taus = np.linspace(0.02, 0.98, 41)
    bad = 0
    for ns, nt in zip(_photons(rng, n), _photons(rng, n)):
        st = SingleModeState(ns, nt)
        if effective_nc_closed_form(st) == 0:
            continue
        vals = np.array([kernels.backend.effective_nc_at_tau(ns, nt, t) for t in taus])
        steps = np.sign(np.round(np.diff(vals) / max(vals.max(), 1e-300), 12))
        steps = steps[steps != 0]
        if np.count_nonzero(np.diff(steps) != 0) > 1 or (steps.size and steps[0] < 0 and np.any(steps > 0)):
            bad += 1
    return _result("tau-unimodality", n, bad, 0, f"{bad} multimodal")


CHECKS = {
    "congruence": (check_congruence, 1000),
    "spectrum-preservation": (check_spectrum, 1000),
    "energy": (check_energy, 1000),
    "exchange": (check_exchange, 1000),
    "purity": (check_purity, 1000),
    "emin-oracle": (check_emin_oracle, 10000),
    "discord-bounds": (check_discord_bounds, 10000),
    "separable-discord": (check_separable_discord, 10000),
    "entanglement-iff-p": (check_entanglement_p, 10000),
    "depth-agreement": (check_depth_agreement, 1000),
    "threshold-correctness": (check_threshold, 1000),
    "tau-independence": (check_tau_independence, 1000),
    "depth-identity": (check_depth_identity, 1000),
    "sep-monotonicity": (check_sep_monotone, 200),
    "inverse-pair": (check_inverse_pair, 1000),
    "balanced-symmetry": (check_balanced_symmetry, 1000),
    "transparency": (check_transparency, 1000),
    "ppt-monotone-n2": (check_ppt_monotone_n2, 200),
    "tau-unimodality": (check_tau_unimodal, 100),
}


def run_check(name: str, samples: int | None = None, seed: int = DEFAULT_SEED) -> CheckResult:
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
    fn, default = CHECKS[name]
    rng = np.random.Generator(np.random.PCG64(seed))
    return fn(default if samples is None else int(samples), rng)


def run_all(samples: int | None = None, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    return [run_check(name, samples, seed) for name in CHECKS]
