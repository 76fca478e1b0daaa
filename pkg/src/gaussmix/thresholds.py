"""Classicality and separability thresholds, and effective nonclassicality.

The threshold functions are exact closed forms.  The numerical searches
(:func:`effective_nc_at_tau`, :func:`effective_nc`) run in the kernel
backend and serve as independent checks of the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import SingleModeState, _check_photons
from .measures import nonclassical_depth, p_classical

#: τ search interval is ``(TAU_EPS, 1 − TAU_EPS)``.
TAU_EPS = 1e-6
TAU_TOL = 1e-8
#: Depths this close to 1/2 report an infinite effective nonclassicality.
DEPTH_DIVERGENCE = 1e-12


@dataclass(frozen=True)
class ThresholdPoint:
    n_s_threshold: float
    n_t: float
    n2: float
    tau: float


@dataclass(frozen=True)
class EffectiveNC:
    value: float
    tau_star: float


def p_threshold_ns(n_t: float) -> float:
    """Squeezed photons at the P-classicality boundary, ``n_t²/(1 + 2 n_t)``."""
    n_t = _check_photons("n_t", n_t)
    return n_t * n_t / (1 + 2 * n_t)


def p_threshold_nt(n_s: float) -> float:
    """Thermal photons at the P-classicality boundary, ``n_s + √(n_s(1 + n_s))``."""
    n_s = _check_photons("n_s", n_s)
    return n_s + math.sqrt(n_s * (1 + n_s))


def _theta(nk: float, nl: float, tau: float) -> float:
    return nk * nl + nk - (nk - nl) * tau


def _check_open_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"threshold needs 0 < tau < 1, got {tau!r}")
    return tau


def sep_threshold_ns(n_t: float, n2: float, tau: float) -> float:
    """Squeezed photons at the separability boundary with ``n2`` reference photons.

    ``μ₁ μ₂ Θ(n_t, n2) Θ(n2, n_t) / (τ(1 − τ))`` with
    ``Θ(k, l) = n_k n_l + n_k − (n_k − n_l) τ``.
    """
    n_t, n2 = _check_photons("n_t", n_t), _check_photons("n2", n2)
    tau = _check_open_tau(tau)
    mu1, mu2 = 1 / (1 + 2 * n_t), 1 / (1 + 2 * n2)
    return mu1 * mu2 * _theta(n_t, n2, tau) * _theta(n2, n_t, tau) / (tau * (1 - tau))


def sep_threshold_point(n_t: float, n2: float, tau: float) -> ThresholdPoint:
    return ThresholdPoint(sep_threshold_ns(n_t, n2, tau), float(n_t), float(n2), float(tau))


def sep_threshold_vs_p_threshold(n_s_p: float, n2: float) -> float:
    """Balanced-splitter separability threshold written through ``n_s^P``.

    ``[n2 + h(1 + 2 n2)]² / ((1 + 2 n2)(1 + 2h))`` with
    ``h = n_s^P + √(n_s^P(1 + n_s^P))``.
    """
    n2 = _check_photons("n2", n2)
    h = p_threshold_nt(n_s_p)
    return (n2 + h * (1 + 2 * n2)) ** 2 / ((1 + 2 * n2) * (1 + 2 * h))


def effective_nc_closed_form(state: SingleModeState) -> float:
    """``(n_s − n_t + √(n_s(1 + n_s)))/(1 + 2 n_t)``, floored at zero."""
    if p_classical(state):
        return 0.0
    ns, nt = state.n_s, state.n_t
    return max((ns - nt + math.sqrt(ns * (1 + ns))) / (1 + 2 * nt), 0.0)


def effective_nc_from_depth(depth: float) -> float:
    """Effective nonclassicality implied by a nonclassical depth, ``τ_m/(1 − 2τ_m)``."""
    if depth >= 0.5 - DEPTH_DIVERGENCE:
        return math.inf
    return depth / (1 - 2 * depth)


def effective_nc_at_tau(state: SingleModeState, tau: float) -> float:
    """Largest thermal reference photon number keeping the output entangled.

    Bisection on ``n2`` for ``λ̃₋ = 1/2``; zero for P-classical input.

    Raises
    ------
    BracketError
        If no separable reference is found while growing the bracket.
    """
    tau = _check_open_tau(tau)
    if p_classical(state):
        return 0.0
    return float(kernels.backend.effective_nc_at_tau(state.n_s, state.n_t, tau))


def effective_nc(state: SingleModeState) -> EffectiveNC:
    """Maximum over τ of :func:`effective_nc_at_tau`, by golden section."""
    if p_classical(state):
        return EffectiveNC(0.0, 0.5)
    if nonclassical_depth(state) >= 0.5 - DEPTH_DIVERGENCE:
        return EffectiveNC(math.inf, 0.5)
    value, tau_star = kernels.backend.effective_nc_max(state.n_s, state.n_t, TAU_EPS, TAU_TOL)
    # E(τ) is flat for n_t = 0; resolve ties toward the balanced splitter
    if effective_nc_at_tau(state, 0.5) >= value - 1e-13 * max(1.0, value):
        tau_star = 0.5
    return EffectiveNC(float(value), float(tau_star))


def effective_nc_batch(n_s, n_t) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`effective_nc` value and argmax, without the special cases."""
    return kernels.backend.effective_nc_batch(np.asarray(n_s, float), np.asarray(n_t, float),
                                              TAU_EPS, TAU_TOL)


def ppt_lambda_minus(n_s: float, n_t: float, n2: float, tau: float) -> float:
    """``λ̃₋`` of the output straight from the input parameters."""
    return float(kernels.backend.ppt_lambda_params(n_s, n_t, n2, tau))
