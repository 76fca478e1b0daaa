"""Pure-Python implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function and algorithm for
algorithm, so both backends agree to rounding.  Selected automatically
when the compiled extension is unavailable.

Measurement parametrization used by the conditional-determinant kernel:
a pure Gaussian measurement seed ``R(θ) diag(e^{2s}, e^{-2s}) R(θ)ᵀ / 2``
is the point ``ρ e^{2iθ}`` of the unit disk with ``ρ = tanh s``.  A
negative ``ρ`` is the same measurement rotated by π/2, so line searches in
``ρ`` pass straight through heterodyne (``ρ = 0``) instead of stalling at
a polar singularity; ``|ρ| = 1`` is ideal homodyne and is reached exactly.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BracketError, OracleConvergenceError

BACKEND = "python"

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2

DISC_RTOL = 1e-10


def golden_section_min(f, a, b, tol):
    """Minimize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point seen, endpoints included.
    """
    fa, fb = f(a), f(b)
    best_x, best_f = (a, fa) if fa <= fb else (b, fb)
    h = b - a
    if h <= tol:
        return best_x, best_f
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    x, fx = (c, yc) if yc < yd else (d, yd)
    if fx < best_f:
        best_x, best_f = x, fx
    return best_x, best_f


def _spectrum_minus(d, i4):
    disc = d * d - 4 * i4
    if disc < 0:
        disc = 0.0
    return math.sqrt(2 * i4 / (d + math.sqrt(disc)))


def entropy_f(x):
    if x <= 0.5:
        return 0.0
    return (x + 0.5) * math.log(x + 0.5) - (x - 0.5) * math.log(x - 0.5)


def emin_closed(i1, i2, i3, i4):
    """Closed-form minimal conditional determinant, measurement on mode 2."""
    # vacuum = 1 units for the branch logic
    a, b, c, d = 4 * i1, 4 * i2, 4 * i3, 16 * i4
    bm1 = b - 1
    c2 = c * c
    if bm1 > 1e-12 and (d - a * b) ** 2 <= (1 + b) * c2 * (a + d):
        x = bm1 * (d - a)
        root = math.sqrt(max(c2 + x, 0.0))
        e = ((abs(c) + root) / bm1) ** 2
    else:
        disc = c2 * c2 + (d - a * b) ** 2 - 2 * c2 * (a * b + d)
        e = 2 * a * d / (a * b - c2 + d + math.sqrt(max(disc, 0.0)))
    return e / 4


def conditional_det(a, b, c, rho, theta):
    """``det(A − C (B + σ_m)⁻¹ Cᵀ)`` for the measurement ``(ρ, θ)`` on mode 2.

    ``a``, ``b``, ``c`` are 2×2 nested sequences.  Finite at ``|ρ| = 1``.
    ``rho`` and ``theta`` may be broadcastable arrays.
    """
    x, y = rho * np.cos(2 * theta), rho * np.sin(2 * theta)
    r2 = x * x + y * y
    kappa = 2 * (1 - r2)
    p00, p01, p11 = 1 + r2 + 2 * x, 2 * y, 1 + r2 - 2 * x
    b00, b01, b11 = b[0][0], 0.5 * (b[0][1] + b[1][0]), b[1][1]
    m00 = kappa * b00 + p00
    m01 = kappa * b01 + p01
    m11 = kappa * b11 + p11
    q = kappa * (b00 * b11 - b01 * b01 + 0.25) + b11 * p00 - 2 * b01 * p01 + b00 * p11
    k00, k01, k11 = m11 / q, -m01 / q, m00 / q
    c00, c01, c10, c11 = c[0][0], c[0][1], c[1][0], c[1][1]
    # X = C K Cᵀ
    t00 = c00 * k00 + c01 * k01
    t01 = c00 * k01 + c01 * k11
    t10 = c10 * k00 + c11 * k01
    t11 = c10 * k01 + c11 * k11
    y00 = a[0][0] - (t00 * c00 + t01 * c01)
    y01 = 0.5 * (a[0][1] + a[1][0]) - (t00 * c10 + t01 * c11)
    y11 = a[1][1] - (t10 * c10 + t11 * c11)
    return y00 * y11 - y01 * y01


def _blocks(m, measured):
    m = np.asarray(m, dtype=float)
    if measured == 2:
        return m[:2, :2].tolist(), m[2:, 2:].tolist(), m[:2, 2:].tolist()
    if measured == 1:
        return m[2:, 2:].tolist(), m[:2, :2].tolist(), m[2:, :2].tolist()
    raise ValueError(f"measured party must be 1 or 2, got {measured!r}")


def radius_grid(n_squeeze, s_grid_max):
    """Grid of disk radii ``tanh s``: finite squeezes then homodyne (1)."""
    s = np.linspace(0.0, s_grid_max, n_squeeze - 1)
    return np.append(np.tanh(s), 1.0)


def _line_min(f, x0, hw, lo_lim, hi_lim, tol):
    # widen the bracket while the minimum sits on an interior edge
    for _ in range(64):
        a, b = max(lo_lim, x0 - hw), min(hi_lim, x0 + hw)
        x, fx = golden_section_min(f, a, b, tol)
        if (x - a <= 2 * tol and a > lo_lim) or (b - x <= 2 * tol and b < hi_lim):
            x0, hw = x, 2 * hw
            continue
        return x, fx
    return x, fx


def emin_oracle(m, measured=2, n_squeeze=64, n_angle=64, s_grid_max=5.0, tol=1e-10,
                max_sweeps=200):
    """Brute-force minimum of the conditional determinant over Gaussian measurements.

    Dense ``(ρ, θ)`` grid followed by alternating golden-section line
    searches in the signed radius ``ρ ∈ [-1, 1]`` and the angle ``θ``.
    Returns ``(E_min, ρ, θ)``.
    """
    a, b, c = _blocks(m, measured)
    rs = radius_grid(n_squeeze, s_grid_max)
    ht = math.pi / n_angle
    grid = conditional_det(a, b, c, rs[:, None], (np.arange(n_angle) * ht)[None, :])
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    g, rho, th = float(grid[i, j]), float(rs[i]), j * ht
    hr = max(rs[min(i + 1, n_squeeze - 1)] - rho, rho - rs[max(i - 1, 0)], tol)
    for _ in range(max_sweeps):
        rho_old, th_old, g_old = rho, th, g
        rho, g = _line_min(lambda x: conditional_det(a, b, c, x, th), rho, hr, -1.0, 1.0, tol)
        th, g = _line_min(lambda x: conditional_det(a, b, c, rho, x), th, ht, -math.inf, math.inf, tol)
        if abs(rho - rho_old) <= tol and abs(th - th_old) <= tol or g_old - g <= 1e-15 * abs(g):
            break
    else:
        raise OracleConvergenceError(f"measurement refinement did not converge in {max_sweeps} sweeps")
    return float(g), float(rho), float(th) % math.pi


def emin_oracle_batch(ms, measured=2, n_squeeze=64, n_angle=64, s_grid_max=5.0, tol=1e-10):
    ms = np.asarray(ms, dtype=float)
    out = np.empty((ms.shape[0], 3))
    for k in range(ms.shape[0]):
        out[k] = emin_oracle(ms[k], measured, n_squeeze, n_angle, s_grid_max, tol)
    return out[:, 0], out[:, 1], out[:, 2]


def measures_batch(inv):
    """Vectorized spectra, mutual information and discords.

    ``inv`` has shape ``(N, 4)``.  Returns a dict of ``(N,)`` arrays keyed
    ``lambda_plus``, ``lambda_minus``, ``ppt_lambda_minus``,
    ``mutual_info``, ``discord_1g2``, ``discord_2g1``.
    """
    inv = np.asarray(inv, dtype=float)
    n = inv.shape[0]
    out = {k: np.empty(n) for k in ("lambda_plus", "lambda_minus", "ppt_lambda_minus",
                                     "mutual_info", "discord_1g2", "discord_2g1")}
    for k in range(n):
        i1, i2, i3, i4 = inv[k]
        d = i1 + i2 + 2 * i3
        disc = d * d - 4 * i4
        root = math.sqrt(disc) if disc > 0 else 0.0
        lp = math.sqrt((d + root) / 2)
        lm = math.sqrt(2 * i4 / (d + root))
        lt = _spectrum_minus(i1 + i2 - 2 * i3, i4)
        s_joint = entropy_f(lp) + entropy_f(lm)
        f1, f2 = entropy_f(math.sqrt(i1)), entropy_f(math.sqrt(i2))
        im = max(f1 + f2 - s_joint, 0.0)
        d12 = f2 - s_joint + entropy_f(math.sqrt(emin_closed(i1, i2, i3, i4)))
        d21 = f1 - s_joint + entropy_f(math.sqrt(emin_closed(i2, i1, i3, i4)))
        out["lambda_plus"][k] = lp
        out["lambda_minus"][k] = lm
        out["ppt_lambda_minus"][k] = lt
        out["mutual_info"][k] = im
        out["discord_1g2"][k] = max(d12, 0.0) if d12 > -1e-9 else d12
        out["discord_2g1"][k] = max(d21, 0.0) if d21 > -1e-9 else d21
    return out


def ppt_lambda_params(ns, nt, n2, tau):
    """``λ̃₋`` of the output for a squeezed thermal input and thermal reference."""
    e2r = (math.sqrt(1 + ns) + math.sqrt(ns)) ** 2
    hi = (0.5 + nt) * e2r
    lo = (0.5 + nt) / e2r
    ref = 0.5 + n2
    r = 1 - tau
    k = math.sqrt(tau * r)
    i1 = (ref * r + hi * tau) * (ref * r + lo * tau)
    i2 = (ref * tau + hi * r) * (ref * tau + lo * r)
    i3 = (ref - hi) * (ref - lo) * k * k
    i4 = (0.5 + nt) ** 2 * ref * ref
    return _spectrum_minus(i1 + i2 - 2 * i3, i4)


def effective_nc_at_tau(ns, nt, tau, xtol=1e-13, max_iter=400):
    """Largest reference photon number ``n2`` keeping the output entangled."""
    if ppt_lambda_params(ns, nt, 0.0, tau) >= 0.5:
        return 0.0
    guess = max((ns - nt + math.sqrt(ns * (1 + ns))) / (1 + 2 * nt), 0.0)
    lo, hi = 0.0, 10 * (1 + guess)
    expansions = 0
    while ppt_lambda_params(ns, nt, hi, tau) < 0.5:
        lo, hi = hi, 2 * hi
        expansions += 1
        if expansions > 200:
            raise BracketError("no separable reference found while expanding bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ppt_lambda_params(ns, nt, mid, tau) < 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


def effective_nc_max(ns, nt, eps=1e-6, tol=1e-8):
    """``max_τ`` of :func:`effective_nc_at_tau`; returns ``(value, τ*)``."""
    x, fx = golden_section_min(lambda t: -effective_nc_at_tau(ns, nt, t), eps, 1 - eps, tol)
    return -fx, x


def effective_nc_batch(ns, nt, eps=1e-6, tol=1e-8):
    ns = np.asarray(ns, dtype=float)
    nt = np.asarray(nt, dtype=float)
    val = np.empty(ns.shape[0])
    arg = np.empty(ns.shape[0])
    for k in range(ns.shape[0]):
        val[k], arg[k] = effective_nc_max(ns[k], nt[k], eps, tol)
    return val, arg


def emin_params(ns, nt, n2, t):
    """:func:`emin_closed` for the mixed output, measurement on mode 2.

    Same two branches, but the square-root arguments use their factored
    forms in the input parameters, which are sums of nonnegative terms:

    ``C² + (B − 1)(D − A) = F_H F_L`` with
    ``F_X = R(1 − t)(m² − 1) + X t (R² − 1)`` and the second-branch
    discriminant ``[R t(1 − t)|H − L||m² − R²|]²``.  Here ``H``, ``L``, ``R``
    are the vacuum = 1 input variances and ``m = 1 + 2 n_t``.  This keeps
    full precision for nearly pure outputs, where the generic form loses
    half the digits.
    """
    s = math.sqrt(ns * (1 + ns))
    e2r = (math.sqrt(1 + ns) + math.sqrt(ns)) ** 2
    m = 1 + 2 * nt
    big, small, ref = m * e2r, m / e2r, 1 + 2 * n2
    r = 1 - t
    m2m1, r2m1 = 4 * nt * (1 + nt), 4 * n2 * (1 + n2)
    a = (ref * r + big * t) * (ref * r + small * t)
    b = (ref * t + big * r) * (ref * t + small * r)
    bm1 = t * t * r2m1 + r * r * m2m1 + t * r * (4 * ref * (nt + m * ns) + 4 * n2)
    c = (ref - big) * (ref - small) * t * r
    d = m * m * ref * ref
    c2 = c * c
    if bm1 > 1e-12 and (d - a * b) ** 2 <= (1 + b) * c2 * (a + d):
        fh = ref * r * m2m1 + big * t * r2m1
        fl = ref * r * m2m1 + small * t * r2m1
        e = ((abs(c) + math.sqrt(fh * fl)) / bm1) ** 2
    else:
        root = ref * t * r * 4 * m * s * 4 * abs(nt - n2) * (1 + nt + n2)
        e = 2 * a * d / (a * b - c2 + d + root)
    return e / 4


def measures_params(ns, nt, n2, tau):
    """Same keys as :func:`measures_batch`, straight from input parameters.

    Uses the exact output spectrum ``{1/2 + n_t, 1/2 + n2}`` and
    :func:`emin_params`; ``D_{2|1}(τ)`` is ``D_{1|2}`` at ``1 − τ``.
    """
    ns, nt, n2, tau = (np.ascontiguousarray(v, dtype=float) for v in (ns, nt, n2, tau))
    n = ns.shape[0]
    out = {k: np.empty(n) for k in ("lambda_plus", "lambda_minus", "ppt_lambda_minus",
                                     "mutual_info", "discord_1g2", "discord_2g1")}
    for k in range(n):
        s, t_, r_, t = ns[k], nt[k], n2[k], tau[k]
        e2r = (math.sqrt(1 + s) + math.sqrt(s)) ** 2
        hi, lo, ref = (0.5 + t_) * e2r, (0.5 + t_) / e2r, 0.5 + r_
        r = 1 - t
        i1 = (ref * r + hi * t) * (ref * r + lo * t)
        i2 = (ref * t + hi * r) * (ref * t + lo * r)
        i3 = (ref - hi) * (ref - lo) * t * r
        i4 = (0.5 + t_) ** 2 * ref * ref
        lp, lm = max(0.5 + t_, ref), min(0.5 + t_, ref)
        s_joint = entropy_f(lp) + entropy_f(lm)
        f1, f2 = entropy_f(math.sqrt(i1)), entropy_f(math.sqrt(i2))
        d12 = f2 - s_joint + entropy_f(math.sqrt(emin_params(s, t_, r_, t)))
        d21 = f1 - s_joint + entropy_f(math.sqrt(emin_params(s, t_, r_, r)))
        im = f1 + f2 - s_joint
        out["lambda_plus"][k] = lp
        out["lambda_minus"][k] = lm
        out["ppt_lambda_minus"][k] = _spectrum_minus(i1 + i2 - 2 * i3, i4)
        out["mutual_info"][k] = max(im, 0.0)
        out["discord_1g2"][k] = max(d12, 0.0) if d12 > -1e-9 else d12
        out["discord_2g1"][k] = max(d21, 0.0) if d21 > -1e-9 else d21
    return out
