# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same functions and algorithms as ``_kernels_py``; see that module for the
measurement parametrization.  The inner loops run without the GIL.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos, sin, fabs, ceil, exp, fmod, M_PI, INFINITY

cnp.import_array()

from .errors import BracketError, OracleConvergenceError

BACKEND = "cython"

cdef double INV_PHI = (sqrt(5.0) - 1) / 2
cdef double INV_PHI2 = (3 - sqrt(5.0)) / 2


ctypedef double (*objective)(double x, void* ctx) noexcept nogil


cdef struct Blocks:
    double a00, a01, a11
    double b00, b01, b11
    double c00, c01, c10, c11
    double rho, theta


cdef struct NCParams:
    double ns, nt, tau


cdef void golden(objective f, void* ctx, double a, double b, double tol,
                 double* x_out, double* f_out) noexcept nogil:
    cdef double fa = f(a, ctx), fb = f(b, ctx)
    cdef double best_x, best_f, h, c, d, yc, yd
    cdef int n, k
    if fa <= fb:
        best_x, best_f = a, fa
    else:
        best_x, best_f = b, fb
    h = b - a
    if h <= tol:
        x_out[0] = best_x
        f_out[0] = best_f
        return
    n = <int>ceil(log(tol / h) / log(INV_PHI))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc = f(c, ctx)
    yd = f(d, ctx)
    for k in range(n):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c, ctx)
        else:
            a = c
            c = d
            yc = yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d, ctx)
    if yc < yd:
        if yc < best_f:
            best_x, best_f = c, yc
    else:
        if yd < best_f:
            best_x, best_f = d, yd
    x_out[0] = best_x
    f_out[0] = best_f


cdef inline double f_entropy(double x) noexcept nogil:
    if x <= 0.5:
        return 0.0
    return (x + 0.5) * log(x + 0.5) - (x - 0.5) * log(x - 0.5)


def entropy_f(double x):
    return f_entropy(x)


cdef inline double c_emin(double i1, double i2, double i3, double i4) noexcept nogil:
    cdef double a = 4 * i1, b = 4 * i2, c = 4 * i3, d = 16 * i4
    cdef double bm1 = b - 1, c2 = c * c, x, root, disc, e
    if bm1 > 1e-12 and (d - a * b) * (d - a * b) <= (1 + b) * c2 * (a + d):
        x = bm1 * (d - a)
        root = sqrt(c2 + x) if c2 + x > 0 else 0.0
        e = (fabs(c) + root) / bm1
        e = e * e
    else:
        disc = c2 * c2 + (d - a * b) * (d - a * b) - 2 * c2 * (a * b + d)
        if disc < 0:
            disc = 0.0
        e = 2 * a * d / (a * b - c2 + d + sqrt(disc))
    return e / 4


def emin_closed(double i1, double i2, double i3, double i4):
    return c_emin(i1, i2, i3, i4)


cdef double c_conditional_det(Blocks* p, double rho, double theta) noexcept nogil:
    cdef double x = rho * cos(2 * theta), y = rho * sin(2 * theta)
    cdef double r2 = x * x + y * y, kappa = 2 * (1 - r2)
    cdef double p00 = 1 + r2 + 2 * x, p01 = 2 * y, p11 = 1 + r2 - 2 * x
    cdef double m00 = kappa * p.b00 + p00
    cdef double m01 = kappa * p.b01 + p01
    cdef double m11 = kappa * p.b11 + p11
    cdef double q = (kappa * (p.b00 * p.b11 - p.b01 * p.b01 + 0.25)
                     + p.b11 * p00 - 2 * p.b01 * p01 + p.b00 * p11)
    cdef double k00 = m11 / q, k01 = -m01 / q, k11 = m00 / q
    cdef double t00 = p.c00 * k00 + p.c01 * k01
    cdef double t01 = p.c00 * k01 + p.c01 * k11
    cdef double t10 = p.c10 * k00 + p.c11 * k01
    cdef double t11 = p.c10 * k01 + p.c11 * k11
    cdef double y00 = p.a00 - (t00 * p.c00 + t01 * p.c01)
    cdef double y01 = p.a01 - (t00 * p.c10 + t01 * p.c11)
    cdef double y11 = p.a11 - (t10 * p.c10 + t11 * p.c11)
    return y00 * y11 - y01 * y01


cdef double obj_rho(double x, void* ctx) noexcept nogil:
    cdef Blocks* p = <Blocks*>ctx
    return c_conditional_det(p, x, p.theta)


cdef double obj_theta(double x, void* ctx) noexcept nogil:
    cdef Blocks* p = <Blocks*>ctx
    return c_conditional_det(p, p.rho, x)


cdef void line_min(objective f, void* ctx, double x0, double hw, double lo_lim, double hi_lim,
                   double tol, double* x_out, double* f_out) noexcept nogil:
    cdef double a, b
    cdef int k
    for k in range(64):
        a = x0 - hw if x0 - hw > lo_lim else lo_lim
        b = x0 + hw if x0 + hw < hi_lim else hi_lim
        golden(f, ctx, a, b, tol, x_out, f_out)
        if (x_out[0] - a <= 2 * tol and a > lo_lim) or (b - x_out[0] <= 2 * tol and b < hi_lim):
            x0 = x_out[0]
            hw = 2 * hw
            continue
        return


cdef void load_blocks(Blocks* p, const double[:, :] m, int measured) noexcept nogil:
    cdef int ia = 0 if measured == 2 else 2
    cdef int ib = 2 - ia
    p.a00 = m[ia, ia]
    p.a01 = 0.5 * (m[ia, ia + 1] + m[ia + 1, ia])
    p.a11 = m[ia + 1, ia + 1]
    p.b00 = m[ib, ib]
    p.b01 = 0.5 * (m[ib, ib + 1] + m[ib + 1, ib])
    p.b11 = m[ib + 1, ib + 1]
    p.c00 = m[ia, ib]
    p.c01 = m[ia, ib + 1]
    p.c10 = m[ia + 1, ib]
    p.c11 = m[ia + 1, ib + 1]


cdef int c_oracle(Blocks* p, const double[:] rs, int n_angle, double tol, int max_sweeps,
                  double* e_out, double* rho_out, double* th_out) noexcept nogil:
    cdef int n_sq = rs.shape[0], i, j, bi = 0, bj = 0, sweep
    cdef double g, best = INFINITY, ht = M_PI / n_angle
    cdef double rho, th, hr, rho_old, th_old, g_old
    for i in range(n_sq):
        for j in range(n_angle):
            g = c_conditional_det(p, rs[i], j * ht)
            if g < best:
                best = g
                bi = i
                bj = j
    g = best
    rho = rs[bi]
    th = bj * ht
    hr = tol
    if bi + 1 < n_sq and rs[bi + 1] - rho > hr:
        hr = rs[bi + 1] - rho
    if bi > 0 and rho - rs[bi - 1] > hr:
        hr = rho - rs[bi - 1]
    for sweep in range(max_sweeps):
        rho_old = rho
        th_old = th
        g_old = g
        p.theta = th
        line_min(obj_rho, p, rho, hr, -1.0, 1.0, tol, &rho, &g)
        p.rho = rho
        line_min(obj_theta, p, th, ht, -INFINITY, INFINITY, tol, &th, &g)
        if (fabs(rho - rho_old) <= tol and fabs(th - th_old) <= tol) or g_old - g <= 1e-15 * fabs(g):
            e_out[0] = g
            rho_out[0] = rho
            th_out[0] = fmod(fmod(th, M_PI) + M_PI, M_PI)
            return 0
    return 1


def radius_grid(int n_squeeze, double s_grid_max):
    s = np.linspace(0.0, s_grid_max, n_squeeze - 1)
    return np.append(np.tanh(s), 1.0)


def conditional_det(a, b, c, double rho, double theta):
    cdef Blocks p
    p.a00 = a[0][0]
    p.a01 = 0.5 * (a[0][1] + a[1][0])
    p.a11 = a[1][1]
    p.b00 = b[0][0]
    p.b01 = 0.5 * (b[0][1] + b[1][0])
    p.b11 = b[1][1]
    p.c00 = c[0][0]
    p.c01 = c[0][1]
    p.c10 = c[1][0]
    p.c11 = c[1][1]
    return c_conditional_det(&p, rho, theta)


def emin_oracle_batch(ms, int measured=2, int n_squeeze=64, int n_angle=64,
                      double s_grid_max=5.0, double tol=1e-10, int max_sweeps=200):
    if measured not in (1, 2):
        raise ValueError(f"measured party must be 1 or 2, got {measured!r}")
    cdef const double[:, :, :] mv = np.ascontiguousarray(ms, dtype=np.float64)
    cdef const double[:] rs = radius_grid(n_squeeze, s_grid_max)
    cdef Py_ssize_t n = mv.shape[0], k
    e = np.empty(n)
    rho = np.empty(n)
    th = np.empty(n)
    cdef double[:] ev = e, rv = rho, tv = th
    cdef Blocks p
    cdef int failed = 0
    with nogil:
        for k in range(n):
            load_blocks(&p, mv[k], measured)
            if c_oracle(&p, rs, n_angle, tol, max_sweeps, &ev[k], &rv[k], &tv[k]):
                failed = 1
                break
    if failed:
        raise OracleConvergenceError(f"measurement refinement did not converge in {max_sweeps} sweeps")
    return e, rho, th


def emin_oracle(m, int measured=2, int n_squeeze=64, int n_angle=64, double s_grid_max=5.0,
                double tol=1e-10, int max_sweeps=200):
    e, rho, th = emin_oracle_batch(np.asarray(m, dtype=np.float64)[None], measured, n_squeeze,
                                   n_angle, s_grid_max, tol, max_sweeps)
    return float(e[0]), float(rho[0]), float(th[0])


cdef inline double spectrum_minus(double d, double i4) noexcept nogil:
    cdef double disc = d * d - 4 * i4
    if disc < 0:
        disc = 0.0
    return sqrt(2 * i4 / (d + sqrt(disc)))


def measures_batch(inv):
    cdef const double[:, :] iv = np.ascontiguousarray(inv, dtype=np.float64)
    cdef Py_ssize_t n = iv.shape[0], k
    names = ("lambda_plus", "lambda_minus", "ppt_lambda_minus",
             "mutual_info", "discord_1g2", "discord_2g1")
    out = {name: np.empty(n) for name in names}
    cdef double[:] lpv = out["lambda_plus"], lmv = out["lambda_minus"]
    cdef double[:] ltv = out["ppt_lambda_minus"], imv = out["mutual_info"]
    cdef double[:] d12v = out["discord_1g2"], d21v = out["discord_2g1"]
    cdef double i1, i2, i3, i4, d, disc, root, lp, lm, s_joint, f1, f2, im, d12, d21
    with nogil:
        for k in range(n):
            i1 = iv[k, 0]
            i2 = iv[k, 1]
            i3 = iv[k, 2]
            i4 = iv[k, 3]
            d = i1 + i2 + 2 * i3
            disc = d * d - 4 * i4
            root = sqrt(disc) if disc > 0 else 0.0
            lp = sqrt((d + root) / 2)
            lm = sqrt(2 * i4 / (d + root))
            s_joint = f_entropy(lp) + f_entropy(lm)
            f1 = f_entropy(sqrt(i1))
            f2 = f_entropy(sqrt(i2))
            im = f1 + f2 - s_joint
            d12 = f2 - s_joint + f_entropy(sqrt(c_emin(i1, i2, i3, i4)))
            d21 = f1 - s_joint + f_entropy(sqrt(c_emin(i2, i1, i3, i4)))
            lpv[k] = lp
            lmv[k] = lm
            ltv[k] = spectrum_minus(i1 + i2 - 2 * i3, i4)
            imv[k] = im if im > 0 else 0.0
            d12v[k] = (d12 if d12 > 0 else 0.0) if d12 > -1e-9 else d12
            d21v[k] = (d21 if d21 > 0 else 0.0) if d21 > -1e-9 else d21
    return out


cdef inline double c_ppt_lambda(double ns, double nt, double n2, double tau) noexcept nogil:
    cdef double e2r = (sqrt(1 + ns) + sqrt(ns)) * (sqrt(1 + ns) + sqrt(ns))
    cdef double hi = (0.5 + nt) * e2r, lo = (0.5 + nt) / e2r, ref = 0.5 + n2
    cdef double r = 1 - tau, k2 = tau * r
    cdef double i1 = (ref * r + hi * tau) * (ref * r + lo * tau)
    cdef double i2 = (ref * tau + hi * r) * (ref * tau + lo * r)
    cdef double i3 = (ref - hi) * (ref - lo) * k2
    cdef double i4 = (0.5 + nt) * (0.5 + nt) * ref * ref
    return spectrum_minus(i1 + i2 - 2 * i3, i4)


def ppt_lambda_params(double ns, double nt, double n2, double tau):
    return c_ppt_lambda(ns, nt, n2, tau)


cdef double c_enc_at_tau(double ns, double nt, double tau, double xtol, int max_iter,
                         int* status) noexcept nogil:
    cdef double guess, lo, hi, mid
    cdef int expansions = 0, it
    status[0] = 0
    if c_ppt_lambda(ns, nt, 0.0, tau) >= 0.5:
        return 0.0
    guess = (ns - nt + sqrt(ns * (1 + ns))) / (1 + 2 * nt)
    if guess < 0:
        guess = 0.0
    lo = 0.0
    hi = 10 * (1 + guess)
    while c_ppt_lambda(ns, nt, hi, tau) < 0.5:
        lo = hi
        hi = 2 * hi
        expansions += 1
        if expansions > 200:
            status[0] = 1
            return 0.0
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if c_ppt_lambda(ns, nt, mid, tau) < 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol * (lo if lo > 1.0 else 1.0):
            break
    return 0.5 * (lo + hi)


def effective_nc_at_tau(double ns, double nt, double tau, double xtol=1e-13, int max_iter=400):
    cdef int status
    cdef double v = c_enc_at_tau(ns, nt, tau, xtol, max_iter, &status)
    if status:
        raise BracketError("no separable reference found while expanding bracket")
    return v


cdef double obj_neg_enc(double t, void* ctx) noexcept nogil:
    cdef NCParams* p = <NCParams*>ctx
    cdef int status
    # bracket expansion doubles up to 2**200 times; cannot fail for finite input
    return -c_enc_at_tau(p.ns, p.nt, t, 1e-13, 400, &status)


def effective_nc_batch(ns, nt, double eps=1e-6, double tol=1e-8):
    cdef const double[:] nsv = np.ascontiguousarray(ns, dtype=np.float64)
    cdef const double[:] ntv = np.ascontiguousarray(nt, dtype=np.float64)
    cdef Py_ssize_t n = nsv.shape[0], k
    val = np.empty(n)
    arg = np.empty(n)
    cdef double[:] vv = val, av = arg
    cdef NCParams p
    cdef double x, fx
    with nogil:
        for k in range(n):
            p.ns = nsv[k]
            p.nt = ntv[k]
            golden(obj_neg_enc, &p, eps, 1 - eps, tol, &x, &fx)
            vv[k] = -fx
            av[k] = x
    return val, arg


def effective_nc_max(double ns, double nt, double eps=1e-6, double tol=1e-8):
    val, arg = effective_nc_batch(np.array([ns]), np.array([nt]), eps, tol)
    return float(val[0]), float(arg[0])


cdef double c_emin_params(double ns, double nt, double n2, double t) noexcept nogil:
    cdef double s = sqrt(ns * (1 + ns))
    cdef double e2r = (sqrt(1 + ns) + sqrt(ns)) * (sqrt(1 + ns) + sqrt(ns))
    cdef double m = 1 + 2 * nt
    cdef double big = m * e2r, small = m / e2r, ref = 1 + 2 * n2
    cdef double r = 1 - t
    cdef double m2m1 = 4 * nt * (1 + nt), r2m1 = 4 * n2 * (1 + n2)
    cdef double a = (ref * r + big * t) * (ref * r + small * t)
    cdef double b = (ref * t + big * r) * (ref * t + small * r)
    cdef double bm1 = t * t * r2m1 + r * r * m2m1 + t * r * (4 * ref * (nt + m * ns) + 4 * n2)
    cdef double c = (ref - big) * (ref - small) * t * r
    cdef double d = m * m * ref * ref
    cdef double c2 = c * c, fh, fl, e, root
    if bm1 > 1e-12 and (d - a * b) * (d - a * b) <= (1 + b) * c2 * (a + d):
        fh = ref * r * m2m1 + big * t * r2m1
        fl = ref * r * m2m1 + small * t * r2m1
        e = (fabs(c) + sqrt(fh * fl)) / bm1
        e = e * e
    else:
        root = ref * t * r * 4 * m * s * 4 * fabs(nt - n2) * (1 + nt + n2)
        e = 2 * a * d / (a * b - c2 + d + root)
    return e / 4


def emin_params(double ns, double nt, double n2, double t):
    return c_emin_params(ns, nt, n2, t)


def measures_params(ns, nt, n2, tau):
    cdef const double[:] nsv = np.ascontiguousarray(ns, dtype=np.float64)
    cdef const double[:] ntv = np.ascontiguousarray(nt, dtype=np.float64)
    cdef const double[:] n2v = np.ascontiguousarray(n2, dtype=np.float64)
    cdef const double[:] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef Py_ssize_t n = nsv.shape[0], k
    names = ("lambda_plus", "lambda_minus", "ppt_lambda_minus",
             "mutual_info", "discord_1g2", "discord_2g1")
    out = {name: np.empty(n) for name in names}
    cdef double[:] lpv = out["lambda_plus"], lmv = out["lambda_minus"]
    cdef double[:] ltv = out["ppt_lambda_minus"], imv = out["mutual_info"]
    cdef double[:] d12v = out["discord_1g2"], d21v = out["discord_2g1"]
    cdef double s, t_, r_, t, r, e2r, hi, lo, ref, i1, i2, i3, i4
    cdef double lp, lm, s_joint, f1, f2, im, d12, d21
    with nogil:
        for k in range(n):
            s = nsv[k]
            t_ = ntv[k]
            r_ = n2v[k]
            t = tv[k]
            e2r = (sqrt(1 + s) + sqrt(s)) * (sqrt(1 + s) + sqrt(s))
            hi = (0.5 + t_) * e2r
            lo = (0.5 + t_) / e2r
            ref = 0.5 + r_
            r = 1 - t
            i1 = (ref * r + hi * t) * (ref * r + lo * t)
            i2 = (ref * t + hi * r) * (ref * t + lo * r)
            i3 = (ref - hi) * (ref - lo) * t * r
            i4 = (0.5 + t_) * (0.5 + t_) * ref * ref
            lp = 0.5 + t_ if 0.5 + t_ > ref else ref
            lm = 0.5 + t_ if 0.5 + t_ < ref else ref
            s_joint = f_entropy(lp) + f_entropy(lm)
            f1 = f_entropy(sqrt(i1))
            f2 = f_entropy(sqrt(i2))
            d12 = f2 - s_joint + f_entropy(sqrt(c_emin_params(s, t_, r_, t)))
            d21 = f1 - s_joint + f_entropy(sqrt(c_emin_params(s, t_, r_, r)))
            im = f1 + f2 - s_joint
            lpv[k] = lp
            lmv[k] = lm
            ltv[k] = spectrum_minus(i1 + i2 - 2 * i3, i4)
            imv[k] = im if im > 0 else 0.0
            d12v[k] = (d12 if d12 > 0 else 0.0) if d12 > -1e-9 else d12
            d21v[k] = (d21 if d21 > 0 else 0.0) if d21 > -1e-9 else d21
    return out
