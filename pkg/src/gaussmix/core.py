"""Single- and two-mode covariance matrices and the beam-splitter map.

Units: quadratures are ``q = (a + a†)/√2`` and ``p = (a − a†)/(i√2)``, so
the vacuum covariance matrix is ``diag(1/2, 1/2)`` and a physical two-mode
state has smaller symplectic eigenvalue ``λ₋ ≥ 1/2``.  Half of the
literature uses vacuum = 1 instead; every formula in this package uses
the vacuum = 1/2 convention.  First moments are always zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnphysicalStateError

#: Discriminants in ``(-DISC_RTOL * scale, 0)`` are clamped to zero.
DISC_RTOL = 1e-10
#: Allowed undershoot of ``λ₋`` below 1/2 before a CM is called unphysical.
PHYS_TOL = 1e-9

VACUUM_VARIANCE = 0.5


def _check_photons(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite number >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class SingleModeState:
    """Squeezed thermal state ``S(r) ν(n_t) S(r)†`` with real ``r ≥ 0``.

    Parameters
    ----------
    n_s : float
        Number of squeezed photons, ``sinh² r``.
    n_t : float
        Mean photon number of the thermal seed.
    """

    n_s: float
    n_t: float

    def __post_init__(self):
        object.__setattr__(self, "n_s", _check_photons("n_s", self.n_s))
        object.__setattr__(self, "n_t", _check_photons("n_t", self.n_t))

    @property
    def n1(self) -> float:
        """Total mean photon number ``n_t + (1 + 2 n_t) n_s``."""
        return self.n_t + (1 + 2 * self.n_t) * self.n_s

    @property
    def delta(self) -> float:
        return (1 + 2 * self.n_t) * math.sqrt(self.n_s * (1 + self.n_s))

    @property
    def purity(self) -> float:
        return 1 / (1 + 2 * self.n_t)

    @property
    def squeezing(self) -> float:
        return math.asinh(math.sqrt(self.n_s))

    @property
    def min_variance(self) -> float:
        """Smallest eigenvalue ``1/2 + n1 − Δ`` of the covariance matrix.

        Evaluated as ``(1/2 + n_t) e^{-2r}`` which is free of the
        cancellation in ``n1 − Δ`` for strongly squeezed states.
        """
        return (0.5 + self.n_t) * math.exp(-2 * self.squeezing)


@dataclass(frozen=True)
class BeamSplitter:
    tau: float

    def __post_init__(self):
        tau = float(self.tau)
        if not (0.0 <= tau <= 1.0):
            raise ValueError(f"transmissivity tau must lie in [0, 1], got {tau!r}")
        object.__setattr__(self, "tau", tau)

    @property
    def balanced(self) -> bool:
        return self.tau == 0.5

    def symplectic(self) -> np.ndarray:
        """The 4×4 symplectic matrix acting on ``(q1, p1, q2, p2)``."""
        t, r = math.sqrt(self.tau), math.sqrt(1 - self.tau)
        eye = np.eye(2)
        return np.block([[t * eye, r * eye], [-r * eye, t * eye]])


class CovMat2:
    """Real symmetric 2×2 covariance matrix of one mode."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True):
        m = np.array(matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if check:
            if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise UnphysicalStateError("covariance matrix is not symmetric")
            if m[0, 0] <= 0 or np.linalg.det(m) < 0.25 * (1 - PHYS_TOL):
                raise UnphysicalStateError(
                    f"2x2 covariance matrix violates det >= 1/4 (det = {np.linalg.det(m)!r})"
                )
        self.matrix = m

    def det(self) -> float:
        m = self.matrix
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def __repr__(self):
        return f"CovMat2({self.matrix.tolist()!r})"


class CovMat4:
    """Two-mode covariance matrix in block form ``[[A, C], [Cᵀ, B]]``."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True):
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if check and not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise UnphysicalStateError("covariance matrix is not symmetric")
        self.matrix = m

    @property
    def a(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def b(self) -> np.ndarray:
        return self.matrix[2:, 2:]

    @property
    def c(self) -> np.ndarray:
        return self.matrix[:2, 2:]

    def swapped(self) -> "CovMat4":
        """Same state with the two modes relabelled."""
        perm = [2, 3, 0, 1]
        return CovMat4(self.matrix[np.ix_(perm, perm)], check=False)

    def __repr__(self):
        return f"CovMat4({self.matrix.tolist()!r})"


@dataclass(frozen=True)
class Invariants:
    """Local symplectic invariants of a two-mode covariance matrix.

    ``I1 = det A``, ``I2 = det B``, ``I3 = det C`` and ``I4 = det Σ``.
    """

    I1: float
    I2: float
    I3: float
    I4: float

    def swapped(self) -> "Invariants":
        return Invariants(self.I2, self.I1, self.I3, self.I4)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.I1, self.I2, self.I3, self.I4)


def cm_single_mode(state: SingleModeState) -> CovMat2:
    n1, delta = state.n1, state.delta
    return CovMat2(np.diag([0.5 + n1 + delta, state.min_variance]), check=False)


def cm_thermal(n: float) -> CovMat2:
    n = _check_photons("n", n)
    return CovMat2((0.5 + n) * np.eye(2), check=False)


def apply_beam_splitter(cm1: CovMat2, cm2: CovMat2, bs: BeamSplitter) -> CovMat4:
    """Congruence ``S_τ (σ1 ⊕ σ2) S_τᵀ`` of an uncorrelated input pair."""
    sigma0 = np.zeros((4, 4))
    sigma0[:2, :2] = cm1.matrix
    sigma0[2:, 2:] = cm2.matrix
    s = bs.symplectic()
    out = s @ sigma0 @ s.T
    return CovMat4(0.5 * (out + out.T), check=False)


def output_cm(state: SingleModeState, n2: float, tau: float) -> CovMat4:
    """Output CM for ``state`` mixed with a thermal state of ``n2`` photons."""
    return apply_beam_splitter(cm_single_mode(state), cm_thermal(n2), BeamSplitter(tau))


def _det2(m: np.ndarray) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def symplectic_invariants(cm: CovMat4) -> Invariants:
    m = cm.matrix
    return Invariants(_det2(m[:2, :2]), _det2(m[2:, 2:]), _det2(m[:2, 2:]), float(np.linalg.det(m)))


def invariants_from_params(n_s: float, n_t: float, n2: float, tau: float) -> Invariants:
    """Invariants of the mixed output from its closed-form entries.

    ``I4`` is the product of the input determinants, which the beam
    splitter preserves exactly.
    """
    state = SingleModeState(n_s, n_t)
    _check_photons("n2", n2)
    BeamSplitter(tau)
    hi, lo, ref = 0.5 + state.n1 + state.delta, state.min_variance, 0.5 + n2
    r = 1 - tau
    ap, am = ref * r + hi * tau, ref * r + lo * tau
    bp, bm = ref * tau + hi * r, ref * tau + lo * r
    k = math.sqrt(tau * r)
    cp, cm = (ref - hi) * k, (ref - lo) * k
    return Invariants(ap * am, bp * bm, cp * cm, (hi * lo) * ref * ref)


def output_spectrum(n_t: float, n2: float) -> tuple[float, float]:
    """Exact ``(λ₊, λ₋)`` of the mixed output.

    The beam splitter is symplectic, so the output keeps the input
    spectrum ``{1/2 + n_t, 1/2 + n2}``.
    """
    a, b = 0.5 + _check_photons("n_t", n_t), 0.5 + _check_photons("n2", n2)
    return (a, b) if a >= b else (b, a)


def _clamped_sqrt_disc(d: float, i4: float) -> float:
    disc = d * d - 4 * i4
    if disc < 0:
        if disc < -DISC_RTOL * max(1.0, d * d):
            raise UnphysicalStateError(f"negative discriminant {disc!r} in symplectic spectrum")
        return 0.0
    return math.sqrt(disc)


def _spectrum(d: float, i4: float) -> tuple[float, float]:
    if i4 <= 0:
        raise UnphysicalStateError(f"det of covariance matrix must be positive, got {i4!r}")
    root = _clamped_sqrt_disc(d, i4)
    upper = d + root
    if upper <= 0:
        raise UnphysicalStateError("non-positive symplectic spectrum")
    # λ₋² = (d − √disc)/2 rewritten as 2 I4 / (d + √disc) to avoid cancellation
    return math.sqrt(upper / 2), math.sqrt(2 * i4 / upper)


def symplectic_eigenvalues(inv: Invariants, *, check: bool = True) -> tuple[float, float]:
    """Return ``(λ₊, λ₋)``; raises if ``λ₋ < 1/2`` beyond tolerance."""
    lp, lm = _spectrum(inv.I1 + inv.I2 + 2 * inv.I3, inv.I4)
    if check and lm < 0.5 - PHYS_TOL:
        raise UnphysicalStateError(f"smaller symplectic eigenvalue {lm!r} < 1/2")
    return lp, lm


def ppt_eigenvalues(inv: Invariants) -> tuple[float, float]:
    """Symplectic eigenvalues ``(λ̃₊, λ̃₋)`` of the partial transpose."""
    return _spectrum(inv.I1 + inv.I2 - 2 * inv.I3, inv.I4)


def ppt_eigenvalue(inv: Invariants) -> float:
    """Smaller partially-transposed symplectic eigenvalue ``λ̃₋``.

    The state is entangled iff the returned value is below 1/2.
    """
    return ppt_eigenvalues(inv)[1]


def williamson_eigenvalues(cm: np.ndarray) -> np.ndarray:
    """Symplectic spectrum from the eigenvalues of ``i Ω Σ``.

    Independent of the invariant formulas; used as a cross-check.
    """
    m = np.asarray(cm, dtype=float)
    n = m.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.linalg.eigvals(1j * omega @ m)
    return np.sort(np.abs(ev.real))[::2][::-1]


def invariants_array(n_s, n_t, n2, tau) -> np.ndarray:
    """Vectorized :func:`invariants_from_params`; returns shape ``(N, 4)``."""
    n_s, n_t, n2, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (n_s, n_t, n2, tau)))
    if np.any(n_s < 0) or np.any(n_t < 0) or np.any(n2 < 0):
        raise ValueError("photon numbers must be >= 0")
    if np.any((tau < 0) | (tau > 1)):
        raise ValueError("transmissivity tau must lie in [0, 1]")
    e2r = (np.sqrt(1 + n_s) + np.sqrt(n_s)) ** 2
    hi, lo, ref = (0.5 + n_t) * e2r, (0.5 + n_t) / e2r, 0.5 + n2
    r = 1 - tau
    k = np.sqrt(tau * r)
    out = np.empty(n_s.shape + (4,))
    out[..., 0] = (ref * r + hi * tau) * (ref * r + lo * tau)
    out[..., 1] = (ref * tau + hi * r) * (ref * tau + lo * r)
    out[..., 2] = (ref - hi) * (ref - lo) * k * k
    out[..., 3] = (0.5 + n_t) ** 2 * ref * ref
    return out.reshape(-1, 4)

