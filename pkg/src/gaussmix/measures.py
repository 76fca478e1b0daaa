"""Nonclassicality and correlation measures for the mixed output.

All entropic quantities are in nats.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import (
    PHYS_TOL,
    CovMat4,
    Invariants,
    SingleModeState,
    cm_single_mode,
    ppt_eigenvalue,
    symplectic_eigenvalues,
)

#: Discord values in ``(-DISCORD_CLAMP, 0)`` are reported as zero.
DISCORD_CLAMP = 1e-9

#: Default oracle search settings: 64 squeezings × 64 angles, then golden section.
ORACLE_GRID = (64, 64)
ORACLE_MAX_SQUEEZE = 5.0
ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class GaussianMeasurement:
    """Pure single-mode Gaussian measurement seed.

    Covariance ``R(angle) diag(e^{2 squeeze}, e^{-2 squeeze}) R(angle)ᵀ / 2``;
    ``squeeze = 0`` is heterodyne and ``squeeze = inf`` ideal homodyne.
    """

    squeeze: float
    angle: float

    def __post_init__(self):
        if not self.squeeze >= 0:
            raise ValueError(f"squeeze must be >= 0, got {self.squeeze!r}")
        object.__setattr__(self, "angle", float(self.angle) % math.pi)

    @classmethod
    def from_disk(cls, rho: float, theta: float) -> "GaussianMeasurement":
        """Build from the signed-radius disk coordinates used by the oracle."""
        if rho < 0:
            rho, theta = -rho, theta + math.pi / 2
        squeeze = math.inf if rho >= 1 else math.atanh(rho)
        return cls(squeeze, theta)

    @property
    def is_homodyne(self) -> bool:
        return math.isinf(self.squeeze)

    def covariance(self) -> np.ndarray:
        if self.is_homodyne:
            raise ValueError("ideal homodyne has no finite covariance matrix")
        c, s = math.cos(self.angle), math.sin(self.angle)
        rot = np.array([[c, -s], [s, c]])
        return rot @ np.diag([math.exp(2 * self.squeeze), math.exp(-2 * self.squeeze)]) @ rot.T / 2


@dataclass(frozen=True)
class MeasureReport:
    discord_1g2: float
    discord_2g1: float
    mutual_info: float
    classical_corr_1g2: float
    ppt_lambda_minus: float
    log_negativity: float
    entangled: bool

    def as_dict(self) -> dict:
        return asdict(self)


def nonclassical_depth(state: SingleModeState) -> float:
    """Nonclassical depth from squeezing and purity.

    ``max[(1 − e^{−2r}/μ)/2, 0]``; zero for P-classical states and always
    below 1/2 for Gaussian states.
    """
    if p_classical(state):
        return 0.0
    return max(0.5 * (1 - math.exp(-2 * state.squeezing) / state.purity), 0.0)


def nonclassical_depth_from_variance(state: SingleModeState) -> float:
    """Same quantity from the minimum CM eigenvalue ``u``: ``max[(1 − 2u)/2, 0]``."""
    u = float(np.linalg.eigvalsh(cm_single_mode(state).matrix)[0])
    return max((1 - 2 * u) / 2, 0.0)


def p_classical(state: SingleModeState) -> bool:
    """True iff the Glauber-Sudarshan P function is a regular density.

    For a squeezed thermal state this is ``n_s ≤ n_t²/(1 + 2 n_t)``.
    """
    return state.n_s * (1 + 2 * state.n_t) <= state.n_t ** 2


def entropy_f(x: float) -> float:
    """``f(x) = (x + 1/2) ln(x + 1/2) − (x − 1/2) ln(x − 1/2)``, with ``f(1/2) = 0``."""
    if x < 0.5 - PHYS_TOL:
        raise ValueError(f"entropy function needs x >= 1/2, got {x!r}")
    if x <= 0.5:
        return 0.0
    return (x + 0.5) * math.log(x + 0.5) - (x - 0.5) * math.log(x - 0.5)


def mutual_information(inv: Invariants) -> float:
    lp, lm = symplectic_eigenvalues(inv)
    value = entropy_f(math.sqrt(inv.I1)) + entropy_f(math.sqrt(inv.I2)) - entropy_f(lp) - entropy_f(lm)
    return max(value, 0.0)


def _measured_party(measured: int) -> int:
    if measured not in (1, 2):
        raise ValueError(f"measured party must be 1 or 2, got {measured!r}")
    return measured


def emin_closed_form(inv: Invariants, measured: int = 2) -> float:
    """Minimal conditional determinant of the unmeasured mode.

    Two-branch expression in the local invariants for a Gaussian
    measurement on party ``measured``.  The second branch (homodyne-type
    optimum) is evaluated as ``2AD / (AB − C² + D + √…)``, algebraically
    equal to the textbook ``(AB − C² + D − √…)/(2B)`` but free of the
    cancellation that breaks it for nearly pure states.
    """
    i1, i2, i3, i4 = inv.as_tuple()
    if _measured_party(measured) == 1:
        i1, i2 = i2, i1
    # vacuum = 1 units for the branch logic
    a, b, c, d = 4 * i1, 4 * i2, 4 * i3, 16 * i4
    bm1 = b - 1
    c2 = c * c
    if bm1 > 1e-12 and (d - a * b) ** 2 <= (1 + b) * c2 * (a + d):
        root = math.sqrt(max(c2 + bm1 * (d - a), 0.0))
        e = ((abs(c) + root) / bm1) ** 2
    else:
        disc = c2 * c2 + (d - a * b) ** 2 - 2 * c2 * (a * b + d)
        e = 2 * a * d / (a * b - c2 + d + math.sqrt(max(disc, 0.0)))
    return e / 4


def emin_from_params(n_s: float, n_t: float, n2: float, tau: float, measured: int = 2) -> float:
    """:func:`emin_closed_form` of the mixed output, evaluated in factored form.

    Accurate to rounding even for nearly pure outputs, where the invariant
    route keeps only about half the digits.
    """
    t = tau if _measured_party(measured) == 2 else 1 - tau
    return float(kernels.backend.emin_params(n_s, n_t, n2, t))


def emin_oracle(cm: CovMat4, measured: int = 2, *, grid: tuple[int, int] = ORACLE_GRID,
                max_squeeze: float = ORACLE_MAX_SQUEEZE,
                tol: float = ORACLE_TOL) -> tuple[float, GaussianMeasurement]:
    """Brute-force minimal conditional determinant over Gaussian measurements.

    Searches a ``grid[0] × grid[1]`` (squeeze, angle) grid, squeezes
    evenly spaced in ``[0, max_squeeze]`` plus ideal homodyne, then refines
    by alternating golden-section line searches to ``tol``.  Independent of
    :func:`emin_closed_form`.

    Raises
    ------
    OracleConvergenceError
        If the refinement does not settle.
    """
    e, rho, theta = kernels.backend.emin_oracle(cm.matrix, _measured_party(measured), grid[0],
                                                grid[1], max_squeeze, tol)
    return e, GaussianMeasurement.from_disk(rho, theta)


def conditional_det(cm: CovMat4, meas: GaussianMeasurement, measured: int = 2) -> float:
    """``det`` of the unmeasured block after measuring with ``meas``."""
    m = cm if _measured_party(measured) == 2 else cm.swapped()
    rho = 1.0 if meas.is_homodyne else math.tanh(meas.squeeze)
    return float(kernels.backend.conditional_det(m.a, m.b, m.c, rho, meas.angle))


def _direction(direction) -> int:
    if direction in (12, "1|2", "12", "1g2"):
        return 2
    if direction in (21, "2|1", "21", "2g1"):
        return 1
    raise ValueError(f"direction must be '1|2' or '2|1', got {direction!r}")


def gaussian_discord(inv: Invariants, direction="1|2") -> float:
    """Gaussian discord ``D_{1|2}`` (measure mode 2) or ``D_{2|1}``.

    For nearly pure states the invariant route loses about half the
    digits; :func:`measures_from_params` avoids that for the mixing setup.
    """
    measured = _direction(direction)
    local = inv.I2 if measured == 2 else inv.I1
    lp, lm = symplectic_eigenvalues(inv)
    value = (entropy_f(math.sqrt(emin_closed_form(inv, measured))) + entropy_f(math.sqrt(local))
             - entropy_f(lp) - entropy_f(lm))
    if -DISCORD_CLAMP < value < 0:
        return 0.0
    return value


def log_negativity(inv: Invariants) -> float:
    return max(-math.log(2 * ppt_eigenvalue(inv)), 0.0)


def measure_report(inv: Invariants) -> MeasureReport:
    im = mutual_information(inv)
    d12 = gaussian_discord(inv, "1|2")
    lt = ppt_eigenvalue(inv)
    return MeasureReport(
        discord_1g2=d12,
        discord_2g1=gaussian_discord(inv, "2|1"),
        mutual_info=im,
        classical_corr_1g2=max(im - d12, 0.0),
        ppt_lambda_minus=lt,
        log_negativity=max(-math.log(2 * lt), 0.0),
        entangled=lt < 0.5,
    )


def measures_batch(invariants) -> dict[str, np.ndarray]:
    """Vectorized measures for an ``(N, 4)`` array of ``(I1, I2, I3, I4)``.

    Keys match :class:`MeasureReport` plus ``lambda_plus``/``lambda_minus``.
    """
    inv = np.ascontiguousarray(invariants, dtype=float).reshape(-1, 4)
    return _finish(kernels.backend.measures_batch(inv))


def measures_from_params(n_s, n_t, n2, tau) -> dict[str, np.ndarray]:
    """Vectorized measures of the mixed output, from the input parameters.

    Preferred over :func:`measures_batch` for this setup: the output
    spectrum is taken exactly from the inputs and ``E^min`` is evaluated
    in a factored form that keeps full precision for nearly pure outputs.
    """
    args = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (n_s, n_t, n2, tau)))
    n_s, n_t, n2, tau = (np.ascontiguousarray(v.ravel()) for v in args)
    if np.any(n_s < 0) or np.any(n_t < 0) or np.any(n2 < 0):
        raise ValueError("photon numbers must be >= 0")
    if np.any((tau < 0) | (tau > 1)):
        raise ValueError("transmissivity tau must lie in [0, 1]")
    return _finish(kernels.backend.measures_params(n_s, n_t, n2, tau))


def measure_report_params(n_s: float, n_t: float, n2: float, tau: float) -> MeasureReport:
    """:class:`MeasureReport` of the mixed output via :func:`measures_from_params`."""
    m = measures_from_params(n_s, n_t, n2, tau)
    return MeasureReport(**{k: m[k][0].item() for k in MeasureReport.__dataclass_fields__})


def _finish(out: dict) -> dict:
    lt = out["ppt_lambda_minus"]
    out["classical_corr_1g2"] = np.maximum(out["mutual_info"] - out["discord_1g2"], 0.0)
    out["log_negativity"] = np.maximum(-np.log(2 * lt), 0.0)
    out["entangled"] = lt < 0.5
    return out
