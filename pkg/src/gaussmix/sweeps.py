"""Parameter sweeps producing flat tables of measures.

Each ``run_*`` function takes a :class:`SweepSpec` and returns a list of
row dicts whose keys are ``COLUMNS[kind]`` in order.  Rows are produced in
a fixed order (by grid index) so output bytes do not depend on how the
points were evaluated.

Random sampling uses numpy's PCG64 bit generator seeded from the sweep spec;
independent streams are derived with ``SeedSequence.spawn``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .measures import measures_from_params
from .thresholds import p_threshold_ns, sep_threshold_ns
from ._kernels_py import golden_section_min

SPEC_VERSION = 1
KINDS = ("surface", "tau_scan", "scatter", "imbalance", "asymptote", "threshold_curve")
FAMILIES = ("thermal", "squeezed_vacuum", "p_threshold")
#: Log-uniform sampling window for photon numbers in scatter runs.
SCATTER_PHOTONS = (1e-3, 1e2)
AT_THRESHOLD_TOL = 1e-9

MEASURE_COLUMNS = (
    "discord_1g2", "discord_2g1", "mutual_info", "classical_corr_1g2",
    "ppt_lambda_minus", "log_negativity", "entangled",
)
#: Columns holding entropic quantities, rescaled by ``--bits``.
ENTROPIC_COLUMNS = ("discord_1g2", "discord_2g1", "mutual_info", "classical_corr_1g2",
                    "log_negativity")
STATE_COLUMNS = ("n_s", "n_t", "n2", "tau", "n1")
FLAG_COLUMNS = ("p_classical", "at_threshold")

COLUMNS = {
    "surface": ("curve",) + STATE_COLUMNS + MEASURE_COLUMNS + FLAG_COLUMNS,
    "tau_scan": ("family", "N") + STATE_COLUMNS + MEASURE_COLUMNS + FLAG_COLUMNS,
    "scatter": ("index",) + STATE_COLUMNS + MEASURE_COLUMNS + FLAG_COLUMNS,
    "imbalance": ("d", "N") + STATE_COLUMNS + MEASURE_COLUMNS + FLAG_COLUMNS,
    "asymptote": ("family", "N") + STATE_COLUMNS + MEASURE_COLUMNS + FLAG_COLUMNS
    + ("discord_leading", "discord_rel_dev", "ppt_leading", "ppt_rel_dev"),
    "threshold_curve": ("n1", "n2", "tau", "n_t", "n_s_sep", "squeezed_fraction",
                        "n_s_p", "energy_contour"),
}


class SpecError(ValueError):
    """Invalid sweep specification; the message names the offending field."""


@dataclass
class Range:
    min: float
    max: float
    count: int
    scale: str = "linear"

    def validate(self, name: str, *, allow_negative: bool = False):
        if self.count < 2:
            raise SpecError(f"{name}.count must be >= 2, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise SpecError(f"{name}.scale must be 'linear' or 'log', got {self.scale!r}")
        if not allow_negative and min(self.min, self.max) < 0:
            raise SpecError(f"{name} range must be nonnegative")
        if self.scale == "log" and min(self.min, self.max) <= 0:
            raise SpecError(f"{name} log range must be strictly positive")
        if self.max < self.min:
            raise SpecError(f"{name}.max must be >= {name}.min")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    @classmethod
    def parse(cls, name: str, obj) -> "Range":
        if isinstance(obj, Range):
            return obj
        if isinstance(obj, dict):
            try:
                return cls(float(obj["min"]), float(obj["max"]), int(obj["count"]),
                           str(obj.get("scale", "linear")))
            except KeyError as exc:
                raise SpecError(f"{name} range is missing {exc.args[0]!r}") from None
        if isinstance(obj, (list, tuple)) and len(obj) in (3, 4):
            return cls(float(obj[0]), float(obj[1]), int(obj[2]), *(obj[3:] or ["linear"]))
        raise SpecError(f"{name} must be a range object {{min, max, count, scale}}")

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "count": self.count, "scale": self.scale}


#: Per-kind defaults; any field in a spec file or flag overrides these.
DEFAULTS = {
    "surface": {"ranges": {"n_s": Range(0.0, 3.0, 61), "n_t": Range(0.0, 3.0, 61)},
                "n2": 0.0, "tau": 0.5},
    "tau_scan": {"ranges": {"tau": Range(0.0, 1.0, 101)}, "N": 10.0, "family": "all", "n2": 0.0},
    "scatter": {"samples": 20000, "n2": 0.0, "tau": "random"},
    "imbalance": {"ranges": {"d": Range(0.0, 5.0, 101)}, "N": 5.0, "tau": [0.5, 0.8, 0.99]},
    "asymptote": {"ranges": {"N": Range(1.0, 1e4, 41, "log")}, "family": "all", "n2": 0.0,
                  "tau": 0.5},
    "threshold_curve": {"ranges": {"n1": Range(0.01, 10.0, 100, "log")}, "n2": [0.0, 0.1, 1.0],
                        "tau": 0.5},
}


@dataclass
class SweepSpec:
    """Declarative description of one sweep job.

    ``n2`` and ``tau`` are a number, a list of numbers, or ``"random"``
    (scatter only).  ``ranges`` maps a swept parameter to a :class:`Range`.
    """

    kind: str
    ranges: dict = field(default_factory=dict)
    n2: object = None
    tau: object = None
    N: float | None = None
    family: str | None = None
    seed: int | None = None
    samples: int | None = None
    version: int = SPEC_VERSION

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        data = dict(data)
        version = data.pop("version", SPEC_VERSION)
        if version != SPEC_VERSION:
            raise SpecError(f"version must be {SPEC_VERSION}, got {version!r}")
        kind = str(data.pop("kind", "")).replace("-", "_")
        if kind not in KINDS:
            raise SpecError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
        known = {"ranges", "n2", "tau", "N", "family", "seed", "samples"}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown field(s): {', '.join(sorted(unknown))}")
        merged = {k: v for k, v in DEFAULTS[kind].items() if k != "ranges"}
        ranges = dict(DEFAULTS[kind].get("ranges", {}))
        given = data.pop("ranges", None) or {}
        for name, obj in given.items():
            ranges[name] = Range.parse(f"ranges.{name}", obj)
        merged.update({k: v for k, v in data.items() if v is not None})
        if kind == "imbalance" and "d" not in given:
            ranges["d"] = Range(0.0, float(merged["N"]), 101)
        spec = cls(kind=kind, ranges=ranges, **merged)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        out = {"version": self.version, "kind": self.kind}
        if self.ranges:
            out["ranges"] = {k: v.to_dict() for k, v in sorted(self.ranges.items())}
        for key in ("n2", "tau", "N", "family", "seed", "samples"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    def validate(self):
        for name, rng in self.ranges.items():
            rng.validate(f"ranges.{name}", allow_negative=(name == "d"))
        for key in ("n2", "tau"):
            value = getattr(self, key)
            if value is None or value == "random":
                if value == "random" and self.kind != "scatter":
                    raise SpecError(f"{key}='random' is only valid for scatter sweeps")
                continue
            values = value if isinstance(value, list) else [value]
            try:
                values = [float(v) for v in values]
            except (TypeError, ValueError):
                raise SpecError(f"{key} must be a number, a list of numbers or 'random'") from None
            if any(not math.isfinite(v) or v < 0 for v in values):
                raise SpecError(f"{key} must be finite and nonnegative")
            if key == "tau" and any(v > 1 for v in values):
                raise SpecError("tau must lie in [0, 1]")
        if self.N is not None and not (math.isfinite(self.N) and self.N >= 0):
            raise SpecError("N must be a finite number >= 0")
        if self.family is not None and self.family not in FAMILIES + ("all",):
            raise SpecError(f"family must be one of {', '.join(FAMILIES)} or 'all'")
        if self.kind == "scatter":
            if self.seed is None:
                raise SpecError("seed is mandatory for scatter sweeps")
            if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
                raise SpecError("seed must be an integer in [0, 2**64)")
            if not isinstance(self.samples, int) or self.samples < 1:
                raise SpecError("samples must be a positive integer")
        if self.kind == "asymptote" and self.ranges["N"].max < 1e4:
            raise SpecError("ranges.N.max must reach at least 1e4 for asymptote sweeps")
        if self.kind == "imbalance" and self.N is not None:
            d = self.ranges["d"]
            if d.min < -self.N - 1e-12 or d.max > self.N + 1e-12:
                raise SpecError("ranges.d must lie within [-N, N]")


def make_spec(kind: str, **fields) -> SweepSpec:
    """Convenience constructor applying the per-kind defaults."""
    return SweepSpec.from_dict({"kind": kind, **fields})


def _as_list(value) -> list[float]:
    return [float(v) for v in value] if isinstance(value, list) else [float(value)]


def _measure_rows(n_s, n_t, n2, tau, extra: dict | None = None) -> list[dict]:
    n_s, n_t, n2, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (n_s, n_t, n2, tau)))
    n_s, n_t, n2, tau = (v.ravel() for v in (n_s, n_t, n2, tau))
    m = measures_from_params(n_s, n_t, n2, tau)
    n1 = n_t + (1 + 2 * n_t) * n_s
    p_cl = n_s * (1 + 2 * n_t) <= n_t * n_t
    rows = []
    for k in range(n_s.size):
        row = {} if extra is None else {key: val[k] for key, val in extra.items()}
        row.update(n_s=n_s[k], n_t=n_t[k], n2=n2[k], tau=tau[k], n1=n1[k])
        for col in MEASURE_COLUMNS:
            row[col] = m[col][k]
        row["p_classical"] = bool(p_cl[k])
        row["at_threshold"] = bool(abs(m["ppt_lambda_minus"][k] - 0.5) <= AT_THRESHOLD_TOL)
        rows.append(row)
    return rows


def family_input(family: str, n1: float) -> tuple[float, float]:
    """``(n_s, n_t)`` of the named input family carrying ``n1`` photons."""
    if family == "thermal":
        return 0.0, n1
    if family == "squeezed_vacuum":
        return n1, 0.0
    if family == "p_threshold":
        # n1 = n_t + n_t² on the P-classicality boundary
        n_t = 2 * n1 / (1 + math.sqrt(1 + 4 * n1))
        return p_threshold_ns(n_t), n_t
    raise SpecError(f"unknown family {family!r}")


def _families(spec: SweepSpec) -> tuple[str, ...]:
    return FAMILIES if spec.family in (None, "all") else (spec.family,)


def _discord_1g2(n_s, n_t, n2, tau) -> float:
    return float(measures_from_params(n_s, n_t, n2, tau)["discord_1g2"][0])


def min_discord_ns(n_t: float, n2: float, tau: float, n_s_grid: np.ndarray) -> float:
    """``n_s`` minimizing ``D_{1|2}`` at fixed ``n_t``: grid argmin then golden section."""
    d = measures_from_params(n_s_grid, n_t, n2, tau)["discord_1g2"]
    k = int(np.argmin(d))
    lo, hi = n_s_grid[max(k - 1, 0)], n_s_grid[min(k + 1, n_s_grid.size - 1)]
    x, _ = golden_section_min(lambda s: _discord_1g2(s, n_t, n2, tau), lo, hi, 1e-10)
    return x


def run_surface(spec: SweepSpec) -> list[dict]:
    if spec.kind != "surface":
        raise SpecError(f"expected a surface spec, got {spec.kind!r}")
    n2, tau = float(spec.n2), float(spec.tau)
    ns_grid, nt_grid = spec.ranges["n_s"].values(), spec.ranges["n_t"].values()
    nt_mesh, ns_mesh = np.meshgrid(nt_grid, ns_grid, indexing="ij")
    rows = _measure_rows(ns_mesh, nt_mesh, n2, tau, {"curve": ["grid"] * ns_mesh.size})
    curves = [
        ("thermal", np.zeros_like(nt_grid), nt_grid),
        ("squeezed_vacuum", ns_grid, np.zeros_like(ns_grid)),
        ("p_threshold", np.array([p_threshold_ns(t) for t in nt_grid]), nt_grid),
        ("min_discord", np.array([min_discord_ns(t, n2, tau, ns_grid) for t in nt_grid]), nt_grid),
    ]
    for name, ns, nt in curves:
        rows += _measure_rows(ns, nt, n2, tau, {"curve": [name] * ns.size})
    return rows


def run_tau_scan(spec: SweepSpec) -> list[dict]:
    if spec.kind != "tau_scan":
        raise SpecError(f"expected a tau_scan spec, got {spec.kind!r}")
    taus = spec.ranges["tau"].values()
    n2 = float(spec.n2)
    rows = []
    for family in _families(spec):
        n_s, n_t = family_input(family, spec.N - n2)
        rows += _measure_rows(n_s, n_t, n2, taus,
                              {"family": [family] * taus.size, "N": [spec.N] * taus.size})
    return rows


def scatter_samples(spec: SweepSpec) -> tuple[np.ndarray, ...]:
    """Draw ``(n_s, n_t, n2, tau)`` for a scatter spec.

    Each quantity has its own child stream of the sweep seed, so changing
    one sampling law does not shift the others.
    """
    streams = [np.random.Generator(np.random.PCG64(s))
               for s in np.random.SeedSequence(spec.seed).spawn(4)]
    lo, hi = np.log10(SCATTER_PHOTONS[0]), np.log10(SCATTER_PHOTONS[1])
    n = spec.samples
    n_s = 10 ** streams[0].uniform(lo, hi, n)
    n_t = 10 ** streams[1].uniform(lo, hi, n)
    n2 = 10 ** streams[2].uniform(lo, hi, n) if spec.n2 == "random" else np.full(n, float(spec.n2))
    tau = streams[3].uniform(0.0, 1.0, n) if spec.tau == "random" else np.full(n, float(spec.tau))
    return n_s, n_t, n2, tau


def run_scatter(spec: SweepSpec) -> list[dict]:
    if spec.kind != "scatter":
        raise SpecError(f"expected a scatter spec, got {spec.kind!r}")
    n_s, n_t, n2, tau = scatter_samples(spec)
    return _measure_rows(n_s, n_t, n2, tau, {"index": np.arange(spec.samples)})


def run_imbalance(spec: SweepSpec) -> list[dict]:
    """Thermal-only inputs sharing ``N`` photons, ``d = n1 − n2``."""
    if spec.kind != "imbalance":
        raise SpecError(f"expected an imbalance spec, got {spec.kind!r}")
    d = spec.ranges["d"].values()
    rows = []
    for tau in _as_list(spec.tau):
        n1 = np.maximum((spec.N + d) / 2, 0.0)
        n2 = np.maximum((spec.N - d) / 2, 0.0)
        rows += _measure_rows(0.0, n1, n2, tau, {"d": d, "N": [spec.N] * d.size})
    return rows


def run_asymptote(spec: SweepSpec) -> list[dict]:
    """Exact values against the large-N leading-order forms.

    Leading orders: squeezed vacuum ``D ≈ ln(√N/2) + 1`` and
    ``λ̃₋ ≈ 1/(4√N)``; thermal ``D → ln 2``.  No closed form is recorded
    for the P-threshold family (``nan``).
    """
    if spec.kind != "asymptote":
        raise SpecError(f"expected an asymptote spec, got {spec.kind!r}")
    ns_, n2, tau = spec.ranges["N"].values(), float(spec.n2), float(spec.tau)
    rows = []
    for family in _families(spec):
        inputs = np.array([family_input(family, n - n2) for n in ns_])
        fam_rows = _measure_rows(inputs[:, 0], inputs[:, 1], n2, tau,
                                 {"family": [family] * ns_.size, "N": ns_})
        for row in fam_rows:
            n = row["N"]
            if family == "squeezed_vacuum":
                d_lead, l_lead = math.log(math.sqrt(n) / 2) + 1, 1 / (4 * math.sqrt(n))
            elif family == "thermal":
                d_lead, l_lead = math.log(2), math.nan
            else:
                d_lead, l_lead = math.nan, math.nan
            row["discord_leading"] = d_lead
            row["discord_rel_dev"] = abs(row["discord_1g2"] - d_lead) / row["discord_1g2"] \
                if row["discord_1g2"] > 0 else math.nan
            row["ppt_leading"] = l_lead
            row["ppt_rel_dev"] = abs(row["ppt_lambda_minus"] - l_lead) / row["ppt_lambda_minus"]
        rows += fam_rows
    return rows


def sep_threshold_at_energy(n1: float, n2: float, tau: float) -> tuple[float, float]:
    """``(n_t, n_s^sep)`` on the separability boundary with ``n1`` input photons."""
    if n1 == 0:
        return 0.0, 0.0

    def excess(n_t):
        return n_t + (1 + 2 * n_t) * sep_threshold_ns(n_t, n2, tau) - n1

    if excess(0.0) >= 0:
        # the boundary needs more than n1 photons even without thermal seed
        return math.nan, math.nan
    n_t = brentq(excess, 0.0, n1, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return n_t, sep_threshold_ns(n_t, n2, tau)


def run_threshold_curve(spec: SweepSpec) -> list[dict]:
    """Squeezed fraction ``n_s^sep/n1`` on the separability boundary vs ``n1``."""
    if spec.kind != "threshold_curve":
        raise SpecError(f"expected a threshold_curve spec, got {spec.kind!r}")
    n1s = spec.ranges["n1"].values()
    tau = float(_as_list(spec.tau)[0])
    rows = []
    for n2 in _as_list(spec.n2):
        for n1 in n1s:
            n_t, n_s = sep_threshold_at_energy(n1, n2, tau)
            rows.append({
                "n1": n1, "n2": n2, "tau": tau, "n_t": n_t, "n_s_sep": n_s,
                "squeezed_fraction": n_s / n1 if n1 > 0 else math.nan,
                "n_s_p": p_threshold_ns(n_t) if math.isfinite(n_t) else math.nan,
                # photon number of the boundary point; equals n1 on the contour
                "energy_contour": n_s + n_t + 2 * n_s * n_t,
            })
    return rows


RUNNERS = {
    "surface": run_surface,
    "tau_scan": run_tau_scan,
    "scatter": run_scatter,
    "imbalance": run_imbalance,
    "asymptote": run_asymptote,
    "threshold_curve": run_threshold_curve,
}


def run(spec: SweepSpec) -> list[dict]:
    return RUNNERS[spec.kind](spec)


def to_bits(rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        row = dict(row)
        for col in ENTROPIC_COLUMNS:
            if col in row:
                row[col] = row[col] / math.log(2)
        out.append(row)
    return out


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def metadata(spec: SweepSpec, *, bits: bool = False) -> dict:
    from . import __version__

    return {
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "rng": "numpy PCG64 via SeedSequence.spawn",
        "units": "bits" if bits else "nats",
        "artifact_version": __version__,
    }


def to_csv(rows: list[dict], spec: SweepSpec, *, bits: bool = False) -> str:
    """CSV text: one ``#``-prefixed JSON metadata line, header, rows."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(metadata(spec, bits=bits), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    cols = COLUMNS[spec.kind]
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(rows: list[dict], spec: SweepSpec) -> str:
    cols = COLUMNS[spec.kind]
    return json.dumps([{c: _json_value(row[c]) for c in cols} for row in rows], indent=1) + "\n"


def read_csv(path) -> tuple[dict, list[dict]]:
    """Read a sweep CSV back as ``(metadata, rows)`` with string values."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError("missing metadata line")
        meta = json.loads(first[2:])
        return meta, list(csv.DictReader(fh))
