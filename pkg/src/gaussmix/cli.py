"""Command-line front end: ``gaussmix point | sweep | verify``.

Exit codes: 0 success, 1 invalid input, 2 a verification check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import __version__, checks, sweeps
from .core import SingleModeState
from .errors import UnphysicalStateError
from .measures import measure_report_params, nonclassical_depth, p_classical
from .thresholds import effective_nc

OUTPUT_DIR_ENV = "GAUSSMIX_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2

UNITS_NOTE = ("Units: photon numbers are mean photons (dimensionless, >= 0); tau is the "
              "dimensionless power transmissivity in [0, 1]; covariance matrices use "
              "vacuum = 1/2; discord, mutual information, classical correlations and "
              "log-negativity are in nats unless --bits is given.")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _photons(flag):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag} expects a number, got {text!r}") from None
        if not math.isfinite(value) or value < 0:
            raise argparse.ArgumentTypeError(f"{flag} must be a finite number >= 0, got {text!r}")
        return value
    return parse


def _tau(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tau expects a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"--tau must lie in [0, 1], got {text!r}")
    return value


def _number_list(flag):
    def parse(text):
        if text == "random":
            return text
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"{flag} expects a number, a comma list or 'random', got {text!r}") from None
        return values[0] if len(values) == 1 else values
    return parse


def _range_arg(text):
    """``NAME=min:max:count[:scale]``."""
    try:
        name, body = text.split("=", 1)
        parts = body.split(":")
        if len(parts) not in (3, 4):
            raise ValueError
        rng = {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2])}
        if len(parts) == 4:
            rng["scale"] = parts[3]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--range expects NAME=min:max:count[:scale], got {text!r}") from None
    return name.strip(), rng


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussmix", description=(
        "Nonclassicality, discord and entanglement of a squeezed thermal state "
        "mixed with a thermal state at a beam splitter. " + UNITS_NOTE))
    parser.add_argument("--version", action="version", version=f"gaussmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="evaluate every quantifier at one parameter point",
                       description="Print all quantifiers for one input. " + UNITS_NOTE)
    p.add_argument("--ns", type=_photons("--ns"), required=True,
                   help="squeezed photons n_s of the input (photons, >= 0)")
    p.add_argument("--nt", type=_photons("--nt"), required=True,
                   help="thermal photons n_t of the input seed (photons, >= 0)")
    p.add_argument("--n2", type=_photons("--n2"), default=0.0,
                   help="thermal photons of the reference port (photons, >= 0; default 0)")
    p.add_argument("--tau", type=_tau, default=0.5,
                   help="beam-splitter transmissivity (dimensionless, 0..1; default 0.5)")
    p.add_argument("--bits", action="store_true",
                   help="report entropic quantities in bits instead of nats")
    p.add_argument("--json", action="store_true", help="print one JSON object instead of text")

    s = sub.add_parser("sweep", help="run a sweep and write a CSV or JSON table",
                       description=(
                           "Run one sweep kind.  Flags override fields of --spec.  The output "
                           f"goes to --out, or to <kind>.csv in ${OUTPUT_DIR_ENV} (default: "
                           "current directory).  " + UNITS_NOTE))
    s.add_argument("kind", choices=[k.replace("_", "-") for k in sweeps.KINDS])
    s.add_argument("--spec", metavar="FILE", help="JSON sweep spec with \"version\": 1")
    s.add_argument("--out", metavar="PATH", help="output file; '-' writes to stdout")
    s.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    s.add_argument("--seed", type=int, help="64-bit RNG seed (mandatory for scatter)")
    s.add_argument("--samples", type=int, help="number of scatter samples (count)")
    s.add_argument("--n2", type=_number_list("--n2"),
                   help="reference thermal photons (photons): number, comma list, or "
                        "'random' for log-uniform sampling (scatter)")
    s.add_argument("--tau", type=_number_list("--tau"),
                   help="transmissivity (dimensionless, 0..1): number, comma list, or "
                        "'random' (scatter)")
    s.add_argument("--N", type=float, help="total mean photon number n1 + n2 (photons)")
    s.add_argument("--family", choices=sweeps.FAMILIES + ("all",),
                   help="input family for tau-scan and asymptote sweeps")
    s.add_argument("--range", type=_range_arg, action="append", default=[],
                   metavar="NAME=MIN:MAX:COUNT[:SCALE]",
                   help="override a swept range (photons, or dimensionless for tau); "
                        "scale is linear or log; repeatable")
    s.add_argument("--bits", action="store_true",
                   help="write entropic columns in bits (recorded in the metadata line)")

    v = sub.add_parser("verify", help="run the numerical cross-checks",
                       description=("Run the cross-checks and print name, sample count and "
                                    "worst residual for each.  Residuals are in the units of "
                                    "the compared quantity (photons, nats or dimensionless)."))
    v.add_argument("--check", action="append", choices=list(checks.CHECKS),
                   help="run only this check (repeatable)")
    v.add_argument("--samples", type=int, help="override the per-check sample count")
    v.add_argument("--seed", type=int, default=checks.DEFAULT_SEED, help="RNG seed")
    return parser


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else format(value, ".12g")
    return str(value)


ENTROPIC = ("discord_1g2", "discord_2g1", "mutual_info", "classical_corr_1g2", "log_negativity")


def cmd_point(args) -> int:
    state = SingleModeState(args.ns, args.nt)
    report = measure_report_params(args.ns, args.nt, args.n2, args.tau).as_dict()
    enc = effective_nc(state)
    unit = "bits" if args.bits else "nats"
    if args.bits:
        for key in ENTROPIC:
            report[key] /= math.log(2)
    values = {
        "n_s": args.ns, "n_t": args.nt, "n2": args.n2, "tau": args.tau,
        "n1": state.n1, "purity": state.purity, "squeezing": state.squeezing,
        "p_classical": p_classical(state), "depth": nonclassical_depth(state),
        **report,
        "effective_nc": enc.value, "effective_nc_tau": enc.tau_star,
    }
    if args.json:
        print(json.dumps({k: (v if not (isinstance(v, float) and math.isinf(v)) else None)
                          for k, v in values.items()} | {"units": unit}))
        return EXIT_OK
    width = max(map(len, values))
    for key, value in values.items():
        suffix = f"  [{unit}]" if key in ENTROPIC else ""
        print(f"{key:<{width}} = {_fmt(value)}{suffix}")
    return EXIT_OK


def _load_spec(args) -> sweeps.SweepSpec:
    data = {}
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"--spec: cannot read {args.spec}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"--spec: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("--spec: top level must be a JSON object")
    kind = args.kind.replace("-", "_")
    file_kind = str(data.get("kind", kind)).replace("-", "_")
    if file_kind != kind:
        raise UsageError(f"--spec: kind {file_kind!r} does not match subcommand {args.kind!r}")
    data["kind"] = kind
    for key in ("seed", "samples", "n2", "tau", "N", "family"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.range:
        ranges = dict(data.get("ranges") or {})
        ranges.update(dict(args.range))
        data["ranges"] = ranges
    return sweeps.SweepSpec.from_dict(data)


def _output_path(args, kind: str) -> str:
    if args.out:
        return args.out
    base = os.environ.get(OUTPUT_DIR_ENV, ".")
    return os.path.join(base, f"{kind}.{args.format}")


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    rows = sweeps.run(spec)
    if args.bits:
        rows = sweeps.to_bits(rows)
    if args.format == "csv":
        text = sweeps.to_csv(rows, spec, bits=args.bits)
    else:
        text = sweeps.to_json(rows, spec)
    path = _output_path(args, spec.kind)
    if path == "-":
        sys.stdout.write(text)
        print(f"{len(rows)} rows", file=sys.stderr)
        return EXIT_OK
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"--out: cannot write {path}: {exc.strerror}") from None
    print(f"{len(rows)} rows written to {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be a positive integer")
    names = args.check or list(checks.CHECKS)
    failed = []
    for name in names:
        t0 = time.perf_counter()
        result = checks.run_check(name, args.samples, args.seed)
        print(f"{result.line()}  [{time.perf_counter() - t0:.2f} s]")
        if not result.passed:
            failed.append(name)
    if failed:
        print(f"{len(failed)} of {len(names)} checks failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    print(f"all {len(names)} checks passed")
    return EXIT_OK


COMMANDS = {"point": cmd_point, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, sweeps.SpecError, UnphysicalStateError) as exc:
        print(f"gaussmix: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
