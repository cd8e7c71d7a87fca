"""Command-line front end: ``spdc-purity {purity,sweep,oracle-check,presets}``.

Exit codes: 0 success, 1 oracle disagreement, 2 usage error, 3 validation or
I/O error, 4 numerical or conditioning error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import textwrap

import numpy as np

from . import scenarios
from .errors import NumericalError, SpdcError, ValidationError
from .oracle import mc_gaussian_purity
from .quadratic_state import FREQUENCY_TRACE, IDLER_TRACE, assemble_A, evaluate, purity

EXIT_OK, EXIT_ORACLE, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3, 4

#: Default directory for sweep output when ``--out`` is not given.
OUTDIR_ENV = "SPDC_PURITY_OUTDIR"


def _presets_epilog():
    lines = ["presets:"]
    for p in scenarios.PRESETS.values():
        wrapped = textwrap.wrap(p.note, 68)
        lines.append(f"  {p.name:<20}{wrapped[0]}")
        lines.extend(" " * 22 + w for w in wrapped[1:])
    lines.append("")
    lines.append(f"environment: {OUTDIR_ENV} sets the default directory for sweep CSV files.")
    return "\n".join(lines)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="named preset (see 'presets')")
    src.add_argument("--config", help="key = value config file")
    p.add_argument("--dl-nm", type=float, help="filter FWHM for signal and idler, nm (0 = ideal narrow filter, inf = none)")
    p.add_argument("--ws-um", type=float, help="collection mode width for signal and idler, um (inf = single mode)")
    p.add_argument("--wp-um", type=float, help="pump waist, um")
    p.add_argument("--phi-deg", type=float, help="emission angle for signal and idler, degrees")


def _config_from(args):
    """Preset or file first, flags on top."""
    config = scenarios.preset(args.preset) if args.preset else scenarios.load_config(args.config)
    flags = {"dl_nm": args.dl_nm, "w_um": args.ws_um, "w_p_um": args.wp_um, "phi_deg": args.phi_deg}
    for name, value in flags.items():
        if value is not None:
            config = scenarios.with_parameter(config, name, value)
    return config


def _scalar_diagnostics(diag):
    out = {}
    for k, v in diag.items():
        if isinstance(v, (bool, int, float, str)) or v is None:
            out[k] = v
        elif isinstance(v, np.floating):
            out[k] = float(v)
    return out


def cmd_purity(args):
    report = evaluate(_config_from(args))
    values = report.as_dict()
    diag = _scalar_diagnostics(report.diagnostics)
    if args.format == "json":
        print(json.dumps({**values, "diagnostics": diag}, indent=2, sort_keys=False))
    elif args.format == "csv":
        print("quantity,value")
        for k, v in {**values, **diag}.items():
            print(f"{k},{v!r}")
    else:
        width = max(map(len, list(values) + list(diag)))
        for k, v in values.items():
            print(f"{k:<{width}}  {v:.12g}")
        if diag:
            print("diagnostics:")
            for k, v in diag.items():
                print(f"  {k:<{width}}  {v:.6g}" if isinstance(v, float) else f"  {k:<{width}}  {v}")
    return EXIT_OK


def _sweep_values(args):
    if args.values is not None:
        try:
            return [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if args.start is None or args.stop is None or args.steps is None:
        raise ValidationError("give --values or all of --from, --to and --steps")
    if args.steps < 1:
        raise ValidationError("--steps must be at least 1")
    if args.steps == 1:
        return [args.start]
    space = np.geomspace if args.log else np.linspace
    return [float(v) for v in space(args.start, args.stop, args.steps)]


def cmd_sweep(args):
    config = _config_from(args)
    table = scenarios.sweep(config, args.param, _sweep_values(args))
    out = args.out
    if out is None:
        tag = args.preset or os.path.splitext(os.path.basename(args.config))[0]
        out = os.path.join(os.environ.get(OUTDIR_ENV, "."), f"sweep_{tag}_{table.parameter}.csv")
    try:
        table.to_csv(out)
    except OSError as exc:
        raise ValidationError(f"cannot write {out}: {exc.strerror or exc}") from None
    ok = [i for i, s in enumerate(table.status) if s == "ok"]
    col = table.columns.get("purity_spatial_pair", [])
    spatial = [col[i] for i in ok]
    summary = f"{len(table.values)} rows ({len(ok)} ok) -> {out}"
    if spatial:
        summary += f"; purity_spatial_pair min {min(spatial):.6g} max {max(spatial):.6g}"
    print(summary)
    return EXIT_OK


def cmd_oracle_check(args):
    config = _config_from(args)
    a = assemble_A(config)
    traces = {"spatial": FREQUENCY_TRACE, "signal": IDLER_TRACE}
    chosen = traces if args.trace == "both" else {args.trace: traces[args.trace]}
    worst = 0.0
    for name, pairing in chosen.items():
        det = purity(a, pairing)
        est = mc_gaussian_purity(a, pairing, samples=args.samples, seed=args.seed)
        z = est.zscore(det)
        worst = max(worst, abs(z))
        print(
            f"{name:<8} determinant {det:.10f}  monte-carlo {est.value:.10f} +- {est.stderr:.3g}"
            f"  z {z:+.3f}  ess {est.ess:.0f}/{est.samples}"
        )
    passed = worst <= 3.0
    print("agreement: " + ("pass" if passed else "FAIL") + f" (max |z| = {worst:.3f}, threshold 3)")
    return EXIT_OK if passed else EXIT_ORACLE


def cmd_presets(args):
    for p in scenarios.PRESETS.values():
        c = p.config
        pump = (
            f"T0 {c.pump_duration_fs} fs" if c.pump_duration_fs is not None
            else f"dl_p {c.pump_bandwidth_nm} nm" if c.pump_bandwidth_nm is not None else "cw"
        )
        print(
            f"{p.name:<20} {c.crystal.name:<6} L {c.length_um / 1e3:g} mm  w_p {c.w_p_um:g} um  "
            f"phi {math.degrees(c.phi_s):g} deg  w {c.w_s_um:g} um  dl {c.dl_s_nm:g} nm  {pump}"
        )
        if args.verbose:
            print(textwrap.indent(textwrap.fill(p.note, 76), "    "))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdc-purity",
        description="Space-frequency purity and entanglement of SPDC photon pairs (Gaussian model).",
        epilog=_presets_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("purity", help="evaluate one configuration")
    _add_source(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_purity)

    p = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    _add_source(p)
    p.add_argument("--param", required=True, help="w_um|ws, dl_nm|dl, w_p_um|wp, phi_deg|phi")
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--log", action="store_true", help="geometric spacing for --from/--to/--steps")
    p.add_argument("--values", help="comma-separated abscissa values instead of a range")
    p.add_argument("--out", help=f"CSV path (default: ${OUTDIR_ENV} or the working directory)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="compare the determinant formula with Monte Carlo")
    _add_source(p)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trace", choices=("spatial", "signal", "both"), default="both")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("presets", help="list presets")
    p.add_argument("-v", "--verbose", action="store_true", help="include provenance notes")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpdcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
