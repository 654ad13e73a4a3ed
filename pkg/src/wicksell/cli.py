"""Command-line interface.

Subcommands: ``fit`` (point + interval estimation from a CSV of profile
measurements), ``density`` (TSV grid of the approximate and exact
profile densities), ``simulate`` (synthetic profile samples), and
``benchmark`` (bias/stdev replication studies).

Exit codes: 0 success, 2 configuration error, 3 data error,
4 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .distributions import FAMILIES, SizeDistribution
from .errors import DataError, ParameterError
from .estimators import (
    FitOptions,
    ProfileSample,
    effective_diameters,
    fit,
)
from .inference import aic_compare, bootstrap_estimate, likelihood_ratio_region
from .profile_density import (
    approx_profile_pdf,
    build_approximation,
    exact_profile_pdf,
)
from .simulation import (
    BenchmarkSpec,
    report_to_json,
    report_to_tsv,
    run_benchmark,
    simulate_profiles,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


class _CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read_sample(path, args) -> ProfileSample:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise _CliError(f"{path}: empty file", EXIT_DATA)
            fields = [f.strip().lower() for f in reader.fieldnames]
            has_area = "area" in fields
            has_diam = "diameter" in fields
            if has_area == has_diam:
                raise _CliError(
                    f"{path}: need exactly one of 'area' or 'diameter' columns",
                    EXIT_DATA,
                )
            col = "area" if has_area else "diameter"
            values, censored_flags = [], []
            for lineno, row in enumerate(reader, start=2):
                row = {k.strip().lower(): v for k, v in row.items() if k}
                try:
                    values.append(float(row[col]))
                    censored_flags.append(
                        int(float(row.get("censored") or 0)) != 0
                    )
                except (KeyError, TypeError, ValueError):
                    raise _CliError(
                        f"{path}:{lineno}: malformed row {row!r}", EXIT_DATA
                    ) from None
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", EXIT_DATA) from None
    if not values:
        raise _CliError(f"{path}: no usable rows", EXIT_DATA)
    values = np.asarray(values)
    flags = np.asarray(censored_flags)
    if has_area:
        try:
            values = effective_diameters(values, args.diameter_formula)
        except DataError as exc:
            raise _CliError(str(exc), EXIT_DATA) from None
    section = None
    if args.section_w is not None or args.section_h is not None:
        if args.section_w is None or args.section_h is None:
            raise _CliError(
                "--section-w and --section-h must be given together", EXIT_CONFIG
            )
        section = (args.section_w, args.section_h)
    try:
        return ProfileSample(
            interior=values[~flags], censored=values[flags], section=section
        )
    except DataError as exc:
        raise _CliError(str(exc), EXIT_DATA) from None


def _emit(payload, output):
    text = json.dumps(payload, indent=2, default=float)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_fit(args):
    families = [f.strip() for f in args.family.split(",")]
    for fam in families:
        if fam not in FAMILIES:
            raise _CliError(f"unknown family {fam!r}", EXIT_CONFIG)
    if args.method == "ml-weighted" and args.section_w is None:
        raise _CliError("weighted method requires --section-w/--section-h",
                        EXIT_CONFIG)
    sample = _read_sample(args.input, args)
    options = FitOptions(restarts=args.restarts)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "n_interior": sample.n_interior,
        "n_censored": int(sample.censored.size),
        "m": args.m,
        "seed": args.seed,
    }
    if len(families) > 1:
        if args.select != "aic":
            raise _CliError(
                "multiple families require --select aic", EXIT_CONFIG
            )
        comparison = aic_compare(sample, families, approx=args.m,
                                 options=options)
        if not comparison["ranking"]:
            raise _CliError("all family fits failed", EXIT_CONVERGENCE)
        payload["model_choice"] = {
            "criterion": "aic",
            "ranking": [
                {k: row[k] for k in ("family", "logL", "aic", "delta_aic")}
                for row in comparison["ranking"]
            ],
            "failures": comparison["failures"],
        }
        best = comparison["ranking"][0]
        family, result = best["family"], best["fit"]
    else:
        family = families[0]
        try:
            result = fit(sample, family, args.method, approx=args.m,
                         options=options)
        except (DataError, ParameterError) as exc:
            raise _CliError(str(exc), EXIT_DATA) from None
        if not result.converged:
            _emit({**payload, "fit": result.to_dict()}, args.output)
            raise _CliError("fit did not converge", EXIT_CONVERGENCE)
    payload["fit"] = result.to_dict()
    if args.ci == "wilks":
        if result.method not in ("ML", "ML_censored"):
            raise _CliError("wilks intervals need an ML fit", EXIT_CONFIG)
        region = likelihood_ratio_region(
            sample, family, result, p=args.coverage, n_points=args.n_points,
            seed=args.seed, approx=args.m,
        )
        payload["confidence"] = {"type": "wilks", **region.to_dict()}
        # censored-mode caveat: thresholds were calibrated for the
        # ordinary likelihood only
        if result.method == "ML_censored":
            payload["confidence"]["assumes_ordinary_critical_values"] = True
        if args.region_tsv:
            with open(args.region_tsv, "w") as fh:
                fh.write(region.accepted_tsv())
    elif args.ci == "bootstrap":
        boot = bootstrap_estimate(
            sample, family, args.method, n_boot=args.n_boot, p=args.coverage,
            seed=args.seed, approx=args.m, options=options,
        )
        payload["confidence"] = {"type": "bootstrap", **boot.to_dict()}
    _emit(payload, args.output)
    return EXIT_OK


def _cmd_density(args):
    if args.family not in FAMILIES:
        raise _CliError(f"unknown family {args.family!r}", EXIT_CONFIG)
    try:
        dist = SizeDistribution(args.family, args.scale, args.shape)
    except ParameterError as exc:
        raise _CliError(str(exc), EXIT_CONFIG) from None
    approx = build_approximation(args.m)
    y_max = args.y_max or 5.0 * dist.mean_diameter()
    ys = np.linspace(y_max / args.points, y_max, args.points)
    if not np.any(np.isclose(ys, 1.0)) and y_max > 1.0:
        ys = np.sort(np.append(ys, 1.0))  # keep the y=1 reference row
    g = approx_profile_pdf(dist, approx, ys)
    lines = ["y\tg_approx" + ("\tg_exact" if args.exact else "")]
    for i, y in enumerate(ys):
        row = f"{y:.6g}\t{g[i]:.6g}"
        if args.exact:
            row += f"\t{exact_profile_pdf(dist, float(y)):.6g}"
        lines.append(row)
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_manifest(path, args_dict):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": args_dict,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def _cmd_simulate(args):
    if args.family not in FAMILIES:
        raise _CliError(f"unknown family {args.family!r}", EXIT_CONFIG)
    dist = SizeDistribution(args.family, args.scale, args.shape)
    if args.n == 0:
        print("warning: n=0, writing empty sample", file=sys.stderr)
    y = simulate_profiles(dist, args.n, args.seed)
    lines = ["diameter"] + [f"{v:.8g}" for v in y]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _write_manifest(args.output + ".manifest.json", vars(args))
    else:
        sys.stdout.write(text)
    return EXIT_OK


_BENCHMARK_PRESETS = {
    # the log-normal median-diameter replication grid
    "lognormal-median": dict(
        family="lognormal", scale=0.0, shape=0.5,
        sample_sizes=[200, 2000], replicates=1000,
        methods=["ml", "mom", "mde"],
    ),
}


def _cmd_benchmark(args):
    if args.preset:
        if args.preset not in _BENCHMARK_PRESETS:
            raise _CliError(f"unknown preset {args.preset!r}", EXIT_CONFIG)
        kw = dict(_BENCHMARK_PRESETS[args.preset])
    else:
        if not (args.family and args.n_list):
            raise _CliError("need --preset or --family plus --n-list",
                            EXIT_CONFIG)
        kw = dict(
            family=args.family, scale=args.scale, shape=args.shape,
            sample_sizes=[int(v) for v in args.n_list.split(",")],
            replicates=args.replicates,
            methods=args.methods.split(","),
        )
    if args.replicates_override:
        kw["replicates"] = args.replicates_override
    spec = BenchmarkSpec(m=args.m, seed=args.seed, **kw)
    report = run_benchmark(spec)
    text = report_to_tsv(report) if args.format == "tsv" else report_to_json(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _write_manifest(args.output + ".manifest.json", vars(args))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wicksell",
        description="Sphere-size distributions from planar profile measurements",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a diameter law to measurements")
    p_fit.add_argument("--input", required=True, help="CSV with 'area' or 'diameter' column")
    p_fit.add_argument("--family", required=True,
                       help="family, or comma list with --select aic")
    p_fit.add_argument("--method", default="ml",
                       choices=["ml", "ml-censored", "ml-weighted", "mom", "mde"])
    p_fit.add_argument("--m", type=int, default=15)
    p_fit.add_argument("--ci", choices=["none", "wilks", "bootstrap"], default="none")
    p_fit.add_argument("--coverage", type=float, default=0.95)
    p_fit.add_argument("--n-points", type=int, default=50000)
    p_fit.add_argument("--n-boot", type=int, default=2000)
    p_fit.add_argument("--restarts", type=int, default=5)
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.add_argument("--select", choices=["aic"], default=None)
    p_fit.add_argument("--section-w", type=float, default=None)
    p_fit.add_argument("--section-h", type=float, default=None)
    p_fit.add_argument("--diameter-formula", default="area-equivalent",
                       choices=["area-equivalent", "legacy"])
    p_fit.add_argument("--region-tsv", default=None,
                       help="write accepted region points as TSV")
    p_fit.add_argument("--output", default=None)
    p_fit.set_defaults(func=_cmd_fit)

    p_den = sub.add_parser("density", help="tabulate profile densities")
    p_den.add_argument("--family", required=True)
    p_den.add_argument("--scale", type=float, required=True)
    p_den.add_argument("--shape", type=float, required=True)
    p_den.add_argument("--m", type=int, default=15)
    p_den.add_argument("--points", type=int, default=200)
    p_den.add_argument("--y-max", type=float, default=None)
    p_den.add_argument("--exact", action="store_true",
                       help="add the quadrature density column")
    p_den.add_argument("--output", default=None)
    p_den.set_defaults(func=_cmd_density)

    p_sim = sub.add_parser("simulate", help="simulate profile diameters")
    p_sim.add_argument("--family", required=True)
    p_sim.add_argument("--scale", type=float, required=True)
    p_sim.add_argument("--shape", type=float, required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--output", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_bench = sub.add_parser("benchmark", help="replication study of estimators")
    p_bench.add_argument("--preset", default=None)
    p_bench.add_argument("--family", default=None)
    p_bench.add_argument("--scale", type=float, default=1.0)
    p_bench.add_argument("--shape", type=float, default=1.0)
    p_bench.add_argument("--n-list", default=None, help="comma list of sample sizes")
    p_bench.add_argument("--replicates", type=int, default=200)
    p_bench.add_argument("--replicates-override", type=int, default=None,
                         help="override the preset replicate count")
    p_bench.add_argument("--methods", default="ml,mom")
    p_bench.add_argument("--m", type=int, default=15)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p_bench.add_argument("--output", default=None)
    p_bench.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
