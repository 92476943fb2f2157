"""Command-line front end.

Commands::

    hdi index     point estimates on microdata or grouped summaries
    hdi variance  Taylor / BRR / bootstrap standard errors (microdata)
    hdi sweep     standardized indices over scenarios (grouped scenario file)
    hdi null-sim  bootstrap distribution under no disparities (binary microdata)

Results go to ``--out`` or stdout; diagnostics and errors go to stderr as
JSON lines.  Exit status is 0 on success and one of the ``EXIT_*`` codes
otherwise.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io as hio
from .divergence import IndexFamily
from .errors import HDIError, InvalidParameter, NotTwoPsuDesign, ValidationError
from .grouped import ReferenceSpec, WeightingScheme, between_group_index
from .replication import (
    ReplicationConfig,
    bootstrap_design,
    brr_design,
    overlap,
    simulate_null_outcomes,
)
from .scenario import DEFAULT_GRID, discrimination_report, run_sweep
from .survey import SEMethod, _prepare_design, point_estimate, taylor_se

log = logging.getLogger("hdi")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_ESTIMATION = 5
EXIT_IO = 6

_EXIT_BY_CATEGORY = {"parse": EXIT_PARSE, "validation": EXIT_VALIDATION, "estimation": EXIT_ESTIMATION}

DEFAULT_FAMILIES = "ri,sri,atkinson,ssri"
SWEEP_FAMILIES = "sri,risge"


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="input CSV/TSV file")
    common.add_argument("--kind", choices=("microdata", "grouped"), default="microdata")
    common.add_argument("--family", default=None, help="comma-separated index families")
    common.add_argument("--alpha", type=_float_list, default=None, help="comma-separated aversion values")
    common.add_argument("--scheme", choices=("pw", "ew", "both"), default="pw")
    common.add_argument("--reference", default="avg", help="avg, best or target:<t>")
    common.add_argument("--methods", default=None, help="comma-separated subset of taylor,brr,boot")
    common.add_argument("--reps", type=int, default=500, help="bootstrap / null replicates")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $HDI_SEED)")
    common.add_argument("--fay", type=float, default=0.0, help="Fay coefficient for BRR")
    common.add_argument("--singleton", choices=("error", "collapse"), default="error")
    common.add_argument("--baseline", default=None, help="baseline scenario name (sweep)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hdi", description="Reference-invariant health disparity indices.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("index", parents=[common], help="point estimates")
    sub.add_parser("variance", parents=[common], help="design-based standard errors")
    sub.add_parser("sweep", parents=[common], help="scenario sensitivity sweep")
    sub.add_parser("null-sim", parents=[common], help="no-disparity null distribution")
    return parser


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname, "message": record.getMessage()})


def _stderr(obj):
    sys.stderr.write(json.dumps(obj) + "\n")


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HDI_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"HDI_SEED must be an integer, got {env!r}")
    seed = int(np.random.SeedSequence().entropy % (2**32))
    _stderr({"event": "generated_seed", "seed": seed})
    return seed


def _families(args, default):
    return [IndexFamily.parse(f) for f in (args.family or default).split(",") if f.strip()]


def _schemes(args):
    if args.scheme == "both":
        return [WeightingScheme.POPULATION, WeightingScheme.EQUAL]
    return [WeightingScheme.parse(args.scheme)]


def _alphas(args):
    return list(args.alpha) if args.alpha else list(DEFAULT_GRID)


def _cells(args, default_families):
    ref = ReferenceSpec.parse(args.reference)
    for scheme in _schemes(args):
        for fam in _families(args, default_families):
            for a in _alphas(args):
                yield scheme, fam, a, ref


def _row(scheme, fam, a, ref, estimate, **extra):
    return {"family": fam.value, "scheme": scheme.value, "alpha": a, "reference": str(ref), "estimate": estimate, **extra}


def _require_microdata(args):
    if args.kind != "microdata":
        raise ValidationError(f"the {args.command} command needs microdata input (--kind microdata)")


def _sidecar(args):
    return hio.replicates_sidecar_path(args.out) if args.out else None


def cmd_index(args):
    rows = []
    if args.kind == "grouped":
        g = hio.ingest_grouped(args.input)
        for scheme, fam, a, ref in _cells(args, DEFAULT_FAMILIES):
            rows.append(_row(scheme, fam, a, ref, between_group_index(g, scheme, fam, a, ref)))
    else:
        d = hio.ingest_microdata(args.input)
        for scheme, fam, a, ref in _cells(args, DEFAULT_FAMILIES):
            rows.append(_row(scheme, fam, a, ref, point_estimate(d, scheme, fam, a, ref)))
    return rows, []


def _variance_methods(args, d):
    if args.methods:
        try:
            methods = [SEMethod(m.strip()) for m in args.methods.split(",") if m.strip()]
        except ValueError:
            raise InvalidParameter(f"unknown variance method in {args.methods!r} (expected taylor, brr, boot)")
        if SEMethod.BRR in methods and np.any(d.psus_per_stratum() != 2):
            raise NotTwoPsuDesign("BRR was requested but not every stratum has exactly 2 PSUs")
        return methods
    methods = [SEMethod.TAYLOR, SEMethod.BRR, SEMethod.BOOTSTRAP]
    if np.any(d.psus_per_stratum() != 2):
        log.warning("dropping BRR: not every stratum has exactly 2 PSUs")
        methods.remove(SEMethod.BRR)
    return methods


def cmd_variance(args):
    _require_microdata(args)
    d = _prepare_design(hio.ingest_microdata(args.input), args.singleton)
    methods = _variance_methods(args, d)
    seed = _resolve_seed(args) if SEMethod.BOOTSTRAP in methods else None
    cfg = ReplicationConfig(n_reps=args.reps, fay_coefficient=args.fay, rng_seed=seed or 0)
    designs = {}
    if SEMethod.BRR in methods:
        designs[SEMethod.BRR] = brr_design(d, cfg)
    if SEMethod.BOOTSTRAP in methods:
        designs[SEMethod.BOOTSTRAP] = bootstrap_design(d, cfg)
    stats = {m: des.replicate_stats(d) for m, des in designs.items()}
    sidecar = _sidecar(args)
    rows, series = [], []
    for scheme, fam, a, ref in _cells(args, DEFAULT_FAMILIES):
        for m in methods:
            if m is SEMethod.TAYLOR:
                est = taylor_se(d, scheme, fam, a, ref)
                rows.append(_row(scheme, fam, a, ref, est.point, se=est.se, method=m.value))
                continue
            est = designs[m].estimate(d, scheme, fam, a, ref, stats=stats[m])
            extra = {"se": est.se, "method": m.value, "n_reps": len(est.replicates)}
            if m is SEMethod.BOOTSTRAP:
                extra["seed"] = seed
            if sidecar:
                extra["replicates_path"] = os.path.basename(sidecar)
            rows.append(_row(scheme, fam, a, ref, est.point, **extra))
            key = {"family": fam.value, "scheme": scheme.value, "alpha": a, "reference": str(ref), "method": m.value}
            series.append((key, est.replicates))
    return rows, series


def cmd_sweep(args):
    if args.kind != "grouped":
        raise ValidationError("the sweep command needs a grouped scenario file (--kind grouped)")
    baseline, others = hio.ingest_scenarios(args.input, args.baseline)
    families = _families(args, SWEEP_FAMILIES)
    rows = []
    for scheme in _schemes(args):
        result = run_sweep(baseline, others, _alphas(args), families, scheme)
        report = discrimination_report(result)
        for c in result.cells:
            rows.append(
                {
                    "scenario": c.scenario,
                    "family": c.family.value,
                    "scheme": c.scheme.value,
                    "alpha": c.alpha,
                    "reference": "avg",
                    "estimate": c.value,
                    "abs_change": c.abs_change,
                    "rel_change": c.rel_change,
                    "standardized": True,
                    "spread": report.spread[c.family, c.alpha],
                    "ge_collapsed": c.alpha in report.flagged_alphas,
                }
            )
    return rows, []


def cmd_null_sim(args):
    _require_microdata(args)
    d = _prepare_design(hio.ingest_microdata(args.input), args.singleton)
    seed = _resolve_seed(args)
    cfg = ReplicationConfig(n_reps=args.reps, rng_seed=seed)
    design = bootstrap_design(d, cfg)
    null_d = simulate_null_outcomes(d, seed)
    obs_stats = design.replicate_stats(d)
    null_stats = design.replicate_stats(null_d)
    sidecar = _sidecar(args)
    rows, series = [], []
    for scheme, fam, a, ref in _cells(args, "ssri"):
        obs = design.estimate(d, scheme, fam, a, ref, stats=obs_stats)
        null = design.estimate(null_d, scheme, fam, a, ref, stats=null_stats)
        extra = {
            "method": "null",
            "n_reps": cfg.n_reps,
            "seed": seed,
            "null_mean": float(np.mean(null.replicates)),
            "null_sd": float(np.std(null.replicates, ddof=1)) if cfg.n_reps > 1 else 0.0,
            "overlap": overlap(obs.replicates, null.replicates),
        }
        if sidecar:
            extra["replicates_path"] = os.path.basename(sidecar)
        rows.append(_row(scheme, fam, a, ref, obs.point, **extra))
        key = {"family": fam.value, "scheme": scheme.value, "alpha": a, "reference": str(ref)}
        series.append(({**key, "distribution": "observed"}, obs.replicates))
        series.append(({**key, "distribution": "null"}, null.replicates))
    return rows, series


COMMANDS = {"index": cmd_index, "variance": cmd_variance, "sweep": cmd_sweep, "null-sim": cmd_null_sim}


def run(argv=None, stdout=None):
    """Run the CLI and return the exit status instead of exiting."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        rows, series = COMMANDS[args.command](args)
        hio.emit_results(rows, args.format, args.out, stream=stdout)
        if series and args.out:
            hio.write_replicates(hio.replicates_sidecar_path(args.out), series)
    except HDIError as exc:
        _stderr(
            {
                "error": type(exc).__name__,
                "category": exc.category,
                "message": str(exc),
                "line": getattr(exc, "line", None),
            }
        )
        return _EXIT_BY_CATEGORY.get(exc.category, EXIT_ESTIMATION)
    except OSError as exc:
        _stderr({"error": type(exc).__name__, "category": "io", "message": str(exc), "line": None})
        return EXIT_IO
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
