"""
CLI Controller
Handles command line interface and orchestrates simulation and analysis flow.
"""

import re # density file time stamps
import sys # stdout/stderr
import time # wall-clock for the manifest
import argparse # command-line parsing
import logging # logging system implementation
from pathlib import Path # filepath handling
from typing import Dict, List, Optional, Sequence, Tuple # type annotations

from baseline_suite import BaselineSuite # BASELINE_SUITE
from comparison_table import build_comparison_table, power_law_preferred # TABLE1
from config_parser import emit_config, load_config # CONFIG
from ensemble import run_ensemble # ENSEMBLE
from errors import WealthSimError # ERRORS
from fitting import (
    FitFailure, FitFamily, LognormalMethod, collapse_search, default_fit_window, fit_families,
    fit_lognormal, fit_power_law,
) # FITTING
from presets import DEFAULT_SEED, Scale, preset_configs # PRESETS
from result_writer import (
    SCHEMA_VERSION, TOOL_VERSION, RunManifest, collapse_to_dict, emit_density_csv, emit_manifest,
    emit_summary_json, fit_to_dict, read_density_csv, write_json,
) # RESULT_WRITER
from stats import DensityEstimate # STATS

logger = logging.getLogger(__name__)

_TIME_IN_NAME = re.compile(r"_t(\d+)")
_FAMILIES = {"powerlaw": (FitFamily.POWER_LAW,), "lognormal": (FitFamily.LOGNORMAL,),
             "both": (FitFamily.POWER_LAW, FitFamily.LOGNORMAL)}


def parse_window(text: str) -> Tuple[float, float]:
    """`lo,hi` with lo < hi"""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"window must be lo,hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"window bounds must be numbers, got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"window needs lo < hi, got {text!r}")
    return lo, hi


def parse_alpha_grid(text: str) -> List[float]:
    """`start:stop:step`, both ends inclusive"""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"alpha grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha grid values must be numbers, got {text!r}")
    if step <= 0.0 or stop < start:
        raise argparse.ArgumentTypeError(f"alpha grid needs step > 0 and stop >= start, got {text!r}")
    count = int((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_density_arg(text: str) -> Tuple[int, str]:
    """`TIME=PATH`, or a path whose file name carries `_t<TIME>`"""
    if "=" in text:
        time_text, path = text.split("=", 1)
        try:
            return int(float(time_text)), path
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad snapshot time in {text!r}")
    match = _TIME_IN_NAME.search(Path(text).stem)
    if match is None:
        raise argparse.ArgumentTypeError(f"cannot tell the snapshot time of {text!r}; use TIME=PATH")
    return int(match.group(1)), text


class CLIController:
    """
    Main CLI controller implementation, orchestrates application flow.
    """

    def __init__(self) -> None:
        self.baseline_suite: BaselineSuite = BaselineSuite()

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            description="Asset-exchange wealth simulator and tail analysis",
            prog="wealthsim"
        )
        commands = parser.add_subparsers(dest="command", required=True, metavar="command")

        simulate = commands.add_parser("simulate", help="run an ensemble from a config file")
        simulate.add_argument("--config", required=True, help="run configuration file")
        simulate.add_argument("--out", required=True, help="output directory")
        simulate.add_argument("--threads", type=int, default=None, help="worker threads")
        simulate.add_argument("--window", type=parse_window, default=None, help="fit window lo,hi")
        simulate.add_argument("--alpha-grid", type=parse_alpha_grid, default=None,
                              help="collapse exponent grid start:stop:step (needs two or more snapshot times)")

        fit = commands.add_parser("fit", help="fit a density CSV")
        fit.add_argument("--density", required=True, help="density CSV written by simulate")
        fit.add_argument("--family", choices=sorted(_FAMILIES), default="both")
        fit.add_argument("--window", type=parse_window, default=None, help="fit window lo,hi")
        fit.add_argument("--lognormal-method", choices=[m.value for m in LognormalMethod],
                         default=LognormalMethod.REGRESSION.value)
        fit.add_argument("--out", default=None, help="output JSON (stdout when omitted)")

        collapse = commands.add_parser("collapse", help="scaling collapse of time-stamped densities")
        collapse.add_argument("--density", type=parse_density_arg, action="append", required=True,
                              help="TIME=PATH or a path containing _t<TIME>; repeat per snapshot")
        collapse.add_argument("--alpha-grid", type=parse_alpha_grid, required=True,
                              help="exponent grid start:stop:step")
        collapse.add_argument("--invert-exponent", action="store_true",
                              help="rescale with x^-alpha instead of x^alpha")
        collapse.add_argument("--out", default=None, help="output JSON (stdout when omitted)")

        table1 = commands.add_parser("table1", help="power-law vs lognormal table for all models")
        table1.add_argument("--scale", choices=[s.value for s in Scale], default=Scale.DESK.value)
        table1.add_argument("--seed", type=int, default=DEFAULT_SEED)
        table1.add_argument("--threads", type=int, default=None)
        table1.add_argument("--window", type=parse_window, default=None)
        table1.add_argument("--out", default=None, help="directory for table1.csv and per-model summaries")

        baseline = commands.add_parser("baseline", help="pure-model validation checks")
        baseline.add_argument("--seed", type=int, default=DEFAULT_SEED)
        baseline.add_argument("--threads", type=int, default=None)
        baseline.add_argument("--out", default=None, help="output JSON")
        return parser

    def parse_arguments(self, argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
        """
        Parse command line arguments.
        Supports: simulate, fit, collapse, table1 and baseline.
        """
        return self.build_parser().parse_args(argv)

    def simulate(self, args: argparse.Namespace) -> int:
        """
        Run the configured ensemble and write one density CSV per snapshot
        time, the summary JSON and the manifest.

        Returns: 0 for success
        """
        start_time = time.time()
        config = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        result = run_ensemble(config, threads=args.threads)

        outputs: Dict[int, str] = {}
        fits = {}
        for t in config.snapshot_times:
            path = out_dir / f"density_t{t}.csv"
            emit_density_csv(result.per_time[t], path)
            outputs[t] = path.name
            fits[t] = fit_families(result.per_time[t], args.window, LognormalMethod.MOMENTS)

        collapses = None
        if args.alpha_grid is not None:
            if len(config.snapshot_times) < 2:
                logger.warning("Skipping collapse: config has a single snapshot time")
            else:
                snapshots = [(t, result.per_time[t]) for t in config.snapshot_times]
                collapses = [collapse_search(snapshots, args.alpha_grid, inverted)[1] for inverted in (False, True)]

        (out_dir / "config.cfg").write_text(emit_config(config), encoding="utf-8")
        emit_summary_json(result, fits, out_dir / "summary.json", collapses)
        manifest = RunManifest(config=config, wall_clock_seconds=time.time() - start_time,
                               outputs=outputs, summary="summary.json")
        emit_manifest(manifest, out_dir / "manifest.json")

        print(f"Wrote {len(outputs)} density file(s), summary.json and manifest.json to {out_dir}")
        return 0

    def fit(self, args: argparse.Namespace) -> int:
        """
        Fit the requested families to one density CSV.

        Returns: 0 if any family was fitted, 1 if every fit failed
        """
        density = read_density_csv(args.density)
        window = args.window if args.window is not None else default_fit_window(density)
        method = LognormalMethod(args.lognormal_method)

        outcomes = []
        for family in _FAMILIES[args.family]:
            try:
                if family is FitFamily.POWER_LAW:
                    outcomes.append(fit_power_law(density, window))
                else:
                    outcomes.append(fit_lognormal(density, window, method))
            except WealthSimError as e:
                outcomes.append(FitFailure(family, e.code, str(e)))

        document = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "density": str(args.density),
            "fits": [fit_to_dict(o) for o in outcomes],
        }
        write_json(document, args.out)
        return 0 if any(not isinstance(o, FitFailure) for o in outcomes) else 1

    def collapse(self, args: argparse.Namespace) -> int:
        """
        Search the exponent grid for the best collapse of the given densities.

        Returns: 0 for success
        """
        snapshots: List[Tuple[int, DensityEstimate]] = sorted(
            ((t, read_density_csv(path)) for t, path in args.density), key=lambda item: item[0]
        )
        best_alpha, result = collapse_search(snapshots, args.alpha_grid, args.invert_exponent)
        logger.info("Best collapse exponent %g (quality %g)", best_alpha, result.quality)
        document = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "times": [t for t, _ in snapshots],
            "collapse": collapse_to_dict(result),
        }
        write_json(document, args.out)
        return 0

    def table1(self, args: argparse.Namespace) -> int:
        """
        Run every composite model at the chosen scale and print the
        power-law vs lognormal comparison.

        Returns: 0 for success
        """
        configs = preset_configs(Scale(args.scale), args.seed)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
        results = {}
        for variant, config in configs.items():
            results[variant] = run_ensemble(config, threads=args.threads)
            if args.out:
                fits = {t: fit_families(results[variant].per_time[t], args.window, LognormalMethod.MOMENTS)
                        for t in config.snapshot_times}
                emit_summary_json(results[variant], fits, Path(args.out) / f"summary_{variant.value}.json")

        table = build_comparison_table(results, args.window)
        if args.out:
            path = Path(args.out) / "table1.csv"
            table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
            logger.info("Wrote %s", path)

        print(table.to_string(index=False))
        for model, preferred in power_law_preferred(table).items():
            print(f"{model}: power law {'preferred' if preferred else 'NOT preferred'}")
        return 0

    def baseline(self, args: argparse.Namespace) -> int:
        """
        Run the validation checks.

        Returns: 0 if every check passed, 1 otherwise
        """
        report = self.baseline_suite.run_all(args.seed, threads=args.threads)
        for r in report["checks"]:
            status = "PASS" if r.passed else "FAIL"
            detail = f"error: {r.error}" if r.error else f"value={r.value:.6g} threshold={r.threshold:g}"
            print(f"{status} {r.name} {detail} ({r.latency_ms} ms)")

        if args.out:
            write_json({
                "schema_version": SCHEMA_VERSION,
                "tool_version": TOOL_VERSION,
                "seed": args.seed,
                "passed": report["passed"],
                "checks": [r.__dict__ for r in report["checks"]],
            }, args.out)
        return 0 if report["passed"] else 1

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Entry point for CLI controller.

        Returns: Exit code (0 for success, 1 for failure, 2 for usage errors).
        """

        try:
            args = self.parse_arguments(argv)
        except SystemExit as e:
            # argparse already printed usage
            return e.code if isinstance(e.code, int) else 2

        handlers = {
            "simulate": self.simulate,
            "fit": self.fit,
            "collapse": self.collapse,
            "table1": self.table1,
            "baseline": self.baseline,
        }
        try:
            logger.info("Executing command: %s", args.command)
            return handlers[args.command](args)

        except KeyboardInterrupt:
            print("Operation interrupted by user", file=sys.stderr)
            return 1
        except (WealthSimError, OSError) as e:
            print(f"Error: {str(e)}", file=sys.stderr)
            logger.error("Error: %s", e)
            return 1
        except Exception as e:
            print(f"Error: {str(e)}", file=sys.stderr)
            logger.exception("Unexpected failure in %s", args.command)
            return 1
