import argparse
import logging
import sys
from datetime import datetime as dt
from pathlib import Path

import pandas as pd
from ruamel.yaml.error import YAMLError

import predictoco
from predictoco.errors import PredictocoError, SettingsError
from predictoco.experiments import (
    checks_frame,
    make_cells,
    rate_report,
    run_cells,
    summary_frame,
    sweep,
    verify,
)
from predictoco.params import DEFAULT_SETTINGS_PATH, SETTINGS
from predictoco.util import (
    build_settings,
    check_settings,
    load_settings,
    write_results_file,
    write_settings_file,
)

if not sys.warnoptions:
    import warnings

    warnings.simplefilter("ignore")

COMMANDS = ["run", "sweep", "verify", "fit"]

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_BAD_SETTINGS = 2


def parse_command_line(argv):
    """
    Parse command line arguments. See the -h option.

    :param argv: arguments on the command line must include caller file name.
    """
    parser = argparse.ArgumentParser(
        description="Online optimization with long-term constraints and hints."
    )
    parser.add_argument(
        "command",
        choices=COMMANDS,
        help=(
            "run: one run per (T, seed). sweep: runs plus growth-rate fits. "
            "verify: the checker battery. fit: growth rates of an existing summary.csv."
        ),
    )
    parser.add_argument(
        "-c",
        "--config",
        dest="config",
        type=str,
        default=str(DEFAULT_SETTINGS_PATH),
        help="Specify a YAML settings file.",
    )
    parser.add_argument(
        "-o",
        "--out",
        dest="out",
        type=str,
        default=None,
        help="Folder for the results, by default a timestamped folder under the results path.",
    )
    parser.add_argument(
        "--trace",
        dest="trace",
        action="store_true",
        help="Write the per-step trace of every run to <out>/traces.",
    )
    parser.add_argument(
        "-j",
        "--jobs",
        dest="jobs",
        type=int,
        default=SETTINGS["JOBS"],
        help="Number of worker processes for independent runs.",
    )
    parser.add_argument(
        "--seed-override",
        dest="seed_override",
        type=int,
        default=None,
        help="Replace the list of seeds with this single seed.",
    )
    parser.add_argument(
        "--summary",
        dest="summary",
        type=str,
        default=None,
        help="Summary csv read by the fit command, by default <out>/summary.csv.",
    )
    arguments = parser.parse_args(argv[1:])
    return arguments


def _write_traces(results, out_folder: Path):
    for result in results:
        if result.trace is not None:
            write_results_file(
                result.trace.to_frame(), out_folder / "traces", f"{result.cell.name}.csv"
            )


def _write_summary(results, out_folder: Path):
    write_results_file(summary_frame(results), out_folder, "summary.csv")
    write_results_file(checks_frame(results), out_folder, "checks.csv")


def _write_text(text: str, out_folder: Path, file_name: str):
    with open(out_folder / file_name, "w", encoding="utf-8", newline="\n") as f:
        f.write(text + "\n")


def cmd_run(settings: dict, args, out_folder: Path) -> int:
    logger = logging.getLogger(predictoco.__name__)
    check_settings(settings, mode="run")
    results = run_cells(settings, make_cells(settings), args.jobs, settings["output"]["trace"])
    _write_summary(results, out_folder)
    _write_traces(results, out_folder)
    failed = [r.cell.name for r in results if not r.passed]
    if failed:
        logger.warning(f"Checks failed for {', '.join(failed)}")
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def cmd_sweep(settings: dict, args, out_folder: Path) -> int:
    logger = logging.getLogger(predictoco.__name__)
    check_settings(settings, mode="sweep")
    results, reports = sweep(settings, args.jobs, settings["output"]["trace"])
    _write_summary(results, out_folder)
    _write_traces(results, out_folder)
    _write_text("\n\n".join(r.to_text() for r in reports), out_folder, "rate_report.txt")
    for report in reports:
        logger.info("Rate report\n" + report.to_text())
    if not all(r.passed for r in reports):
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def cmd_verify(settings: dict, args, out_folder: Path) -> int:
    logger = logging.getLogger(predictoco.__name__)
    check_settings(settings, mode="verify")
    report = verify(settings, args.jobs, settings["output"]["trace"])
    _write_summary(report.results, out_folder)
    _write_traces(report.results, out_folder)
    _write_text(report.to_text(), out_folder, "verification_report.txt")
    logger.info("Verification report\n" + report.to_text())
    if not report.passed:
        logger.warning(f"Failing checks: {', '.join(report.failing_checks)}")
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def cmd_fit(settings: dict, args, out_folder: Path) -> int:
    logger = logging.getLogger(predictoco.__name__)
    summary_path = Path(args.summary) if args.summary else out_folder / "summary.csv"
    logger.info(f"Fitting growth rates of {summary_path}")
    summary = pd.read_csv(summary_path)
    reports = rate_report(
        summary, settings["sweep"]["regret_slack"], settings["sweep"]["violation_slack"]
    )
    _write_text("\n\n".join(r.to_text() for r in reports), out_folder, "rate_report.txt")
    for report in reports:
        logger.info("Rate report\n" + report.to_text())
    if not all(r.passed for r in reports):
        return EXIT_CHECKS_FAILED
    return EXIT_OK


def results_folder(args) -> Path:
    """--out when given, then output.results_folder of the settings file, then a
    timestamped folder under the results path."""
    if args.out is not None:
        return Path(args.out)
    folder = None
    if Path(args.config).is_file():
        try:
            settings = load_settings(path=args.config)
        except YAMLError:
            # Reported once the logger is up
            settings = {}
        output = settings.get("output") if isinstance(settings, dict) else None
        if isinstance(output, dict):
            folder = output.get("results_folder")
    if folder:
        return Path(folder)
    return Path(SETTINGS["RESULTS"]) / dt.now().strftime("%Y-%m-%d %H.%M.%S")


def run(argv) -> int:

    args = parse_command_line(argv)

    out_folder = results_folder(args)
    out_folder.mkdir(exist_ok=True, parents=True)

    # Create a logger to output any messages we might have...
    logger = logging.getLogger(predictoco.__name__)
    logger.setLevel(logging.INFO)
    handler = logging.StreamHandler()
    formatter = logging.Formatter(
        # More extensive test-like formatter...
        "%(asctime)s [%(levelname)8s] %(name)s:%(lineno)s %(message)s",
        # This is the datetime format string.
        "%Y-%m-%d %H:%M:%S",
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    filehandler = logging.FileHandler(out_folder / "log.txt")
    filehandler.setFormatter(formatter)
    logger.addHandler(filehandler)

    try:
        logger.info(f"Reading settings file {args.config}")
        if not Path(args.config).is_file():
            raise SettingsError(f"Settings file {args.config} doesn't exist")
        settings = build_settings(load_settings(path=args.config))
        if args.trace:
            settings["output"]["trace"] = True
        if args.seed_override is not None:
            logger.info(f"Seeds replaced by {args.seed_override}")
            settings["sweep"]["seeds"] = [args.seed_override]
        write_settings_file(settings, out_folder, "settings.yml")

        commands = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify, "fit": cmd_fit}
        status = commands[args.command](settings, args, out_folder)
    except SettingsError as e:
        logger.error(str(e))
        for path in e.field_paths:
            logger.error(f"  offending field: {path}")
        status = EXIT_BAD_SETTINGS
    except PredictocoError as e:
        logger.error(f"{type(e).__name__}: {e}")
        status = EXIT_BAD_SETTINGS
    except YAMLError as e:
        logger.error(f"Settings file {args.config} isn't valid YAML: {e}")
        status = EXIT_BAD_SETTINGS
    finally:
        logger.removeHandler(handler)
        logger.removeHandler(filehandler)
        filehandler.close()

    return status


def main():
    sys.exit(run(sys.argv))


if __name__ == "__main__":
    main()
