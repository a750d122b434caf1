import argparse
import json
import logging
import sys
from typing import List, Optional

import control
from models.errors import ConfigError, FitDiverged, LZROError, UnknownPreset
from pipelines import compare_pipeline, fit_pipeline, run_pipeline, sweep_pipeline
from pipelines.run_config import FIELDS, env_overrides, load_config_file, load_sidecar, resolve_config
from registries import preset_registries
from registries.standards.model_standards import fit_exponential, fit_linear, sweep_amplitude, sweep_detuning

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_FIT = 4


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat JSON config file")
    parser.add_argument("--from-sidecar", help="Repeat a run from its .meta.json sidecar")
    for key, (kind, help_text) in FIELDS.items():
        flag = "--" + key.replace("_", "-")
        if kind is bool:
            parser.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None, help=help_text)
        elif kind is list:
            parser.add_argument(flag, dest=key, type=float, nargs="+", default=None, help=help_text)
        else:
            parser.add_argument(flag, dest=key, type=kind, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lzro",
        description="Landau-Zener-Stueckelberg interference and Rabi oscillation of lattice clock atoms",
    )
    parser.add_argument("--log-level", default=control.LOG_LEVEL, help="Root logger level")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Simulate a scan and write data plus metadata")
    _add_config_flags(run)

    sweep = commands.add_parser("sweep", help="Sweep A or the detuning and locate interference extrema")
    _add_config_flags(sweep)
    sweep.add_argument("--axis", choices=(sweep_amplitude, sweep_detuning), required=True)
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--count", type=int, default=121)

    fit = commands.add_parser("fit", help="Fit a (time, value) data file")
    fit.add_argument("input", help="CSV with time and value as the first two columns")
    fit.add_argument("--model", choices=(fit_exponential, fit_linear), required=True)
    fit.add_argument("--contrast-period", type=float, default=None,
                     help="Treat the input as a p_e trace and fit its contrast per window of this length (s)")
    fit.add_argument("--out", default=None)

    commands.add_parser("presets", help="List compiled-in presets")

    compare = commands.add_parser("compare", help="Contrast decay of nondriven versus driven ensembles")
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--coupling-bins", type=int, default=compare_pipeline.COMPARISON_BINS)
    compare.add_argument("--jobs", type=int, default=control.JOBS)
    compare.add_argument("--out-dir", default=".")
    return parser


def _resolve(args: argparse.Namespace):
    file_values = {}
    if args.from_sidecar:
        file_values.update(load_sidecar(args.from_sidecar))
    if args.config:
        file_values.update(load_config_file(args.config))
    flag_values = {key: getattr(args, key) for key in FIELDS if getattr(args, key) is not None}
    return resolve_config(file_values, env_overrides(), flag_values)


def _print_json(record) -> None:
    print(json.dumps(record, indent=2, sort_keys=True, default=str))


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "presets":
        for name in preset_registries.list_presets():
            drive = preset_registries.preset(name).drive
            print(f"{name}: g={drive.g_bare:g} Hz, A={drive.amplitude:g}, f_s={drive.mod_freq_hz:g} Hz")
        return EXIT_OK
    if args.command == "run":
        _, data_path, meta_path = run_pipeline.run(_resolve(args))
        print(f"{data_path}\n{meta_path}")
        return EXIT_OK
    if args.command == "sweep":
        _, report, data_path = sweep_pipeline.run_sweep(_resolve(args), args.axis, args.start, args.stop, args.count)
        _print_json(report)
        print(data_path)
        return EXIT_OK
    if args.command == "fit":
        result = fit_pipeline.fit(args.input, args.model, args.contrast_period, args.out)
        _print_json(result.to_dict())
        return EXIT_OK
    if args.command == "compare":
        report = compare_pipeline.compare(args.seed, args.coupling_bins, args.jobs, args.out_dir)
        _print_json(report["pairs"])
        return EXIT_OK
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        return dispatch(args)
    except (ConfigError, UnknownPreset) as e:
        logging.error(f"configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FitDiverged as e:
        logging.error(f"fit diverged: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FIT
    except LZROError as e:
        logging.error(f"simulation error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as e:
        logging.error(f"invalid argument: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
