"""Command-line entry point

    leadertrack validate --config run.json
    leadertrack gains --config run.json
    leadertrack simulate --config run.json --out results/
    leadertrack ensemble --config run.json --out results/ --jobs 4
    leadertrack paper --trials 300 --seed 0 --out results/
    leadertrack paper --dump-config > paper.json
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from .config import build_scenario, build_topologies, read_run_config, resolve_gain
from .constants import AUTO_GAIN, ExitCode, SimulationMode
from .errors import (
    DivergenceError,
    NotPositiveStable,
    ScheduleError,
    SwitchingCertificateUnavailable,
)
from .experiment import (
    convergence_metrics,
    paper_config,
    run_ensemble,
    single_trial,
    write_ensemble_csv,
    write_summary_json,
)
from .leader import check_admissible
from .models import EnsembleConfig, RunConfig
from .sde_sim import write_trajectory_csv
from .spectral import certify, min_symmetric_eigenvalue, topology_report
from .topology import build_coupling

logger = logging.getLogger("cli")

TRAJECTORY_FILE = "trajectory.csv"
ENSEMBLE_FILE = "ensemble.csv"
SUMMARY_FILE = "summary.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leadertrack",
        description="Leader-follower tracking under noisy measurements and switching topology",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="check every topology's hypotheses")
    validate.add_argument("--config", type=Path, required=True)

    gains = commands.add_parser("gains", help="print the gain certificate")
    gains.add_argument("--config", type=Path, required=True)

    simulate = commands.add_parser("simulate", help="run one trial to trajectory.csv")
    simulate.add_argument("--config", type=Path, required=True)
    simulate.add_argument("--trial", type=int, default=0, help="trial index of the noise stream")
    _add_run_flags(simulate)

    ensemble = commands.add_parser("ensemble", help="run M trials to ensemble.csv and summary.json")
    ensemble.add_argument("--config", type=Path, required=True)
    _add_run_flags(ensemble)
    _add_ensemble_flags(ensemble)

    paper = commands.add_parser("paper", help="run the built-in reference scenario as an ensemble")
    paper.add_argument(
        "--dump-config", action="store_true", help="print the scenario's configuration and exit"
    )
    _add_run_flags(paper)
    _add_ensemble_flags(paper)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    command = {
        "validate": cmd_validate,
        "gains": cmd_gains,
        "simulate": cmd_simulate,
        "ensemble": cmd_ensemble,
        "paper": cmd_paper,
    }[args.command]

    try:
        return int(command(args))
    except ValidationError as e:
        error = e.errors()[0]
        print(f"Schema error at {json_pointer(error)}: {error['msg']}", file=sys.stderr)
        return int(ExitCode.SCHEMA)
    except json.JSONDecodeError as e:
        print(f"Config is not valid JSON: {e}", file=sys.stderr)
        return int(ExitCode.SCHEMA)
    except OSError as e:
        print(f"Cannot read config: {e}", file=sys.stderr)
        return int(ExitCode.SCHEMA)
    except ScheduleError as e:
        print(f"Schedule error: {e}", file=sys.stderr)
        return int(ExitCode.SCHEMA)
    except NotPositiveStable as e:
        print(f"Hypothesis violated: {e}", file=sys.stderr)
        return int(ExitCode.HYPOTHESIS)
    except SwitchingCertificateUnavailable as e:
        print(f"Certificate unavailable: {e}", file=sys.stderr)
        return int(ExitCode.CERTIFICATE)
    except DivergenceError as e:
        print(str(e), file=sys.stderr)
        return int(ExitCode.DIVERGENCE)
    except ValueError as e:
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return int(ExitCode.SCHEMA)


def cmd_validate(args) -> ExitCode:
    run_config = read_run_config(args.config)
    reports = [
        topology_report(topology, index)
        for index, topology in enumerate(build_topologies(run_config), start=1)
    ]

    _print_json(
        {
            "topologies": [r.model_dump(mode="json") for r in reports],
            "alpha": check_admissible(run_config.alpha).model_dump(mode="json"),
        }
    )

    if all(r.reachable for r in reports):
        return ExitCode.OK

    unreachable = [r.index for r in reports if not r.reachable]
    logger.warning(f"Vertex 0 is not globally reachable in topologies {unreachable}")
    return ExitCode.HYPOTHESIS


def cmd_gains(args) -> ExitCode:
    run_config = read_run_config(args.config)
    couplings = [build_coupling(t) for t in build_topologies(run_config)]

    try:
        params = resolve_gain(run_config, couplings)
    except SwitchingCertificateUnavailable as e:
        _print_json(
            {
                "mode": "switching",
                "gamma": run_config.params.gamma,
                "k": AUTO_GAIN,
                "lambda_bar": min_symmetric_eigenvalue(couplings),
                "k_min": None,
                "valid": False,
                "reason": str(e),
            }
        )
        return ExitCode.CERTIFICATE

    certificate = certify(couplings, params)
    _print_json(certificate.model_dump(mode="json"))

    if certificate.k_min is None:
        logger.warning(
            f"No switching gain bound: lambda_bar = {certificate.lambda_bar} <= 0"
        )
        return ExitCode.CERTIFICATE

    return ExitCode.OK


def cmd_simulate(args) -> ExitCode:
    run_config = _with_overrides(read_run_config(args.config), args)
    scenario = build_scenario(run_config)
    path = _out_dir(args) / TRAJECTORY_FILE

    try:
        record = single_trial(scenario, trial=args.trial)
    except DivergenceError as e:
        if e.record is not None:
            write_trajectory_csv(e.record, path)
        print(str(e), file=sys.stderr)
        return ExitCode.DIVERGENCE

    write_trajectory_csv(record, path)
    print(path)
    return ExitCode.OK


def cmd_ensemble(args) -> ExitCode:
    run_config = _with_overrides(read_run_config(args.config), args)
    return _run_ensemble(run_config, args)


def cmd_paper(args) -> ExitCode:
    run_config = _with_overrides(paper_config(), args)
    if args.dump_config:
        print(run_config.model_dump_json(indent=2, exclude_none=True))
        return ExitCode.OK
    return _run_ensemble(run_config, args)


def json_pointer(error: Dict[str, Any]) -> str:
    """JSON pointer of a pydantic error, refined by the entry index custom
    validators put in the error context"""
    parts = list(error.get("loc", ())) + list((error.get("ctx") or {}).get("index", []))
    return "".join(f"/{part}" for part in parts)


def _run_ensemble(run_config: RunConfig, args) -> ExitCode:
    scenario = build_scenario(run_config)
    stats = run_ensemble(
        EnsembleConfig(
            scenario=scenario,
            trials=run_config.ensemble.M,
            seed=run_config.ensemble.seed,
            jobs=args.jobs,
        )
    )
    summary = convergence_metrics(stats, monotone_from=args.monotone_from)

    out = _out_dir(args)
    write_ensemble_csv(stats, out / ENSEMBLE_FILE)
    write_summary_json(
        summary,
        out / SUMMARY_FILE,
        gamma=scenario.params.gamma,
        k=scenario.params.k,
        seed=run_config.ensemble.seed,
    )
    print(out / SUMMARY_FILE)

    if stats.divergent:
        return ExitCode.DIVERGENCE
    return ExitCode.OK


def _with_overrides(run_config: RunConfig, args) -> RunConfig:
    """Command-line flags win over the file; the result is validated again"""
    document = run_config.model_dump(mode="json")
    integrator, ensemble = document["integrator"], document["ensemble"]

    if args.dt is not None:
        integrator["dt"] = args.dt
    if args.horizon is not None:
        integrator["T"] = args.horizon
    if args.mode is not None:
        integrator["mode"] = args.mode
    if args.seed is not None:
        ensemble["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        ensemble["M"] = args.trials

    return RunConfig.model_validate(document)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_json(document: Dict[str, Any]):
    print(json.dumps(document, indent=2))


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="64-bit base seed")
    parser.add_argument("--dt", type=float, default=None)
    parser.add_argument("--horizon", type=float, default=None, help="final time T")
    parser.add_argument(
        "--mode", choices=[m.value for m in SimulationMode], default=None
    )


def _add_ensemble_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--trials", type=int, default=None, help="number of trials M")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument(
        "--monotone-from",
        type=float,
        default=5.0,
        help="start of the window where mean_V's moving average is checked",
    )


if __name__ == "__main__":
    sys.exit(main())
