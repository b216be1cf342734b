"""
OISD Laboratory Command Line

Subcommands:
1. verify - run the check manifest and gate on the residuals
2. evolve - closed-form trajectory with observables and an ODE cross-check
3. sync-compare - coupled evolution against its decoupled comparison state
4. spectrum - eigenvalues of the oscillator generator against their labels
5. list - print the check manifest
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src import __version__
from src.cli.checks import CHECKS, run_checks
from src.cli.config import RunConfig, load_run_config
from src.cli.report import PlotSpec, RunReport
from src.config import settings
from src.hilbert.spaces import DensityMatrix, interior_mask
from src.models.experiments import prop2_experiment, window_population
from src.models.liouvillians import build_L_OISD
from src.models.spectrum import spectrum_table
from src.numerics.integrator import integrate_master
from src.numerics.linalg import check_density, trace_norm
from src.propagators.oisd import expL_OISD_closed
from src.utils.errors import InvalidParameterError, OISDError

logging.basicConfig(
    level=logging.DEBUG if settings.debug_mode else getattr(logging, settings.log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Short spellings accepted next to the field-named flags
FLAG_ALIASES = {"out_dir": ["--out"], "formats": ["--format"]}


def _field_flag(name: str, alias: Optional[str]) -> str:
    return "--" + (alias or name).replace("_", "-")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="Run configuration file (key = value)")
    group = parser.add_argument_group("run configuration")
    for name, info in RunConfig.model_fields.items():
        flags = [_field_flag(name, info.alias)] + FLAG_ALIASES.get(name, [])
        group.add_argument(*flags, dest=name, default=None, metavar=name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oisd-lab", description="OISD numerical laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="Run the verification checks")
    verify.add_argument("--list", action="store_true", help="Print the check manifest and exit")
    _add_config_flags(verify)

    for name, help_text in (
        ("evolve", "Closed-form trajectory with observables"),
        ("sync-compare", "Compare with the decoupled evolution"),
        ("spectrum", "Eigenvalues of L_ph against their analytic labels"),
    ):
        _add_config_flags(commands.add_parser(name, help=help_text))

    commands.add_parser("list", help="Print the check manifest")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in RunConfig.model_fields if getattr(args, name, None) is not None}


def print_manifest() -> int:
    for check in CHECKS.values():
        marker = " (slow)" if check.slow else ""
        print(f"{check.name:<20} {check.tag:<20} {check.description}{marker}")
    return EXIT_OK


def cmd_verify(config: RunConfig) -> RunReport:
    report = RunReport("verify", config)
    report.add_checks(run_checks(config, config.checks))
    logger.info(f"Verification: {len(report.records)} rows, {len(report.failures)} failed")
    for failure in report.failures:
        logger.error(f"FAILED {failure['tag']}: {failure['name']} residual {failure['residual']:.3e} "
                     f"> {failure['tolerance']:.1e}")
    return report


def _observables(rho: np.ndarray, config: RunConfig, window: int) -> Dict[str, float]:
    geo = config.geometry()
    check = check_density(DensityMatrix(geo, rho))
    diagonal = np.real(np.diag(rho)).reshape(geo.spin.dim, geo.fock.dim)
    photons = diagonal.sum(axis=0) @ np.arange(geo.fock.dim)
    spin_weights = diagonal.sum(axis=1)
    inside = np.abs(geo.spin.values) <= window
    return {
        "trace": float(np.real(np.trace(rho))),
        "min_eigenvalue": check.min_eigenvalue,
        "mean_N": float(photons),
        "mean_M": float(spin_weights[inside] @ geo.spin.values[inside]),
        "window_population": window_population(rho, geo, window),
    }


def cmd_evolve(config: RunConfig) -> RunReport:
    """Closed-form trajectory; the ODE column compares with integrate_master on the interior."""
    params = config.model_params()
    geo = config.geometry()
    grid = config.time_grid()
    rho0 = config.initial_state()
    window = config.window if config.window is not None else geo.spin.halfwidth // 4
    keep = interior_mask(geo, *config.margins())

    ode_states: Optional[List[np.ndarray]] = None
    if config.ode_check:
        start = grid if grid[0] == 0 else np.concatenate([[0.0], grid])
        trajectory = integrate_master(build_L_OISD(params, geo), rho0, start, config.tolerances())
        ode_states = [state.matrix for state in trajectory.states[len(start) - len(grid):]]

    rows = []
    for i, t in enumerate(grid):
        rho = expL_OISD_closed(float(t), rho0, params, geo)
        row: Dict[str, Any] = {"t": float(t), **_observables(rho, config, window)}
        if ode_states is not None:
            gap = rho - ode_states[i]
            row["ode_distance"] = trace_norm(gap[np.ix_(keep, keep)])
        rows.append(row)
    frame = pd.DataFrame(rows)

    report = RunReport("evolve", config)
    report.add_series(
        "evolve", frame, PlotSpec("t", ["mean_N", "mean_M", "window_population"], title="Closed-form trajectory")
    )
    if "ode_distance" in frame:
        report.summary["evolve.max_ode_distance"] = float(frame["ode_distance"].max())
    return report


def cmd_sync_compare(config: RunConfig) -> RunReport:
    params = config.model_params()
    geo = config.geometry()
    rho0 = DensityMatrix(geo, config.initial_state())
    frame = prop2_experiment(
        rho0, params, config.sigma, config.time_grid(), geo, config.window,
        ode_check=config.ode_check, tol=config.tolerances(),
    )
    report = RunReport("sync-compare", config)
    report.add_series(
        "sync_compare", frame, PlotSpec("t", ["distance", "bound"], log_y=True, title="Distance to decoupled state")
    )
    return report


def cmd_spectrum(config: RunConfig) -> RunReport:
    geo = config.geometry()
    spin = geo.spin if config.spectrum_decoupled else None
    frame = spectrum_table(config.model_params(), geo.fock, spin)
    report = RunReport("spectrum", config)
    report.add_series("spectrum", frame)
    report.summary["spectrum.max_deviation"] = float(frame["deviation"].max())
    return report


COMMANDS: Dict[str, Callable[[RunConfig], RunReport]] = {
    "verify": cmd_verify,
    "evolve": cmd_evolve,
    "sync-compare": cmd_sync_compare,
    "spectrum": cmd_spectrum,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and write its report.

    Returns:
        0 on success, 1 when a check fails or a computation is refused, 2 on configuration errors
    """
    args = build_parser().parse_args(argv)
    if args.command == "list" or getattr(args, "list", False):
        return print_manifest()

    try:
        config = load_run_config(args.config, _overrides(args))
    except (ValidationError, InvalidParameterError) as e:
        logger.error(f"Invalid configuration: {e}", exc_info=True)
        return EXIT_USAGE

    logger.info(f"Running {args.command} (config hash {config.config_hash()[:12]}, seed {config.seed})")
    try:
        report = COMMANDS[args.command](config)
    except InvalidParameterError as e:
        logger.error(f"Invalid parameters for {args.command}: {e}", exc_info=True)
        return EXIT_USAGE
    except OISDError as e:
        logger.error(f"{args.command} stopped: {e}", exc_info=True)
        return EXIT_FAILED

    report.write()
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
