"""Command-line front end."""
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import typer
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from . import __version__
from .capacity import AXES, CapacityScenario, capacity_sweep
from .channel import NetworkParams, shadowing_from_sigma_db
from .config import (
    BS_DENSITY_GRID,
    CAPACITY_DEFAULTS,
    COOP_ANTENNA_GRID,
    FIGURE_SWEEPS,
    INTERFERENCE_DEFAULTS,
    PDF_GRID_MAX,
    PDF_GRID_MIN,
    PDF_GRID_POINTS,
    settings,
)
from .curves import CurveData, write_curves_csv
from .errors import (
    ConfigError,
    DomainError,
    NonConvergenceError,
    SweepError,
    UnsupportedMeijerGError,
    ValidationFailure,
)
from .evals import QuotedRatioEval, ValidationRunner
from .interference import gaussian_reference_pdf, levy_pdf, pdf_sweep, stable_scale

logger = logging.getLogger("cellcap.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_VALIDATION = 4

Command = Literal["interference-pdf", "capacity-sweep", "mc-validate", "reproduce-paper"]

DEFAULT_OUTPUT = {
    "interference-pdf": "interference_pdf.csv",
    "capacity-sweep": "capacity_sweep.csv",
    "mc-validate": "validation_report.txt",
    "reproduce-paper": "quoted_ratios.txt",
}

_NETWORK_KEYS = {"sigma_db", "p_r", "lambda_bs", "n_t", "n_r", "m"}

# Keys each command reads besides command and out
COMMAND_KEYS = {
    "interference-pdf": _NETWORK_KEYS | {"sigma_r", "vary", "values", "figure", "grid"},
    "capacity-sweep": {"axis", "cbs", "grid", "lambda_bs", "n_t", "n_b", "n_t_c", "r_b"},
    "mc-validate": _NETWORK_KEYS | {"seed", "samples", "r_max"},
    "reproduce-paper": {"lambda_bs", "r_b", "n_t_c"},
}


def setup_logging() -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(
        level=settings.log_level.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _split_list(v):
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


class RunConfig(BaseModel):
    """Resolved run configuration; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    out: Optional[str] = None
    seed: int = 42
    samples: int = 100_000

    sigma_db: Optional[float] = None
    p_r: Optional[float] = None
    lambda_bs: Optional[float] = None
    sigma_r: Optional[float] = None
    n_t: Optional[int] = None
    n_r: Optional[int] = None
    m: Optional[float] = None
    n_b: Optional[int] = None
    n_t_c: Optional[int] = None
    r_b: Optional[float] = None
    r_max: Optional[float] = None

    vary: Optional[str] = None
    values: Optional[List[float]] = None
    figure: Optional[int] = None
    axis: Optional[str] = None
    cbs: Optional[List[int]] = None
    grid: Optional[List[float]] = None

    @field_validator("values", "cbs", "grid", mode="before")
    @classmethod
    def parse_list(cls, v):
        return _split_list(v)

    @field_validator("samples", "seed", mode="before")
    @classmethod
    def parse_count(cls, v):
        # Accepts scientific notation such as 1e5
        if isinstance(v, str):
            number = float(v)
            if not number.is_integer():
                raise ValueError(f"expected an integer, got {v}")
            return int(number)
        return v

    @field_validator("samples")
    @classmethod
    def check_samples(cls, v):
        if v < 1:
            raise ValueError("samples must be positive")
        return v

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v):
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        return v

    @field_validator("r_max")
    @classmethod
    def check_r_max(cls, v):
        if v is not None and not v > 0.0:
            raise ValueError("r_max must be positive")
        return v

    @model_validator(mode="after")
    def check_applicable(self):
        unused = self.model_fields_set - {"command", "out"} - COMMAND_KEYS[self.command]
        if unused:
            raise ValueError(f"{self.command} does not use: {', '.join(sorted(unused))}")
        return self

    @property
    def output(self) -> str:
        return self.out or DEFAULT_OUTPUT[self.command]


def _normalise_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_run_config(command: str, config_path: Optional[str], flags: Dict[str, Any]) -> RunConfig:
    """
    Merge a flat `key = value` file with CLI flags (flags win).

    Raises:
        ConfigError: unreadable file, unknown key or invalid value
    """
    values: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        for key, value in dotenv_values(path).items():
            if value is not None:
                values[_normalise_key(key)] = value
    values.update({k: v for k, v in flags.items() if v is not None})
    values["command"] = command
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def _pick(value, default):
    return default if value is None else value


def _interference_network(rc: RunConfig):
    d = INTERFERENCE_DEFAULTS
    network = NetworkParams(
        lambda_bs=_pick(rc.lambda_bs, d.lambda_bs),
        sigma_r=_pick(rc.sigma_r, d.sigma_r),
        n_t=_pick(rc.n_t, d.n_t),
        n_r=_pick(rc.n_r, d.n_r),
        m=_pick(rc.m, d.m),
    )
    shadowing = shadowing_from_sigma_db(_pick(rc.sigma_db, d.sigma_db), _pick(rc.p_r, d.p_r))
    return network, shadowing


def _capacity_scenario(rc: RunConfig) -> CapacityScenario:
    d = CAPACITY_DEFAULTS
    return CapacityScenario(
        lambda_bs=_pick(rc.lambda_bs, d.lambda_bs),
        n_t_interferer=_pick(rc.n_t, d.n_t_interferer),
        r_b=_pick(rc.r_b, d.r_b),
        n_t_c=_pick(rc.n_t_c, d.n_t_c),
    )


def _network_params(network: NetworkParams, shadowing) -> Dict[str, Any]:
    return {
        "sigma_db": shadowing.sigma_db,
        "lambda_sh": shadowing.lambda_sh,
        "omega": shadowing.omega,
        "p_r": shadowing.p_r,
        "lambda_bs": network.lambda_bs,
        "sigma_r": network.sigma_r,
        "n_t": network.n_t,
        "n_r": network.n_r,
        "m": network.m,
        "p_ant": network.p_ant,
    }


def cmd_interference_pdf(rc: RunConfig) -> int:
    network, shadowing = _interference_network(rc)
    grid = rc.grid or np.linspace(PDF_GRID_MIN, PDF_GRID_MAX, PDF_GRID_POINTS).tolist()
    params = _network_params(network, shadowing)

    if rc.figure == 2:
        if network.sigma_r != 4.0:
            raise ConfigError("figure 2 compares the Levy law with a Gaussian and needs sigma_r = 4")
        gamma = stable_scale(network, shadowing).gamma_levy
        y = np.asarray(grid, dtype=float)
        curves = [
            CurveData(x=y, y=levy_pdf(y, gamma), series="levy"),
            CurveData(x=y, y=gaussian_reference_pdf(y, gamma), series="gaussian"),
        ]
        params.update({"figure": 2, "gamma_levy": gamma})
    else:
        if rc.figure is not None:
            if rc.figure not in FIGURE_SWEEPS:
                raise ConfigError(f"unknown figure {rc.figure}; expected 2 or one of {sorted(FIGURE_SWEEPS)}")
            vary, values = FIGURE_SWEEPS[rc.figure]
            params["figure"] = rc.figure
        else:
            if not rc.vary or not rc.values:
                raise ConfigError("interference-pdf needs --vary and --values, or --figure")
            vary, values = rc.vary, rc.values
        if vary.lower() in ("n_t", "n_r"):
            values = [int(v) for v in values]
        curves = pdf_sweep(network, shadowing, vary, values, grid)
        params.update({"vary": vary.lower(), "values": list(values)})

    write_curves_csv(curves, rc.output, params)
    return EXIT_OK


def cmd_capacity_sweep(rc: RunConfig) -> int:
    axis = rc.axis or "coop_antennas"
    if axis not in AXES:
        raise ConfigError(f"--axis must be one of {', '.join(AXES)}")
    scenario = _capacity_scenario(rc)
    cbs = rc.cbs or ([rc.n_b] if rc.n_b else [1, 2, 3])
    for n_b in cbs:
        if not 1 <= n_b <= 3:
            raise ConfigError(f"CBS values must lie in [1, 3], got {n_b}")
    grid = rc.grid or (COOP_ANTENNA_GRID if axis == "coop_antennas" else BS_DENSITY_GRID)

    curves = capacity_sweep(axis, scenario, grid, cbs)
    params = {
        "axis": axis,
        "cbs": list(cbs),
        "lambda_bs": scenario.lambda_bs,
        "n_t_interferer": scenario.n_t_interferer,
        "r_b": scenario.r_b,
        "n_t_c": scenario.n_t_c,
        "sigma_r": 4.0,
    }
    write_curves_csv(curves, rc.output, params)
    return EXIT_OK


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Report written to {path}")


def cmd_mc_validate(rc: RunConfig) -> int:
    network, shadowing = _interference_network(rc)
    runner = ValidationRunner(seed=rc.seed, n_samples=rc.samples, network=network,
                              shadowing=shadowing, r_max=rc.r_max)
    results = runner.run_all_evals()
    _write_text(rc.output, runner.generate_report(results))
    runner.save_results(results, str(Path(rc.output).with_suffix(".json")))
    if not results["overall"]["all_passed"]:
        raise ValidationFailure(f"{results['overall']['total_issues']} validation issue(s)")
    return EXIT_OK


def cmd_reproduce_paper(rc: RunConfig) -> int:
    evaluator = QuotedRatioEval(scenario=_capacity_scenario(rc))
    result = evaluator.evaluate()
    _write_text(rc.output, evaluator.generate_table(result))
    ValidationRunner().save_results(result, str(Path(rc.output).with_suffix(".json")))
    # A missing match is flagged in the table, not treated as a failure
    return EXIT_OK


COMMANDS = {
    "interference-pdf": cmd_interference_pdf,
    "capacity-sweep": cmd_capacity_sweep,
    "mc-validate": cmd_mc_validate,
    "reproduce-paper": cmd_reproduce_paper,
}


def _exit_code(error: Exception) -> int:
    if isinstance(error, SweepError):
        return _exit_code(error.cause)
    if isinstance(error, NonConvergenceError):
        return EXIT_NONCONVERGENCE
    if isinstance(error, ValidationFailure):
        return EXIT_VALIDATION
    if isinstance(error, (ConfigError, DomainError, ValidationError, UnsupportedMeijerGError, OSError)):
        return EXIT_CONFIG
    raise error


def run(rc: RunConfig) -> int:
    """
    Execute one command.

    Args:
        rc: Resolved run configuration

    Returns:
        Exit status: 0 success, 2 config error, 3 non-convergence, 4 validation failure
    """
    logger.info(f"cellcap {__version__}: {rc.command} -> {rc.output}")
    try:
        return COMMANDS[rc.command](rc)
    except Exception as e:
        code = _exit_code(e)
        logger.error(f"{rc.command} failed: {e}")
        return code


def _execute(command: str, config: Optional[str], flags: Dict[str, Any]) -> None:
    setup_logging()
    try:
        rc = load_run_config(command, config, flags)
    except ConfigError as e:
        logger.error(str(e))
        raise typer.Exit(EXIT_CONFIG)
    raise typer.Exit(run(rc))


app = typer.Typer(
    help="Alpha-stable interference and cooperative downlink capacity.",
    add_completion=False,
    no_args_is_help=True,
)

CONFIG_OPT = typer.Option(None, "--config", help="Flat key = value configuration file")
OUT_OPT = typer.Option(None, "--out", help="Output path")
SEED_OPT = typer.Option(None, "--seed")
SAMPLES_OPT = typer.Option(None, "--samples", help="Sample count, e.g. 1e5")


@app.command("interference-pdf")
def interference_pdf(
    config: Optional[str] = CONFIG_OPT,
    out: Optional[str] = OUT_OPT,
    sigma_db: Optional[float] = typer.Option(None, "--sigma_db", "--sigma-db", "--sigma_dB"),
    lambda_bs: Optional[float] = typer.Option(None, "--lambda_bs", "--lambda-bs"),
    sigma_r: Optional[float] = typer.Option(None, "--sigma_r", "--sigma-r"),
    n_t: Optional[int] = typer.Option(None, "--n_t", "--n-t"),
    n_r: Optional[int] = typer.Option(None, "--n_r", "--n-r"),
    m: Optional[float] = typer.Option(None, "--m"),
    vary: Optional[str] = typer.Option(None, "--vary"),
    values: Optional[str] = typer.Option(None, "--values", help="Comma-separated values"),
    figure: Optional[int] = typer.Option(None, "--figure", help="Preset sweep, 2 to 8"),
    grid: Optional[str] = typer.Option(None, "--grid", help="Comma-separated interference powers (W)"),
):
    """Interference density curves (CSV)."""
    _execute("interference-pdf", config, dict(
        out=out, sigma_db=sigma_db, lambda_bs=lambda_bs, sigma_r=sigma_r, n_t=n_t, n_r=n_r, m=m,
        vary=vary, values=values, figure=figure, grid=grid,
    ))


@app.command("capacity-sweep")
def capacity_sweep_cmd(
    config: Optional[str] = CONFIG_OPT,
    out: Optional[str] = OUT_OPT,
    axis: Optional[str] = typer.Option(None, "--axis", help="coop_antennas or bs_density"),
    cbs: Optional[str] = typer.Option(None, "--cbs", help="Comma-separated CBS values"),
    grid: Optional[str] = typer.Option(None, "--grid", help="Comma-separated axis values"),
    lambda_bs: Optional[float] = typer.Option(None, "--lambda_bs", "--lambda-bs"),
    n_t: Optional[int] = typer.Option(None, "--n_t", "--n-t", help="Antennas per interfering BS"),
    n_b: Optional[int] = typer.Option(None, "--n_b", "--n-b"),
    n_t_c: Optional[int] = typer.Option(None, "--n_t_c", "--n-t-c"),
    r_b: Optional[float] = typer.Option(None, "--r_b", "--r-b"),
):
    """Average capacity curves over cooperative antennas or interferer density (CSV)."""
    _execute("capacity-sweep", config, dict(
        out=out, axis=axis, cbs=cbs, grid=grid,
        lambda_bs=lambda_bs, n_t=n_t, n_b=n_b, n_t_c=n_t_c, r_b=r_b,
    ))


@app.command("mc-validate")
def mc_validate(
    config: Optional[str] = CONFIG_OPT,
    out: Optional[str] = OUT_OPT,
    seed: Optional[str] = SEED_OPT,
    samples: Optional[str] = SAMPLES_OPT,
    r_max: Optional[float] = typer.Option(None, "--r_max", "--r-max", help="Field radius in metres"),
    sigma_db: Optional[float] = typer.Option(None, "--sigma_db", "--sigma-db", "--sigma_dB"),
    lambda_bs: Optional[float] = typer.Option(None, "--lambda_bs", "--lambda-bs"),
    n_t: Optional[int] = typer.Option(None, "--n_t", "--n-t"),
    n_r: Optional[int] = typer.Option(None, "--n_r", "--n-r"),
    m: Optional[float] = typer.Option(None, "--m"),
):
    """Run every oracle check and write a pass/fail report."""
    _execute("mc-validate", config, dict(
        out=out, seed=seed, samples=samples, r_max=r_max, sigma_db=sigma_db,
        lambda_bs=lambda_bs, n_t=n_t, n_r=n_r, m=m,
    ))


@app.command("reproduce-paper")
def reproduce_paper(
    config: Optional[str] = CONFIG_OPT,
    out: Optional[str] = OUT_OPT,
    lambda_bs: Optional[float] = typer.Option(None, "--lambda_bs", "--lambda-bs"),
    r_b: Optional[float] = typer.Option(None, "--r_b", "--r-b"),
    n_t_c: Optional[int] = typer.Option(None, "--n_t_c", "--n-t-c"),
):
    """Table of the quoted capacity ratios for each interferer antenna count."""
    _execute("reproduce-paper", config, dict(out=out, lambda_bs=lambda_bs, r_b=r_b, n_t_c=n_t_c))


def main() -> None:
    app()
