"""
Command line entry point: `qwloc {simulate,sweep,verify,classical,series}`.

Every subcommand emits one CSV table, on stdout or under `--out`.
"""
import argparse
import concurrent.futures
import dataclasses
import logging
import os
import re
import sys
import typing
from fractions import Fraction

import numpy as np
import pandas as pd

from qwloc import __version__, checks, series, storage, theory
from qwloc.coins import MODELS, TWO_PI, get_field, normalize_angle
from qwloc.models import classical, quantum

log = logging.getLogger(__name__)

CLASSICAL = "classical"
FLOAT_FORMAT = "%.15g"
_PI_TOKEN = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """ Reads `pi`, `pi/2`, `3pi/2`, `2*pi/3` or a plain float in radians. """
    match = _PI_TOKEN.match(text.lower())
    try:
        if match:
            factor, divisor = match.groups()
            if factor in (None, "", "+"):
                scale = 1.0
            elif factor == "-":
                scale = -1.0
            else:
                scale = float(factor)
            return scale * np.pi / (float(divisor) if divisor else 1.0)
        return float(text)
    except (ValueError, ZeroDivisionError):
        pass
    raise argparse.ArgumentTypeError(f"'{text}' is neither a number nor a multiple of pi.")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = "eq22"
    omega: float = np.pi
    steps: int = 12
    grid: int = 257
    out: typing.Optional[str] = None
    tolerance: float = 1e-10
    p0: float = 0.5
    p: float = 0.5
    jobs: int = 1
    perturb: float = 0.0

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError(f"--steps must be non-negative, got {self.steps}.")
        if self.grid < 1:
            raise ValueError(f"--grid must be at least 1, got {self.grid}.")
        if not self.tolerance > 0:
            raise ValueError(f"--tolerance must be positive, got {self.tolerance}.")
        if self.jobs < 1:
            raise ValueError(f"--jobs must be at least 1, got {self.jobs}.")
        if self.model != CLASSICAL and not self.model in MODELS:
            raise ValueError(f"No coin model '{self.model}' is registered.")
        if self.model == CLASSICAL or self.command == CLASSICAL:
            # validates p0 and p
            classical.ClassicalField.from_left(self.p0, self.p)

    @property
    def even_times(self) -> np.ndarray:
        """ Even n in [2, steps], or just n = 0 when steps < 2. """
        return np.arange(2 if self.steps >= 2 else 0, self.steps + 1, 2)

    @property
    def omega_grid(self) -> np.ndarray:
        return np.linspace(0, TWO_PI, self.grid, endpoint=False)


def _limit(model: str, omega: float) -> float:
    """ lim p_2n(0); only the eq22 walk localizes. """
    return theory.localization_constant(omega) if model == "eq22" else 0.0


def cmd_simulate(config: RunConfig) -> pd.DataFrame:
    times = config.even_times
    if config.model == CLASSICAL:
        field = classical.ClassicalField.from_left(config.p0, config.p)
        p_return = classical.classical_returns(field, int(times[-1]))
    else:
        field = get_field(config.model, config.omega)
        p_return = quantum.return_probabilities(field, int(times[-1]))
    c = _limit(config.model, config.omega)
    result = pd.DataFrame(
        data={"n": times, "p_return": p_return.loc[times].to_numpy(), "c": c}
    )
    result["p_minus_c"] = result.p_return - result.c
    return result


def _sweep_point(args: typing.Tuple[str, float, int]) -> float:
    model, omega, horizon = args
    state = quantum.run(get_field(model, omega), horizon)
    return quantum.return_probability(state)


def cmd_sweep(config: RunConfig) -> pd.DataFrame:
    if config.model == CLASSICAL:
        raise ValueError("sweep runs the quantum models only.")
    horizon = 2 * (config.steps // 2)
    grid = config.omega_grid
    tasks = [(config.model, float(omega), horizon) for omega in grid]
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            p_return = list(pool.map(_sweep_point, tasks))
    else:
        p_return = [_sweep_point(task) for task in tasks]
    log.info("Swept %d angles at n=%d", len(grid), horizon)
    return pd.DataFrame(
        data={
            "omega": grid,
            "c": theory.localization_constant(grid) if config.model == "eq22" else np.zeros(len(grid)),
            "p_return": p_return,
        }
    )


def cmd_verify(config: RunConfig) -> pd.DataFrame:
    return checks.run_checks(tolerance=config.tolerance, perturb=config.perturb).reset_index()


def cmd_classical(config: RunConfig) -> pd.DataFrame:
    field = classical.ClassicalField.from_left(config.p0, config.p)
    times = config.even_times
    p_return = classical.classical_returns(field, int(times[-1]))
    gf = series.classical_gf(field.p0, field.q0, field.p, field.q, int(times[-1])).to_numpy()
    result = pd.DataFrame(
        data={"n": times, "p_return": p_return.loc[times].to_numpy(), "p_series": gf[times]}
    )
    half = np.maximum(times // 2, 1)
    asymptote = theory.classical_asymptote(field.p0, field.q0, field.p, field.q, half)
    result["asymptote"] = np.where(times > 0, asymptote, np.nan)
    return result


def cmd_series(config: RunConfig) -> pd.DataFrame:
    order = config.steps
    r_star = list(series.r_star_series(max(order, 1)))[: order + 1]
    result = series.origin_gf(config.omega, order).to_frame().reset_index()
    result.insert(1, "r_star", [float(v) for v in r_star])
    result.insert(2, "r_star_exact", [str(Fraction(v)) for v in r_star])
    return result


COMMANDS: typing.Dict[str, typing.Callable[[RunConfig], pd.DataFrame]] = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    CLASSICAL: cmd_classical,
    "series": cmd_series,
}


def get_output_key(config: RunConfig) -> str:
    if config.command == CLASSICAL or (config.command == "simulate" and config.model == CLASSICAL):
        return storage.get_classical_output_key(config.p0, config.p, config.steps)
    if config.command == "simulate":
        return storage.get_simulation_output_key(config.model, config.omega, config.steps)
    if config.command == "sweep":
        return storage.get_sweep_output_key(config.grid, config.steps, config.model)
    if config.command == "series":
        return storage.get_series_output_key(config.omega, config.steps)
    return storage.get_verify_report_key(config.tolerance)


def write_csv(frame: pd.DataFrame, config: RunConfig, stdout=None):
    """ Writes `frame` to stdout, to the file `--out`, or under its storage
        key when `--out` is a directory. """
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT)
    if config.out is None:
        (stdout or sys.stdout).write(text)
        return
    path = config.out
    if os.path.isdir(path):
        path = os.path.join(path, get_output_key(config))
        os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as file:
        file.write(text)
    log.info("Wrote %d rows to %s", len(frame), path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwloc",
        description="Return probabilities and localization of the inhomogeneous two-state quantum walk.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--steps", type=int, default=12)

    simulate = subparsers.add_parser("simulate", parents=[common], help="p_n(0) at even n")
    simulate.add_argument("--model", choices=[*MODELS, CLASSICAL], default="eq22")
    simulate.add_argument("--omega", type=parse_angle, default=np.pi)
    simulate.add_argument("--p0", type=float, default=0.5)
    simulate.add_argument("--p", type=float, default=0.5)

    sweep = subparsers.add_parser("sweep", parents=[common], help="c(ω) and p_2N(0) over an ω grid")
    sweep.add_argument("--model", choices=list(MODELS), default="eq22")
    sweep.add_argument("--grid", type=int, default=257)
    sweep.add_argument("--jobs", type=int, default=1)

    verify = subparsers.add_parser("verify", parents=[common], help="run the invariant suite")
    verify.add_argument("--tolerance", type=float, default=1e-10)
    verify.add_argument("--perturb", type=float, default=0.0,
                        help="offset added to the origin coin of the unitarity and norm checks")

    walk = subparsers.add_parser(CLASSICAL, parents=[common], help="classical comparator walk")
    walk.add_argument("--p0", type=float, default=0.5)
    walk.add_argument("--p", type=float, default=0.5)

    coefficients = subparsers.add_parser("series", parents=[common], help="r* and origin GF coefficients")
    coefficients.add_argument("--omega", type=parse_angle, default=np.pi)
    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    verbose = args.pop("verbose")
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)],
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if "omega" in args:
        args["omega"] = normalize_angle(args["omega"])
    try:
        config = RunConfig(**args)
    except (ValueError, KeyError) as error:
        parser.error(str(error))

    try:
        frame = COMMANDS[config.command](config)
    except (ValueError, KeyError) as error:
        log.error("%s", error)
        return 2
    try:
        write_csv(frame, config)
    except OSError as error:
        log.error("Cannot write %s: %s", config.out, error)
        return 2

    if config.command == "verify" and not frame.passed.all():
        failed = frame.loc[~frame.passed, "check"].tolist()
        log.error("%d check(s) failed: %s", len(failed), ", ".join(failed))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
