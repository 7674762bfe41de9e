# ##### BEGIN GPL LICENSE BLOCK #####
#
# This file is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This file is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this file.  If not, see <http://www.gnu.org/licenses/>.
#
# ##### END GPL LICENSE BLOCK #####
"""
The command line interface. The subcommands run the linear shift example, the control example and the
verification suites and write JSON reports and CSV data. Exit codes: 0 success, 1 usage or configuration error,
2 failed verification.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from ._version import __version__
from .control import (
    check_invariance,
    cost,
    feasible,
    random_feasible_controls,
    shipped_control_problem,
    solve_by_invariance,
    write_control_csv,
)
from .enums import ExitCode, Fault, Verdict
from .errors import (
    ConfigError,
    DegeneracyError,
    InconsistentTransformationError,
    NoInvariantSolutionError,
    WrongOracleError,
)
from .leitmann import linear_shift_case, shift_constants, transport_minimizer, verify_lemma
from .oracle import discretize, grid_values, solve_quadratic
from .timescale import TimeScale, parse_scale
from .variational import Trajectory, evaluate_functional, illustrative_problem
from .verification import (
    EXPECTED_MIN_COST,
    S_GRID,
    TOL_COST_DENSE,
    TOL_COST_SCATTERED,
    TOL_ORACLE,
    bundled_scales,
    run_suites,
)

ENV_DEFAULT_OUT = "TSL_DEFAULT_OUT"
COMMANDS = ("example4", "control", "verify")
DEFAULT_SCALES = {"example4": "interval:0..1", "control": "hstep:0..1:0.1"}


@dataclass
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """The configuration of one command line run."""

    command: str
    scale: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    alpha: float = 0.0
    beta: float = 1.0
    trials: int = 100
    seed: int = 0
    tol_res: Optional[float] = None
    tol_gap: float = 1e-8
    out: Optional[str] = None
    json: bool = False
    fault: Optional[str] = None
    verbose: int = 0

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}', expected one of {', '.join(COMMANDS)}.")
        if self.trials < 1:
            raise ConfigError(f"At least one trial is required, got {self.trials}.")
        if self.fault is not None:
            try:
                Fault(self.fault)
            except ValueError:
                raise ConfigError(f"Unknown fault '{self.fault}'.") from None

    def to_dict(self) -> dict[str, Any]:
        """The configuration as a JSON serializable dict."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """
        Create a configuration from a dict as written by :meth:`to_dict`.

        Raises
        ------
        ConfigError
            If the dict contains unknown fields or lacks the command.
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration fields: {', '.join(unknown)}.")
        if "command" not in data:
            raise ConfigError("The configuration lacks the command.")
        return cls(**data)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> RunConfig:
        """Create a configuration from parsed command line arguments."""
        return cls.from_dict({name: value for name, value in vars(args).items() if name != "handler"})

    @property
    def output_dir(self) -> Path:
        """--out, else the environment variable TSL_DEFAULT_OUT, else the current directory."""
        return Path(self.out or os.environ.get(ENV_DEFAULT_OUT) or ".")

    @property
    def fault_mode(self) -> Optional[Fault]:
        """The injected fault."""
        return None if self.fault is None else Fault(self.fault)

    @property
    def log_level(self) -> int:
        """WARNING, INFO with -v and DEBUG with -vv."""
        return max(logging.DEBUG, logging.WARNING - 10 * self.verbose)

    def time_scale(self) -> TimeScale:
        """The parsed time scale or the default of the command."""
        return parse_scale(self.scale or DEFAULT_SCALES[self.command])

    def interval(self, ts: TimeScale) -> tuple[float, float]:
        """[a, b], defaulting to the extremes of the time scale."""
        a = ts.min if self.a is None else self.a
        b = ts.max if self.b is None else self.b
        if a not in ts or b not in ts:
            raise ConfigError(f"The interval [{a}, {b}] must have both ends in the time scale {ts}.")
        if not a < b:
            raise ConfigError(f"The interval [{a}, {b}] must satisfy a < b.")
        return a, b


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _sanitize(value: Any) -> Any:
    """Replace non-finite floats by None, JSON has no representation for them."""
    if isinstance(value, dict):
        return {key: _sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_json(path: Path, report: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as file:
        json.dump(_sanitize(report), file, indent=2, default=_json_default)
        file.write("\n")


def _emit(config: RunConfig, report: dict[str, Any], summary: str) -> None:
    if config.json:
        print(json.dumps(_sanitize(report), indent=2, default=_json_default))
    else:
        print(summary)


def cmd_example4(config: RunConfig) -> ExitCode:
    """
    Minimize ∫ ((x^Δ)² + x^σ + t·x^Δ) Δt with x(a) = alpha and x(b) = beta: verify the fundamental lemma for the
    linear shift, transport the trivial minimizer and cross-check it against the quadratic oracle. Writes
    ``report.json`` and ``minimizer.csv``.
    """
    logger = logging.getLogger(__name__)
    ts = config.time_scale()
    a, b = config.interval(ts)
    problem = illustrative_problem(ts, a, b, config.alpha, config.beta)
    pair = linear_shift_case(problem, config.fault_mode)
    verification = verify_lemma(
        pair, config.trials, config.seed, config.tol_res, config.tol_gap, log_level=config.log_level
    )
    c, d = shift_constants(a, b, config.alpha, config.beta)

    failures = list(verification.failures)
    report: dict[str, Any] = {"command": "example4", "config": config.to_dict(), "verification": verification.to_json()}
    try:
        x_star = transport_minimizer(pair, Trajectory.from_polynomial(problem.scale, Polynomial([0.0])))
    except InconsistentTransformationError as exc:
        failures.append(str(exc))
        x_star = None
    if x_star is not None:
        value = evaluate_functional(problem, x_star)
        report["minimizer"] = {"c": c, "d": d, "value": value}
        try:
            dp = discretize(problem)
            oracle = solve_quadratic(dp)
        except (DegeneracyError, WrongOracleError) as exc:
            failures.append(str(exc))
        else:
            deviation = float(np.max(np.abs(grid_values(dp, x_star) - np.array(oracle.argmin))))
            transported = dp.objective(dp.sample(x_star))
            report["oracle"] = oracle.to_json()
            report["oracle_check"] = {"max_deviation": deviation, "transported_value": transported}
            if not deviation <= TOL_ORACLE:
                failures.append(f"The oracle minimizer deviates by {deviation:.3e} from the transported minimizer.")
            if not abs(oracle.value - transported) <= TOL_ORACLE * max(1.0, abs(transported)):
                failures.append(f"The oracle value {oracle.value!r} differs from {transported!r}.")
        x_star.to_csv(config.output_dir / "minimizer.csv")

    verdict = Verdict.FAIL if failures else Verdict.PASS
    report["failures"] = failures
    report["verdict"] = verdict.value
    _write_json(config.output_dir / "report.json", report)
    summary = [str(verification), f"Minimizer          : x(t) = {c:.12g}·t + {d:.12g}"]
    summary.extend(f"Failure            : {failure}" for failure in failures[len(verification.failures) :])
    _emit(config, report, "\n".join(summary))
    logger.info("example4 finished with verdict %s.", verdict.value)
    return ExitCode.SUCCESS if verdict is Verdict.PASS else ExitCode.VERIFICATION_FAILED


def cmd_control(config: RunConfig) -> ExitCode:
    """
    Solve the control example by invariance and check the minimum, the feasibility of the minimizer and the
    invariance gaps on a grid of s along random controls. Writes ``control_report.json`` and ``control.csv``.
    """
    ts = config.time_scale()
    if ts.min != 0 or ts.max != 1:
        raise ConfigError(f"The control example needs a time scale spanning [0, 1], got {ts}.")
    p = shipped_control_problem(ts)
    tol_cost = TOL_COST_SCATTERED if p.scale.is_scattered else TOL_COST_DENSE
    report: dict[str, Any] = {"command": "control", "config": config.to_dict()}
    failures: list[str] = []
    try:
        solution = solve_by_invariance(p, log_level=config.log_level)
    except NoInvariantSolutionError as exc:
        failures.append(str(exc))
        solution = None
    if solution is not None:
        direct = cost(p, solution.minimizer)
        feasibility = feasible(p, solution.minimizer, tol_cost)
        report["solution"] = {**solution.to_json(), "direct_cost": direct, "feasible": feasibility.feasible}
        if not abs(solution.min_cost - EXPECTED_MIN_COST) <= tol_cost:
            failures.append(f"The minimum cost {solution.min_cost!r} differs from {EXPECTED_MIN_COST}.")
        if not abs(direct - solution.min_cost) <= tol_cost:
            failures.append(f"The cost of the minimizer {direct!r} differs from {solution.min_cost!r}.")
        failures.extend(feasibility.violations)
        write_control_csv(config.output_dir / "control.csv", p, solution.minimizer, solution.state)

    gaps = []
    for trial_seed in np.random.SeedSequence(config.seed).generate_state(config.trials):
        controls = random_feasible_controls(p, int(trial_seed), u2_magnitude=0.5, enforce_box=False)
        gaps.extend(check_invariance(p, s, controls) for s in S_GRID)
    failed = [gap for gap in gaps if not gap.passed]
    if failed:
        failures.append(f"{len(failed)} of {len(gaps)} invariance checks failed.")
    report["invariance"] = {
        "checks": len(gaps),
        "failed": len(failed),
        "max_gap_error": max((abs(gap.cost_gap - gap.expected_gap) for gap in gaps), default=0.0),
        "max_dynamics_residual": max((gap.max_dynamics_residual for gap in gaps), default=0.0),
    }
    verdict = Verdict.FAIL if failures else Verdict.PASS
    report["failures"] = failures
    report["verdict"] = verdict.value
    _write_json(config.output_dir / "control_report.json", report)
    summary = [str(solution) if solution is not None else "No invariant solution"]
    summary.append(f"Invariance checks: {len(gaps) - len(failed)}/{len(gaps)} passed")
    summary.extend(f"Failure          : {failure}" for failure in failures)
    _emit(config, report, "\n".join(summary))
    return ExitCode.SUCCESS if verdict is Verdict.PASS else ExitCode.VERIFICATION_FAILED


def cmd_verify(config: RunConfig) -> ExitCode:
    """
    Run the verification suites on the bundled time scales, or on --scale if given. Writes ``verify_report.json``.
    """
    scales = {"custom": config.time_scale()} if config.scale else bundled_scales()
    results = run_suites(
        scales,
        alpha=config.alpha,
        beta=config.beta,
        trials=config.trials,
        seed=config.seed,
        tol_res=config.tol_res,
        tol_gap=config.tol_gap,
        fault=config.fault_mode,
        log_level=config.log_level,
    )
    passed = all(result.passed for result in results)
    report = {
        "command": "verify",
        "config": config.to_dict(),
        "suites": [result.to_json() for result in results],
        "verdict": (Verdict.PASS if passed else Verdict.FAIL).value,
    }
    _write_json(config.output_dir / "verify_report.json", report)
    _emit(config, report, "\n".join(str(result) for result in results))
    return ExitCode.SUCCESS if passed else ExitCode.VERIFICATION_FAILED


class _ArgumentParser(argparse.ArgumentParser):
    """Raise a ConfigError on usage errors instead of exiting with status 2."""

    def error(self, message: str):  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with the subcommands example4, control and verify."""
    parser = _ArgumentParser(prog="timescale-leitmann", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    handlers: dict[str, tuple[Callable[[RunConfig], ExitCode], str]] = {
        "example4": (cmd_example4, "Solve the linear shift example by the direct method."),
        "control": (cmd_control, "Solve the control example by invariance."),
        "verify": (cmd_verify, "Run the verification suites."),
    }
    for name, (handler, help_text) in handlers.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        sub.add_argument(
            "--scale",
            help="Time scale: integers:a..b, hstep:a..b:h, qscale:q:kmin..kmax, interval:a..b, file:<path> or JSON.",
        )
        sub.add_argument("--a", type=float, help="Left end of the interval, defaults to the minimum of the scale.")
        sub.add_argument("--b", type=float, help="Right end of the interval, defaults to the maximum of the scale.")
        sub.add_argument("--alpha", type=float, default=0.0, help="Boundary value x(a).")
        sub.add_argument("--beta", type=float, default=1.0, help="Boundary value x(b).")
        sub.add_argument("--trials", type=int, default=100, help="Number of random trials.")
        sub.add_argument("--seed", type=int, default=0, help="Seed of the random trials.")
        sub.add_argument("--tol-res", type=float, help="Tolerance of the identity residual.")
        sub.add_argument("--tol-gap", type=float, default=1e-8, help="Tolerance of the constant gap.")
        sub.add_argument("--out", help=f"Output directory, defaults to ${ENV_DEFAULT_OUT} or the current directory.")
        sub.add_argument("--json", action="store_true", help="Print the report as JSON.")
        sub.add_argument("--fault", choices=[fault.value for fault in Fault], help="Inject a fault.")
        sub.add_argument("-v", "--verbose", action="count", default=0, help="Increase the verbosity.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line interface.

    Parameters
    ----------
    argv: Sequence of str, optional
        The arguments, defaults to ``sys.argv[1:]``.

    Returns
    -------
    int
        The exit code.
    """
    try:
        args = build_parser().parse_args(argv)
        handler = args.handler
        config = RunConfig.from_namespace(args)
        logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=config.log_level)
        return handler(config).value
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR.value
