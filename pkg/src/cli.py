"""Command Line Interface for wishart-lab."""

import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, Optional, Sequence

import click

from src.batch_evaluator import evaluate_curve, linspace_grid
from src.charpoly import recip_charpoly_avg
from src.config import eval_config_from, load_config_file, merge, parse_bool
from src.demmel import DemmelQuery, demmel_cdf_grid, demmel_pdf, fixed_trace_mineig_cdf
from src.eigdist import EigVector, joint_pdf
from src.errors import CoincidentNodesError, ConvergenceError, DomainError, ParameterError
from src.mc import McConfig, sample_eigs
from src.mineig import MinEigQuery, mineig_cdf
from src.params import Curve, EvalConfig, ModelParams
from src.report_generator import (
    FORMATS,
    curve_to_csv,
    curve_to_dict,
    generate_html_report,
    record_to_csv,
    record_to_dict,
    samples_to_csv,
    to_json,
    write_text,
)
from src.specfun import (
    ensure_converged,
    humbert_phi3,
    hyp0f1,
    hyp1f1,
    laguerre,
    laguerre_weighted_integral,
    pochhammer,
    tricomi_psi,
)
from src.verify import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

THREADS_ENVVAR = "WISHART_LAB_THREADS"


@dataclass
class CliState:
    """Group-level settings shared by every subcommand."""

    file_values: Dict[str, str] = field(default_factory=dict)
    threads: int = 1
    verbose: bool = False


@contextmanager
def _error_exit(verbose: bool) -> Iterator[None]:
    """Map library exceptions to exit codes with a red message on stderr."""
    try:
        yield
    except (click.exceptions.ClickException, click.exceptions.Exit, click.exceptions.Abort):
        raise
    except ConvergenceError as e:
        click.secho(f"Error: Numerical non-convergence - {e}", fg="red", err=True)
        _traceback(verbose)
        sys.exit(EXIT_CONVERGENCE)
    except (ParameterError, DomainError, CoincidentNodesError) as e:
        click.secho(f"Error: Invalid input - {e}", fg="red", err=True)
        _traceback(verbose)
        sys.exit(EXIT_USAGE)
    except FileNotFoundError as e:
        click.secho(f"Error: File not found - {e}", fg="red", err=True)
        _traceback(verbose)
        sys.exit(EXIT_USAGE)
    except Exception as e:
        click.secho(f"Error: {e}", fg="red", err=True)
        _traceback(verbose)
        sys.exit(EXIT_UNEXPECTED)


def _traceback(verbose: bool) -> None:
    if verbose:
        import traceback

        traceback.print_exc()


def _state() -> CliState:
    return click.get_current_context().find_object(CliState) or CliState()


def _model(state: CliState, n: Optional[int], m: Optional[int], mu: Optional[float], allow: bool) -> ModelParams:
    values = merge(state.file_values, {"n": n, "m": m, "mu": mu})
    for key in ("n", "m"):
        if key not in values:
            raise ParameterError(f"--{key} is required (as a flag or in the config file)")
    allow_file = parse_bool(str(values.get("allow_outside_envelope", "false")))
    try:
        return ModelParams(int(values["n"]), int(values["m"]), float(values.get("mu", 0.0)), allow or allow_file)
    except (TypeError, ValueError) as e:
        if isinstance(e, ParameterError):
            raise
        raise ParameterError(f"invalid model parameter: {e}") from e


def _mc_config(state: CliState, samples: Optional[int], seed: int, streams: Optional[int], rotated: bool) -> McConfig:
    values = merge(state.file_values, {"samples": samples, "streams": streams})
    rotated_file = parse_bool(str(values.get("rotated_mean", "false")))
    return McConfig(
        samples=int(values.get("samples", 100_000)),
        seed=seed,
        streams=int(values.get("streams", 1)),
        rotated_mean=rotated or rotated_file,
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        write_text(text, output)
        click.secho(f"Saved to {output}", fg="green", err=True)
    else:
        click.echo(text, nl=False)


def _emit_curve(curve: Curve, params: ModelParams, config: EvalConfig, fmt: str, output: Optional[str]) -> None:
    text = curve_to_csv(curve, params, config) if fmt == "csv" else to_json(curve_to_dict(curve, params, config))
    _emit(text, output)


def _emit_record(record: Dict[str, Any], fmt: str, output: Optional[str]) -> None:
    _emit(record_to_csv(record) if fmt == "csv" else to_json(record), output)


def model_options(f: Callable) -> Callable:
    options = [
        click.option("--n", type=int, default=None, help="Matrix dimension n"),
        click.option("--m", type=int, default=None, help="Degrees of freedom m >= n"),
        click.option("--mu", type=float, default=None, help="Noncentrality mu = tr(M^H M) (default: 0)"),
        click.option(
            "--allow-outside-envelope",
            is_flag=True,
            help="Accept n + alpha > 64 or mu > 50 (double precision may not suffice)",
        ),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def output_options(default_format: str = "json") -> Callable[[Callable], Callable]:
    def decorator(f: Callable) -> Callable:
        f = click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write to file instead of stdout")(f)
        f = click.option(
            "--format",
            "fmt",
            type=click.Choice(FORMATS, case_sensitive=False),
            default=default_format,
            show_default=True,
            help="Output format",
        )(f)
        return f

    return decorator


def grid_options(f: Callable) -> Callable:
    options = [
        click.option("--x-min", type=float, required=True, help="First grid point"),
        click.option("--x-max", type=float, required=True, help="Last grid point"),
        click.option("--points", type=click.IntRange(min=1), default=100, show_default=True, help="Number of grid points"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="key=value settings file")
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=1,
    envvar=THREADS_ENVVAR,
    show_envvar=True,
    show_default=True,
    help="Worker threads for grid and Monte Carlo fan-out",
)
@click.option("--verbose", is_flag=True, help="Enable debug logging on stderr")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], threads: int, verbose: bool) -> None:
    """
    wishart-lab - eigenvalue statistics of rank-1 non-central complex Wishart matrices.

    Evaluates the minimum-eigenvalue c.d.f., the Demmel condition number
    density, the reciprocal characteristic polynomial average and related
    quantities on grids, and checks them against a Monte Carlo oracle.

    Examples:

    \b
        # Minimum eigenvalue c.d.f. as CSV
        python -m src.cli mineig-cdf --n 2 --m 4 --mu 1.5 \\
            --x-min 0.01 --x-max 5 --points 200 --format csv

    \b
        # Monte Carlo verification
        python -m src.cli verify --suite mineig --n 2 --m 4 --mu 1.5 \\
            --samples 1000000 --seed 42
    """
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG, stream=sys.stderr, format="%(asctime)s %(name)s %(levelname)s %(message)s"
        )
    with _error_exit(verbose):
        ctx.obj = CliState(load_config_file(config_path), threads, verbose)


@main.command("joint-pdf")
@model_options
@click.option("--lambdas", required=True, help="Comma-separated ascending eigenvalues")
@output_options()
def joint_pdf_cmd(n, m, mu, allow_outside_envelope, lambdas, fmt, output):
    """Joint density of the ordered eigenvalues at one point."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)
        try:
            values = tuple(float(x) for x in lambdas.split(","))
        except ValueError as e:
            raise ParameterError(f"--lambdas must be comma-separated numbers: {e}") from e
        value = joint_pdf(params, EigVector(values), config)
        _emit_record(record_to_dict("joint_pdf", value, params, config, {"lambdas": list(values)}), fmt, output)


@main.command("mineig-cdf")
@model_options
@grid_options
@click.option("--no-special-cases", is_flag=True, help="Always use the general determinant")
@output_options()
def mineig_cdf_cmd(n, m, mu, allow_outside_envelope, x_min, x_max, points, no_special_cases, fmt, output):
    """C.d.f. of the minimum eigenvalue on a grid."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)

        def value(x: float) -> float:
            return mineig_cdf(MinEigQuery(params, x, config), use_special_cases=not no_special_cases)

        curve = evaluate_curve(value, linspace_grid(x_min, x_max, points), state.threads, {"quantity": "mineig_cdf"})
        _emit_curve(curve, params, config, fmt, output)


@main.command("demmel-pdf")
@model_options
@grid_options
@output_options()
def demmel_pdf_cmd(n, m, mu, allow_outside_envelope, x_min, x_max, points, fmt, output):
    """Density of V = tr(W)/l_min on a grid of v."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)

        def value(v: float) -> float:
            return demmel_pdf(DemmelQuery(params, v, config))

        curve = evaluate_curve(value, linspace_grid(x_min, x_max, points), state.threads, {"quantity": "demmel_pdf"})
        _emit_curve(curve, params, config, fmt, output)


@main.command("demmel-cdf")
@model_options
@grid_options
@output_options()
def demmel_cdf_cmd(n, m, mu, allow_outside_envelope, x_min, x_max, points, fmt, output):
    """C.d.f. of V = tr(W)/l_min on a grid of v."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)
        grid = linspace_grid(x_min, x_max, points)
        values = demmel_cdf_grid(params, grid, config)
        curve = Curve(grid, tuple(float(v) for v in values), {"quantity": "demmel_cdf"})
        _emit_curve(curve, params, config, fmt, output)


@main.command("fixed-trace-cdf")
@model_options
@grid_options
@output_options()
def fixed_trace_cdf_cmd(n, m, mu, allow_outside_envelope, x_min, x_max, points, fmt, output):
    """C.d.f. of the minimum eigenvalue of W / tr(W) on a grid."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)

        def value(x: float) -> float:
            return fixed_trace_mineig_cdf(params, x, config)

        curve = evaluate_curve(
            value, linspace_grid(x_min, x_max, points), state.threads, {"quantity": "fixed_trace_mineig_cdf"}
        )
        _emit_curve(curve, params, config, fmt, output)


@main.command("charpoly-avg")
@model_options
@click.option("--z", type=float, required=True, help="Positive real argument")
@output_options()
def charpoly_avg_cmd(n, m, mu, allow_outside_envelope, z, fmt, output):
    """Average of 1/det(zI + W)."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)
        value = recip_charpoly_avg(params, z, config)
        _emit_record(record_to_dict("recip_charpoly_avg", value, params, config, {"z": z}), fmt, output)


def _series(fn: Callable[..., Any]) -> Callable[..., float]:
    return lambda *args: ensure_converged(fn(*args), fn.__name__)


SPECFUN = {
    "pochhammer": (("a", "k"), lambda a, k: pochhammer(a, int(k))),
    "laguerre": (("M", "rho", "x"), lambda d, rho, x: laguerre(int(d), rho, x)),
    "hyp0f1": (("c", "z"), _series(hyp0f1)),
    "hyp1f1": (("a", "c", "z"), _series(hyp1f1)),
    "humbert_phi3": (("a", "c", "x", "y"), _series(humbert_phi3)),
    "tricomi_psi": (("a", "c", "z"), tricomi_psi),
    "laguerre_weighted_integral": (("j", "k", "M"), lambda j, k, d: laguerre_weighted_integral(int(j), int(k), int(d))),
}


@main.command("specfun")
@click.argument("name", type=click.Choice(sorted(SPECFUN)))
@click.argument("args", nargs=-1, type=float)
@output_options()
def specfun_cmd(name, args, fmt, output):
    """Evaluate one special function: specfun NAME ARG..."""
    state = _state()
    with _error_exit(state.verbose):
        arg_names, fn = SPECFUN[name]
        if len(args) != len(arg_names):
            raise ParameterError(f"{name} takes {len(arg_names)} arguments ({', '.join(arg_names)}), got {len(args)}")
        config = eval_config_from(state.file_values)
        value = float(fn(*args))
        _emit_record(record_to_dict(name, value, None, config, dict(zip(arg_names, args))), fmt, output)


def mc_options(f: Callable) -> Callable:
    options = [
        click.option("--samples", type=click.IntRange(min=1), default=None, help="Number of draws (default: 100000)"),
        click.option("--seed", type=int, required=True, help="64-bit seed (required for reproducibility)"),
        click.option("--streams", type=click.IntRange(min=1), default=None, help="Independent generator lanes"),
        click.option("--rotated-mean", is_flag=True, help="Spread the rank-1 mean over all entries"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@main.command("sample")
@model_options
@mc_options
@output_options(default_format="csv")
def sample_cmd(n, m, mu, allow_outside_envelope, samples, seed, streams, rotated_mean, fmt, output):
    """Dump sampled eigenvalues, one row per draw."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)
        mc = _mc_config(state, samples, seed, streams, rotated_mean)
        batch = sample_eigs(params, mc, threads=state.threads)
        if fmt == "csv":
            _emit(samples_to_csv(batch, config), output)
        else:
            payload = {
                "params": params.describe(),
                "mc": {"samples": mc.samples, "seed": mc.seed, "streams": mc.streams, "rotated_mean": mc.rotated_mean},
                "config_hash": config.config_hash(),
                "eig_rows": batch.eig_rows.tolist(),
            }
            _emit(to_json(payload), output)


@main.command("verify")
@click.option("--suite", type=click.Choice(SUITES), required=True, help="Named acceptance suite")
@model_options
@mc_options
@click.option("--threshold", type=float, default=None, help="Override the suite's pass threshold")
@click.option("--z", type=float, default=1.0, show_default=True, help="Argument for the charpoly suite")
@click.option("--s", "s_value", type=float, default=0.5, show_default=True, help="Argument for the mgf suite")
@click.option("--html", "html_path", type=click.Path(dir_okay=False), default=None, help="Also write an HTML report")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write the JSON report to file")
def verify_cmd(suite, n, m, mu, allow_outside_envelope, samples, seed, streams, rotated_mean, threshold, z, s_value, html_path, output):
    """Run a Monte Carlo acceptance suite; exit 4 if it fails."""
    state = _state()
    with _error_exit(state.verbose):
        params = _model(state, n, m, mu, allow_outside_envelope)
        config = eval_config_from(state.file_values)
        mc = _mc_config(state, samples, seed, streams, rotated_mean)
        report = run_suite(suite, params, mc, config, threads=state.threads, threshold=threshold, z=z, s=s_value)
        _emit(to_json(report.to_dict()), output)
        if html_path:
            generate_html_report(report, html_path)
            click.secho(f"HTML report saved to: {html_path}", fg="green", err=True)

    if report.passed:
        click.secho(f"Suite {suite} passed", fg="green", err=True)
        return
    for check in report.checks:
        if not check.passed:
            click.secho(
                f"Warning: {check.name} = {check.statistic:.6g} exceeds threshold {check.threshold:g}",
                fg="yellow",
                err=True,
            )
    sys.exit(EXIT_VERIFY_FAILED)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and return its exit code instead of exiting.

    Example:
        >>> run(["--help"])  # doctest: +SKIP
        0
    """
    try:
        result = main.main(args=list(argv) if argv is not None else None, prog_name="wishart-lab", standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.secho("Aborted", fg="red", err=True)
        return EXIT_UNEXPECTED
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_UNEXPECTED
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(run())
