"""
Command line interface for kgfilon.

    kgfilon solve --problem free --steps 100 --dump-state state.csv
    kgfilon convergence --problem example1 --omega 500 --steps 20,40,80,160 --out conv.csv
    kgfilon omega-sweep --omegas 1000,10000,100000 --steps 100 --out sweep.csv
    kgfilon compare --omega 1500 --steps 100,200 --out compare.csv
    kgfilon moments --omega 0 --h 0.1
"""

import sys
from typing import List, Optional, Sequence

import click
import structlog
from pydantic import ValidationError

from discretization.grid import GridError
from discretization.mass import MassModelError
from integrators.quadrature import QuadratureError, moments
from integrators.reference import ConstantMassError, ReferenceCheckError, ReferenceSpecError
from integrators.runge_kutta import RungeKuttaError
from integrators.xi3 import IntegrationError

from .config import Settings, get_settings
from .experiments import (
    ExperimentConfig,
    HarnessError,
    MethodId,
    ProblemKind,
    build_problem,
    run_convergence,
    run_omega_sweep,
    solve as solve_problem,
)
from .monitoring import configure_logging, write_metrics
from .records import RecordError, emit_csv, emit_state_csv

logger = structlog.get_logger(__name__)

DOMAIN_ERRORS = (
    GridError,
    MassModelError,
    QuadratureError,
    IntegrationError,
    RungeKuttaError,
    ReferenceSpecError,
    ReferenceCheckError,
    ConstantMassError,
    HarnessError,
    RecordError,
)


def _comma_ints(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma separated list of integers, got {value!r}")


def _comma_floats(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected a comma separated list of numbers, got {value!r}")


def _comma_methods(ctx, param, value: Optional[str]) -> Optional[List[MethodId]]:
    if value is None:
        return None
    known = [m.value for m in MethodId]
    methods = []
    for item in (s.strip() for s in value.split(",")):
        if item not in known:
            raise click.BadParameter(f"unknown method {item!r} (choose from {', '.join(known)})")
        methods.append(MethodId(item))
    return methods


def experiment_options(func):
    """Options shared by the experiment commands."""
    options = [
        click.option("--problem", type=click.Choice([p.value for p in ProblemKind]),
                     default=ProblemKind.EXAMPLE1.value, show_default=True, help="Problem preset"),
        click.option("--omega", type=float, default=None, help="Modulation frequency (example1 only, default 10)"),
        click.option("--steps", callback=_comma_ints, default=None, help="Comma list of step counts K"),
        click.option("--methods", callback=_comma_methods, default=None, help="Comma list of method ids"),
        click.option("--grid-m", type=int, default=None, help="Number of grid nodes"),
        click.option("--t-final", type=float, default=None, help="Final time T"),
        click.option("--ref-steps", type=int, default=None, help="Reference step count"),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output CSV path"),
        click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized diagnostics"),
        click.option("--repeats", type=int, default=None, help="Timing repetitions (minimum reported)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _experiment(settings: Settings, problem, omega, steps, methods, grid_m, t_final, ref_steps,
                out, seed, repeats, default_methods: Sequence[MethodId]) -> ExperimentConfig:
    return ExperimentConfig.from_settings(
        settings,
        problem=problem,
        omega=omega,
        steps_list=steps,
        methods=methods or list(default_methods),
        M=grid_m,
        T=t_final,
        ref_steps=ref_steps,
        out_path=out,
        seed=seed,
        repeats=repeats,
    )


def _require_out(out: Optional[str]) -> str:
    if out is None:
        raise click.UsageError("--out is required for this command")
    return out


@click.group()
@click.option("--log-level", default=None, help="Logging level (default from settings)")
@click.option("--log-json/--no-log-json", default=None, help="Render logs as JSON")
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str], log_json: Optional[bool]) -> None:
    """Klein-Gordon solver with Filon-type exponential integration."""
    settings = get_settings()
    configure_logging(
        log_level or settings.monitoring.log_level,
        json=settings.monitoring.log_json if log_json is None else log_json,
    )
    ctx.obj = settings
    if settings.monitoring.metrics_path:
        ctx.call_on_close(lambda: write_metrics(settings.monitoring.metrics_path))


@main.command()
@experiment_options
@click.option("--dump-state", type=click.Path(dir_okay=False), default=None,
              help="Write the final state as x,re_psi,im_psi,re_dpsi,im_dpsi")
@click.pass_obj
def solve(settings: Settings, dump_state, **options) -> None:
    """Run one method with the first K of --steps and write the final state."""
    path = dump_state or options["out"]
    if path is None:
        raise click.UsageError("solve needs --dump-state or --out")
    cfg = _experiment(settings, default_methods=[MethodId.XI3_FILON], **options)
    problem = build_problem(cfg)
    method, K = cfg.methods[0], cfg.steps_list[0]
    state = solve_problem(problem, method, K, cfg.real_tolerance)
    emit_state_csv(problem.grid.nodes, state.psi, state.dpsi, path)
    logger.info("solve_completed", method=method.value, K=K, path=path)


@main.command()
@experiment_options
@click.pass_obj
def convergence(settings: Settings, **options) -> None:
    """Errors and slopes over --steps against a fine reference."""
    out = _require_out(options["out"])
    cfg = _experiment(settings, default_methods=[MethodId.XI3_FILON], **options)
    emit_csv(run_convergence(cfg), out)


@main.command()
@experiment_options
@click.pass_obj
def compare(settings: Settings, **options) -> None:
    """Convergence study of rk2, rk4 and xi3-filon unless --methods is given."""
    out = _require_out(options["out"])
    cfg = _experiment(settings, default_methods=[MethodId.RK2, MethodId.RK4, MethodId.XI3_FILON], **options)
    emit_csv(run_convergence(cfg), out)


@main.command("omega-sweep")
@experiment_options
@click.option("--omegas", callback=_comma_floats, required=True, help="Comma list of frequencies")
@click.pass_obj
def omega_sweep(settings: Settings, omegas: List[float], **options) -> None:
    """Example 1 at every omega of --omegas crossed with --steps."""
    out = _require_out(options["out"])
    if options["omega"] is not None:
        raise click.UsageError("use --omegas, not --omega, with omega-sweep")
    cfg = _experiment(settings, default_methods=[MethodId.XI3_FILON], **options)
    emit_csv(run_omega_sweep(cfg, omegas), out)


@main.command("moments")
@click.option("--omega", type=float, required=True, help="Frequency")
@click.option("--h", "h", type=float, required=True, help="Step size")
def moments_command(omega: float, h: float) -> None:
    """Print mu_1, mu_2, mu_3 for one (omega, h)."""
    result = moments(omega, h)
    click.echo("moment,re,im")
    for name, value in zip(("mu1", "mu2", "mu3"), (result.mu1, result.mu2, result.mu3)):
        click.echo(f"{name},{value.real!r},{value.imag!r}")


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return an exit code: 0 success, 1 failure, 2 usage error."""
    try:
        result = main.main(args=list(argv) if argv is not None else None, prog_name="kgfilon",
                           standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"Error: {e.format_message()}", err=True)
        return 2
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        click.echo(f"Error: {where}: {first['msg']}", err=True)
        return 2
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted", err=True)
        return 1
    except DOMAIN_ERRORS as e:
        click.echo(f"Error: {e}", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(cli_main())
