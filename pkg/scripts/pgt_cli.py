#!/usr/bin/env python3
"""
PGT CLI - pairwise group testing: expected costs, optimality checks and simulations

Usage:
  pgt expected --p 0.3,0.3,0.3 [--deltas]
  pgt optimal --p 0.30,0.31,0.35 [--emit-tree FILE] [--expect-optimal]
  pgt verify --check lemma1 [--trials N]
  pgt simulate --policy gpta --p 0.3,0.3,0.3 [--reps N] [--seed S]
  pgt oat --p 0.3,0.3,0.3
  pgt sweep --n 10 [--p-grid lo:hi:step]
  pgt orders --p 0.35,0.30,0.32 [--policy gpta|dp]
  pgt --help
  pgt --version
"""

import functools
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table
from rich.text import Text

from scripts.pgt_modules.config import config
from scripts.pgt_modules.data_types import (
    GroupTestingError,
    InputFormatError,
    NotSorted,
    ProbabilityVector,
    RunConfig,
)
from scripts.pgt_modules.utils import get_rich_console_instance, make_run_id, setup_logger

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


class RichGroup(click.Group):
    """Click Group that renders a Rich-styled help message."""

    def get_help(self, ctx: click.Context) -> str:
        buf = io.StringIO()
        console = Console(file=buf, force_terminal=True, color_system="truecolor")

        console.rule("[bold cyan]PGT - Pairwise Group Testing", style="cyan")
        console.print(f"[bold]Version:[/bold] {__version__}\n")

        if self.help:
            console.print(self.help)
            console.print()

        console.print("[bold yellow]Usage[/bold yellow]")
        try:
            usage = ctx.get_usage()
        except Exception:
            usage = "pgt [OPTIONS] COMMAND [ARGS]"
        console.print(Text(usage, style="green"))
        console.print()

        console.print("[bold magenta]Commands[/bold magenta]")
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Command", style="cyan", no_wrap=True)
        table.add_column("Description", style="white")
        for name, cmd in self.commands.items():
            if getattr(cmd, "hidden", False):
                continue
            table.add_row(name, cmd.get_short_help_str() or "")
        console.print(table)
        console.print()

        console.print(
            "[bold blue]Tip[/bold blue] Type [green]pgt COMMAND --help[/green] for command-specific options."
        )
        console.print()
        return buf.getvalue()


class RichCommand(click.Command):
    """Click Command with help rendered like the group's."""

    def get_help(self, ctx: click.Context) -> str:
        buf = io.StringIO()
        console = Console(file=buf, force_terminal=True, color_system="truecolor")

        cmd_name = self.name.upper() if self.name else "COMMAND"
        console.rule(f"[bold cyan]PGT {cmd_name}[/bold cyan]", style="cyan")
        console.print()

        if self.help:
            console.print(self.help)
            console.print()

        console.print("[bold yellow]Usage[/bold yellow]")
        try:
            usage = ctx.get_usage()
        except Exception:
            usage = f"pgt {self.name} [OPTIONS]"
        console.print(Text(usage, style="green"))
        console.print()

        opts = [p for p in self.get_params(ctx) if isinstance(p, click.Option)]
        if opts:
            console.print("[bold magenta]Options[/bold magenta]")
            table = Table(show_header=True, header_style="bold magenta", box=None, padding=(0, 2))
            table.add_column("Flag", style="cyan", no_wrap=True)
            table.add_column("Description", style="white")
            table.add_column("Default", style="dim white")
            for opt in opts:
                record = opt.get_help_record(ctx)
                if record:
                    default_val = ""
                    if opt.default is not None and not opt.required and not opt.is_flag:
                        default_val = str(opt.default)
                    table.add_row(record[0], record[1], default_val)
            console.print(table)
            console.print()

        return buf.getvalue()


def input_options(fn):
    """--p / --input / --n + --p-const, the three ways to give a probability vector."""
    decorators = [
        click.option("--p", "p_text", help="Comma-separated probabilities, e.g. 0.3,0.31,0.35"),
        click.option(
            "--input",
            "input_path",
            type=click.Path(dir_okay=False),
            help="Text file (one probability per line) or JSON {\"p\": [...]}",
        ),
        click.option("--n", type=int, help="Number of units for a homogeneous vector"),
        click.option("--p-const", type=float, help="Shared probability for a homogeneous vector"),
        click.option("--sort", is_flag=True, help="Sort the vector non-decreasing and report the permutation"),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


def output_options(fn):
    decorators = [
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="Report format"),
        click.option("--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout"),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


def guarded(fn):
    """Map domain and validation errors to exit code 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (GroupTestingError, ValidationError) as e:
            message = str(e)
            if isinstance(e, NotSorted):
                message += " (use --sort to reorder)"
            console = get_rich_console_instance()
            if console:
                console.error(message)
            else:
                click.echo(f"Error: {message}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def _start(ctx: click.Context, command: str) -> None:
    verbose = bool(ctx.obj and ctx.obj.get("verbose"))
    setup_logger(make_run_id(), command=command, level="DEBUG" if verbose else None)


def parse_inline(text: str) -> List[float]:
    values = []
    for index, token in enumerate(text.split(","), start=1):
        token = token.strip()
        try:
            values.append(float(token))
        except ValueError:
            raise InputFormatError("--p", f"item {index}: {token!r} is not a number") from None
    return values


def build_run_config(subcommand: str, **flags: Any) -> RunConfig:
    """Resolve flags against config.yaml and the environment; flags win."""
    p_text = flags.pop("p_text", None)
    fmt = flags.pop("fmt", None)
    input_path = flags.pop("input_path", None)
    seed = flags.pop("seed", None)
    reps = flags.pop("reps", None)
    tol = flags.pop("tol", None)
    workers = flags.pop("workers", None)
    return RunConfig(
        subcommand=subcommand,
        p=parse_inline(p_text) if p_text is not None else None,
        input=input_path,
        n=flags.pop("n", None),
        p_const=flags.pop("p_const", None),
        seed=config.seed if seed is None else seed,
        reps=config.reps if reps is None else reps,
        tol=config.tolerance if tol is None else tol,
        format=fmt or flags.pop("default_format", None) or config.output_format,
        out=flags.pop("out", None),
        workers=config.workers if workers is None else workers,
        sort=bool(flags.pop("sort", False)),
        extra=flags,
    )


def load_vector(run: RunConfig) -> Tuple[ProbabilityVector, Optional[Tuple[int, ...]]]:
    """The run's probability vector, and the sorting permutation under --sort."""
    from scripts.pgt_modules.model import (
        homogeneous,
        load_probabilities,
        sort_nondecreasing,
        validate_probabilities,
    )

    if run.source == "inline":
        v = validate_probabilities(run.p)
    elif run.source == "file":
        v = load_probabilities(Path(run.input))
    else:
        v = homogeneous(run.n, run.p_const)
    if not run.sort:
        return v, None
    return sort_nondecreasing(v)


def write_report(run: RunConfig, payload: Dict[str, Any]) -> None:
    from scripts.pgt_modules.reports import emit, mapping_to_csv, to_json

    text = to_json(payload) if run.format == "json" else mapping_to_csv(payload)
    emit(text, run.out)


@click.group(cls=RichGroup)
@click.version_option(version=__version__, prog_name="pgt")
@click.option("--verbose", is_flag=True, help="Log DEBUG progress to stderr")
@click.pass_context
def cli(ctx: click.Context, verbose: bool):
    """
    PGT - Pairwise Group Testing

    Expected test counts of the generalized pairwise testing algorithm (GPTA),
    the exact optimal ordered nested procedure, optimal alphabetic isolation
    trees, Monte Carlo baselines and randomized property checks.

    Examples:
      pgt expected --p 0.3,0.3,0.3 --deltas
      pgt optimal --p 0.45,0.45
      pgt verify --check theorem2 --trials 1000 --n-max 10
      pgt simulate --policy gpta --p 0.3,0.3,0.3 --reps 100000 --seed 7
      pgt sweep --n 10 --p-grid 0.29:0.39:0.005
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose


@cli.command(cls=RichCommand)
@input_options
@output_options
@click.option("--deltas", is_flag=True, help="Include the marginal costs Delta_i:n")
@click.pass_context
@guarded
def expected(ctx, deltas, **flags):
    """Expected number of GPTA tests for a sorted vector."""
    from scripts.pgt_modules.gpta import delta_recursive, expected_tests_gpta
    from scripts.pgt_modules.model import require_sorted

    _start(ctx, "expected")
    run = build_run_config("expected", **flags)
    v, permutation = load_vector(run)
    require_sorted(v)
    report: Dict[str, Any] = {"n": v.n, "t": expected_tests_gpta(v)}
    if deltas:
        report["deltas"] = list(delta_recursive(v).values)
    if permutation is not None:
        report["permutation"] = list(permutation)
    write_report(run, report)


@cli.command(cls=RichCommand)
@input_options
@output_options
@click.option("--tol", type=float, help="Tolerance for optimality and uniqueness")
@click.option("--emit-tree", type=click.Path(dir_okay=False), help="Write the DP-optimal strategy tree as JSON")
@click.option("--expect-optimal", is_flag=True, help="Exit 1 unless GPTA is optimal")
@click.pass_context
@guarded
def optimal(ctx, emit_tree, expect_optimal, **flags):
    """Compare GPTA with the exact optimal ordered nested procedure."""
    from scripts.pgt_modules.dp import (
        extract_strategy,
        first_action_costs,
        is_gpta_optimal,
        optimal_onp,
        step1_competitor_bound,
    )
    from scripts.pgt_modules.reports import write_json_file
    from scripts.pgt_modules.strategy import strategy_to_json

    _start(ctx, "optimal")
    run = build_run_config("optimal", **flags)
    v, permutation = load_vector(run)
    verdict = is_gpta_optimal(v, tol=run.tol)
    report: Dict[str, Any] = {"n": v.n, "G1": verdict.dp_cost}
    report.update(verdict.model_dump())
    if v.n >= 2:
        report["first_actions"] = [
            {
                "k": k,
                "cost": cost,
                "step1_bound": step1_competitor_bound(v, k) if k >= 3 else None,
            }
            for k, cost in first_action_costs(v)
        ]
    if permutation is not None:
        report["permutation"] = list(permutation)
    if emit_tree:
        tables, _ = optimal_onp(v, tol=run.tol)
        write_json_file(strategy_to_json(extract_strategy(tables, v)), emit_tree)
    write_report(run, report)

    console = get_rich_console_instance()
    if console:
        if verdict.verdict == "suboptimal":
            console.warning(f"GPTA is suboptimal: gap {verdict.gap:.3e}, optimum starts with units 1..{verdict.first_move}")
        else:
            console.info(f"verdict: {verdict.verdict} (gap {verdict.gap:.3e})")
    if expect_optimal and verdict.verdict == "suboptimal":
        sys.exit(EXIT_FAILURE)


@cli.command(cls=RichCommand)
@output_options
@click.option("--check", "check_name", required=True, help="Property sweep to run")
@click.option("--trials", type=int, help="Number of random vectors")
@click.option("--n-min", type=int, help="Smallest n (clamped to the check's minimum)")
@click.option("--n-max", type=int, help="Largest n")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Seed of the vector stream")
@click.option("--tol", type=float, help="Uniqueness margin")
@click.pass_context
@guarded
def verify(ctx, check_name, trials, n_min, n_max, **flags):
    """Run a randomized property sweep; exit 1 on any failure."""
    from scripts.pgt_modules.reports import emit, models_to_csv, to_json
    from scripts.pgt_modules.verify import run_check

    _start(ctx, "verify")
    run = build_run_config("verify", **flags)
    summary = run_check(
        check_name,
        trials=config.verify_trials if trials is None else trials,
        n_min=n_min,
        n_max=n_max,
        seed=run.seed,
        tol=run.tol,
    )
    emit(to_json(summary) if run.format == "json" else models_to_csv([summary]), run.out)

    console = get_rich_console_instance()
    if console:
        console.status_table(
            {"check": summary.check, "passed": summary.passed, "failed": summary.failed},
            title="Verification",
        )
        if summary.ok:
            console.success(f"{summary.check}: {summary.passed} trials passed")
        else:
            console.error(f"{summary.check}: counterexample {summary.counterexample} ({summary.detail})")
    if not summary.ok:
        sys.exit(EXIT_FAILURE)


@cli.command(cls=RichCommand)
@input_options
@output_options
@click.option(
    "--policy",
    default="gpta",
    show_default=True,
    type=click.Choice(["gpta", "individual", "dorfman", "mdorfman", "tree"]),
    help="Testing policy to simulate",
)
@click.option("--tree", "tree_path", type=click.Path(dir_okay=False), help="Strategy tree JSON for --policy tree")
@click.option("--reps", type=click.IntRange(min=1), help="Replicates")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Seed of the replicate streams")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@click.pass_context
@guarded
def simulate(ctx, policy, tree_path, **flags):
    """Monte Carlo estimate of a policy's expected number of tests."""
    from scripts.pgt_modules.reports import emit, models_to_csv, to_json
    from scripts.pgt_modules.sim import resolve_policy, simulate as run_simulation
    from scripts.pgt_modules.strategy import strategy_from_json

    _start(ctx, "simulate")
    run = build_run_config("simulate", **flags)
    v, _ = load_vector(run)
    tree = None
    if tree_path:
        try:
            tree = strategy_from_json(json.loads(Path(tree_path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            raise InputFormatError(str(tree_path), str(e)) from e
    report = run_simulation(resolve_policy(policy, v, tree), v, run.reps, run.seed, workers=run.workers)
    emit(to_json(report) if run.format == "json" else models_to_csv([report]), run.out)


@cli.command(cls=RichCommand)
@input_options
@output_options
@click.pass_context
@guarded
def oat(ctx, **flags):
    """Isolation weights and the optimal alphabetic tree for a contaminated set."""
    from scripts.pgt_modules.oat import (
        alphabetic_to_json,
        check_lemma3_structure,
        isolation_tree,
        lemma2_alpha,
        lemma2_weights,
        lemma3_bound,
    )

    _start(ctx, "oat")
    run = build_run_config("oat", **flags)
    v, permutation = load_vector(run)
    tree, cost = isolation_tree(v)
    report: Dict[str, Any] = {
        "n": v.n,
        "alpha": lemma2_alpha(v),
        "weights": list(lemma2_weights(v).w),
        "cost": cost,
        "tree": alphabetic_to_json(tree),
    }
    if v.n >= 3:
        report["last_two_siblings"] = check_lemma3_structure(tree)
        report["bound"] = lemma3_bound(v)
    if permutation is not None:
        report["permutation"] = list(permutation)
    write_report(run, report)


@cli.command(cls=RichCommand)
@output_options
@click.option("--n", type=click.IntRange(min=1), required=True, help="Number of homogeneous units")
@click.option("--p-grid", help="Inclusive grid lo:hi:step")
@click.option("--conjecture-scale", is_flag=True, help="Allow n up to 1000")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@click.pass_context
@guarded
def sweep(ctx, p_grid, conjecture_scale, **flags):
    """Exact costs of GPTA, the optimum and pooling baselines over a homogeneous grid."""
    from scripts.pgt_modules.reports import emit, models_to_csv, to_json
    from scripts.pgt_modules.sim import parse_p_grid, sweep_homogeneous

    _start(ctx, "sweep")
    run = build_run_config("sweep", default_format="csv", **flags)
    grid = parse_p_grid(p_grid or config.sweep_p_grid)
    rows = sweep_homogeneous(run.n, grid, workers=run.workers, conjecture_scale=conjecture_scale)
    if run.format == "json":
        emit(to_json([row.model_dump() for row in rows]), run.out)
    else:
        emit(models_to_csv(rows), run.out)


@cli.command(cls=RichCommand)
@input_options
@output_options
@click.option(
    "--policy",
    default="gpta",
    show_default=True,
    type=click.Choice(["gpta", "dp"]),
    help="Cost each ordering under GPTA or the DP optimum",
)
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@click.pass_context
@guarded
def orders(ctx, policy, **flags):
    """Search all n! orderings for the cheapest (n <= 8)."""
    from scripts.pgt_modules.oracle import best_ordering_bruteforce
    from scripts.pgt_modules.reports import emit, models_to_csv, to_json

    _start(ctx, "orders")
    run = build_run_config("orders", **flags)
    v, _ = load_vector(run)
    report = best_ordering_bruteforce(
        v, policy="dp_optimal" if policy == "dp" else "gpta", workers=run.workers
    )
    emit(to_json(report) if run.format == "json" else models_to_csv([report]), run.out)


def main():
    """Main entry point for the CLI."""
    try:
        cli()
    except KeyboardInterrupt:
        click.echo("\n\nInterrupted by user.", err=True)
        sys.exit(EXIT_FAILURE)
    except Exception as e:
        click.echo(f"\nError: {e}", err=True)
        sys.exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
