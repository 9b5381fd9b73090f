#!/usr/bin/env python3
"""
spcimpute CLI - multiple imputation of potential outcomes under a specified
partial correlation
"""

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError

# Add parent directory to path
if str(Path(__file__).parent.parent.parent) not in sys.path:
    sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.analysis.effects import ate
from src.analysis.pooling import rubin_pool
from src.config import config
from src.core.errors import NonNumeric, SpcRuntimeError, SpcValidationError
from src.core.types import IteInterval, RhoScale
from src.data.frame import load_trial_csv, parse_numeric, read_table
from src.data.settings import SpcConfig
from src.data.validation import validate
from src.engine.imputer import multiply_impute
from src.simulation.bench import BenchConfig, replication_study, sensitivity_sweep

from .options import (
    CliConfig,
    draw_seed,
    first_set,
    load_manifest,
    load_run_config,
    parse_grid,
    parse_methods,
    resolve_schema,
    resolve_spc,
)
from .output import (
    write_imputation_set,
    write_predictions,
    write_sensitivity,
    write_tables,
)

logger = logging.getLogger(__name__)

DEFAULT_RHO_LIST = "0,0.73,0.99"
DEFAULT_GRID = "0,0.2,0.4,0.6,0.73,0.9,0.99"
POOL_COLUMNS = ("estimate", "variance")


def _resolve_seed(flag: Optional[int], file_seed: Optional[int]) -> int:
    seed = first_set(flag, file_seed, config.DEFAULT_SEED)
    if seed is None:
        seed = draw_seed()
    click.echo(f"🎲 Seed: {seed}")
    return seed


def _data_options(func):
    """Options shared by impute and predict"""
    options = [
        click.option(
            "--in",
            "input_path",
            type=click.Path(exists=True, dir_okay=False),
            help="Long-format trial CSV",
        ),
        click.option(
            "--out-of-sample",
            "oos_path",
            type=click.Path(exists=True, dir_okay=False),
            help="CSV of prediction targets (covariate columns only)",
        ),
        click.option("--treatment", help="Treatment column"),
        click.option("--outcome", help="Outcome column"),
        click.option(
            "--covariate",
            "-x",
            "covariates",
            multiple=True,
            help="Covariate column (repeatable)",
        ),
        click.option(
            "--oos-code",
            "out_of_sample_code",
            help="Treatment code marking out-of-sample rows",
        ),
        click.option("--unit-id", help="Unit id column"),
        click.option(
            "--arm-code",
            "arm_codes",
            multiple=True,
            help="Pin the treatment coding: arm 0, arm 1, ... (repeatable)",
        ),
        click.option(
            "--rho",
            multiple=True,
            help="Partial correlation: v for every pair, or a,b=v (repeatable)",
        ),
        click.option(
            "--rho-scale",
            type=click.Choice([s.value for s in RhoScale]),
            help="Scale of the --rho values (default partial)",
        ),
        click.option("--m", type=int, help="Number of imputations"),
        click.option("--iterations", type=int, help="FCS cycles per imputation"),
        click.option(
            "--seed", type=int, help="Root seed (drawn and printed if omitted)"
        ),
        click.option(
            "--method",
            "methods",
            multiple=True,
            help="Covariate method column=norm|sample (repeatable)",
        ),
        click.option(
            "--out",
            "output_dir",
            type=click.Path(file_okay=False),
            help="Output directory",
        ),
        click.option(
            "--manifest",
            "manifest_path",
            type=click.Path(exists=True, dir_okay=False),
            help="Replay the run recorded in a manifest.json",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _prepare_run(ctx, command: str, kwargs) -> CliConfig:
    """Resolve flags, config file and environment into one run description"""
    file_config = ctx.obj["file_config"]
    output_dir = Path(
        first_set(kwargs["output_dir"], file_config.output_dir, config.OUTPUT_DIR)
    )

    if kwargs["manifest_path"]:
        manifest = load_manifest(kwargs["manifest_path"])
        click.echo(f"🔁 Replaying {kwargs['manifest_path']}")
        frame = load_trial_csv(
            manifest.input, manifest.trial_schema, manifest.out_of_sample
        )
        # Stored rho is already on the partial scale
        spc = SpcConfig.from_dict(manifest.settings, frame.n_arms)
        click.echo(f"🎲 Seed: {spc.seed}")
        oos_path = manifest.out_of_sample
        run = CliConfig(
            command=command,
            input=Path(manifest.input),
            schema=manifest.trial_schema,
            spc=spc,
            output_dir=output_dir,
            threads=ctx.obj["threads"],
            rho_scale=manifest.rho_scale,
            out_of_sample=None if oos_path is None else Path(oos_path),
        )
        run.extra["frame"] = frame
        return run

    if not kwargs["input_path"]:
        raise click.UsageError("Pass --in (or --manifest to replay a run)")
    flags = dict(kwargs)
    flags["methods"] = parse_methods(kwargs["methods"])
    flags["arm_codes"] = list(kwargs["arm_codes"]) or None
    schema = resolve_schema(flags, file_config)
    frame = load_trial_csv(kwargs["input_path"], schema, kwargs["oos_path"])
    seed = _resolve_seed(kwargs["seed"], file_config.seed)
    spc, scale = resolve_spc(flags, file_config, frame, seed)
    oos_path = kwargs["oos_path"]
    run = CliConfig(
        command=command,
        input=Path(kwargs["input_path"]),
        schema=schema,
        spc=spc,
        output_dir=output_dir,
        threads=ctx.obj["threads"],
        rho_scale=scale,
        out_of_sample=None if oos_path is None else Path(oos_path),
    )
    run.extra["frame"] = frame
    return run


def _output_dir(ctx, flag: Optional[str]) -> Path:
    return Path(first_set(flag, ctx.obj["file_config"].output_dir, config.OUTPUT_DIR))


_interval_option = click.option(
    "--ite-interval",
    type=click.Choice([i.value for i in IteInterval]),
    default=IteInterval.PREDICTIVE.value,
    show_default=True,
    help="Per-unit ITE interval",
)


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    help="JSON or YAML file with default settings",
)
@click.option(
    "--threads", type=int, help="Worker threads (results do not depend on it)"
)
@click.option("--log-level", help="Logging level (default SPC_LOG_LEVEL)")
@click.pass_context
def cli(ctx, config_path, threads, log_level):
    """spcimpute - potential-outcome imputation under a specified partial correlation"""
    logging.basicConfig(
        level=(log_level or config.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    ctx.ensure_object(dict)
    file_config = load_run_config(config_path)
    ctx.obj["file_config"] = file_config
    ctx.obj["threads"] = int(first_set(threads, file_config.threads, config.THREADS))


@cli.command()
@_data_options
@click.pass_context
def impute(ctx, **kwargs):
    """
    Multiply impute every unit's missing potential outcomes

    Example:
        spcimpute impute --in trial.csv --treatment arm --outcome days \\
            -x cd4 --rho 0.7 --m 20
    """
    run = _prepare_run(ctx, "impute", kwargs)
    frame = run.extra["frame"]
    report = validate(frame)
    for line in report.summary_lines():
        click.echo(f"   {line}")

    click.echo(
        f"🚀 Imputing {frame.n_units} units, m={run.spc.m}, "
        f"rho={run.spc.rho.to_dict()}"
    )
    imputations = multiply_impute(frame, run.spc, run.threads)
    paths = write_imputation_set(imputations, run.output_dir, run.manifest(frame))

    pooled = ate(imputations)
    click.echo(
        f"📊 ATE ({frame.arm_labels[1]} vs {frame.arm_labels[0]}): "
        f"{pooled.estimate:.4f}  95% CI [{pooled.lower:.4f}, {pooled.upper:.4f}]"
    )
    click.echo(f"✅ Wrote {len(paths)} files to {run.output_dir}")


@cli.command()
@_data_options
@click.pass_context
def predict(ctx, **kwargs):
    """
    Draw every arm's outcome for out-of-sample units

    Example:
        spcimpute predict --in trial.csv --out-of-sample new.csv \\
            --treatment arm --outcome y -x age --rho 0.7
    """
    run = _prepare_run(ctx, "predict", kwargs)
    frame = run.extra["frame"]
    n_targets = int(frame.out_of_sample.sum())
    if n_targets == 0:
        raise click.UsageError(
            "No out-of-sample units: pass --out-of-sample or --oos-code"
        )
    click.echo(f"🔮 Predicting {n_targets} out-of-sample units, m={run.spc.m}")
    imputations = multiply_impute(frame, run.spc, run.threads)
    paths = write_predictions(imputations, run.output_dir, run.manifest(frame))
    click.echo(f"✅ Wrote {len(paths)} files to {run.output_dir}")


def _read_estimates(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """estimate and variance columns of a pool input; every cell must be numeric"""
    table = read_table(path, POOL_COLUMNS)
    columns = []
    for name in POOL_COLUMNS:
        values = parse_numeric(table[name], name, 2)
        blank = np.flatnonzero(np.isnan(values))
        if blank.size:
            row = int(blank[0])
            raise NonNumeric(name, row + 2, str(table[name].iloc[row]))
        columns.append(values)
    return columns[0], columns[1]


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--complete-df", type=float, help="Complete-data degrees of freedom")
@click.option("--level", default=0.95, show_default=True, help="Confidence level")
@click.option("--output", "-o", type=click.File("w"), help="Output file (JSON)")
def pool(file, complete_df, level, output):
    """
    Pool per-imputation estimates (CSV columns: estimate, variance)

    Example:
        spcimpute pool estimates.csv --complete-df 98
    """
    estimates, variances = _read_estimates(file)
    pooled = rubin_pool(estimates, variances, complete_df, level)

    click.echo(f"📊 Pooled over m={pooled.m} imputations")
    click.echo(f"   Estimate: {pooled.estimate:.6g}")
    click.echo(f"   Within variance:  {pooled.within:.6g}")
    click.echo(f"   Between variance: {pooled.between:.6g}")
    click.echo(f"   Total variance:   {pooled.total:.6g}")
    click.echo(f"   df: {pooled.df:.6g}")
    click.echo(f"   {level:.0%} CI: [{pooled.lower:.6g}, {pooled.upper:.6g}]")
    if output:
        json.dump(pooled.to_dict(), output, indent=2)
        click.echo(f"\n✅ Results saved to {output.name}")


def _bench(
    ctx, n, m, rho_list, replications, seed, keep_draws=False, interval=None
) -> BenchConfig:
    file_config = ctx.obj["file_config"]
    return BenchConfig(
        n=n,
        m=int(first_set(m, file_config.m, config.DEFAULT_M)),
        rho_list=tuple(rho_list),
        replications=replications,
        seed=_resolve_seed(seed, file_config.seed),
        threads=ctx.obj["threads"],
        fcs_iterations=int(
            first_set(file_config.fcs_iterations, config.FCS_ITERATIONS)
        ),
        keep_draws=keep_draws,
        ite_interval=IteInterval(interval or IteInterval.PREDICTIVE),
    )


@cli.command()
@click.option("--n", default=5000, show_default=True, help="Units per trial")
@click.option("--m", type=int, help="Imputations per trial")
@click.option(
    "--rho",
    "rho_text",
    multiple=True,
    help="Partial correlation(s) to impute under (repeatable or comma list)",
)
@click.option("--reps", type=int, help="Replications (default SPC_REPLICATIONS)")
@click.option("--full", is_flag=True, help="Run the full 1000 replications")
@click.option("--seed", type=int, help="Root seed (drawn and printed if omitted)")
@click.option("--keep-draws", is_flag=True, help="Also write ite_draws.csv")
@_interval_option
@click.option(
    "--out", "output_dir", type=click.Path(file_okay=False), help="Output directory"
)
@click.pass_context
def simulate(
    ctx, n, m, rho_text, reps, full, seed, keep_draws, ite_interval, output_dir
):
    """
    Replication study on synthetic trials with known effects

    Example:
        spcimpute simulate --n 5000 --m 20 --rho 0.73 --reps 200 --seed 42
    """
    rho_list: List[float] = []
    for text in rho_text or (DEFAULT_RHO_LIST,):
        rho_list.extend(parse_grid(text))
    replications = (
        config.FULL_REPLICATIONS if full else first_set(reps, config.REPLICATIONS)
    )
    bench = _bench(ctx, n, m, rho_list, replications, seed, keep_draws, ite_interval)
    output_dir = _output_dir(ctx, output_dir)

    click.echo(
        f"🧪 Simulating {bench.replications} replication(s): n={bench.n}, "
        f"m={bench.m}, rho={list(bench.rho_list)}"
    )
    report = replication_study(bench)
    paths = write_tables(report, output_dir)
    click.echo(report.table1().to_string(index=False))
    click.echo(f"✅ Wrote {len(paths)} files to {output_dir}")


@cli.command()
@click.option(
    "--grid",
    default=DEFAULT_GRID,
    show_default=True,
    help="Comma-separated partial correlations in [0, 1]",
)
@click.option("--n", default=5000, show_default=True, help="Units per trial")
@click.option("--m", type=int, help="Imputations per trial")
@click.option("--reps", type=int, default=1, show_default=True, help="Replications")
@click.option("--seed", type=int, help="Root seed (drawn and printed if omitted)")
@_interval_option
@click.option(
    "--out", "output_dir", type=click.Path(file_okay=False), help="Output directory"
)
@click.pass_context
def sensitivity(ctx, grid, n, m, reps, seed, ite_interval, output_dir):
    """
    ITE coverage and accuracy across assumed partial correlations

    Example:
        spcimpute sensitivity --grid 0,0.5,0.73,0.99 --m 20 --seed 7
    """
    rho_grid = parse_grid(grid)
    bench = _bench(ctx, n, m, rho_grid, reps, seed, interval=ite_interval)
    output_dir = _output_dir(ctx, output_dir)
    click.echo(f"📈 Sweeping rho over {rho_grid}")
    table = sensitivity_sweep(rho_grid, bench)
    path = write_sensitivity(table, output_dir)
    click.echo(table.to_string(index=False))
    click.echo(f"✅ Wrote {path}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and map failures to exit codes

    Returns:
        0 on success, 2 for invalid input or usage, 1 for runtime failures
    """
    try:
        result = cli.main(
            args=argv, prog_name="spcimpute", standalone_mode=False, obj={}
        )
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except (SpcValidationError, ValidationError) as e:
        click.echo(f"❌ {type(e).__name__}: {e}", err=True)
        return 2
    except SpcRuntimeError as e:
        click.echo(f"❌ {type(e).__name__}: {e}", err=True)
        return 1
    except OSError as e:
        click.echo(f"❌ {e}", err=True)
        return 1
    # --help and friends return their exit code instead of None
    return result if isinstance(result, int) else 0


run_cli = main


if __name__ == "__main__":
    sys.exit(main())
