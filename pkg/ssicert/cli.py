#!/usr/bin/env python3
"""
ssicert CLI - certified subspace identification

Command-line interface for simulation, identification, bound certification
and Monte Carlo studies.
"""

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from ssicert.core.errors import SsiCertError
from ssicert.core.systems import SYSTEMS
from ssicert.utils.io import (
    load_model,
    read_timeseries,
    save_model,
    save_report,
    write_frequency_response,
    write_timeseries,
)
from ssicert.utils.paths import (
    confidence_qualifier,
    get_output_dir,
    make_output_filename,
    order_qualifier,
    run_qualifier,
)


def _fail(exc: Exception, verbose: bool = False):
    """Report an ssicert error and exit with its code"""
    click.echo(f"❌ {type(exc).__name__}: {exc}", err=True)
    if verbose:
        import traceback
        traceback.print_exc()
    sys.exit(getattr(exc, 'exit_code', 1))


def _resolve_model(spec: str):
    """Load a model file, or build a reference system by name"""
    if spec in SYSTEMS and not Path(spec).exists():
        return SYSTEMS[spec]()
    if not Path(spec).exists():
        raise click.BadParameter(
            f"{spec!r} is neither a file nor one of {', '.join(SYSTEMS)}", param_hint='--model')
    return load_model(spec)


def _stem(spec: str, model=None) -> str:
    if model is not None and model.name:
        return model.name
    return Path(spec).stem


@click.group()
@click.version_option(version="0.1.0")
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                                               case_sensitive=False),
              default=None, help='Log level (default: SSICERT_LOG_LEVEL or WARNING)')
def cli(log_level):
    """
    ssicert - Certified covariance-driven subspace identification

    Identify innovations models from output data, guarantee they are valid,
    and bound their H2 / H∞ model error at a chosen confidence.

    MODEL arguments take a JSON model file or a reference system name
    (slow_pole, certification, scalar).

    \b
    Examples:
        ssicert simulate --model certification --n 100000 --seed 7
        ssicert identify --data y.csv --order 2 --hankel-depth 4
        ssicert bounds --model certification --data-size 100000 --confidence 0.9518
        ssicert montecarlo --model slow_pole --n 2500 --runs 200 --no-bounds
        ssicert norms --true true.json --identified model.json --response err.txt
    """
    from ssicert.utils.log import configure_logging
    try:
        configure_logging(log_level)
    except SsiCertError as exc:
        _fail(exc)


@cli.command()
@click.option('--model', 'model_spec', required=True, help='Model file or reference system name')
@click.option('--n', 'n_samples', required=True, type=click.IntRange(1), help='Number of samples')
@click.option('--seed', type=click.IntRange(0), default=0, help='Random seed')
@click.option('--burn-in', type=click.IntRange(0), default=None,
              help='Discarded prefix (default: ceil(10/(1-rho)), at most 10^4)')
@click.option('--out', 'output_path', type=click.Path(), help='Output CSV path')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def simulate(model_spec, n_samples, seed, burn_in, output_path, verbose):
    """
    Simulate output data from an innovations model.
    """
    from ssicert.core.simulation import SimulationConfig, simulate as run_simulation

    try:
        model = _resolve_model(model_spec)
        click.echo(f"🔄 Simulating {n_samples:,} samples (seed {seed})")
        start_time = time.time()
        ts = run_simulation(SimulationConfig(model, n_samples, seed, burn_in))
        elapsed = time.time() - start_time

        if not output_path:
            filename = make_output_filename(_stem(model_spec, model), "timeseries", "csv",
                                            qualifier=run_qualifier(n_samples, seed))
            output_path = get_output_dir("timeseries") / filename
        output_path = write_timeseries(ts, output_path)
    except SsiCertError as exc:
        _fail(exc, verbose)

    click.echo(f"\n✅ Simulation complete!")
    click.echo(f"   Time: {elapsed:.3f}s")
    click.echo(f"   Channels: {ts.n_y}")
    click.echo(f"   Output: {output_path}")


@cli.command()
@click.option('--data', 'data_path', required=True, type=click.Path(exists=True),
              help='Delimited text time series')
@click.option('--order', 'n_x', type=click.IntRange(1), default=None,
              help='Model order (default: suggested from the singular values)')
@click.option('--hankel-depth', 'm', type=click.IntRange(2), default=4, help='Hankel block depth m')
@click.option('--norm', 'norm_choice', type=click.Choice(['two_norm', 'f_norm']),
              default='two_norm', help='Norm minimized if repair fires')
@click.option('--out', 'output_path', type=click.Path(), help='Output model JSON path')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def identify(data_path, n_x, m, norm_choice, output_path, verbose):
    """
    Identify an innovations model from output data.

    Reports whether stabilization or positive-real repair fired.
    """
    from ssicert.core.identification import build_hankel, sample_covariances, suggest_order
    from ssicert.core.repair import full_pipeline

    click.echo(f"🔄 Identifying: {data_path}")
    try:
        ts = read_timeseries(data_path)
        click.echo(f"📎 {ts.N:,} samples, {ts.n_y} channel(s)")
        if n_x is None:
            hankel = build_hankel(sample_covariances(ts, 2 * m - 1), m)
            s = np.linalg.svd(hankel.H, compute_uv=False)
            n_x = suggest_order(s)
            click.echo(f"🤖 Suggested order: {n_x}")

        start_time = time.time()
        result = full_pipeline(ts, m, n_x, norm_choice)
        elapsed = time.time() - start_time

        if not output_path:
            filename = make_output_filename(Path(data_path).stem, "model", "json",
                                            qualifier=order_qualifier(n_x, m))
            output_path = get_output_dir("models") / filename
        output_path = save_model(result.model, output_path)
    except SsiCertError as exc:
        _fail(exc, verbose)

    diag = result.diagnostics
    click.echo(f"\n✅ Identification complete!")
    click.echo(f"   Time: {elapsed:.3f}s")
    click.echo(f"   Spectral radius: {diag['rho_raw']:.6f} -> {diag['rho']:.6f}")
    click.echo(f"   Stabilization fired: {'yes' if result.stabilized else 'no'}")
    click.echo(f"   Repair fired: {'yes' if result.repaired else 'no'}")
    if result.repaired:
        click.echo(f"   Adjustment: |dD|_F = {diag['adjust_D']:.3e}, "
                   f"|dR0|_F = {diag['adjust_R0']:.3e}")
    click.echo(f"   Output: {output_path}")

    if verbose:
        click.echo(f"\n📊 Singular values:")
        for i, value in enumerate(diag['singular_values'], start=1):
            click.echo(f"   sigma_{i}: {value:.6g}")


@cli.command()
@click.option('--model', 'model_spec', default=None,
              help='True model (file or reference name); required without --data')
@click.option('--data', 'data_path', type=click.Path(exists=True), default=None,
              help='Identify from this data and certify the identified model')
@click.option('--order', 'n_x', type=click.IntRange(1), default=None,
              help='Model order with --data (default: order of --model)')
@click.option('--data-size', 'n_samples', type=click.IntRange(1), default=None,
              help='Data size N to certify for (true-model mode)')
@click.option('--confidence', type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
              default=0.95, help='Joint confidence level')
@click.option('--hankel-depth', 'm', type=click.IntRange(2), default=4, help='Hankel block depth m')
@click.option('--format', '-f', 'fmt', type=click.Choice(['text', 'json']), default='text',
              help='Console output format')
@click.option('--out', 'output_path', type=click.Path(), help='Output report JSON path')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def bounds(model_spec, data_path, n_x, n_samples, confidence, m, fmt, output_path, verbose):
    """
    Compute the H2, perturbative H∞ and robust-LMI H∞ error bounds.

    With --model and --data-size, every map is evaluated at the true model
    (simulation studies). With --data, the identified model is certified;
    adding --model records the exact errors and coverage.
    """
    from ssicert.core.metrics import format_bound_report
    from ssicert.core.simulation import certify, certify_model

    try:
        model = _resolve_model(model_spec) if model_spec else None
        start_time = time.time()
        if data_path:
            order = n_x or (model.n_x if model is not None else None)
            if order is None:
                raise click.UsageError("--order is required with --data unless --model is given")
            ts = read_timeseries(data_path)
            click.echo(f"🔄 Certifying model identified from {data_path}")
            report = certify(ts, m, order, confidence, true_model=model).report
            stem, n_tag = Path(data_path).stem, ts.N
        else:
            if model is None or n_samples is None:
                raise click.UsageError("give --model with --data-size, or --data")
            click.echo(f"🔄 Certifying {_stem(model_spec, model)} at N = {n_samples:,}")
            report = certify_model(model, n_samples, m, confidence)
            stem, n_tag = _stem(model_spec, model), n_samples
        elapsed = time.time() - start_time

        doc = report.as_dict()
        if not output_path:
            filename = make_output_filename(
                stem, "", "json", prefix="bounds",
                qualifier=f"m{m}_{run_qualifier(n_tag)}_{confidence_qualifier(confidence)}")
            output_path = get_output_dir("bounds") / filename
        output_path = save_report(doc, output_path)
    except SsiCertError as exc:
        _fail(exc, verbose)

    if fmt == 'json':
        click.echo(json.dumps(doc, indent=2, default=str))
    else:
        click.echo(format_bound_report(doc))
    click.echo(f"   Time: {elapsed:.3f}s")
    click.echo(f"\n💾 Report saved to: {output_path}")


@cli.command()
@click.option('--model', 'model_spec', required=True, help='Model file or reference system name')
@click.option('--n', 'n_samples', required=True, type=click.IntRange(1), help='Samples per run')
@click.option('--runs', type=click.IntRange(1), default=200, help='Number of runs')
@click.option('--hankel-depth', 'm', type=click.IntRange(2), default=4, help='Hankel block depth m')
@click.option('--confidence', type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True),
              default=0.95, help='Confidence level for the bounds')
@click.option('--seed', type=click.IntRange(0), default=0, help='Base seed')
@click.option('--workers', type=click.IntRange(1), default=None,
              help='Worker processes (default: SSICERT_WORKERS)')
@click.option('--bounds/--no-bounds', 'with_bounds', default=True,
              help='Also compute and score the three bounds per run')
@click.option('--out', 'output_path', type=click.Path(), help='Output report JSON path')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def montecarlo(model_spec, n_samples, runs, m, confidence, seed, workers, with_bounds,
               output_path, verbose):
    """
    Repeat simulate -> identify -> score over seeded runs.
    """
    from ssicert.core.simulation import run_monte_carlo

    try:
        model = _resolve_model(model_spec)
        click.echo(f"🔬 Monte Carlo: {runs} runs of N = {n_samples:,} (base seed {seed})")
        start_time = time.time()
        report = run_monte_carlo(model, n_samples, m, runs, confidence, seed,
                                 with_bounds=with_bounds, workers=workers)
        elapsed = time.time() - start_time

        if not output_path:
            filename = make_output_filename(_stem(model_spec, model), "", "json",
                                            prefix="montecarlo", qualifier=f"r{runs}_s{seed}")
            output_path = get_output_dir("montecarlo") / filename
        output_path = save_report(report.as_dict(), output_path)
    except SsiCertError as exc:
        _fail(exc, verbose)

    click.echo(f"\n{'=' * 60}")
    click.echo("MONTE CARLO RESULTS")
    click.echo(f"{'=' * 60}\n")
    _print_summary(report.summary)
    click.echo(f"\n   Time: {elapsed:.3f}s")
    click.echo(f"💾 Results saved to: {output_path}")


def _print_summary(summary):
    """Print a Monte Carlo summary as a formatted table"""
    click.echo(f"{'Runs':<22} {summary['runs']:>10}")
    click.echo(f"{'Valid models':<22} {summary['valid']:>10}")
    click.echo(f"{'Failures':<22} {summary['failures']:>10}")
    click.echo(f"{'E2 mean (std)':<22} {summary['E2_mean']:>10.4f} ({summary['E2_std']:.4f})")
    click.echo(f"{'Einf mean (std)':<22} {summary['Einf_mean']:>10.4f} "
               f"({summary['Einf_std']:.4f})")
    click.echo(f"{'Stabilization rate':<22} {summary['stabilized_rate']:>10.3f}")
    click.echo(f"{'Repair rate':<22} {summary['repair_rate']:>10.3f}")
    for name, value in summary.get('coverage', {}).items():
        click.echo(f"{'Coverage ' + name:<22} {value:>10.3f}")


@cli.command()
@click.option('--true', 'true_path', required=True, help='True model (file or reference name)')
@click.option('--identified', 'hat_path', required=True, type=click.Path(exists=True),
              help='Identified model file')
@click.option('--response', 'response_path', type=click.Path(), default=None,
              help='Also write sigma_max of the error system as "omega value" rows')
@click.option('--points', type=click.IntRange(8), default=512, help='Response grid size')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def norms(true_path, hat_path, response_path, points, verbose):
    """
    Exact H2 and H∞ norms of the error between two models.
    """
    from ssicert.core.metrics import ErrorSystem, exact_error_norms, model_norms

    try:
        true_model = _resolve_model(true_path)
        model_hat = load_model(hat_path)
        h2_err, hinf_err = exact_error_norms(true_model, model_hat)
        h2_true, hinf_true = model_norms(true_model)
        if response_path:
            omegas, gains = ErrorSystem(true_model, model_hat).frequency_response(points)
            write_frequency_response(response_path, omegas, gains)
    except SsiCertError as exc:
        _fail(exc, verbose)

    click.echo(f"📊 Error system")
    click.echo(f"   H2:  {h2_err:.6g}   (relative {h2_err / h2_true:.4f})")
    click.echo(f"   H∞:  {hinf_err:.6g}   (relative {hinf_err / hinf_true:.4f})")
    if response_path:
        click.echo(f"💾 Response saved to: {response_path}")


@cli.command()
@click.option('--model', 'model_spec', required=True, help='Model file or reference system name')
@click.option('--n', 'n_samples', required=True, type=click.IntRange(1), help='Samples per run')
@click.option('--runs', type=click.IntRange(2), default=200, help='Number of runs')
@click.option('--hankel-depth', 'm', type=click.IntRange(2), default=4, help='Hankel block depth m')
@click.option('--points', type=click.IntRange(2), default=129,
              help='Frequencies on [0, pi]')
@click.option('--seed', type=click.IntRange(0), default=0, help='Base seed')
@click.option('--out', 'output_dir', type=click.Path(), default=None,
              help='Directory for the two response files')
@click.option('--verbose', '-v', is_flag=True, help='Verbose output')
def variance(model_spec, n_samples, runs, m, points, seed, output_dir, verbose):
    """
    Predicted vs. Monte Carlo variance of the identified transfer function.
    """
    from ssicert.core.simulation import run_variance_experiment

    try:
        model = _resolve_model(model_spec)
        omegas = np.linspace(0.0, np.pi, points)
        click.echo(f"🔬 Variance experiment: {runs} runs of N = {n_samples:,}")
        exp = run_variance_experiment(model, n_samples, m, runs, seed, omegas)
        out = Path(output_dir) if output_dir else get_output_dir("responses")
        stem = _stem(model_spec, model)
        qualifier = run_qualifier(n_samples, seed)
        predicted_path = write_frequency_response(
            out / make_output_filename(stem, "variance", "txt", qualifier, suffix="predicted"),
            exp.omegas, exp.predicted)
        sample_path = write_frequency_response(
            out / make_output_filename(stem, "variance", "txt", qualifier, suffix="sample"),
            exp.omegas, exp.sample)
    except SsiCertError as exc:
        _fail(exc, verbose)

    click.echo(f"\n✅ Agreement within 1.5x at {exp.agreement(1.5) * 100:.1f}% of frequencies")
    click.echo(f"   Failed runs: {exp.failures}")
    click.echo(f"💾 Predicted: {predicted_path}")
    click.echo(f"💾 Sample:    {sample_path}")


if __name__ == '__main__':
    cli()
