"""
Simulation and Monte Carlo harness.

Seeding: run i of a batch draws its noise from
``Generator(Philox(SeedSequence([base_seed, i])))``, so results are identical
whether runs execute sequentially or on a process pool.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ssicert.core.asymptotics import (
    asymptotic_covariance,
    fnorm_bounds,
    perturbation_maps,
    transfer_function_variance,
    true_model_maps,
)
from ssicert.core.bounds import BoundReport, compute_all_bounds
from ssicert.core.errors import InsufficientData, SsiCertError
from ssicert.core.linalg import check_stable, spectral_radius
from ssicert.core.metrics import exact_error_norms, model_norms, relative_errors
from ssicert.core.models import InnovationsModel, TimeSeries
from ssicert.core.repair import IdentificationResult, full_pipeline
from ssicert.utils.config import load_settings

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy-Philox4x64-ziggurat"
MAX_BURN_IN = 10_000


def default_burn_in(model: InnovationsModel) -> int:
    """ceil(10 / (1 − ρ(A))), capped at 10^4."""
    rho = spectral_radius(model.A)
    if rho >= 1.0:
        return MAX_BURN_IN
    return min(int(math.ceil(10.0 / (1.0 - rho))), MAX_BURN_IN)


def make_generator(seed: int, index: Optional[int] = None) -> np.random.Generator:
    """Philox generator for ``seed`` or, for batch run ``index``, for (seed, index)."""
    entropy = [seed] if index is None else [seed, index]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def run_seed(base_seed: int, index: int) -> int:
    """64-bit seed of run ``index``, derived from (base_seed, index)."""
    state = np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class SimulationConfig:
    """What to simulate: model, sample count, seed and discarded prefix."""

    model: InnovationsModel
    N: int
    seed: int = 0
    burn_in: Optional[int] = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def resolved_burn_in(self) -> int:
        return default_burn_in(self.model) if self.burn_in is None else self.burn_in


def simulate(cfg: SimulationConfig) -> TimeSeries:
    """
    Simulate x_{k+1} = A x_k + B e_k, y_k = C x_k + F e_k from x_0 = 0.

    e_k is i.i.d. standard normal; the first ``burn_in`` outputs are dropped.

    Raises:
        UnstableMatrix: if the model is unstable.
    """
    model = cfg.model
    check_stable(model.A)
    burn = cfg.resolved_burn_in
    total = burn + cfg.N
    rng = make_generator(cfg.seed)
    e = rng.standard_normal((total, model.n_y))

    drive = e @ model.B.T
    y = e @ model.F.T
    A, C = model.A, model.C
    x = np.zeros(model.n_x)
    states = np.empty((total, model.n_x))
    for k in range(total):
        states[k] = x
        x = A @ x + drive[k]
    y += states @ C.T
    return TimeSeries(y[burn:])


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    """Identification result and its bound report."""

    identification: Optional[IdentificationResult]
    report: BoundReport
    mode: str


def certify_model(model: InnovationsModel, N: int, m: int,
                  confidence: float = 0.95) -> BoundReport:
    """
    Bounds a data set of size N would certify for a known model.

    Every map is evaluated at the true statistics (model in SVD coordinates).
    """
    maps = true_model_maps(model, m)
    cov = asymptotic_covariance(model, m)
    fb = fnorm_bounds(cov, maps, N, confidence)
    return compute_all_bounds(maps.model, fb, maps)


def certify(ts: TimeSeries, m: int, n_x: int, confidence: float = 0.95,
            mode: str = "identified", true_model: Optional[InnovationsModel] = None,
            norm_choice: str = "two_norm") -> Certificate:
    """
    Identify a model and bound its error at the given confidence.

    Args:
        ts: Output data.
        m: Hankel depth.
        n_x: Model order.
        confidence: Joint confidence level of the Frobenius-norm bounds.
        mode: 'identified' evaluates all maps at the identified model; 'true'
            evaluates them at ``true_model`` (simulation studies only).
        true_model: Data-generating model; when given, exact errors are recorded.
        norm_choice: Norm used if repair fires.
    """
    if mode not in ("identified", "true"):
        raise ValueError(f"unknown mode {mode!r}")
    result = full_pipeline(ts, m, n_x, norm_choice)

    if mode == "true":
        if true_model is None:
            raise ValueError("mode='true' needs the true model")
        report = certify_model(true_model, ts.N, m, confidence)
    else:
        maps = perturbation_maps(result.realization, result.covariance_model, result.model)
        cov = asymptotic_covariance(result.model, m)
        adjust = result.repair.adjustment_norms if result.repaired else None
        fb = fnorm_bounds(cov, maps, ts.N, confidence, adjust)
        report = compute_all_bounds(result.model, fb, maps)

    if true_model is not None:
        h2_err, hinf_err = exact_error_norms(true_model, result.model)
        report.exact = {'h2': h2_err, 'hinf': hinf_err}
    logger.info("certified at %.4f: h2<=%.4g hinf<=%.4g/%.4g", confidence, report.h2_bound,
                report.hinf_bound_perturbative, report.hinf_bound_lmi)
    return Certificate(identification=result, report=report, mode=mode)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Outcome of one Monte Carlo run."""

    index: int
    seed: int
    ok: bool
    error: Optional[str] = None
    E2: float = float('nan')
    Einf: float = float('nan')
    h2_error: float = float('nan')
    hinf_error: float = float('nan')
    rho: float = float('nan')
    stabilized: bool = False
    repaired: bool = False
    bounds: Dict[str, float] = field(default_factory=dict)
    covered: Dict[str, bool] = field(default_factory=dict)


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return float('nan'), float('nan')
    return float(np.mean(arr)), float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0


@dataclass
class MonteCarloReport:
    """Per-run records of a Monte Carlo batch and their summary."""

    model_name: Optional[str]
    N: int
    m: int
    n_x: int
    confidence: float
    base_seed: int
    records: List[RunRecord]
    true_norms: Tuple[float, float]
    rng: str = RNG_ALGORITHM

    @property
    def runs(self) -> int:
        return len(self.records)

    @property
    def summary(self) -> Dict[str, Any]:
        """Statistics recomputed from the records."""
        good = [r for r in self.records if r.ok]
        e2_mean, e2_std = _mean_std([r.E2 for r in good])
        einf_mean, einf_std = _mean_std([r.Einf for r in good])
        out: Dict[str, Any] = {
            'runs': self.runs,
            'valid': len(good),
            'failures': self.runs - len(good),
            'E2_mean': e2_mean,
            'E2_std': e2_std,
            'Einf_mean': einf_mean,
            'Einf_std': einf_std,
            'stabilized_rate': float(np.mean([r.stabilized for r in good])) if good else 0.0,
            'repair_rate': float(np.mean([r.repaired for r in good])) if good else 0.0,
        }
        names = sorted({name for r in good for name in r.covered})
        out['coverage'] = {
            name: float(np.mean([r.covered[name] for r in good if name in r.covered]))
            for name in names
        }
        return out

    def as_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model_name,
            'N': self.N,
            'm': self.m,
            'n_x': self.n_x,
            'confidence': self.confidence,
            'base_seed': self.base_seed,
            'rng': self.rng,
            'true_norms': {'h2': self.true_norms[0], 'hinf': self.true_norms[1]},
            'summary': self.summary,
            'records': [asdict(r) for r in self.records],
        }


def _run_one(model: InnovationsModel, N: int, m: int, n_x: int, confidence: float,
             base_seed: int, index: int, true_norms: Tuple[float, float],
             with_bounds: bool) -> RunRecord:
    seed = run_seed(base_seed, index)
    try:
        ts = simulate(SimulationConfig(model, N, seed))
        result = full_pipeline(ts, m, n_x)
        errors = relative_errors(model, result.model, true_norms)
        record = RunRecord(index=index, seed=seed, ok=True, rho=result.model.spectral_radius,
                           stabilized=result.stabilized, repaired=result.repaired, **errors)
        if with_bounds:
            maps = perturbation_maps(result.realization, result.covariance_model, result.model)
            cov = asymptotic_covariance(result.model, m)
            adjust = result.repair.adjustment_norms if result.repaired else None
            report = compute_all_bounds(result.model,
                                        fnorm_bounds(cov, maps, N, confidence, adjust), maps)
            report.exact = {'h2': errors['h2_error'], 'hinf': errors['hinf_error']}
            record.bounds = {'h2': report.h2_bound,
                             'hinf_perturbative': report.hinf_bound_perturbative,
                             'hinf_lmi': report.hinf_bound_lmi}
            record.covered = report.coverage
        return record
    except (SsiCertError, np.linalg.LinAlgError) as exc:
        logger.warning("run %d failed: %s", index, exc)
        return RunRecord(index=index, seed=seed, ok=False, error=f"{type(exc).__name__}: {exc}")


def run_monte_carlo(model: InnovationsModel, N: int, m: int, runs: int,
                    confidence: float = 0.95, base_seed: int = 0,
                    n_x: Optional[int] = None, with_bounds: bool = True,
                    workers: Optional[int] = None) -> MonteCarloReport:
    """
    Repeat simulate → identify → score (→ bound) ``runs`` times.

    Failed runs are recorded, not raised.

    Args:
        model: Data-generating model.
        N: Samples per run.
        m: Hankel depth.
        runs: Number of runs.
        confidence: Confidence level for the bounds.
        base_seed: Seed from which run seeds are derived.
        n_x: Model order (defaults to the true order).
        with_bounds: Also compute and score all three bounds.
        workers: Process count (defaults to settings; 1 runs inline).
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    n_x = n_x or model.n_x
    workers = workers or load_settings().workers
    true_norms = model_norms(model)
    args = [(model, N, m, n_x, confidence, base_seed, i, true_norms, with_bounds)
            for i in range(runs)]

    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, *zip(*args)))
    else:
        records = [_run_one(*a) for a in args]

    report = MonteCarloReport(model_name=model.name, N=N, m=m, n_x=n_x, confidence=confidence,
                              base_seed=base_seed, records=records, true_norms=true_norms)
    logger.info("monte carlo: %d/%d valid", report.summary['valid'], runs)
    return report


# ---------------------------------------------------------------------------
# transfer-function variance experiment
# ---------------------------------------------------------------------------

@dataclass
class VarianceExperiment:
    """Predicted and Monte Carlo variance of G̃(e^{iω})."""

    omegas: np.ndarray
    predicted: np.ndarray
    sample: np.ndarray
    runs: int
    failures: int = 0

    def agreement(self, factor: float = 1.5) -> float:
        """Fraction of frequencies where the two variances agree within ``factor``."""
        ratio = self.sample / self.predicted
        return float(np.mean((ratio <= factor) & (ratio >= 1.0 / factor)))


def run_variance_experiment(model: InnovationsModel, N: int, m: int, runs: int,
                            base_seed: int = 0, omegas: Optional[Sequence[float]] = None,
                            n_x: Optional[int] = None) -> VarianceExperiment:
    """
    Compare the first-order variance of G̃(e^{iω}) with its sample variance.

    The prediction uses maps and covariance at the true model; the sample
    variance is Σ_entries mean |G̃ − mean G̃|² over the valid runs.
    """
    if omegas is None:
        omegas = np.linspace(0.0, np.pi, 129)
    omegas = np.asarray(omegas, dtype=float)
    n_x = n_x or model.n_x

    maps = true_model_maps(model, m)
    cov = asymptotic_covariance(model, m)
    predicted = transfer_function_variance(maps, cov, N, omegas)

    responses = []
    failures = 0
    for i in range(runs):
        try:
            ts = simulate(SimulationConfig(model, N, run_seed(base_seed, i)))
            result = full_pipeline(ts, m, n_x)
        except SsiCertError as exc:
            logger.warning("variance run %d failed: %s", i, exc)
            failures += 1
            continue
        responses.append(result.model.transfer_function().evaluate(omegas))
    if len(responses) < 2:
        raise InsufficientData(
            f"variance experiment needs at least 2 valid runs, got {len(responses)} of {runs}")
    stack = np.array(responses)
    centred = stack - stack.mean(axis=0)
    sample = np.sum(np.abs(centred) ** 2, axis=(2, 3)).sum(axis=0) / max(len(responses) - 1, 1)
    return VarianceExperiment(omegas=omegas, predicted=predicted, sample=sample,
                              runs=runs, failures=failures)
