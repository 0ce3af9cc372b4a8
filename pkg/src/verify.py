"""Named Monte Carlo verification suites.

Each suite draws one SampleBatch and compares an analytic quantity with its
empirical counterpart:

- mineig: KS distance between mineig_cdf and the sampled l_min
- demmel: KS distance between demmel_cdf and the sampled V
- charpoly: recip_charpoly_avg vs the sample mean of prod 1/(z + l_j), in standard errors
- mgf: demmel_mgf(s) vs the sample mean of e^{-sV}, in standard errors
- trace: the sample mean of tr(W) vs mn + mu, in standard errors
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from src.batch_evaluator import evaluate_curve
from src.charpoly import recip_charpoly_avg
from src.demmel import demmel_cdf_grid, demmel_mgf
from src.errors import ParameterError
from src.mc import (
    McConfig,
    SampleBatch,
    demmel_values,
    ks_statistic,
    mc_mgf,
    recip_avg_from_batch,
    sample_eigs,
    trace_moment_check,
)
from src.mineig import MinEigQuery, mineig_cdf
from src.params import DEFAULT_CONFIG, EvalConfig, ModelParams

logger = logging.getLogger(__name__)

SUITES = ("mineig", "demmel", "charpoly", "mgf", "trace")

DEFAULT_THRESHOLDS = {
    "mineig": 0.005,
    "demmel": 0.01,
    "charpoly": 3.0,
    "mgf": 3.0,
    "trace": 4.0,
}

# Analytic c.d.f.s are tabulated at this many sample quantiles and interpolated.
KS_GRID_POINTS = 400


@dataclass(frozen=True)
class CheckResult:
    """One comparison: statistic against threshold, plus supporting numbers."""

    name: str
    statistic: float
    threshold: float
    details: Mapping[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.statistic) and self.statistic < self.threshold


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one suite run."""

    suite: str
    params: ModelParams
    mc_config: McConfig
    eval_config: EvalConfig
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "params": self.params.describe(),
            "mc": {
                "samples": self.mc_config.samples,
                "seed": self.mc_config.seed,
                "streams": self.mc_config.streams,
                "rotated_mean": self.mc_config.rotated_mean,
            },
            "config": self.eval_config.as_dict(),
            "config_hash": self.eval_config.config_hash(),
            "checks": [
                {
                    "name": c.name,
                    "statistic": c.statistic,
                    "threshold": c.threshold,
                    "passed": c.passed,
                    "details": dict(c.details),
                }
                for c in self.checks
            ],
        }


def quantile_grid(values: np.ndarray, points: int = KS_GRID_POINTS) -> np.ndarray:
    """Distinct sample quantiles from the minimum to the maximum."""
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise ParameterError("no finite sample values")
    return np.unique(np.quantile(finite, np.linspace(0.0, 1.0, points)))


def _interpolated(grid: np.ndarray, cdf_values: np.ndarray) -> Callable[[float], float]:
    reference = np.maximum.accumulate(np.clip(cdf_values, 0.0, 1.0))

    def cdf(x: float) -> float:
        if not math.isfinite(x):
            return 1.0 if x > 0 else 0.0
        return float(np.interp(x, grid, reference))

    return cdf


def _mineig_check(batch: SampleBatch, config: EvalConfig, threshold: float, threads: int) -> CheckResult:
    values = batch.min_eigs
    grid = quantile_grid(values)
    positive = grid[grid > 0]

    def cdf_at(x: float) -> float:
        return mineig_cdf(MinEigQuery(batch.params, x, config))

    curve = evaluate_curve(cdf_at, positive, threads=threads)
    table = np.concatenate([np.zeros(grid.size - positive.size), np.array(curve.values)])
    ks = ks_statistic(values, _interpolated(grid, table))
    return CheckResult("ks_mineig", ks, threshold, {"samples": float(len(batch)), "grid_points": float(grid.size)})


def _demmel_check(batch: SampleBatch, config: EvalConfig, threshold: float) -> CheckResult:
    values = demmel_values(batch)
    grid = quantile_grid(values)
    table = demmel_cdf_grid(batch.params, grid, config)
    ks = ks_statistic(values, _interpolated(grid, table))
    return CheckResult("ks_demmel", ks, threshold, {"samples": float(len(batch)), "grid_points": float(grid.size)})


def _z_check(name: str, analytic: float, mean: float, std_err: float, threshold: float) -> CheckResult:
    statistic = abs(analytic - mean) / std_err if std_err > 0 else (0.0 if analytic == mean else math.inf)
    return CheckResult(name, statistic, threshold, {"analytic": analytic, "mc_mean": mean, "mc_std_err": std_err})


def run_suite(
    suite: str,
    params: ModelParams,
    mc_config: McConfig,
    eval_config: EvalConfig = DEFAULT_CONFIG,
    threads: int = 1,
    threshold: Optional[float] = None,
    z: float = 1.0,
    s: float = 0.5,
) -> VerifyReport:
    """
    Run one named suite.

    Args:
        suite: One of SUITES
        params: Model parameters
        mc_config: Sample count, seed and lanes
        eval_config: Analytic evaluation settings
        threads: Worker threads for sampling and c.d.f. tables
        threshold: Override of DEFAULT_THRESHOLDS[suite]
        z: Argument of the characteristic-polynomial average
        s: Argument of the m.g.f.

    Returns:
        VerifyReport; `passed` is False when any statistic reaches its threshold

    Raises:
        ParameterError: For an unknown suite, or n = 1 in the Demmel suites
    """
    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if suite in ("demmel", "mgf") and params.n < 2:
        raise ParameterError(f"suite {suite!r} needs n >= 2")
    limit = DEFAULT_THRESHOLDS[suite] if threshold is None else float(threshold)

    batch = sample_eigs(params, mc_config, threads=threads)
    logger.info("suite %s: %d draws sampled", suite, len(batch))

    if suite == "mineig":
        check = _mineig_check(batch, eval_config, limit, threads)
    elif suite == "demmel":
        check = _demmel_check(batch, eval_config, limit)
    elif suite == "charpoly":
        est = recip_avg_from_batch(batch, z)
        check = _z_check("charpoly_z", recip_charpoly_avg(params, z, eval_config), est.mean, est.std_err, limit)
    elif suite == "mgf":
        est = mc_mgf(batch, s)
        check = _z_check("mgf_z", demmel_mgf(params, s, eval_config), est.mean, est.std_err, limit)
    else:
        moment = trace_moment_check(batch)
        check = _z_check("trace_z", moment.expected, moment.mean, moment.std_err, limit)

    logger.info("suite %s: %s = %.6g (threshold %g)", suite, check.name, check.statistic, limit)
    return VerifyReport(suite, params, mc_config, eval_config, (check,))
