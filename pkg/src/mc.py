"""Monte Carlo oracle for the rank-1 non-central complex Wishart model.

Each draw is X = M + G with G an m x n matrix of unit-variance complex
normals (real and imaginary parts N(0, 1/2)) and M a rank-1 mean with
tr(M^H M) = mu. Eigenvalues of W = X^H X come from the batched Jacobi
solver.

Randomness is counter-based: the draws are split into `streams` contiguous
lanes, each lane into fixed-size sub-batches, and every sub-batch gets its
own Philox key (seed, lane, sub-batch). Output is therefore identical for
any number of worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConvergenceError, ParameterError
from src.linalg import ComplexMatrix, hermitian_eigvals_batch
from src.params import ModelParams

logger = logging.getLogger(__name__)

SUB_BATCH = 4096
NEGATIVE_EIG_TOL = 1e-10
_UINT64_MASK = (1 << 64) - 1
_TWO_POW_M53 = 2.0**-53


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo run settings.

    Args:
        samples: Number of draws (>= 1)
        seed: 64-bit seed (reduced modulo 2^64)
        streams: Number of independent lanes (>= 1)
        rotated_mean: Use the spread rank-1 mean sqrt(mu) u v^H with
            u, v proportional to all-ones vectors instead of the corner entry
    """

    samples: int
    seed: int
    streams: int = 1
    rotated_mean: bool = False

    def __post_init__(self) -> None:
        for name in ("samples", "seed", "streams"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ParameterError(f"{name} must be an integer, got {value!r}")
        if self.samples < 1:
            raise ParameterError(f"samples must be >= 1, got {self.samples}")
        if self.streams < 1:
            raise ParameterError(f"streams must be >= 1, got {self.streams}")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed) & _UINT64_MASK)
        object.__setattr__(self, "streams", int(self.streams))


@dataclass(frozen=True)
class SampleBatch:
    """Sampled eigenvalues, one ascending nonnegative row per draw."""

    eig_rows: np.ndarray
    params: ModelParams
    config: McConfig

    def __len__(self) -> int:
        return int(self.eig_rows.shape[0])

    @property
    def min_eigs(self) -> np.ndarray:
        return self.eig_rows[:, 0]

    @property
    def traces(self) -> np.ndarray:
        return self.eig_rows.sum(axis=1)


@dataclass(frozen=True)
class MeanEstimate:
    """Sample mean with its standard error."""

    mean: float
    std_err: float


@dataclass(frozen=True)
class TraceMoment:
    """Sample mean of tr(W), its standard error and the exact value mn + mu."""

    mean: float
    std_err: float
    expected: float

    @property
    def z_score(self) -> float:
        if self.std_err == 0.0:
            return 0.0 if self.mean == self.expected else math.inf
        return abs(self.mean - self.expected) / self.std_err


def mean_matrix(params: ModelParams, rotated: bool = False) -> np.ndarray:
    """The m x n rank-1 mean with tr(M^H M) = mu."""
    n, m, mu = params.n, params.m, params.mu
    if rotated:
        return np.full((m, n), math.sqrt(mu / (m * n)), dtype=np.complex128)
    mean = np.zeros((m, n), dtype=np.complex128)
    mean[0, 0] = math.sqrt(mu)
    return mean


def _lane_bounds(samples: int, streams: int) -> List[Tuple[int, int]]:
    """Contiguous [start, stop) ranges of draws per lane."""
    base, extra = divmod(samples, streams)
    bounds = []
    start = 0
    for lane in range(streams):
        size = base + (1 if lane < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def _tasks(config: McConfig) -> List[Tuple[int, int, int]]:
    """(lane, sub-batch index, size) in output order."""
    tasks = []
    for lane, (start, stop) in enumerate(_lane_bounds(config.samples, config.streams)):
        for sub, lo in enumerate(range(start, stop, SUB_BATCH)):
            tasks.append((lane, sub, min(SUB_BATCH, stop - lo)))
    return tasks


def complex_normals(seed: int, lane: int, sub: int, count: int, attempt: int = 0) -> np.ndarray:
    """
    `count` complex normals with independent N(0, 1/2) parts.

    Philox is keyed (seed, lane << 32 | sub); the retry attempt occupies
    the top counter word. Uniforms are (raw >> 11 + 1/2) 2^-53, strictly
    inside (0, 1), and pairs go through Box-Muller.
    """
    bitgen = np.random.Philox(
        key=np.array([seed & _UINT64_MASK, ((lane << 32) | sub) & _UINT64_MASK], dtype=np.uint64),
        counter=np.array([0, 0, 0, attempt], dtype=np.uint64),
    )
    raw = np.asarray(bitgen.random_raw(2 * count), dtype=np.uint64)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53
    radius = np.sqrt(-np.log(u[0::2]))
    return radius * np.exp(2j * math.pi * u[1::2])


def _draw_eigs(params: ModelParams, config: McConfig, lane: int, sub: int, size: int, attempt: int) -> np.ndarray:
    n, m = params.n, params.m
    noise = complex_normals(config.seed, lane, sub, size * m * n, attempt).reshape(size, m, n)
    x = noise + mean_matrix(params, config.rotated_mean)[None, :, :]
    w = np.conj(np.swapaxes(x, 1, 2)) @ x
    return hermitian_eigvals_batch(w)


def _sample_task(params: ModelParams, config: McConfig, task: Tuple[int, int, int]) -> np.ndarray:
    lane, sub, size = task
    try:
        eigs = _draw_eigs(params, config, lane, sub, size, attempt=0)
    except ConvergenceError:
        logger.warning("eigensolver failed on lane %d sub-batch %d; re-drawing once", lane, sub)
        eigs = _draw_eigs(params, config, lane, sub, size, attempt=1)

    low = float(eigs.min())
    if low < -NEGATIVE_EIG_TOL:
        logger.warning("sampled eigenvalue %.3g below -%g on lane %d", low, NEGATIVE_EIG_TOL, lane)
    return np.maximum(eigs, 0.0)


def sample_eigs(params: ModelParams, config: McConfig, threads: int = 1) -> SampleBatch:
    """
    Draw config.samples eigenvalue vectors of W = X^H X.

    Args:
        params: Model parameters
        config: Sample count, seed, lanes and mean layout
        threads: Worker threads; the result does not depend on it

    Returns:
        SampleBatch with eig_rows of shape (samples, n)

    Raises:
        ConvergenceError: If a re-drawn sub-batch still fails to diagonalize
    """
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    tasks = _tasks(config)
    logger.debug(
        "sampling %d draws (n=%d, m=%d, mu=%g) in %d sub-batches on %d threads",
        config.samples, params.n, params.m, params.mu, len(tasks), threads,
    )
    if threads == 1:
        parts = [_sample_task(params, config, task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda task: _sample_task(params, config, task), tasks))
    return SampleBatch(np.concatenate(parts, axis=0), params, config)


def ks_statistic(
    values: Sequence[float], cdf: Callable[[float], float], grid_points: Optional[int] = None
) -> float:
    """
    Kolmogorov-Smirnov distance sup |F_N(x) - F(x)|.

    Args:
        values: Sample (nonempty)
        cdf: Reference c.d.f.
        grid_points: If given, F is evaluated on that many equispaced points
            over the sample range and linearly interpolated, which keeps
            large samples cheap for expensive c.d.f.s

    Example:
        >>> ks_statistic([0.5, 0.5], lambda x: x)
        0.5
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    size = x.size
    if size == 0:
        raise ParameterError("ks_statistic needs a nonempty sample")
    if grid_points is not None and grid_points >= 2 and x[-1] > x[0]:
        grid = np.linspace(x[0], x[-1], grid_points)
        reference = np.maximum.accumulate(np.array([cdf(float(g)) for g in grid]))
        f = np.interp(x, grid, reference)
    else:
        f = np.array([cdf(float(v)) for v in x])
    upper = np.arange(1, size + 1) / size - f
    lower = f - np.arange(0, size) / size
    return float(max(upper.max(), lower.max()))


def _estimate(samples: np.ndarray) -> MeanEstimate:
    mean = float(np.mean(samples))
    if samples.size < 2:
        return MeanEstimate(mean, math.inf)
    return MeanEstimate(mean, float(np.std(samples, ddof=1) / math.sqrt(samples.size)))


def recip_avg_from_batch(batch: SampleBatch, z: float) -> MeanEstimate:
    """Mean and standard error of prod_j 1/(z + l_j) over an existing batch."""
    if not z > 0:
        raise ParameterError(f"z must be positive, got {z}")
    return _estimate(np.prod(1.0 / (z + batch.eig_rows), axis=1))


def mc_recip_avg(params: ModelParams, z: float, config: McConfig, threads: int = 1) -> MeanEstimate:
    """
    Monte Carlo estimate of E[1/det(zI + W)].

    Example:
        >>> est = mc_recip_avg(ModelParams(1, 1, 0.0), 1e6, McConfig(100, seed=1))
        >>> abs(est.mean * 1e6 - 1) < 1e-4
        True
    """
    return recip_avg_from_batch(sample_eigs(params, config, threads), z)


def demmel_values(batch: SampleBatch) -> np.ndarray:
    """V = tr(W) / l_min per draw."""
    with np.errstate(divide="ignore"):
        return batch.traces / batch.min_eigs


def condition_number(x: ComplexMatrix) -> float:
    """
    ||X||_F ||X^+||_2 of an explicit matrix with full column rank; its square is V.

    Example:
        >>> round(condition_number(ComplexMatrix(2, 2, (1, 0, 0, 1))) ** 2, 12)
        2.0
    """
    eigs = hermitian_eigvals_batch(x.gram().to_array()[None, :, :])[0]
    low = float(eigs[0])
    if low <= 0.0:
        return math.inf
    return math.sqrt(float(np.sum(eigs)) / low)


def mc_mgf(batch: SampleBatch, s: float) -> MeanEstimate:
    """Mean and standard error of e^{-sV}."""
    if not s >= 0:
        raise ParameterError(f"s must be >= 0, got {s}")
    return _estimate(np.exp(-s * demmel_values(batch)))


def trace_moment_check(batch: SampleBatch) -> TraceMoment:
    """Compare the sample mean of tr(W) with mn + mu."""
    params = batch.params
    estimate = _estimate(batch.traces)
    return TraceMoment(estimate.mean, estimate.std_err, params.m * params.n + params.mu)
