"""Average reciprocal characteristic polynomial E[1 / det(zI + W)]."""

import logging
import math
import warnings

from src.errors import CancellationWarning, ConvergenceError, ParameterError
from src.params import DEFAULT_CONFIG, EvalConfig, ModelParams
from src.params_constants import CANCELLATION_MU
from src.specfun import KahanSum, tricomi_psi

logger = logging.getLogger(__name__)

# Digits lost to cancellation above which the result is flagged.
MAX_LOST_DIGITS = 10.0


def recip_charpoly_avg(params: ModelParams, z: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    E[1/det(zI + W)] = z^alpha sum_k (-mu)^k Psi(k+n+alpha; alpha+1; z).

    The alternating series is summed with compensation and runs for at
    least ceil(3 mu) terms before the relative stopping test applies.
    Each Psi value comes from its own quadrature.

    Args:
        params: Model parameters
        z: Point on the positive real axis
        config: Truncation settings

    Returns:
        The average, a positive number

    Raises:
        ParameterError: If z <= 0
        ConvergenceError: If config.max_terms is exhausted

    Warns:
        CancellationWarning: If mu > 30 or more than 10 digits are lost

    Example:
        >>> round(recip_charpoly_avg(ModelParams(1, 1, 0.0), 1.0), 9)
        0.596347362
    """
    if not z > 0 or not math.isfinite(z):
        raise ParameterError(f"recip_charpoly_avg needs finite z > 0, got {z}")
    n, alpha, mu = params.n, params.alpha, params.mu
    scale = z**alpha
    if mu == 0.0:
        return scale * tricomi_psi(n + alpha, alpha + 1.0, z, config)

    min_terms = math.ceil(3.0 * mu)
    acc = KahanSum()
    largest = 0.0
    log_mu = math.log(mu)
    for k in range(config.max_terms):
        psi = tricomi_psi(k + n + alpha, alpha + 1.0, z, config)
        magnitude = math.exp(k * log_mu) * psi if psi > 0 else 0.0
        term = -magnitude if k % 2 else magnitude
        acc.add(term)
        largest = max(largest, magnitude)
        if k + 1 >= min_terms and magnitude <= config.rel_tol * abs(acc.value):
            terms_used = k + 1
            break
    else:
        raise ConvergenceError(f"charpoly series did not converge in {config.max_terms} terms (mu = {mu})")

    total = acc.value
    lost = math.log10(largest / abs(total)) if total != 0.0 else math.inf
    logger.debug("charpoly series: %d terms, largest term %.3g, %.1f digits lost", terms_used, largest, lost)
    if mu > CANCELLATION_MU or lost > MAX_LOST_DIGITS:
        message = f"alternating charpoly series at mu={mu}: about {lost:.1f} significant digits lost"
        logger.warning(message)
        warnings.warn(message, CancellationWarning, stacklevel=2)
    if total <= 0.0:
        logger.warning("charpoly average %.3g is not positive; result is dominated by rounding", total)
    return scale * total
