"""Distribution of the minimum eigenvalue.

The survival function Pr(l_min >= x) is an (alpha+1) x (alpha+1)
determinant: the first column holds (-mu)^{i-1} psi_i(mu, x), the rest are
Laguerre polynomials at -x. The c.d.f. is returned as its complement.
"""

import logging
import math
from dataclasses import dataclass, field

from src.errors import ConvergenceError, ParameterError
from src.linalg import SignedLog, balanced_det, lu_det
from src.params import DEFAULT_CONFIG, EvalConfig, ModelParams, log_factorial
from src.specfun import KahanSum, ensure_converged, humbert_phi3, hyp1f1, laguerre

logger = logging.getLogger(__name__)

# Values this far outside [0, 1] indicate lost accuracy rather than rounding.
_RANGE_SLACK = 1e-10


@dataclass(frozen=True)
class MinEigQuery:
    """A c.d.f. evaluation request: model, threshold x > 0, numerical settings."""

    params: ModelParams
    x: float
    config: EvalConfig = field(default=DEFAULT_CONFIG)

    def __post_init__(self) -> None:
        x = float(self.x)
        if not math.isfinite(x) or x <= 0:
            raise ParameterError(f"threshold x must be finite and positive, got {self.x!r}")
        object.__setattr__(self, "x", x)


def _check_row_index(params: ModelParams, i: int) -> None:
    if not 1 <= i <= params.alpha + 1:
        raise ParameterError(f"row index i must be in [1, {params.alpha + 1}], got {i}")


def psi_i(params: ModelParams, i: int, x: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    psi_i(mu, x) = 1/(alpha+i+n-2)! * sum_k (x mu)^k 1F1(alpha+k; alpha+n+i+k-1; -mu) / (k! (alpha+i+n-1)_k).

    Raises:
        ConvergenceError: If the k-series exhausts config.max_terms
    """
    _check_row_index(params, i)
    if x < 0:
        raise ParameterError(f"psi_i needs x >= 0, got {x}")
    n, alpha, mu = params.n, params.alpha, params.mu
    c0 = alpha + n + i - 1
    w = x * mu

    acc = KahanSum()
    weight = 1.0
    for k in range(config.max_terms):
        if k > 0:
            weight *= w / (k * (c0 + k - 1))
            if weight == 0.0:
                break
        term = weight * ensure_converged(hyp1f1(alpha + k, c0 + k, -mu, config), "psi_i 1F1")
        acc.add(term)
        if k > w and abs(term) <= config.rel_tol * abs(acc.value):
            break
    else:
        raise ConvergenceError(f"psi_i: series did not converge in {config.max_terms} terms (x mu = {w})")
    return acc.value * math.exp(-log_factorial(c0 - 1))


def psi_i_phi3(params: ModelParams, i: int, x: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """psi_i(mu, x) = e^{-mu} Phi3(n+i-1, n+alpha+i-1; mu, x mu) / (alpha+i+n-2)!."""
    _check_row_index(params, i)
    n, alpha, mu = params.n, params.alpha, params.mu
    phi3 = ensure_converged(humbert_phi3(n + i - 1, n + alpha + i - 1, mu, x * mu, config), "psi_i Phi3")
    return phi3 * math.exp(-mu - log_factorial(alpha + i + n - 2))


def _survival_determinant(params: ModelParams, x: float, config: EvalConfig) -> SignedLog:
    """det[(-mu)^{i-1} psi_i ; L^{(j-2)}_{n+i-j}(-x)] with rows balanced before LU."""
    n, alpha, mu = params.n, params.alpha, params.mu
    rows = []
    for i in range(1, alpha + 2):
        lead = psi_i(params, i, x, config) * (-mu) ** (i - 1)
        rows.append([lead] + [laguerre(n + i - j, j - 2.0, -x) for j in range(2, alpha + 2)])
    det = balanced_det(rows)
    logger.debug("survival determinant at x=%g: sign=%d log=%.6g", x, det.sign, det.log_abs)
    return det


def _complement(survival: float, what: str) -> float:
    cdf = 1.0 - survival
    if cdf < -_RANGE_SLACK or cdf > 1.0 + _RANGE_SLACK:
        logger.warning("%s: c.d.f. %.3g outside [0, 1]; parameters may exceed the accuracy envelope", what, cdf)
    return min(1.0, max(0.0, cdf))


def mineig_survival(q: MinEigQuery, use_special_cases: bool = True) -> float:
    """
    Pr(l_min >= x) = (n+alpha-1)! e^{-nx} det[(-mu)^{i-1} psi_i(mu, x) ; L^{(j-2)}_{n+i-j}(-x)].

    Args:
        q: The query
        use_special_cases: Dispatch mu = 0 and alpha = 0 to their closed
            forms; False forces the general determinant

    Returns:
        Survival probability (unclipped)
    """
    params, x = q.params, q.x
    if use_special_cases:
        if params.mu == 0.0:
            return 1.0 - mineig_cdf_central(params, x)
        if params.alpha == 0:
            return 1.0 - mineig_cdf_alpha0(params, x, q.config)
    det = _survival_determinant(params, x, q.config)
    if det.sign == 0:
        return 0.0
    return det.sign * math.exp(log_factorial(params.n + params.alpha - 1) - params.n * x + det.log_abs)


def mineig_cdf(q: MinEigQuery, use_special_cases: bool = True) -> float:
    """
    C.d.f. of the minimum eigenvalue, F(x) = 1 - Pr(l_min >= x), in [0, 1].

    Example:
        >>> q = MinEigQuery(ModelParams(2, 2, 0.0), 0.5)
        >>> round(mineig_cdf(q), 8)
        0.63212056
    """
    return _complement(mineig_survival(q, use_special_cases), "mineig_cdf")


def mineig_cdf_alpha0(params: ModelParams, x: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    Square case: F(x) = 1 - e^{-mu-nx} Phi3(n, n; mu, x mu).

    Raises:
        ParameterError: If alpha != 0
    """
    if params.alpha != 0:
        raise ParameterError(f"mineig_cdf_alpha0 needs alpha = 0, got alpha = {params.alpha}")
    n, mu = params.n, params.mu
    phi3 = ensure_converged(humbert_phi3(n, n, mu, x * mu, config), "mineig Phi3")
    return _complement(math.exp(-mu - n * x) * phi3, "mineig_cdf_alpha0")


def mineig_cdf_central(params: ModelParams, x: float) -> float:
    """
    Central case: F(x) = 1 - e^{-nx} det[L^{(j-1)}_{n+i-j}(-x)]_{alpha x alpha}.

    Raises:
        ParameterError: If mu != 0

    Example:
        >>> round(mineig_cdf_central(ModelParams(4, 4, 0.0), 0.25), 12) == round(1 - math.exp(-1), 12)
        True
    """
    if params.mu != 0.0:
        raise ParameterError(f"mineig_cdf_central needs mu = 0, got mu = {params.mu}")
    n, alpha = params.n, params.alpha
    rows = [[laguerre(n + i - j, j - 1.0, -x) for j in range(1, alpha + 1)] for i in range(1, alpha + 1)]
    det = lu_det(rows)
    survival = det.sign * math.exp(det.log_abs - n * x) if det.sign else 0.0
    return _complement(survival, "mineig_cdf_central")
