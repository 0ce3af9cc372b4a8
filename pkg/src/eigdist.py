"""Joint eigenvalue density and closed-form Laguerre-weight integrals.

The rank-1 spike enters the joint density only through a divided
difference of f(t) = 0F1(alpha+1; mu t) over the eigenvalues. The closed
forms Q_n, R_n, T_n, U_n are ratios of small Laguerre determinants; they are
returned as `SignedLog` values.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

from src.errors import CoincidentNodesError, ParameterError
from src.linalg import SignedLog, balanced_det
from src.numerics import divided_difference
from src.params import DEFAULT_CONFIG, EvalConfig, ModelParams, log_factorial, norm_constants
from src.params_constants import CENTRAL_MU_THRESHOLD
from src.specfun import ensure_converged, hyp0f1_tail, laguerre

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigVector:
    """Ordered positive eigenvalues 0 < l_1 <= ... <= l_n."""

    lambdas: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(x) for x in self.lambdas)
        if not values:
            raise ParameterError("EigVector needs at least one eigenvalue")
        if any(not math.isfinite(x) or x <= 0 for x in values):
            raise ParameterError(f"eigenvalues must be finite and positive, got {values}")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ParameterError(f"eigenvalues must be ascending, got {values}")
        object.__setattr__(self, "lambdas", values)

    def __len__(self) -> int:
        return len(self.lambdas)


def log_vandermonde_sq(values: Sequence[float]) -> float:
    """log Delta_n(l)^2 = 2 sum_{i<k} log|l_k - l_i|; -inf when two values coincide."""
    total = []
    for k in range(len(values)):
        for i in range(k):
            gap = abs(values[k] - values[i])
            if gap == 0.0:
                return -math.inf
            total.append(math.log(gap))
    return 2.0 * math.fsum(total)


def _spike_tail(params: ModelParams, config: EvalConfig) -> Callable[[float], float]:
    """
    t -> sum_{j >= n-1} mu^{j-n+1} t^j / ((alpha+1)_j j!).

    The dropped Taylor terms of 0F1(alpha+1; mu t) have degree below n-1
    and vanish under the (n-1)-st divided difference; the mu^{n-1} factor
    is divided out term by term.
    """
    n, alpha, mu = params.n, params.alpha, params.mu
    log_scale = (n - 1) * math.log(mu)

    def tail(t: float) -> float:
        result = hyp0f1_tail(alpha + 1.0, mu * t, n - 1, config, log_scale=log_scale)
        return ensure_converged(result, "0F1 spike tail")

    return tail


def _spike_divided_difference(params: ModelParams, values: Sequence[float], config: EvalConfig) -> float:
    """f[l_1, ..., l_n] / mu^{n-1} for f(t) = 0F1(alpha+1; mu t)."""
    return divided_difference(_spike_tail(params, config), values)


def rank1_hyp0f1_matrix(
    params: ModelParams, lambdas: EigVector, config: EvalConfig = DEFAULT_CONFIG
) -> float:
    """
    0F1~(m; Lambda, M^H M) for a rank-1 M with tr(M^H M) = mu.

    Evaluated as (n-1)! (m-1)! / (m-n)! * f[l_1..l_n] / mu^{n-1} with
    f(t) = 0F1(alpha+1; mu t).

    Raises:
        CoincidentNodesError: If two eigenvalues coincide

    Example:
        >>> rank1_hyp0f1_matrix(ModelParams(1, 3, 0.0), EigVector((2.0,)))
        1.0
    """
    if len(lambdas) != params.n:
        raise ParameterError(f"expected {params.n} eigenvalues, got {len(lambdas)}")
    if params.mu == 0.0:
        return 1.0
    n, m = params.n, params.m
    log_norm = log_factorial(n - 1) + log_factorial(m - 1) - log_factorial(m - n)
    return math.exp(log_norm) * _spike_divided_difference(params, lambdas.lambdas, config)


def _joint_density(params: ModelParams, values: Sequence[float], config: EvalConfig) -> float:
    """The symmetric joint-density formula at distinct positive points in any order."""
    n, alpha, mu = params.n, params.alpha, params.mu
    if len(values) != n:
        raise ParameterError(f"expected {n} eigenvalues, got {len(values)}")
    if any(x <= 0 for x in values):
        raise ParameterError(f"eigenvalues must be positive, got {list(values)}")

    log_vdm = log_vandermonde_sq(values)
    if log_vdm == -math.inf:
        raise CoincidentNodesError(f"coincident eigenvalues: {list(values)}")
    log_weight = math.fsum(alpha * math.log(x) - x for x in values)
    constants = norm_constants(params)

    if mu < CENTRAL_MU_THRESHOLD:
        return math.exp(constants.log_k_mn + log_vdm + log_weight)

    dd = _spike_divided_difference(params, values, config)
    if dd <= 0.0:
        logger.warning(
            "joint_pdf: divided difference %.3g at %s is not positive; parameters may exceed the accuracy envelope",
            dd,
            list(values),
        )
        return 0.0
    return math.exp(constants.log_k_n_alpha - mu + log_weight + log_vdm + math.log(dd))


def joint_pdf(params: ModelParams, lambdas: EigVector, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    Joint density of the ordered eigenvalues.

    K_{n,alpha} e^{-mu} / mu^{n-1} * prod l_i^alpha e^{-l_i} * Delta^2 * f[l]
    assembled in log form; below mu = 1e-8 the central density
    K_{m,n} Delta^2 prod l^alpha e^{-l} is used instead.

    Raises:
        CoincidentNodesError: If two eigenvalues coincide

    Example:
        >>> round(joint_pdf(ModelParams(1, 1, 0.0), EigVector((2.0,))), 12)
        0.135335283237
    """
    return _joint_density(params, lambdas.lambdas, config)


def joint_pdf_unordered(
    params: ModelParams, values: Sequence[float], config: EvalConfig = DEFAULT_CONFIG
) -> float:
    """Same formula at distinct positive values given in any order."""
    return _joint_density(params, [float(x) for x in values], config)


def _check_sizes(n: int, alpha: int) -> None:
    if n < 1 or alpha < 0:
        raise ParameterError(f"need n >= 1 and alpha >= 0, got n={n}, alpha={alpha}")


def _instance(n: int, alpha: int) -> ModelParams:
    return ModelParams(n, n + alpha, 0.0, allow_outside_envelope=True)


def _power_of_gap(gap: float, alpha: int) -> SignedLog:
    sign = -1 if (gap < 0 and alpha % 2) else 1
    return SignedLog(sign, alpha * math.log(abs(gap)))


def q_closed(n: int, alpha: int, a: float, b: float) -> SignedLog:
    """
    Q_n(a, b, alpha) = integral over [0, inf)^n of
    prod (a - y_i)(b - y_i)^alpha e^{-y_i} Delta_n(y)^2 dy, in closed form.

    K-bar_{n,alpha} / (b - a)^alpha * det[L^{(0)}_{n+i-1}(a) ; L^{(j-2)}_{n+i+1-j}(b)]

    Raises:
        CoincidentNodesError: If a == b

    Example:
        >>> round(q_closed(1, 1, 1.0, 2.0).value, 12)
        1.0
    """
    _check_sizes(n, alpha)
    if a == b:
        raise CoincidentNodesError("q_closed needs a != b")
    rows = []
    for i in range(1, alpha + 2):
        row = [laguerre(n + i - 1, 0.0, a)]
        row.extend(laguerre(n + i + 1 - j, j - 2.0, b) for j in range(2, alpha + 2))
        rows.append(row)
    constants = norm_constants(_instance(n, alpha))
    prefactor = SignedLog(constants.sign_k_bar, constants.log_k_bar_abs)
    gap = _power_of_gap(b - a, alpha)
    det = balanced_det(rows)
    result = prefactor * det
    return SignedLog(result.sign * gap.sign, result.log_abs - gap.log_abs) if result.sign else result


def r_closed(n: int, alpha: int, a: float) -> SignedLog:
    """
    R_n(a, alpha) = integral over [0, inf)^n of prod e^{-y} y (a - y)^alpha Delta^2 dy.

    (-1)^{n alpha} prod_{j<n} (j+1)!^2 prod_{j<alpha} (n+j)!/j! * det[L^{(j)}_{n+i-j}(a)]_{alpha x alpha}
    """
    _check_sizes(n, alpha)
    log_pref = 2.0 * math.fsum(log_factorial(j + 1) for j in range(n))
    log_pref += math.fsum(log_factorial(n + j) - log_factorial(j) for j in range(alpha))
    sign = -1 if (n * alpha) % 2 else 1
    rows = [[laguerre(n + i - j, float(j), a) for j in range(1, alpha + 1)] for i in range(1, alpha + 1)]
    det = balanced_det(rows)
    return SignedLog(sign, log_pref) * det


def t_closed(n: int, alpha: int, a: float, b: float) -> SignedLog:
    """
    T_n(a, b, alpha) = integral over [0, inf)^n of prod (a - y)(b - y)^alpha y^2 e^{-y} Delta^2 dy.

    (-1)^{n + alpha(n+alpha)} K-tilde_{n,alpha} / (b - a)^alpha
    * det[L^{(2)}_{n+i-1}(a) ; L^{(j)}_{n+i+1-j}(b)]

    Raises:
        CoincidentNodesError: If a == b
    """
    _check_sizes(n, alpha)
    if a == b:
        raise CoincidentNodesError("t_closed needs a != b")
    rows = []
    for i in range(1, alpha + 2):
        row = [laguerre(n + i - 1, 2.0, a)]
        row.extend(laguerre(n + i + 1 - j, float(j), b) for j in range(2, alpha + 2))
        rows.append(row)
    constants = norm_constants(_instance(n, alpha))
    sign = -1 if (n + alpha * (n + alpha)) % 2 else 1
    result = SignedLog(sign, constants.log_k_tilde) * balanced_det(rows)
    if result.sign == 0:
        return result
    gap = _power_of_gap(b - a, alpha)
    return SignedLog(result.sign * gap.sign, result.log_abs - gap.log_abs)


def u_closed(n: int, alpha: int, r1: float, r2: float) -> SignedLog:
    """
    U_n(r1, r2, alpha) = integral over [0, inf)^n of prod_j (r1 - y_j)(r2 - y_j) y_j^alpha e^{-y_j} Delta^2 dy.

    -n!(n+1)! prod_{j<n} (j+1)!(j+alpha)! det[L^{(alpha)}_{n+i-1}(r_j)]_{2x2} / (r2 - r1)

    Raises:
        CoincidentNodesError: If r1 == r2
    """
    _check_sizes(n, alpha)
    if r1 == r2:
        raise CoincidentNodesError("u_closed needs r1 != r2")
    log_pref = log_factorial(n) + log_factorial(n + 1)
    log_pref += math.fsum(log_factorial(j + 1) + log_factorial(j + alpha) for j in range(n))
    rows = [[laguerre(n + i - 1, float(alpha), r) for r in (r1, r2)] for i in (1, 2)]
    result = SignedLog(-1, log_pref) * balanced_det(rows)
    if result.sign == 0:
        return result
    gap = r2 - r1
    return SignedLog(result.sign * (1 if gap > 0 else -1), result.log_abs - math.log(abs(gap)))
