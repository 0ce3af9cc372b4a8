"""Distribution of the Demmel condition number V = tr(W) / l_min.

The Laplace transform of f_V is e^{-ns} times a Laurent series in 1/s whose
coefficients come from cofactors of a Laguerre determinant. Each monomial
s^{-q} e^{-ns} inverts to (v-n)^{q-1}/Gamma(q), so the density is assembled
term by term and vanishes identically for v <= n. Alternative paths:

1. The alpha = 0 closed series (3F3 form)
2. The central case mu = 0 (finite term set)
3. Fixed-Talbot numerical inversion of the same transform
4. The moment generating function by Gauss-Laguerre quadrature
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.errors import ConvergenceError, ParameterError, WishartLabError
from src.linalg import SignedLog, balanced_det
from src.numerics import PolyRat, composite_legendre, gauss_laguerre, poly_det, talbot_invert
from src.params import DEFAULT_CONFIG, EvalConfig, ModelParams, log_factorial
from src.params_constants import DEFAULT_TALBOT_ORDER
from src.specfun import (
    KahanSum,
    ensure_converged,
    hyp0f1,
    hyp1f1,
    hyp_pfq,
    laguerre,
    laguerre_coeffs,
    log_abs_pochhammer,
)

logger = logging.getLogger(__name__)

# Composite Gauss-Legendre layout for c.d.f. integrals in u = n/v.
CDF_PANELS = 16
CDF_ORDER = 20

# Values this far outside their range indicate lost accuracy rather than rounding.
_NEGATIVE_SLACK = 1e-10
_PROBABILITY_SLACK = 1e-6

_minor_cache: Dict[Tuple[int, int], Tuple[PolyRat, ...]] = {}
_minor_lock = threading.Lock()


def _require_n2(params: ModelParams) -> None:
    if params.n < 2:
        raise ParameterError(f"V = tr(W)/l_min is degenerate for n = 1; need n >= 2, got n = {params.n}")


@dataclass(frozen=True)
class DemmelQuery:
    """Evaluation request for V at point v (v = +inf is accepted by the c.d.f.)."""

    params: ModelParams
    v: float
    config: EvalConfig = field(default=DEFAULT_CONFIG)

    def __post_init__(self) -> None:
        _require_n2(self.params)
        v = float(self.v)
        if math.isnan(v):
            raise ParameterError("evaluation point v is NaN")
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class InversionTermSet:
    """
    Laurent terms sum coeff * e^{log_scale} * s^{-power} * e^{-shift s}.

    Attributes:
        terms: (coeff, power) pairs, one per distinct power
        shift: Delay of the transform (n)
        log_scale: Common log-magnitude factored out of every coefficient
    """

    terms: Tuple[Tuple[float, int], ...]
    shift: float
    log_scale: float = 0.0

    def __post_init__(self) -> None:
        for coeff, power in self.terms:
            if power < 1:
                raise WishartLabError(f"inversion term with power {power} < 1")
            if not math.isfinite(coeff):
                raise WishartLabError(f"non-finite inversion coefficient for power {power}")

    def invert(self, t: float) -> float:
        """Exact inverse transform at t: sum coeff (t - shift)^{q-1} / Gamma(q)."""
        tau = t - self.shift
        if tau <= 0 or not math.isfinite(tau):
            return 0.0
        log_tau = math.log(tau)
        acc = KahanSum()
        for coeff, power in self.terms:
            if coeff == 0.0:
                continue
            log_mag = math.log(abs(coeff)) + self.log_scale + (power - 1) * log_tau - math.lgamma(power)
            acc.add(math.copysign(math.exp(log_mag), coeff))
        return acc.value


def laguerre_minors(n: int, alpha: int) -> Tuple[PolyRat, ...]:
    """
    D_i(s), i = 1..alpha+1: the minors of the Laguerre columns
    L^{(j)}_{n+i-1-j}(-s), j = 1..alpha, with row i deleted.

    Cached per (n, alpha); they do not depend on mu or v.
    """
    key = (n, alpha)
    minors = _minor_cache.get(key)
    if minors is not None:
        return minors
    with _minor_lock:
        minors = _minor_cache.get(key)
        if minors is None:
            columns = [
                [laguerre_coeffs(n + i - 1 - j, float(j)).reflect() for j in range(1, alpha + 1)]
                for i in range(1, alpha + 2)
            ]
            minors = tuple(poly_det(columns[:r] + columns[r + 1 :]) for r in range(alpha + 1))
            _check_min_power(n, alpha, minors)
            _minor_cache[key] = minors
            logger.debug("built Laguerre minors for n=%d alpha=%d, degrees %s", n, alpha, [d.degree for d in minors])
    return minors


def _check_min_power(n: int, alpha: int, minors: Tuple[PolyRat, ...]) -> None:
    base = (n - 1) * (n + alpha + 1)
    for i, minor in enumerate(minors, start=1):
        if base + i - 1 - minor.degree < 1:
            raise WishartLabError(
                f"inversion power {base + i - 1 - minor.degree} < 1 for n={n}, alpha={alpha}, row {i}"
            )


def _log_a(n: int, alpha: int, i: int, k: int) -> float:
    """log a_i(k), the s-independent series coefficients of phi_i."""
    nn = n * n + n * alpha
    value = math.log(n + i - 1) + log_factorial(nn + i - 2) - log_factorial(n + i + alpha - 2)
    for a in (n + i, n + i - 2, nn + i - 1):
        value += log_abs_pochhammer(a, k)
    for a in (n + i - 1, n + i + alpha - 1):
        value -= log_abs_pochhammer(a, k)
    return value


def _log_phi_coeff(params: ModelParams, i: int, k: int, v: float, config: EvalConfig) -> float:
    """log of a_i(k)/k! (mu/v)^{i-1+k} 1F1(n^2+n alpha+k+i-1; n+i+k+alpha-1; mu/v)."""
    n, alpha, mu = params.n, params.alpha, params.mu
    power = i - 1 + k
    log_ratio = power * math.log(mu / v) if power else 0.0
    f11 = ensure_converged(
        hyp1f1(n * n + n * alpha + k + i - 1, n + i + k + alpha - 1, mu / v, config), "phi_i 1F1"
    )
    return _log_a(n, alpha, i, k) - log_factorial(k) + log_ratio + math.log(f11)


def inversion_terms(params: ModelParams, v: float, config: EvalConfig = DEFAULT_CONFIG) -> InversionTermSet:
    """
    Collect the Laurent terms of the transform of f_V at point v > n.

    The determinant is expanded along its first column; every monomial
    s^d of D_i(s) times the k-th term of phi_i contributes power
    q = (n-1)(n+alpha+1) + i - 1 + k - d. The k loop stops once the
    inverted contributions at v fall below rel_tol of the running sum and
    k is past mu (v-n)/v.

    Raises:
        ConvergenceError: If config.laplace_terms is exhausted
    """
    _require_n2(params)
    n, alpha, mu = params.n, params.alpha, params.mu
    if not v > n:
        raise ParameterError(f"inversion_terms needs v > n, got v = {v}")
    minors = laguerre_minors(n, alpha)
    base = (n - 1) * (n + alpha + 1)
    log_tau = math.log(v - n)
    log_scale = _log_phi_coeff(params, 1, 0, v, config)
    rows = range(1, alpha + 2) if mu > 0 else range(1, 2)
    peak = mu * (v - n) / v

    collected: Dict[int, KahanSum] = {}
    running = KahanSum()
    for k in range(config.laplace_terms):
        group_abs = 0.0
        for i in rows:
            minor = minors[i - 1]
            if minor.is_zero():
                continue
            log_c = _log_phi_coeff(params, i, k, v, config) - log_scale
            for d, m_coeff in enumerate(minor.coeffs):
                if m_coeff == 0.0:
                    continue
                q = base + i - 1 + k - d
                coeff = m_coeff * math.exp(log_c)
                collected.setdefault(q, KahanSum()).add(coeff)
                contribution = coeff * math.exp((q - 1) * log_tau - math.lgamma(q))
                running.add(contribution)
                group_abs += abs(contribution)
        if mu == 0.0:
            break
        if k > peak and group_abs <= config.rel_tol * abs(running.value) + config.abs_tol:
            logger.debug("inversion terms at v=%g truncated after k=%d", v, k)
            break
    else:
        raise ConvergenceError(f"termwise inversion did not converge in {config.laplace_terms} terms (v = {v})")

    terms = tuple((acc.value, q) for q, acc in sorted(collected.items()))
    return InversionTermSet(terms, float(n), log_scale)


def _log_prefactor(params: ModelParams, v: float) -> float:
    """log of (n-1)! e^{-mu} v^{-n(n+alpha)}."""
    n, alpha = params.n, params.alpha
    return log_factorial(n - 1) - params.mu - n * (n + alpha) * math.log(v)


def demmel_pdf(q: DemmelQuery, use_special_cases: bool = True) -> float:
    """
    Density of V at q.v by termwise Laplace inversion.

    Args:
        q: The query
        use_special_cases: Dispatch mu = 0 to demmel_pdf_central

    Returns:
        f_V(v); exactly 0 for v <= n

    Example:
        >>> q = DemmelQuery(ModelParams(2, 2, 0.0), 3.0)
        >>> round(demmel_pdf(q), 12)
        0.074074074074
    """
    params, v = q.params, q.v
    if v <= params.n or math.isinf(v):
        return 0.0
    if use_special_cases and params.mu == 0.0:
        return demmel_pdf_central(params, v)
    terms = inversion_terms(params, v, q.config)
    return _clip_density(terms.invert(v) * math.exp(_log_prefactor(params, v)), v)


def _clip_density(value: float, v: float) -> float:
    if value < -_NEGATIVE_SLACK:
        logger.warning(
            "demmel_pdf: density %.3g at v=%g is negative; parameters may exceed the accuracy envelope", value, v
        )
    return max(value, 0.0)


def _clip_probability(value: float, what: str) -> float:
    if value < -_PROBABILITY_SLACK or value > 1.0 + _PROBABILITY_SLACK:
        logger.warning("%s: probability %.3g outside [0, 1]; parameters may exceed the accuracy envelope", what, value)
    return min(1.0, max(0.0, value))


def demmel_pdf_central(params: ModelParams, v: float) -> float:
    """
    Central density: n!(n^2+n alpha-1)!/(n+alpha-1)! v^{-n(n+alpha)}
    times the inverse of e^{-ns} s^{-(n-1)(n+alpha+1)} D_1(s).

    Raises:
        ParameterError: If mu != 0 or n < 2
    """
    _require_n2(params)
    if params.mu != 0.0:
        raise ParameterError(f"demmel_pdf_central needs mu = 0, got mu = {params.mu}")
    n, alpha = params.n, params.alpha
    if v <= n or math.isinf(v):
        return 0.0
    base = (n - 1) * (n + alpha + 1)
    minor = laguerre_minors(n, alpha)[0]
    terms = tuple((c, base - d) for d, c in enumerate(minor.coeffs) if c != 0.0)
    log_const = log_factorial(n) + log_factorial(n * n + n * alpha - 1) - log_factorial(n + alpha - 1)
    inverse = InversionTermSet(terms, float(n)).invert(v)
    return inverse * math.exp(log_const - n * (n + alpha) * math.log(v))


def demmel_pdf_alpha0(params: ModelParams, v: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    Square case: n(n^2-1) e^{-mu} (v-n)^{n^2-2} v^{-n^2}
    * sum_k (n^2)_k/((n)_k k!) (mu/v)^k 3F3(n+1, n-1, n^2+k; n, n+k, n^2-1; mu(1-n/v)).

    Raises:
        ParameterError: If alpha != 0 or n < 2
        ConvergenceError: If the k-series exhausts config.laplace_terms
    """
    _require_n2(params)
    if params.alpha != 0:
        raise ParameterError(f"demmel_pdf_alpha0 needs alpha = 0, got alpha = {params.alpha}")
    n, mu = params.n, params.mu
    if v <= n or math.isinf(v):
        return 0.0
    nsq = n * n
    log_pref = math.log(n * (nsq - 1)) - mu + (nsq - 2) * math.log(v - n) - nsq * math.log(v)
    if mu == 0.0:
        return math.exp(log_pref)

    z = mu * (1.0 - n / v)
    acc = KahanSum()
    log_weight = 0.0
    for k in range(config.laplace_terms):
        if k > 0:
            log_weight += math.log((nsq + k - 1) / ((n + k - 1) * k)) + math.log(mu / v)
        f33 = ensure_converged(hyp_pfq([n + 1, n - 1, nsq + k], [n, n + k, nsq - 1], z, config), "3F3")
        term = math.exp(log_weight) * f33
        acc.add(term)
        if k > mu and term <= config.rel_tol * acc.value:
            break
    else:
        raise ConvergenceError(f"alpha = 0 series did not converge in {config.laplace_terms} terms")
    return acc.value * math.exp(log_pref)


def demmel_pdf_talbot(q: DemmelQuery, order: int = DEFAULT_TALBOT_ORDER) -> float:
    """
    Density of V by fixed-Talbot inversion of the same transform.

    The phi_i series is summed in powers of mu/(s v) at each complex
    contour node, which needs |s| > mu/v along the contour.
    """
    params, v, config = q.params, q.v, q.config
    n, alpha, mu = params.n, params.alpha, params.mu
    if v <= n or math.isinf(v):
        return 0.0
    minors = laguerre_minors(n, alpha)
    base = (n - 1) * (n + alpha + 1)
    log_scale = _log_phi_coeff(params, 1, 0, v, config)
    rows = range(1, alpha + 2) if mu > 0 else range(1, 2)
    cache: Dict[Tuple[int, int], float] = {}

    def coefficient(i: int, k: int) -> float:
        key = (i, k)
        if key not in cache:
            cache[key] = math.exp(_log_phi_coeff(params, i, k, v, config) - log_scale)
        return cache[key]

    def transform(s: complex) -> complex:
        total = 0j
        inv_s = 1.0 / s
        for i in rows:
            minor = minors[i - 1]
            if minor.is_zero():
                continue
            series = 0j
            power = inv_s ** (i - 1)
            for k in range(config.laplace_terms):
                term = coefficient(i, k) * power
                series += term
                if k > 0 and abs(term) <= config.rel_tol * abs(series):
                    break
                if mu == 0.0:
                    break
                power *= inv_s
            else:
                raise ConvergenceError(f"phi_{i} series did not converge at s = {s}")
            total += series * complex(minor(s))
        return total * s ** (-base)

    inverse = talbot_invert(transform, v, order=order, shift=float(n))
    return inverse * math.exp(_log_prefactor(params, v) + log_scale)


def _theta(params: ModelParams, i: int, w: float, z: float, config: EvalConfig) -> float:
    """
    theta_i(w, z) * (n+alpha-1)!, with
    theta_i = (n+i-1)/(n+alpha+i-2)! sum_k (n+i)_k (n+i-2)_k 0F1(alpha+n+i+k-1; w) (w/z)^k
    / (k! (alpha+n+i-1)_k (n+i-1)_k).
    """
    n, alpha = params.n, params.alpha
    ratio = w / z
    acc = KahanSum()
    weight = 1.0
    for k in range(config.max_terms):
        if k > 0:
            j = k - 1
            weight *= ratio * (n + i + j) * (n + i - 2 + j) / (k * (alpha + n + i - 1 + j) * (n + i - 1 + j))
            if weight == 0.0:
                break
        term = weight * ensure_converged(hyp0f1(alpha + n + i + k - 1, w, config), "theta_i 0F1")
        acc.add(term)
        if k > ratio and abs(term) <= config.rel_tol * abs(acc.value):
            break
    else:
        raise ConvergenceError(f"theta_{i} series did not converge in {config.max_terms} terms")
    scale = math.exp(log_factorial(n + alpha - 1) - log_factorial(n + alpha + i - 2))
    return (n + i - 1) * scale * acc.value


def _mgf_integrand_log(params: ModelParams, x: float, s: float, config: EvalConfig) -> SignedLog:
    """Signed log of x^{n(n+alpha)-1} (x+s)^{-(n-1)(n+alpha+1)} det[...] * (n+alpha-1)!."""
    n, alpha, mu = params.n, params.alpha, params.mu
    xs = x + s
    rows: List[List[float]] = []
    for i in range(1, alpha + 2):
        lead = (-mu * x / xs) ** (i - 1) * _theta(params, i, x * mu, xs, config)
        rows.append([lead] + [laguerre(n + i - 1 - j, float(j), -xs) for j in range(1, alpha + 1)])
    det = balanced_det(rows)
    if det.sign == 0:
        return det
    log_power = (n * (n + alpha) - 1) * math.log(x) - (n - 1) * (n + alpha + 1) * math.log(xs)
    return SignedLog(det.sign, det.log_abs + log_power)


def demmel_mgf(params: ModelParams, s: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    E[e^{-sV}] = (n-1)! e^{-mu-sn} integral_0^inf e^{-xn} x^{n(n+alpha)-1} (x+s)^{-(n-1)(n+alpha+1)}
    det[(-mu x/(x+s))^{i-1} theta_i(x mu, x+s) ; L^{(j)}_{n+i-1-j}(-x-s)] dx.

    The x-integral is Gauss-Laguerre of order config.quad_order after x = t/n.

    Example:
        >>> round(demmel_mgf(ModelParams(2, 2, 0.0), 0.0), 8)
        1.0
    """
    _require_n2(params)
    if not s >= 0 or not math.isfinite(s):
        raise ParameterError(f"demmel_mgf needs finite s >= 0, got {s}")
    n, alpha = params.n, params.alpha
    rule = gauss_laguerre(config.quad_order)
    logs = []
    signs = []
    for t, weight in zip(rule.nodes, rule.weights):
        value = _mgf_integrand_log(params, float(t) / n, s, config)
        if value.sign == 0:
            continue
        logs.append(value.log_abs + math.log(weight))
        signs.append(value.sign)
    if not logs:
        return 0.0
    log_arr = np.array(logs)
    top = float(np.max(log_arr))
    total = math.fsum((np.array(signs) * np.exp(log_arr - top)).tolist())
    log_const = log_factorial(n - 1) - log_factorial(n + alpha - 1) - params.mu - s * n - math.log(n)
    return total * math.exp(top + log_const)


def _u_integrand(params: ModelParams, config: EvalConfig) -> Callable[[float], float]:
    n = params.n

    def g(u: float) -> float:
        v = n / u
        return demmel_pdf(DemmelQuery(params, v, config)) * n / (u * u)

    return g


def demmel_cdf(q: DemmelQuery) -> float:
    """
    Pr(V <= v), integrating f_V in u = n/v over [n/v, 1].

    In u the heavy v^{-(alpha+2)} tail becomes a bounded integrand, so
    v = +inf (total probability) is evaluated the same way.
    """
    params, v = q.params, q.v
    if v <= params.n:
        return 0.0
    lo = 0.0 if math.isinf(v) else params.n / v
    value = composite_legendre(_u_integrand(params, q.config), lo, 1.0, panels=CDF_PANELS, order=CDF_ORDER)
    return _clip_probability(value, "demmel_cdf")


def demmel_tail(q: DemmelQuery) -> float:
    """Pr(V > v), integrated directly over u in [0, n/v]."""
    params, v = q.params, q.v
    if v <= params.n:
        return 1.0
    if math.isinf(v):
        return 0.0
    value = composite_legendre(_u_integrand(params, q.config), 0.0, params.n / v, panels=CDF_PANELS, order=CDF_ORDER)
    return _clip_probability(value, "demmel_tail")


def fixed_trace_mineig_cdf(params: ModelParams, x: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    C.d.f. of the smallest eigenvalue under tr(W) = 1, which is 1/V.

    Pr(l_min <= x) = Pr(V >= 1/x); the support is (0, 1/n].
    """
    _require_n2(params)
    if not x > 0:
        raise ParameterError(f"fixed_trace_mineig_cdf needs x > 0, got {x}")
    if x >= 1.0 / params.n:
        return 1.0
    return demmel_tail(DemmelQuery(params, 1.0 / x, config))


def fixed_trace_mineig_pdf(params: ModelParams, x: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """Density of l_min under tr(W) = 1: f_V(1/x) / x^2."""
    _require_n2(params)
    if not x > 0:
        raise ParameterError(f"fixed_trace_mineig_pdf needs x > 0, got {x}")
    if x >= 1.0 / params.n:
        return 0.0
    return demmel_pdf(DemmelQuery(params, 1.0 / x, config)) / (x * x)


def demmel_cdf_grid(params: ModelParams, points: Sequence[float], config: EvalConfig = DEFAULT_CONFIG) -> np.ndarray:
    """
    Pr(V <= v) at ascending points, accumulated piece by piece in u = n/v.

    Each piece [n/v_{j+1}, n/v_j] gets at least two Gauss-Legendre panels
    and no fewer per unit of u than demmel_cdf uses, so a dense grid costs
    about as much as one c.d.f. value per point.
    """
    _require_n2(params)
    vs = [float(v) for v in points]
    if any(b < a for a, b in zip(vs, vs[1:])):
        raise ParameterError("demmel_cdf_grid needs ascending points")
    n = params.n
    g = _u_integrand(params, config)
    values = np.zeros(len(vs))
    acc = KahanSum()
    prev_u = 1.0
    for idx, v in enumerate(vs):
        if v <= n:
            continue
        u = 0.0 if math.isinf(v) else n / v
        if u < prev_u:
            panels = max(2, math.ceil(CDF_PANELS * (prev_u - u)))
            acc.add(composite_legendre(g, u, prev_u, panels=panels, order=CDF_ORDER))
            prev_u = u
        values[idx] = _clip_probability(acc.value, "demmel_cdf_grid")
    return values
