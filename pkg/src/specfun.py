"""Scalar special functions with controlled truncation.

Pochhammer symbols, generalized Laguerre polynomials and the confluent
hypergeometric family (0F1, 1F1, pFq, Humbert Phi3, Tricomi Psi). Every
series is summed with compensated summation and reports how it stopped
through a `SeriesResult`; callers that need a hard failure use
`ensure_converged`.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from src.errors import ConvergenceError, DomainError
from src.numerics import PolyRat, gauss_laguerre
from src.params import DEFAULT_CONFIG, EvalConfig, log_factorial

logger = logging.getLogger(__name__)

Number = Union[float, complex, np.ndarray]

# Trapezoid step for the small-argument Tricomi branch (in log t).
_PSI_TRAPEZOID_STEP = 1.0 / 16.0


class KahanSum:
    """
    Neumaier-compensated running sum.

    Example:
        >>> acc = KahanSum()
        >>> for x in (1.0, 1e100, 1.0, -1e100):
        ...     acc.add(x)
        >>> acc.value
        2.0
    """

    def __init__(self, start: float = 0.0) -> None:
        self._sum = float(start)
        self._comp = 0.0

    def add(self, x: float) -> None:
        t = self._sum + x
        if abs(self._sum) >= abs(x):
            self._comp += (self._sum - t) + x
        else:
            self._comp += (x - t) + self._sum
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._comp


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of a truncated series: value, terms used, convergence flag, error estimate."""

    value: float
    terms_used: int
    converged: bool
    est_rel_err: float


def ensure_converged(result: SeriesResult, what: str) -> float:
    """Return result.value or raise ConvergenceError naming the series."""
    if not result.converged:
        raise ConvergenceError(
            f"{what}: series did not converge after {result.terms_used} terms "
            f"(estimated relative error {result.est_rel_err:.3g})"
        )
    return result.value


def _is_nonpositive_integer(c: float) -> bool:
    return c <= 0 and float(c).is_integer()


def pochhammer(a: float, k: int) -> float:
    """
    Rising factorial (a)_k = a (a+1) ... (a+k-1).

    For a = -M with M a nonnegative integer the product is exactly 0 once
    k > M, and (-1)^k M!/(M-k)! otherwise.

    Example:
        >>> pochhammer(3, 4)
        360.0
        >>> pochhammer(-3, 5)
        0.0
    """
    if k < 0:
        raise DomainError(f"pochhammer needs k >= 0, got {k}")
    if _is_nonpositive_integer(a) and k > -a:
        return 0.0
    result = 1.0
    for j in range(k):
        result *= a + j
    return result


def log_abs_pochhammer(a: float, k: int) -> float:
    """log|(a)_k|; DomainError when the product vanishes."""
    if k < 0:
        raise DomainError(f"pochhammer needs k >= 0, got {k}")
    if a > 0:
        return math.lgamma(a + k) - math.lgamma(a)
    if _is_nonpositive_integer(a) and k > -a:
        raise DomainError(f"({a})_{k} is zero")
    return math.fsum(math.log(abs(a + j)) for j in range(k))


def laguerre(degree: int, rho: float, x: Number) -> Number:
    """
    Generalized Laguerre polynomial L_M^{(rho)}(x) by the three-term recurrence.

    k L_k = (2k - 1 + rho - x) L_{k-1} - (k - 1 + rho) L_{k-2}

    Works elementwise on numpy arrays and on complex arguments. A negative
    degree returns 0, which is the convention the determinant layouts rely
    on.

    Example:
        >>> laguerre(2, 0, 1.0)
        -0.5
    """
    if degree < 0:
        return 0.0 * x
    prev = 1.0 + 0.0 * x
    if degree == 0:
        return prev
    cur = 1.0 + rho - x
    for k in range(2, degree + 1):
        prev, cur = cur, ((2 * k - 1 + rho - x) * cur - (k - 1 + rho) * prev) / k
    return cur


def laguerre_coeffs(degree: int, rho: float) -> PolyRat:
    """
    Monomial coefficients of L_M^{(rho)}.

    coefficient of x^j = (rho+1)_M / M! * (-M)_j / ((rho+1)_j j!)

    Example:
        >>> laguerre_coeffs(2, 0).coeffs
        (1.0, -2.0, 0.5)
    """
    if degree < 0:
        return PolyRat()
    lead = pochhammer(rho + 1.0, degree) / math.factorial(degree)
    coeffs = [lead]
    for j in range(degree):
        coeffs.append(coeffs[-1] * (-(degree - j)) / ((rho + 1.0 + j) * (j + 1)))
    return PolyRat(tuple(coeffs))


def _hypergeometric_series(
    a: Sequence[float], c: Sequence[float], z: float, config: EvalConfig, start_term: float = 1.0, start_k: int = 0
) -> SeriesResult:
    """
    Sum_{k >= start_k} of a pFq-type series given its term at start_k.

    Stops when the newest term is below rel_tol (or abs_tol) of the partial
    sum and the term ratio has dropped below one, so growing terms never
    trigger an early stop.
    """
    for ci in c:
        if _is_nonpositive_integer(ci):
            raise DomainError(f"lower parameter {ci} is a nonpositive integer")

    acc = KahanSum(start_term)
    term = start_term
    k = start_k
    terms_used = 1
    while terms_used < config.max_terms:
        num = z
        for ai in a:
            num *= ai + k
        den = float(k + 1)
        for ci in c:
            den *= ci + k
        ratio = num / den
        term *= ratio
        k += 1
        terms_used += 1
        if term == 0.0:
            return SeriesResult(acc.value, terms_used, True, 0.0)
        acc.add(term)
        total = abs(acc.value)
        small = abs(term) <= config.rel_tol * total or abs(term) <= config.abs_tol
        if small:
            nxt = z / (k + 1)
            for ai in a:
                nxt *= ai + k
            for ci in c:
                nxt /= ci + k
            if abs(nxt) < 1.0:
                err = abs(term) / total if total > 0 else 0.0
                return SeriesResult(acc.value, terms_used, True, err)

    total = abs(acc.value)
    err = abs(term) / total if total > 0 else math.inf
    logger.warning("hypergeometric series hit max_terms=%d (z=%g)", config.max_terms, z)
    return SeriesResult(acc.value, terms_used, False, err)


def hyp0f1(c: float, z: float, config: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """
    0F1(; c; z) = sum_k z^k / ((c)_k k!).

    Example:
        >>> round(hyp0f1(1, 1).value, 9)
        2.279585302
    """
    return _hypergeometric_series([], [c], z, config)


def hyp0f1_tail(
    c: float, z: float, start: int, config: EvalConfig = DEFAULT_CONFIG, log_scale: float = 0.0
) -> SeriesResult:
    """
    Tail sum_{k >= start} z^k / ((c)_k k!) of the 0F1 series, times e^{-log_scale}.

    Summed directly from its first term, never as 0F1 minus a partial sum.
    `log_scale` lets callers divide out a power of a small factor of z
    before it underflows.
    """
    if start == 0 and log_scale == 0.0:
        return hyp0f1(c, z, config)
    if z == 0.0:
        value = math.exp(-log_scale) if start == 0 else 0.0
        return SeriesResult(value, 1, True, 0.0)
    log_first = start * math.log(abs(z)) - log_factorial(start) - log_scale
    sign = -1.0 if (z < 0 and start % 2) else 1.0
    poch = pochhammer(c, start)
    if poch == 0.0:
        raise DomainError(f"0F1 lower parameter {c} is a nonpositive integer")
    first = sign * math.exp(log_first) / poch
    return _hypergeometric_series([], [c], z, config, start_term=first, start_k=start)


def hyp1f1(a: float, c: float, z: float, config: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """
    Kummer's function 1F1(a; c; z).

    Direct series for z >= 0; for z < 0 the Kummer relation
    1F1(a; c; z) = e^z 1F1(c - a; c; -z) replaces the alternating series
    by a positive one.

    Example:
        >>> round(hyp1f1(1, 2, 1.0).value, 9)
        1.718281828
    """
    if z < 0:
        inner = _hypergeometric_series([c - a], [c], -z, config)
        scale = math.exp(z)
        return SeriesResult(scale * inner.value, inner.terms_used, inner.converged, inner.est_rel_err)
    return _hypergeometric_series([a], [c], z, config)


def hyp_pfq(a: Sequence[float], c: Sequence[float], z: float, config: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """Generalized hypergeometric pFq with p = q."""
    if len(a) != len(c):
        raise DomainError(f"hyp_pfq supports p = q only, got p={len(a)}, q={len(c)}")
    return _hypergeometric_series(list(a), list(c), z, config)


def _log_signed(x: float) -> tuple:
    if x == 0:
        return -math.inf, 0.0
    return math.log(abs(x)), math.copysign(1.0, x)


def humbert_phi3(a: float, c: float, x: float, y: float, config: EvalConfig = DEFAULT_CONFIG) -> SeriesResult:
    """
    Humbert's confluent function Phi3(a, c; x, y) = sum_{i,j} (a)_i x^i y^j / ((c)_{i+j} i! j!).

    The double series is summed shell by shell in the total degree t = i + j.
    Within a shell the terms (a)_i x^i/i! * y^{t-i}/(t-i)! / (c)_t are built
    from log-magnitude arrays, so neither factor overflows on its own.

    Example:
        >>> humbert_phi3(2.0, 3.0, 0.0, 0.0).value
        1.0
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"lower parameter {c} is a nonpositive integer")

    log_x, sign_x = _log_signed(x)
    log_y, sign_y = _log_signed(y)
    log_u: List[float] = [0.0]
    sign_u: List[float] = [1.0]
    log_v: List[float] = [0.0]
    sign_v: List[float] = [1.0]
    log_c, sign_c = 0.0, 1.0

    acc = KahanSum(1.0)
    prev_shell = math.inf
    shell = 1.0
    for t in range(1, config.max_terms):
        la, sa = _log_signed(a + t - 1)
        log_u.append(log_u[-1] + la + log_x - math.log(t))
        sign_u.append(sign_u[-1] * sa * sign_x)
        log_v.append(log_v[-1] + log_y - math.log(t))
        sign_v.append(sign_v[-1] * sign_y)
        lc, sc = _log_signed(c + t - 1)
        log_c += lc
        sign_c *= sc

        lu = np.array(log_u)
        lv = np.array(log_v[::-1])
        signs = np.array(sign_u) * np.array(sign_v[::-1]) * sign_c
        with np.errstate(invalid="ignore"):
            terms = signs * np.exp(lu + lv - log_c)
        shell = math.fsum(np.nan_to_num(terms, nan=0.0).tolist())
        acc.add(shell)

        total = abs(acc.value)
        if (abs(shell) <= config.rel_tol * total or abs(shell) <= config.abs_tol) and abs(shell) <= abs(prev_shell):
            err = abs(shell) / total if total > 0 else 0.0
            return SeriesResult(acc.value, t + 1, True, err)
        prev_shell = shell

    total = abs(acc.value)
    logger.warning("humbert_phi3 hit max_terms=%d (x=%g, y=%g)", config.max_terms, x, y)
    return SeriesResult(acc.value, config.max_terms, False, abs(shell) / total if total > 0 else math.inf)


def tricomi_psi(a: float, c: float, z: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """
    Tricomi's confluent function Psi(a; c; z) on the positive real axis.

    Psi(a; c; z) = 1/Gamma(a) integral_0^inf e^{-zt} t^{a-1} (1+t)^{c-a-1} dt

    For z >= 1 and a >= 1 the substitution u = z t gives a Gauss-Laguerre
    integral of u^{a-1} (1 + u/z)^{c-a-1} (order config.quad_order). Otherwise
    the integral is taken by the trapezoid rule in log t, which converges
    geometrically for this integrand. Gauss-Laguerre loses accuracy both when
    the mass drifts to large t (z < 1) and when u^{a-1} is singular at the
    origin (a < 1).

    Raises:
        DomainError: If a <= 0 or z <= 0

    Example:
        >>> round(tricomi_psi(1.0, 1.0, 1.0), 9)
        0.596347362
    """
    if not a > 0:
        raise DomainError(f"tricomi_psi needs a > 0, got {a}")
    if not z > 0:
        raise DomainError(f"tricomi_psi needs z > 0, got {z}")

    b = c - a - 1.0
    if z >= 1.0 and a >= 1.0:
        rule = gauss_laguerre(config.quad_order)
        u = rule.nodes
        log_g = (a - 1.0) * np.log(u) + b * np.log1p(u / z)
        log_integral = float(np.logaddexp.reduce(np.log(rule.weights) + log_g))
        return math.exp(log_integral - math.lgamma(a) - a * math.log(z))

    s_hi = math.log((abs(a) + abs(b) + 60.0) / z)
    s_lo = min(-5.0, s_hi) - 45.0 / a
    points = int(math.ceil((s_hi - s_lo) / _PSI_TRAPEZOID_STEP)) + 1
    s = np.linspace(s_lo, s_hi, points)
    h = s[1] - s[0]
    log_f = a * s - z * np.exp(s) + b * np.logaddexp(0.0, s)
    log_integral = float(np.logaddexp.reduce(log_f)) + math.log(h)
    return math.exp(log_integral - math.lgamma(a))


def laguerre_weighted_integral(j: int, k: int, degree: int) -> float:
    """
    Closed form of integral_0^inf x^j e^{-x} L_M^{(k)}(x) dx = (j!/M!) (k - j)_M.

    Example:
        >>> laguerre_weighted_integral(2, 3, 1)
        2.0
    """
    if j < 0 or k < 0 or degree < 0:
        raise DomainError("laguerre_weighted_integral needs nonnegative j, k, M")
    return math.factorial(j) / math.factorial(degree) * pochhammer(k - j, degree)
