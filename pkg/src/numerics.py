"""Supporting numerical machinery.

Dense polynomials with determinant expansion, Gauss-Laguerre and
Gauss-Legendre rules (Golub-Welsch style, cached), Newton divided
differences, and fixed-Talbot numerical Laplace inversion.
"""

import cmath
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from src.errors import CoincidentNodesError, DomainError
from src.linalg import RealSymTridiag, tridiag_eigvals
from src.params_constants import (
    COINCIDENT_NODE_RATIO,
    DEFAULT_TALBOT_ORDER,
    MAX_QUAD_ORDER,
    POLY_DET_MAX_SIZE,
)

logger = logging.getLogger(__name__)

Number = Union[float, complex, np.ndarray]

GAUSS_LAGUERRE = "gauss_laguerre"
GAUSS_LEGENDRE = "gauss_legendre"


@dataclass(frozen=True)
class PolyRat:
    """
    Dense polynomial with real coefficients, lowest degree first.

    The zero polynomial has no coefficients and degree -1.

    Example:
        >>> p = PolyRat((1.0, -1.0))  # 1 - x
        >>> (p * p).coeffs
        (1.0, -2.0, 1.0)
    """

    coeffs: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        c = [float(x) for x in self.coeffs]
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, value: float) -> "PolyRat":
        return cls((value,))

    @classmethod
    def monomial(cls, degree: int, coeff: float = 1.0) -> "PolyRat":
        return cls((0.0,) * degree + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: Number) -> Number:
        if not self.coeffs:
            return 0.0 * x
        return npoly.polyval(x, self.coeffs)

    def __add__(self, other: "PolyRat") -> "PolyRat":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        return PolyRat(tuple(npoly.polyadd(self.coeffs, other.coeffs)))

    def __sub__(self, other: "PolyRat") -> "PolyRat":
        return self + (-other)

    def __neg__(self) -> "PolyRat":
        return PolyRat(tuple(-c for c in self.coeffs))

    def __mul__(self, other: "PolyRat") -> "PolyRat":
        if self.is_zero() or other.is_zero():
            return PolyRat()
        return PolyRat(tuple(npoly.polymul(self.coeffs, other.coeffs)))

    def scale(self, factor: float) -> "PolyRat":
        return PolyRat(tuple(factor * c for c in self.coeffs))

    def reflect(self) -> "PolyRat":
        """p(-x)."""
        return PolyRat(tuple(c if j % 2 == 0 else -c for j, c in enumerate(self.coeffs)))


def poly_det(entries: Sequence[Sequence[PolyRat]]) -> PolyRat:
    """
    Determinant of a square matrix of polynomials by cofactor expansion.

    Minors over each set of used columns are shared (expansion row by row,
    memoized on the column subset), which keeps a 12x12 expansion at
    k * 2^k polynomial products instead of k!.

    Args:
        entries: k x k nested sequence of PolyRat (k = 0 gives 1)

    Returns:
        The determinant polynomial

    Raises:
        DomainError: If the matrix is not square or k > 12
    """
    k = len(entries)
    if k > POLY_DET_MAX_SIZE:
        raise DomainError(f"poly_det supports at most {POLY_DET_MAX_SIZE}x{POLY_DET_MAX_SIZE}, got {k}")
    if any(len(row) != k for row in entries):
        raise DomainError("poly_det needs a square matrix")
    if k == 0:
        return PolyRat.constant(1.0)

    partial: Dict[int, PolyRat] = {0: PolyRat.constant(1.0)}
    for row in range(k):
        nxt: Dict[int, PolyRat] = {}
        for used, acc in partial.items():
            if acc.is_zero():
                continue
            for col in range(k):
                bit = 1 << col
                if used & bit or entries[row][col].is_zero():
                    continue
                # inversions added by placing this row in `col`
                larger = bin(used >> (col + 1)).count("1")
                term = acc * entries[row][col]
                if larger % 2:
                    term = -term
                key = used | bit
                nxt[key] = nxt[key] + term if key in nxt else term
        partial = nxt
    return partial.get((1 << k) - 1, PolyRat())


@dataclass(frozen=True)
class QuadRule:
    """Gauss rule: ascending nodes, positive weights, and its kind."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if nodes.shape != weights.shape:
            raise DomainError("quadrature nodes and weights differ in length")
        if np.any(np.diff(nodes) <= 0) or np.any(weights <= 0):
            raise DomainError("quadrature nodes must ascend and weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Apply the rule to a vectorized integrand (weight function excluded)."""
        return float(np.dot(self.weights, f(self.nodes)))


_rule_cache: Dict[Tuple[str, int], QuadRule] = {}
_rule_lock = threading.Lock()


def _laguerre_ratio_pass(x: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ratios r = L_order / L_{order-1} and log sum_{k<order} L_k^2 at every node.

    Runs the three-term recurrence on ratios and log-magnitudes so that
    nodes far out on the half-line neither overflow nor underflow.
    """
    log_abs = np.zeros_like(x)
    log_sq_sum = np.zeros_like(x)
    ratio = np.ones_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(1, order + 1):
            if k == 1:
                ratio = 1.0 - x
            else:
                ratio = ((2 * k - 1 - x) - (k - 1) / ratio) / k
            if k < order:
                log_abs = log_abs + np.log(np.abs(ratio))
                log_sq_sum = np.logaddexp(log_sq_sum, 2.0 * log_abs)
    return ratio, log_sq_sum


def _build_laguerre(order: int) -> QuadRule:
    k = np.arange(order, dtype=np.float64)
    nodes = tridiag_eigvals(RealSymTridiag(tuple(2 * k + 1), tuple(k[1:])))

    # Newton polish: L_N'(x) = N (L_N - L_{N-1}) / x
    for _ in range(2):
        ratio, _unused = _laguerre_ratio_pass(nodes, order)
        step = nodes * ratio / (order * (ratio - 1.0))
        nodes = nodes - np.where(np.isfinite(step), step, 0.0)

    _ratio, log_sq_sum = _laguerre_ratio_pass(nodes, order)
    log_w = -log_sq_sum
    weights = np.exp(log_w)
    keep = weights > 0
    if not np.all(keep):
        logger.debug("gauss_laguerre(%d): dropped %d underflowed nodes", order, int(np.sum(~keep)))
    return QuadRule(nodes[keep], weights[keep], GAUSS_LAGUERRE)


def _legendre_pass(x: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """P_order, P_{order-1} and sum_{k<order} (2k+1)/2 P_k^2 at every node."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    sq_sum = 0.5 * p * p
    for k in range(1, order + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        if k < order:
            sq_sum = sq_sum + 0.5 * (2 * k + 1) * p * p
    return p, p_prev, sq_sum


def _build_legendre(order: int) -> QuadRule:
    k = np.arange(1, order, dtype=np.float64)
    nodes = tridiag_eigvals(RealSymTridiag(tuple(np.zeros(order)), tuple(k / np.sqrt(4 * k * k - 1))))
    for _ in range(2):
        p, p_prev, _unused = _legendre_pass(nodes, order)
        derivative = order * (nodes * p - p_prev) / (nodes * nodes - 1.0)
        nodes = nodes - p / derivative
    _p, _p_prev, sq_sum = _legendre_pass(nodes, order)
    return QuadRule(nodes, 1.0 / sq_sum, GAUSS_LEGENDRE)


def _cached_rule(kind: str, order: int) -> QuadRule:
    if isinstance(order, bool) or int(order) != order or not 1 <= order <= MAX_QUAD_ORDER:
        raise DomainError(f"quadrature order must be in [1, {MAX_QUAD_ORDER}], got {order!r}")
    key = (kind, int(order))
    rule = _rule_cache.get(key)
    if rule is not None:
        return rule
    with _rule_lock:
        rule = _rule_cache.get(key)
        if rule is None:
            builder = _build_laguerre if kind == GAUSS_LAGUERRE else _build_legendre
            rule = builder(int(order))
            _rule_cache[key] = rule
            logger.debug("built %s rule of order %d", kind, order)
    return rule


def gauss_laguerre(order: int) -> QuadRule:
    """
    Gauss-Laguerre rule for integral_0^inf e^{-x} f(x) dx.

    Nodes are eigenvalues of the Laguerre Jacobi matrix (diagonal 2k+1,
    off-diagonal k), polished by Newton; weights are the Christoffel numbers
    1 / sum_k L_k(x_i)^2, assembled in log form. Nodes whose weight
    underflows are dropped.

    Raises:
        DomainError: If order is outside [1, 512]

    Example:
        >>> rule = gauss_laguerre(5)
        >>> round(rule.integrate(lambda x: x ** 3), 10)
        6.0
    """
    return _cached_rule(GAUSS_LAGUERRE, order)


def gauss_legendre(order: int) -> QuadRule:
    """Gauss-Legendre rule for integral_{-1}^{1} f(x) dx."""
    return _cached_rule(GAUSS_LEGENDRE, order)


def composite_legendre(
    f: Callable[[float], float], a: float, b: float, panels: int = 16, order: int = 20
) -> float:
    """
    Integrate a scalar function over [a, b] with equal Gauss-Legendre panels.

    Args:
        f: Scalar integrand, called once per node
        a, b: Interval ends
        panels: Number of equal panels
        order: Gauss-Legendre order per panel
    """
    if b == a:
        return 0.0
    rule = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for x, w in zip(mid + half * rule.nodes, rule.weights):
            total.append(half * w * f(float(x)))
    return math.fsum(total)


def divided_difference(f: Callable[[float], float], nodes: Sequence[float]) -> float:
    """
    Newton divided difference f[x_1, ..., x_n].

    Args:
        f: Scalar function
        nodes: Pairwise distinct nodes (any order)

    Returns:
        Top entry of the Newton table

    Raises:
        CoincidentNodesError: If two nodes are closer than 1e-10 * max|node|

    Example:
        >>> divided_difference(lambda t: t * t, [0.0, 1.0, 2.0])
        1.0
    """
    x = np.asarray(nodes, dtype=np.float64)
    n = x.size
    if n == 0:
        raise DomainError("divided_difference needs at least one node")
    if n > 1:
        scale = float(np.max(np.abs(x)))
        gaps = np.diff(np.sort(x))
        if scale == 0.0 or float(np.min(gaps)) <= COINCIDENT_NODE_RATIO * scale:
            raise CoincidentNodesError(f"nodes closer than {COINCIDENT_NODE_RATIO:g} x scale: {x.tolist()}")

    table = np.array([f(float(xi)) for xi in x], dtype=np.float64)
    for j in range(1, n):
        table[j:] = (table[j:] - table[j - 1 : n - 1]) / (x[j:] - x[: n - j])
    return float(table[n - 1])


def talbot_invert(
    transform: Callable[[complex], complex],
    t: float,
    order: int = DEFAULT_TALBOT_ORDER,
    shift: float = 0.0,
) -> float:
    """
    Fixed-Talbot inversion of the Laplace transform e^{-shift s} F(s).

    Samples F on the contour s(theta) = r theta (cot theta + i),
    r = 2 order / (5 (t - shift)).

    Args:
        transform: F, analytic right of the contour; called with complex s
        t: Evaluation point
        order: Number of contour nodes
        shift: Delay; the result vanishes for t <= shift

    Returns:
        Approximation of the inverse transform at t

    Example:
        >>> abs(talbot_invert(lambda s: 1 / s ** 2, 3.0) - 3.0) < 1e-8
        True
    """
    tau = t - shift
    if tau <= 0:
        return 0.0
    r = 2.0 * order / (5.0 * tau)
    acc = [0.5 * math.exp(r * tau) * complex(transform(complex(r, 0.0))).real]
    for k in range(1, order):
        theta = k * math.pi / order
        cot = math.cos(theta) / math.sin(theta)
        s = r * theta * complex(cot, 1.0)
        sigma = theta + (theta * cot - 1.0) * cot
        acc.append((cmath.exp(tau * s) * complex(transform(s)) * complex(1.0, sigma)).real)
    return r / order * math.fsum(acc)
