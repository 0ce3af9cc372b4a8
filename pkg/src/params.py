"""Domain types and normalization constants for the rank-1 Wishart model.

Every formula module takes a `ModelParams` describing the problem instance
(n, m, alpha = m - n, mu) and an `EvalConfig` controlling truncation and
quadrature. Combinatorial prefactors are carried as (sign, log-magnitude)
pairs; see `norm_constants`.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Mapping, Sequence, Tuple

from src.errors import ParameterError
from src.params_constants import (
    DEFAULT_ABS_TOL,
    DEFAULT_LAPLACE_TERMS,
    DEFAULT_MAX_TERMS,
    DEFAULT_QUAD_ORDER,
    DEFAULT_REL_TOL,
    ENVELOPE_MAX_MU,
    ENVELOPE_MAX_N_PLUS_ALPHA,
    HARD_MAX_N_PLUS_ALPHA,
    MAX_QUAD_ORDER,
)

logger = logging.getLogger(__name__)


def log_factorial(k: int) -> float:
    """Natural log of k! via log-gamma."""
    if k < 0:
        raise ParameterError(f"factorial of negative integer {k}")
    return math.lgamma(k + 1)


@dataclass(frozen=True)
class ModelParams:
    """
    Problem instance: n x n complex Wishart matrix, m degrees of freedom,
    rank-1 mean with noncentrality mu = tr(M^H M).

    Args:
        n: Matrix dimension (>= 1)
        m: Degrees of freedom (>= n)
        mu: Noncentrality (>= 0; 0 is the central case)
        allow_outside_envelope: Acknowledge parameters beyond the
            double-precision validity envelope (n + alpha <= 64, mu <= 50)

    Example:
        >>> p = ModelParams(n=2, m=4, mu=1.5)
        >>> p.alpha
        2
    """

    n: int
    m: int
    mu: float = 0.0
    allow_outside_envelope: bool = False
    alpha: int = field(init=False)

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise ParameterError(f"m must be an integer, got {self.m!r}")
        if self.m < self.n:
            raise ParameterError(f"m must be >= n, got m={self.m}, n={self.n}")
        mu = float(self.mu)
        if not math.isfinite(mu) or mu < 0:
            raise ParameterError(f"mu must be a finite nonnegative real, got {self.mu!r}")

        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha", self.m - self.n)

        if not self.allow_outside_envelope:
            if self.n + self.alpha > ENVELOPE_MAX_N_PLUS_ALPHA:
                raise ParameterError(
                    f"n + alpha = {self.n + self.alpha} exceeds the double-precision envelope "
                    f"({ENVELOPE_MAX_N_PLUS_ALPHA}); pass allow_outside_envelope=True to override"
                )
            if mu > ENVELOPE_MAX_MU:
                raise ParameterError(
                    f"mu = {mu} exceeds the double-precision envelope ({ENVELOPE_MAX_MU}); "
                    "pass allow_outside_envelope=True to override"
                )

    def with_mu(self, mu: float) -> "ModelParams":
        """Copy with a different noncentrality."""
        return ModelParams(self.n, self.m, mu, self.allow_outside_envelope)

    def describe(self) -> Dict[str, Any]:
        """Parameter set as a plain mapping (used for output metadata)."""
        return {"n": self.n, "m": self.m, "alpha": self.alpha, "mu": self.mu}


@dataclass(frozen=True)
class EvalConfig:
    """Tolerances, truncation caps and quadrature orders for all evaluations."""

    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    quad_order: int = DEFAULT_QUAD_ORDER
    laplace_terms: int = DEFAULT_LAPLACE_TERMS

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ParameterError(f"{f.name} must be positive, got {value!r}")
        if self.rel_tol >= 1:
            raise ParameterError(f"rel_tol must be < 1, got {self.rel_tol}")
        if self.quad_order > MAX_QUAD_ORDER:
            raise ParameterError(f"quad_order must be <= {MAX_QUAD_ORDER}, got {self.quad_order}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "EvalConfig":
        """Build from string or numeric overrides; unknown keys are ignored."""
        kwargs: Dict[str, Any] = {}
        for f in fields(cls):
            if f.name in values:
                kwargs[f.name] = int(values[f.name]) if f.type in (int, "int") else float(values[f.name])
        return cls(**kwargs)

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def config_hash(self) -> str:
        """First 12 hex digits of SHA-256 over the sorted key=value form."""
        text = "\n".join(f"{k}={v!r}" for k, v in sorted(self.as_dict().items()))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class Curve:
    """A sampled function: strictly increasing grid, matching values, metadata."""

    grid: Tuple[float, ...]
    values: Tuple[float, ...]
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = tuple(float(x) for x in self.grid)
        values = tuple(float(y) for y in self.values)
        if len(grid) != len(values):
            raise ParameterError(f"grid has {len(grid)} points but values has {len(values)}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("curve grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "meta", {str(k): str(v) for k, v in self.meta.items()})

    def __len__(self) -> int:
        return len(self.grid)


@dataclass(frozen=True)
class NormConstants:
    """
    Normalization constants in log form.

    Attributes:
        log_k_mn: log K_{m,n} = -sum_i log[Gamma(m-i+1) Gamma(n-i+1)]
        log_k_n_alpha: log of K_{n+alpha,n} (n-1)! (n+alpha-1)! / alpha!
        log_k_bar_abs: log |K-bar_{n,alpha}| (minimum-eigenvalue closed form)
        sign_k_bar: sign of K-bar_{n,alpha}, (-1)^{n + alpha(n+alpha)}
        log_k_tilde: log K-tilde_{n,alpha} (Demmel closed form, positive)
    """

    log_k_mn: float
    log_k_n_alpha: float
    log_k_bar_abs: float
    sign_k_bar: int
    log_k_tilde: float


def _sum_log_factorials(ks: Sequence[int]) -> float:
    return math.fsum(log_factorial(k) for k in ks)


def norm_constants(params: ModelParams, max_n_plus_alpha: int = HARD_MAX_N_PLUS_ALPHA) -> NormConstants:
    """
    Compute the four normalization constants shared by the formula modules.

    All products of factorials are accumulated as sums of log-gamma values,
    so nothing overflows for any admissible n + alpha.

    Args:
        params: Model parameters
        max_n_plus_alpha: Hard limit on n + alpha

    Returns:
        NormConstants record

    Raises:
        ParameterError: If n + alpha exceeds max_n_plus_alpha

    Example:
        >>> nc = norm_constants(ModelParams(n=2, m=2))
        >>> nc.log_k_mn
        0.0
    """
    n, alpha, m = params.n, params.alpha, params.m
    if n + alpha > max_n_plus_alpha:
        raise ParameterError(f"n + alpha = {n + alpha} exceeds the supported maximum {max_n_plus_alpha}")

    log_k_mn = -math.fsum(math.lgamma(m - i + 1) + math.lgamma(n - i + 1) for i in range(1, n + 1))
    log_k_n_alpha = log_k_mn + log_factorial(n - 1) + log_factorial(n + alpha - 1) - log_factorial(alpha)

    log_k_bar = (
        _sum_log_factorials([n + i - 1 for i in range(1, alpha + 2)])
        + _sum_log_factorials([i for i in range(n)])
        + _sum_log_factorials([i + 1 for i in range(n)])
        - _sum_log_factorials([i for i in range(1, alpha)])
    )
    sign_k_bar = -1 if (n + alpha * (n + alpha)) % 2 else 1

    log_k_tilde = (
        _sum_log_factorials([n + j - 1 for j in range(1, alpha + 2)])
        + _sum_log_factorials([j + 1 for j in range(n)])
        + _sum_log_factorials([j + 2 for j in range(n)])
        - _sum_log_factorials([j for j in range(alpha)])
    )

    logger.debug("norm constants for %s: log_k_mn=%.6g log_k_n_alpha=%.6g", params.describe(), log_k_mn, log_k_n_alpha)
    return NormConstants(
        log_k_mn=log_k_mn,
        log_k_n_alpha=log_k_n_alpha,
        log_k_bar_abs=log_k_bar,
        sign_k_bar=sign_k_bar,
        log_k_tilde=log_k_tilde,
    )
