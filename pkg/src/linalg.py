"""Small dense linear algebra: LU log-determinants and symmetric eigensolvers.

Implements:
1. Partial-pivot LU determinant in (sign, log|det|) form
2. Cyclic complex Jacobi rotations for Hermitian eigenvalues, applied to a
   whole stack of matrices at once (Monte Carlo draws)
3. Implicit-shift QL for real symmetric tridiagonal matrices (Gauss rules)
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.errors import ConvergenceError, DomainError
from src.params_constants import JACOBI_MAX_SWEEPS, JACOBI_TOL, MAX_HERMITIAN_SIZE

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as sign (+1, -1 or 0) and natural log of |value|."""

    sign: int
    log_abs: float

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0, -math.inf)
        return SignedLog(self.sign * other.sign, self.log_abs + other.log_abs)

    @classmethod
    def from_value(cls, x: float) -> "SignedLog":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))


@dataclass(frozen=True)
class ComplexMatrix:
    """Dense complex matrix, row-major."""

    rows: int
    cols: int
    data: Tuple[complex, ...]

    def __post_init__(self) -> None:
        data = tuple(complex(z) for z in self.data)
        if len(data) != self.rows * self.cols:
            raise DomainError(f"expected {self.rows * self.cols} entries, got {len(data)}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ComplexMatrix":
        a = np.asarray(array, dtype=np.complex128)
        if a.ndim != 2:
            raise DomainError("ComplexMatrix needs a 2-D array")
        return cls(a.shape[0], a.shape[1], tuple(a.ravel()))

    def to_array(self) -> np.ndarray:
        return np.array(self.data, dtype=np.complex128).reshape(self.rows, self.cols)

    def gram(self) -> "ComplexMatrix":
        """X^H X."""
        x = self.to_array()
        return ComplexMatrix.from_array(x.conj().T @ x)


@dataclass(frozen=True)
class RealSymTridiag:
    """Real symmetric tridiagonal matrix by its diagonal and off-diagonal."""

    diag: Tuple[float, ...]
    offdiag: Tuple[float, ...]

    def __post_init__(self) -> None:
        diag = tuple(float(x) for x in self.diag)
        offdiag = tuple(float(x) for x in self.offdiag)
        if len(diag) == 0 or len(offdiag) != len(diag) - 1:
            raise DomainError(f"inconsistent tridiagonal sizes: {len(diag)} diagonal, {len(offdiag)} off-diagonal")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)


def lu_det(matrix: ArrayLike) -> SignedLog:
    """
    Determinant by partial-pivot LU, in log form.

    Args:
        matrix: Square real matrix with finite entries (0x0 allowed: det = 1)

    Returns:
        SignedLog; a singular matrix gives sign 0 and log_abs = -inf

    Example:
        >>> lu_det([[2.0, 0.0], [0.0, 3.0]]).log_abs == math.log(6)
        True
    """
    a = np.array(matrix, dtype=np.float64)
    if a.size == 0:
        return SignedLog(1, 0.0)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"lu_det needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("lu_det: non-finite matrix entry")

    n = a.shape[0]
    sign = 1
    log_abs = 0.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return SignedLog(0, -math.inf)
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            sign = -sign
        pivot = a[k, k]
        if pivot < 0:
            sign = -sign
        log_abs += math.log(abs(pivot))
        a[k + 1 :, k] /= pivot
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return SignedLog(sign, log_abs)


def _rotate_pair(a: np.ndarray, p: int, q: int) -> None:
    """One complex Jacobi rotation zeroing a[:, p, q] in every matrix of the stack."""
    b = a[:, p, q]
    mag = np.abs(b)
    active = mag > 0
    phase = np.where(active, b / np.where(active, mag, 1.0), 1.0)

    # unitary diagonal similarity making a[:, p, q] real and nonnegative
    a[:, :, q] *= np.conj(phase)[:, None]
    a[:, q, :] *= phase[:, None]

    app = a[:, p, p].real
    aqq = a[:, q, q].real
    theta = np.where(active, 0.5 * np.arctan2(2.0 * mag, aqq - app), 0.0)
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]

    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = c * col_p - s * col_q
    a[:, :, q] = s * col_p + c * col_q

    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = c * row_p - s * row_q
    a[:, q, :] = s * row_p + c * row_q

    a[:, p, q] = 0.0
    a[:, q, p] = 0.0


def hermitian_eigvals_batch(
    stack: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> np.ndarray:
    """
    Eigenvalues of a stack of Hermitian matrices by cyclic complex Jacobi.

    Each (p, q) rotation is applied to every matrix in the stack with its own
    angle, so the cost of one sweep is a handful of array operations.

    Args:
        stack: Array of shape (batch, n, n); symmetrized as (W + W^H)/2 first
        tol: Stop when off-diagonal Frobenius mass < tol * ||W||_F for all
        max_sweeps: Sweep cap

    Returns:
        Array of shape (batch, n), each row ascending

    Raises:
        ConvergenceError: If any matrix is not diagonalized within max_sweeps
    """
    a = np.array(stack, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DomainError(f"expected a (batch, n, n) stack, got shape {a.shape}")
    n = a.shape[1]
    if n > MAX_HERMITIAN_SIZE:
        raise DomainError(f"matrix size {n} exceeds {MAX_HERMITIAN_SIZE}")

    a = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
    if n == 1:
        return a[:, 0, 0].real.reshape(-1, 1).copy()

    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    threshold = tol * np.where(norm > 0, norm, 1.0)
    iu, ju = np.triu_indices(n, 1)

    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(a[:, iu, ju]) ** 2, axis=1))
        if np.all(off <= threshold):
            logger.debug("jacobi converged after %d sweeps (batch=%d, n=%d)", sweep, a.shape[0], n)
            return np.sort(np.real(np.diagonal(a, axis1=1, axis2=2)), axis=1)
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate_pair(a, p, q)

    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def hermitian_eigvals(w: ComplexMatrix, tol: float = JACOBI_TOL) -> Tuple[float, ...]:
    """
    Eigenvalues of one Hermitian matrix, ascending.

    Example:
        >>> hermitian_eigvals(ComplexMatrix(2, 2, (3, 0, 0, 1)))
        (1.0, 3.0)
    """
    if w.rows != w.cols:
        raise DomainError(f"hermitian_eigvals needs a square matrix, got {w.rows}x{w.cols}")
    values = hermitian_eigvals_batch(w.to_array()[None, :, :], tol=tol)[0]
    return tuple(float(v) for v in values)


def tridiag_eigvals(t: RealSymTridiag, max_iter: int = 60) -> np.ndarray:
    """
    Eigenvalues of a real symmetric tridiagonal matrix by implicit-shift QL.

    Args:
        t: The matrix
        max_iter: Iteration cap per eigenvalue

    Returns:
        Ascending array of eigenvalues

    Raises:
        ConvergenceError: If an eigenvalue needs more than max_iter iterations
    """
    d = list(t.diag)
    n = len(d)
    e = list(t.offdiag) + [0.0]

    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if iterations == max_iter:
                raise ConvergenceError(f"tridiagonal QL: no convergence for eigenvalue {l}")
            iterations += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # recover from underflow
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    return np.sort(np.array(d))


def balanced_det(rows: ArrayLike) -> SignedLog:
    """
    Determinant with each row scaled to unit max-norm before LU.

    Rows of the special-function determinants differ by many orders of
    magnitude; the scale factors are folded back in log form.
    """
    scaled = []
    log_scale = 0.0
    for row in rows:
        peak = max(abs(float(x)) for x in row)
        if peak == 0.0:
            return SignedLog(0, -math.inf)
        scaled.append([float(x) / peak for x in row])
        log_scale += math.log(peak)
    det = lu_det(scaled)
    if det.sign == 0:
        return det
    return SignedLog(det.sign, det.log_abs + log_scale)
