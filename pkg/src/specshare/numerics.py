"""Special functions and Hermitian linear-algebra primitives.

Everything here is a pure function on immutable inputs; no global state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotPSDError, SingularMatrixError, ValidationError

HERMITIAN_ATOL = 1e-12
PSD_EIG_TOL = 1e-10

_SERIES_MAX_TERMS = 200
_CF_MAX_ITER = 500


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Parameters
    ----------
    x : float
        Strictly positive argument.

    Returns
    -------
    float
        E1(x) with relative error <= 1e-12. Underflows to 0.0 for
        x beyond ~746 where the true value is below the float64 range.

    Uses the alternating power series for x <= 1 and a continued
    fraction (modified Lentz) for x > 1; both converge to machine
    precision on their half of the domain.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x!r}")
    if x <= 1.0:
        return _e1_series(x)
    return float(np.exp(-x) * _e1_cf_scaled(x))


def exp_scaled_e1(x: float) -> float:
    """Scaled exponential integral exp(x) * E1(x), stable for large x.

    The plain product overflows past x ~ 709; this form stays finite and
    tends to 1/x as x grows, which is what the rate formulas consume.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"exp_scaled_e1 requires x > 0, got {x!r}")
    if x <= 1.0:
        return float(np.exp(x) * _e1_series(x))
    return _e1_cf_scaled(x)


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    total = -np.euler_gamma - np.log(x)
    term = 1.0
    for k in range(1, _SERIES_MAX_TERMS):
        term *= -x / k
        total -= term / k
        if abs(term / k) < 1e-17 * max(abs(total), 1e-300):
            break
    return float(total)


def _e1_cf_scaled(x: float) -> float:
    # exp(x) E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...)))), Lentz iteration
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for k in range(1, _CF_MAX_ITER):
        a = -float(k * k)
        b = x + 2.0 * k + 1.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return float(f)


def validate_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return `m` as a square complex128 array, checking conjugate symmetry."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.conj().T, rtol=0.0, atol=atol):
        gap = np.max(np.abs(a - a.conj().T))
        raise ValidationError(f"matrix is not Hermitian (max asymmetry {gap:.3e})")
    return a


@dataclass(frozen=True)
class EigenSystem:
    """Hermitian eigendecomposition: ascending eigenvalues, unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(m) -> EigenSystem:
    """Hermitian eigendecomposition with deterministic eigenvector phases.

    Eigenvalues ascend; each eigenvector is rotated so its
    largest-magnitude entry is real positive, making golden tests stable.
    """
    a = validate_hermitian(m)
    vals, vecs = np.linalg.eigh(a)
    vecs = _canonical_phases(vecs)
    return EigenSystem(eigenvalues=vals, eigenvectors=vecs)


def _canonical_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        pivot = col[np.argmax(np.abs(col))]
        if pivot != 0.0:
            out[:, k] = col * (pivot.conjugate() / abs(pivot))
    return out


def psd_sqrt(m, eig_tol: float = PSD_EIG_TOL) -> np.ndarray:
    """Hermitian PSD square root S with S @ S == m.

    Eigenvalues in [-eig_tol, 0) are treated as rounding noise and
    clamped to zero; anything more negative raises NotPSDError.
    """
    es = eigh(m)
    vals = es.eigenvalues
    if vals[0] < -eig_tol:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {vals[0]:.3e})")
    clamped = np.clip(vals, 0.0, None)
    root = (es.eigenvectors * np.sqrt(clamped)) @ es.eigenvectors.conj().T
    return 0.5 * (root + root.conj().T)


def psd_inv_sqrt(m, ridge: float = 0.0) -> np.ndarray:
    """Inverse Hermitian square root computed on ridge-shifted eigenvalues.

    `ridge` is added to every eigenvalue before inversion; callers dealing
    with near-singular covariances pick ridge = 1e-9 * trace / n. A zero
    matrix with ridge 0 has no inverse square root.
    """
    if ridge < 0.0:
        raise ValidationError(f"ridge must be nonnegative, got {ridge!r}")
    es = eigh(m)
    vals = es.eigenvalues
    if vals[0] < -PSD_EIG_TOL:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {vals[0]:.3e})")
    shifted = np.clip(vals, 0.0, None) + ridge
    if np.min(shifted) <= 0.0:
        raise SingularMatrixError("matrix is singular and ridge is zero")
    inv_root = (es.eigenvectors / np.sqrt(shifted)) @ es.eigenvectors.conj().T
    return 0.5 * (inv_root + inv_root.conj().T)
