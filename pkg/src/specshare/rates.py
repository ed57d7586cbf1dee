"""Closed-form ergodic-rate building blocks and the Jensen lower bound.

Three expectations cover every strategy:

* ``ergodic_rate_full_gain`` -- E[log2(1 + gbar * ||h||^2)] for correlated
  Rayleigh h, via the eigenvalues of its covariance (matched-filter gain).
* ``ergodic_rate_fixed_beam`` -- E[log2(1 + gbar * |h^H w|^2)] for a
  deterministic unit beam w.
* ``expected_quadratic_ratio`` -- E[x^H B x / x^H A x] for standard complex
  Gaussian x; used for the average leakage of a matched-filter interferer.

``rate_lower_bound`` assembles them into the per-receiver bound obtained by
replacing the instantaneous interference power with its mean (Jensen on the
convex map log2(1 + 1/x)), which is exact when the interferer is silent.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, EigenvalueSpacingError, ValidationError
from .numerics import eigh, exp_scaled_e1, psd_sqrt, validate_hermitian

LN2 = float(np.log(2.0))

# Below this, gbar*lambda contributes nothing representable to the rate:
# x * exp(1/x) * E1(1/x) -> x as x -> 0+.
TINY_GAIN = 1e-12

# Relative gap under which two eigenvalues are considered coincident.
DISTINCT_RTOL = 1e-9

UNIT_NORM_ATOL = 1e-10


class BeamformerKind(str, Enum):
    MF = "MF"
    SZF = "SZF"


@dataclass(frozen=True)
class RateBound:
    """A nonnegative rate in bits/s/Hz for one receiver.

    is_lower_bound is set when the interference term was averaged, i.e.
    the value underestimates the true ergodic rate.
    """

    value: float
    receiver: int
    is_lower_bound: bool

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0.0:
            raise ValidationError(f"rate must be finite and nonnegative, got {self.value!r}")
        if self.receiver not in (1, 2):
            raise ValidationError(f"receiver must be 1 or 2, got {self.receiver!r}")


def check_distinct(eigenvalues: np.ndarray, rtol: float = DISTINCT_RTOL) -> None:
    """Raise EigenvalueSpacingError if any pair is closer than `rtol` relatively."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    for a, b in zip(lam[:-1], lam[1:]):
        if abs(b - a) < rtol * max(abs(a), abs(b)):
            raise EigenvalueSpacingError(
                f"eigenvalues {a!r} and {b!r} coincide within relative tolerance {rtol}"
            )


def spread_eigenvalues(eigenvalues: np.ndarray) -> np.ndarray:
    """Deterministic jitter for coincident eigenvalues (documented opt-in).

    Adds k * 1e-7 * mean(eigenvalues) to the k-th sorted eigenvalue, which
    separates exact repeats (e.g. rho = 0 covariances) while perturbing the
    rate by O(1e-7).
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    return lam + np.arange(lam.size) * (1e-7 * float(lam.mean()))


def _prep_eigenvalues(eigenvalues, jitter: bool) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValidationError("eigenvalues must be a nonempty 1-D vector")
    if np.any(lam <= 0.0):
        raise DomainError(f"eigenvalues must be strictly positive, got {lam!r}")
    if jitter:
        lam = spread_eigenvalues(lam)
    check_distinct(lam)
    return lam


# Trigger the high-precision fallback when the gap-product cancellation
# leaves fewer than ~5 trustworthy digits in the float64 sum.
_CANCEL_GUARD = 1e-11
_MP_DPS = 80


def ergodic_rate_full_gain(gamma_bar: float, eigenvalues, jitter: bool = False) -> float:
    """E[log2(1 + gamma_bar * ||h||^2)], h ~ CN(0, R), eig(R) = `eigenvalues`.

    Requires strictly positive, pairwise-distinct eigenvalues; the closed
    form is singular at coincident eigenvalues, so by default the call
    raises instead of jittering (pass jitter=True to opt in to a
    deterministic 1e-7-scale spreading).

    The alternating gap products are evaluated in log magnitude with sign
    tracking; at four antennas the direct products already cancel badly,
    and tightly clustered eigenvalues (e.g. the jitter path) are detected
    by a term-magnitude condition estimate and re-evaluated in extended
    precision.
    """
    if not gamma_bar > 0.0:
        raise DomainError(f"gamma_bar must be positive, got {gamma_bar!r}")
    lam = _prep_eigenvalues(eigenvalues, jitter)
    n = lam.size
    log_prod_lam = float(np.sum(np.log(lam)))
    log_gbar = float(np.log(gamma_bar))

    total = 0.0
    max_term = 0.0
    for j in range(n):
        gl = gamma_bar * lam[j]
        if gl < TINY_GAIN:
            continue  # the scaled E1 factor vanishes like gl
        log_mag = np.log(gl) + np.log(exp_scaled_e1(1.0 / gl))
        sign = 1.0
        for m in range(n):
            if m == j:
                continue
            diff = 1.0 / lam[m] - 1.0 / lam[j]
            sign *= 1.0 if diff > 0.0 else -1.0
            log_mag -= np.log(abs(diff))
        term = sign * np.exp(log_mag - log_prod_lam - log_gbar)
        max_term = max(max_term, abs(term))
        total += term
    if max_term * 1e-16 > _CANCEL_GUARD * max(abs(total), 1e-6):
        return max(_full_gain_mp(gamma_bar, lam), 0.0)
    return max(total / LN2, 0.0)


def _full_gain_mp(gamma_bar: float, lam: np.ndarray) -> float:
    """Extended-precision evaluation for tightly clustered eigenvalues."""
    import mpmath

    with mpmath.workdps(_MP_DPS):
        g = mpmath.mpf(gamma_bar)
        lams = [mpmath.mpf(float(v)) for v in lam]
        prod_lam = mpmath.fprod(lams)
        total = mpmath.mpf(0)
        for j, lj in enumerate(lams):
            x = 1 / (g * lj)
            num = g * lj * mpmath.exp(x) * mpmath.e1(x)
            den = mpmath.fprod(1 / lm - 1 / lj for m, lm in enumerate(lams) if m != j)
            total += num / den
        total /= mpmath.log(2) * g * prod_lam
        return float(total)


def ergodic_rate_fixed_beam(gamma_bar: float, r_h, w) -> float:
    """E[log2(1 + gamma_bar * |h^H w|^2)] for deterministic unit w.

    |h^H w|^2 is exponential with mean w^H R w, the single nonzero
    eigenvalue of the effective rank-one covariance; gains at or below
    1e-14 yield rate 0.
    """
    if not gamma_bar > 0.0:
        raise DomainError(f"gamma_bar must be positive, got {gamma_bar!r}")
    r = validate_hermitian(r_h)
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim != 1 or w.size != r.shape[0]:
        raise ValidationError(f"beam length {w.shape} does not match matrix {r.shape}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > UNIT_NORM_ATOL:
        raise ValidationError(f"beam must have unit norm, got {norm!r}")
    lam1 = float(np.real(w.conj() @ r @ w))
    if lam1 <= 1e-14:
        return 0.0
    gl = gamma_bar * lam1
    if gl < TINY_GAIN:
        return 0.0
    return exp_scaled_e1(1.0 / gl) / LN2


def expected_quadratic_ratio(a, b, jitter: bool = False) -> float:
    """E[x^H B x / x^H A x] for standard complex Gaussian x.

    A must be positive definite with pairwise-distinct eigenvalues; B must
    be Hermitian PSD of the same dimension. Only the diagonal of B in A's
    eigenbasis survives the phase averaging, and each diagonal weight
    multiplies the derivative of E[ln(sum lam_j |x_j|^2)] with respect to
    the matching eigenvalue of A, which has a closed form in the
    eigenvalue gaps and the Euler-Mascheroni constant.
    """
    a = validate_hermitian(a)
    b = validate_hermitian(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    es = eigh(a)
    lam = es.eigenvalues
    if np.any(lam <= 0.0):
        raise DomainError(f"first matrix must be positive definite, eigenvalues {lam!r}")
    if jitter:
        lam = spread_eigenvalues(lam)
    check_distinct(lam)
    b_tilde_diag = np.real(np.einsum("ij,jk,ki->i", es.eigenvectors.conj().T, b, es.eigenvectors))
    derivs, max_term = _log_sum_derivatives(lam)
    total = float(np.dot(b_tilde_diag, derivs))
    scale = float(np.max(np.abs(b_tilde_diag))) if b_tilde_diag.size else 0.0
    if max_term * scale * 1e-16 > _CANCEL_GUARD * max(abs(total), 1e-6):
        return _quadratic_ratio_mp(lam, b_tilde_diag)
    return total


def _log_sum_derivatives(lam: np.ndarray):
    """d/d lam_i of E[ln(sum_j lam_j |x_j|^2)] for distinct positive lam.

    Also returns the largest intermediate term magnitude so the caller can
    judge how much cancellation occurred.
    """
    n = lam.size
    gamma = np.euler_gamma
    out = np.empty(n)
    max_term = 0.0
    for i in range(n):
        li = lam[i]
        gaps_i = li - np.delete(lam, i)
        prod_i = float(np.prod(gaps_i)) if gaps_i.size else 1.0
        term1 = li ** (n - 2) * ((n - 1) * (np.log(li) - gamma) + 1.0) / prod_i

        # sum over r != i of the gap product with both i and r removed
        s_r = 0.0
        for r in range(n):
            if r == i:
                continue
            rest = [j for j in range(n) if j != i and j != r]
            s_r += float(np.prod(li - lam[rest])) if rest else 1.0
        term2 = li ** (n - 1) * (np.log(li) - gamma) * s_r / prod_i**2

        term3 = 0.0
        for k in range(n):
            if k == i:
                continue
            lk = lam[k]
            gaps_k = lk - np.delete(lam, k)
            prod_k = float(np.prod(gaps_k))
            rest = [j for j in range(n) if j != k and j != i]
            partial = float(np.prod(lk - lam[rest])) if rest else 1.0
            term3 += lk ** (n - 1) * (np.log(lk) - gamma) * partial / prod_k**2

        out[i] = term1 - term2 + term3
        max_term = max(max_term, abs(term1), abs(term2), abs(term3))
    return out, max_term


def _quadratic_ratio_mp(lam: np.ndarray, b_tilde_diag: np.ndarray) -> float:
    """Extended-precision evaluation for tightly clustered eigenvalues."""
    import mpmath

    n = lam.size
    with mpmath.workdps(_MP_DPS):
        lams = [mpmath.mpf(float(v)) for v in lam]
        gamma = +mpmath.euler
        total = mpmath.mpf(0)
        for i, li in enumerate(lams):
            prod_i = mpmath.fprod(li - lams[j] for j in range(n) if j != i)
            term1 = li ** (n - 2) * ((n - 1) * (mpmath.log(li) - gamma) + 1) / prod_i
            s_r = mpmath.fsum(
                mpmath.fprod(li - lams[j] for j in range(n) if j not in (i, r))
                for r in range(n) if r != i
            )
            term2 = li ** (n - 1) * (mpmath.log(li) - gamma) * s_r / prod_i**2
            term3 = mpmath.mpf(0)
            for k in range(n):
                if k == i:
                    continue
                lk = lams[k]
                prod_k = mpmath.fprod(lk - lams[j] for j in range(n) if j != k)
                partial = mpmath.fprod(lk - lams[j] for j in range(n) if j not in (k, i))
                term3 += lk ** (n - 1) * (mpmath.log(lk) - gamma) * partial / prod_k**2
            total += mpmath.mpf(float(b_tilde_diag[i])) * (term1 - term2 + term3)
        return float(total)


def mf_interference_gain(r_direct, r_cross, jitter: bool = False) -> float:
    """Average leakage E[h^H R_cross h / ||h||^2] of a matched-filter TX.

    h ~ CN(0, R_direct) is the interferer's own direct channel; its MF beam
    h/||h|| leaks into the victim through R_cross. Substituting
    h = R_direct^{1/2} x reduces this to an expected quadratic ratio with
    A = R_direct and B = R_direct^{1/2} R_cross R_direct^{1/2}.
    """
    r_direct = validate_hermitian(r_direct)
    root = psd_sqrt(r_direct)
    b = root @ validate_hermitian(r_cross) @ root
    return max(expected_quadratic_ratio(r_direct, b, jitter=jitter), 0.0)


def rate_lower_bound(
    receiver: int,
    kinds,
    powers,
    cov,
    szf_vectors=None,
    jitter: bool = False,
) -> RateBound:
    """Closed-form ergodic-rate lower bound for one receiver.

    Parameters
    ----------
    receiver : 1 or 2
    kinds : (BeamformerKind, BeamformerKind)
        Beamformer kind used by TX 1 and TX 2.
    powers : (float, float)
        Slow average powers of TX 1 and TX 2, within [0, P_max].
    cov : CovarianceSet
    szf_vectors : (u1, u2), required when the matching kind is SZF.

    The effective SINR scale is p_own / (N0 + p_other * I_eff) where I_eff
    is the deterministic beam leakage u^H R_cross u for a statistical
    zero-forcing interferer, or the mean matched-filter leakage otherwise.
    The desired-signal expectation matches the receiver's own kind. With
    p_other = 0 the value is the exact interference-free ergodic rate.
    """
    if receiver not in (1, 2):
        raise ValidationError(f"receiver must be 1 or 2, got {receiver!r}")
    other = 3 - receiver
    own_kind = BeamformerKind(kinds[receiver - 1])
    other_kind = BeamformerKind(kinds[other - 1])
    p_own = float(powers[receiver - 1])
    p_other = float(powers[other - 1])
    if p_own < 0.0 or p_other < 0.0:
        raise ValidationError(f"powers must be nonnegative, got {powers!r}")

    if p_own == 0.0:
        return RateBound(0.0, receiver, is_lower_bound=False)

    i_eff = 0.0
    if p_other > 0.0:
        r_cross = cov.cross_into(receiver)
        if other_kind is BeamformerKind.SZF:
            u_other = _szf_vector(szf_vectors, other, cov.direct(other).shape[0])
            i_eff = float(np.real(u_other.conj() @ r_cross @ u_other))
        else:
            i_eff = mf_interference_gain(cov.direct(other), r_cross, jitter=jitter)

    gamma_bar = p_own / (cov.n0 + p_other * i_eff)
    r_direct = cov.direct(receiver)
    if own_kind is BeamformerKind.MF:
        value = ergodic_rate_full_gain(gamma_bar, eigh(r_direct).eigenvalues, jitter=jitter)
    else:
        u_own = _szf_vector(szf_vectors, receiver, r_direct.shape[0])
        value = ergodic_rate_fixed_beam(gamma_bar, r_direct, u_own)

    return RateBound(value, receiver, is_lower_bound=p_other > 0.0 and i_eff > 0.0)


def _szf_vector(szf_vectors, tx: int, dim: int) -> np.ndarray:
    if szf_vectors is None:
        raise ValidationError("szf_vectors must be supplied when a kind is SZF")
    u = np.asarray(szf_vectors[tx - 1], dtype=np.complex128)
    if u.ndim != 1 or u.size != dim:
        raise ValidationError(f"szf vector for TX {tx} has wrong shape {u.shape}")
    return u
