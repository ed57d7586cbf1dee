import numpy as np
import pytest

from specshare.errors import DomainError, EigenvalueSpacingError, ValidationError
from specshare.numerics import eigh, psd_sqrt
from specshare.rates import (
    BeamformerKind,
    RateBound,
    ergodic_rate_fixed_beam,
    ergodic_rate_full_gain,
    expected_quadratic_ratio,
    mf_interference_gain,
    rate_lower_bound,
    spread_eigenvalues,
)
from specshare.verify import mc_quadratic_ratio, mc_rate_fixed_beam, mc_rate_full_gain
from conftest import random_psd, random_unit

MF = BeamformerKind.MF
SZF = BeamformerKind.SZF

# Frozen quadrature values of int_0^inf log2(1 + g*lam*t) exp(-t) dt
# (scipy.integrate.quad, epsabs=1e-13, epsrel=1e-13).
RATE_ORACLE = {
    (1.0, 1.0): 0.8603473822708859,
    (10.0, 0.5): 2.15444683151689,
    (0.25, 2.0): 0.5212870037159069,
}


@pytest.mark.parametrize("args,expected", sorted(RATE_ORACLE.items()))
def test_full_gain_single_mode_frozen_values(args, expected):
    gamma, lam = args
    assert ergodic_rate_full_gain(gamma, [lam]) == pytest.approx(expected, abs=1e-10)


def test_full_gain_scaling_symmetry():
    # only the products gamma*lambda_j matter
    a = ergodic_rate_full_gain(2.0, [0.5, 1.0])
    b = ergodic_rate_full_gain(1.0, [1.0, 2.0])
    assert a == pytest.approx(b, rel=1e-10)


def test_full_gain_permutation_invariance(rng):
    lam = np.array([0.4, 0.9, 1.7, 3.2])
    base = ergodic_rate_full_gain(3.0, lam)
    for _ in range(5):
        perm = rng.permutation(lam)
        assert ergodic_rate_full_gain(3.0, perm) == pytest.approx(base, abs=1e-10)


def test_full_gain_against_sampling_oracle():
    lam = [1.0, 2.0, 3.0, 4.0]
    closed = ergodic_rate_full_gain(10.0, lam)
    mean, se = mc_rate_full_gain(np.random.default_rng(5), 10.0, lam, 10**6)
    assert abs(closed - mean) < 3.0 * se


def test_full_gain_rejects_bad_inputs():
    with pytest.raises(DomainError):
        ergodic_rate_full_gain(0.0, [1.0])
    with pytest.raises(DomainError):
        ergodic_rate_full_gain(1.0, [1.0, -2.0])
    with pytest.raises(EigenvalueSpacingError):
        ergodic_rate_full_gain(1.0, [1.0, 1.0 + 1e-12])


def test_full_gain_jitter_opt_in():
    # coincident eigenvalues (rho = 0 covariance) pass once jitter is on
    val = ergodic_rate_full_gain(2.0, [1.0, 1.0, 1.0, 1.0], jitter=True)
    mean, se = mc_rate_full_gain(np.random.default_rng(6), 2.0, [1.0] * 4, 10**6)
    assert abs(val - mean) < max(3.0 * se, 1e-4)


def test_spread_eigenvalues_separates_repeats():
    lam = spread_eigenvalues([1.0, 1.0, 1.0])
    assert np.all(np.diff(lam) > 0.0)


def test_fixed_beam_reduces_to_single_mode(rng):
    w = random_unit(rng, 4)
    a = ergodic_rate_fixed_beam(1.0, np.eye(4), w)
    b = ergodic_rate_full_gain(1.0, [1.0])
    assert a == pytest.approx(b, abs=1e-10)


def test_fixed_beam_gain_scaling(rng):
    w = random_unit(rng, 3)
    a = ergodic_rate_fixed_beam(2.0, np.eye(3), w)          # lambda_1 = 1
    b = ergodic_rate_fixed_beam(1.0, 2.0 * np.eye(3), w)    # lambda_1 = 2
    assert a == pytest.approx(b, rel=1e-12)


def test_fixed_beam_against_sampling_oracle(rng):
    r = random_psd(rng, 4, shift=0.05)
    w = random_unit(rng, 4)
    closed = ergodic_rate_fixed_beam(5.0, r, w)
    mean, se = mc_rate_fixed_beam(np.random.default_rng(7), 5.0, r, w, 10**6)
    assert abs(closed - mean) < 3.0 * se


def test_fixed_beam_validation(rng):
    with pytest.raises(ValidationError):
        ergodic_rate_fixed_beam(1.0, np.eye(3), np.array([1.0, 1.0, 0.0]))
    assert ergodic_rate_fixed_beam(1.0, np.zeros((2, 2)), np.array([1.0, 0.0])) == 0.0


def test_quadratic_ratio_exact_identities(rng):
    a = random_psd(rng, 4, shift=0.2)
    assert expected_quadratic_ratio(a, a) == pytest.approx(1.0, abs=1e-10)
    assert expected_quadratic_ratio(a, 3.0 * a) == pytest.approx(3.0, abs=1e-10)


def test_quadratic_ratio_against_sampling_oracle():
    a = np.diag([1.0, 2.0])
    closed = expected_quadratic_ratio(a, np.eye(2))
    mean, se = mc_quadratic_ratio(np.random.default_rng(8), a, np.eye(2), 10**7)
    assert abs(closed - mean) < 3.0 * se


def test_quadratic_ratio_linear_in_second_argument(rng):
    a = random_psd(rng, 3, shift=0.3)
    b1 = random_psd(rng, 3)
    b2 = random_psd(rng, 3)
    combined = expected_quadratic_ratio(a, b1 + b2)
    split = expected_quadratic_ratio(a, b1) + expected_quadratic_ratio(a, b2)
    assert combined == pytest.approx(split, abs=1e-9)


def test_quadratic_ratio_eigenbasis_reduction(rng):
    # replacing B by the diagonal of its representation in A's eigenbasis
    # (rotated back) leaves the expectation unchanged
    a = random_psd(rng, 4, shift=0.3)
    b = random_psd(rng, 4)
    u = eigh(a).eigenvectors
    b_tilde = u.conj().T @ b @ u
    b_reduced = u @ np.diag(np.real(np.diag(b_tilde))) @ u.conj().T
    full = expected_quadratic_ratio(a, b)
    reduced = expected_quadratic_ratio(a, b_reduced)
    assert full == pytest.approx(reduced, abs=1e-10)


def test_quadratic_ratio_validation(rng):
    with pytest.raises(ValidationError):
        expected_quadratic_ratio(np.eye(2), np.eye(3))
    with pytest.raises(EigenvalueSpacingError):
        expected_quadratic_ratio(np.eye(3), random_psd(rng, 3))
    with pytest.raises(DomainError):
        expected_quadratic_ratio(np.diag([0.0, 1.0]), np.eye(2))


def test_mf_interference_gain_identity_cross(default_cov):
    # cross covariance proportional to identity: the ratio is the constant
    r = default_cov.r22
    assert mf_interference_gain(r, np.eye(4)) == pytest.approx(1.0, abs=1e-10)
    assert mf_interference_gain(r, 0.7 * np.eye(4)) == pytest.approx(0.7, abs=1e-10)


def test_mf_interference_gain_against_sampling_oracle(default_cov):
    closed = mf_interference_gain(default_cov.r22, default_cov.r12)
    root = psd_sqrt(default_cov.r22)
    rng = np.random.default_rng(9)
    n = 10**6
    z = (rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))) / np.sqrt(2)
    h = z @ root.T
    num = np.real(np.sum(h.conj() * (h @ default_cov.r12.T), axis=1))
    den = np.sum(np.abs(h) ** 2, axis=1)
    ratio = num / den
    se = ratio.std(ddof=1) / np.sqrt(n)
    assert abs(closed - ratio.mean()) < 3.0 * se


def test_rate_bound_validation():
    with pytest.raises(ValidationError):
        RateBound(-0.1, 1, False)
    with pytest.raises(ValidationError):
        RateBound(np.inf, 1, False)
    with pytest.raises(ValidationError):
        RateBound(1.0, 3, False)


def test_lower_bound_interference_free_reduction(default_cfg, default_cov):
    lam = eigh(default_cov.r11).eigenvalues
    bound = rate_lower_bound(1, (MF, MF), (10.0, 0.0), default_cov)
    assert bound.value == pytest.approx(ergodic_rate_full_gain(10.0, lam), rel=1e-12)
    assert not bound.is_lower_bound
    zero = rate_lower_bound(2, (MF, MF), (10.0, 0.0), default_cov)
    assert zero.value == 0.0


def test_lower_bound_szf_matches_manual_assembly(default_cov):
    # receiver 2 with both TXs on statistical zero-forcing beams
    from specshare.coordination import szf_vectors

    u1, u2 = szf_vectors(default_cov)
    p1, p2 = 4.0, 10.0
    bound = rate_lower_bound(2, (SZF, SZF), (p1, p2), default_cov, szf_vectors=(u1, u2))
    leak = float(np.real(u1.conj() @ default_cov.r21 @ u1))
    gbar = p2 / (default_cov.n0 + p1 * leak)
    manual = ergodic_rate_fixed_beam(gbar, default_cov.r22, u2)
    assert bound.value == pytest.approx(manual, rel=1e-12)
    assert bound.is_lower_bound


def test_lower_bound_monotonic_in_powers(default_cov, rng):
    for _ in range(5):
        p1 = float(rng.uniform(0.5, 9.0))
        p2 = float(rng.uniform(0.5, 9.0))
        delta = 1e-3
        base = rate_lower_bound(1, (MF, MF), (p1, p2), default_cov).value
        up_own = rate_lower_bound(1, (MF, MF), (p1 + delta, p2), default_cov).value
        up_other = rate_lower_bound(1, (MF, MF), (p1, p2 + delta), default_cov).value
        assert up_own > base
        assert up_other < base


def test_lower_bound_requires_szf_vectors(default_cov):
    with pytest.raises(ValidationError):
        rate_lower_bound(1, (SZF, MF), (1.0, 1.0), default_cov)
