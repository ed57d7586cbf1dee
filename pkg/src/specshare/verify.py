"""Monte Carlo cross-checks of the closed-form rate expressions.

The oracles here only sample; they never touch the closed forms they
check. Inputs are generated up front from one master stream, and every
check runs its oracle on a substream keyed by the check index, so results
do not depend on execution order or worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .numerics import psd_sqrt
from .rates import (
    ergodic_rate_fixed_beam,
    ergodic_rate_full_gain,
    expected_quadratic_ratio,
)

DIMS_CYCLE = (2, 3, 4, 5, 6)
ORACLE_CHUNK = 500_000


@dataclass(frozen=True)
class CheckRecord:
    name: str
    dim: int
    closed_form: float
    mc_mean: float
    mc_se: float

    @property
    def sigmas(self) -> float:
        return abs(self.closed_form - self.mc_mean) / self.mc_se

    @property
    def ok(self) -> bool:
        return self.sigmas <= 3.0


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def spaced_eigenvalues(rng: np.random.Generator, n: int, lo=0.3, hi=3.0,
                       min_rel_gap=0.03) -> np.ndarray:
    """Positive eigenvalues with comfortable pairwise separation."""
    for _ in range(1000):
        lam = np.sort(rng.uniform(lo, hi, n))
        gaps = np.diff(lam) / lam[1:]
        if np.all(gaps >= min_rel_gap):
            return lam
    raise RuntimeError("could not draw separated eigenvalues")


def random_psd(rng: np.random.Generator, n: int, eigenvalues=None) -> np.ndarray:
    if eigenvalues is None:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        m = g @ g.conj().T / n
        return 0.5 * (m + m.conj().T)
    u = random_unitary(rng, n)
    m = (u * eigenvalues) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def _cscg(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _cscg_rows_scaled(rng: np.random.Generator, k: int, n: int) -> np.ndarray:
    # (k, n) complex with per-entry variance 2: a single RNG pass viewed as
    # complex; callers fold the 1/2 variance correction into their gains
    return rng.standard_normal((k, 2 * n)).view(np.complex128)


def _chunked_mean_se(sampler, n_samples: int):
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        take = min(ORACLE_CHUNK, n_samples - done)
        vals = sampler(take)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += take
    mean = total / n_samples
    var = max(total_sq - n_samples * mean * mean, 0.0) / max(n_samples - 1, 1)
    return mean, math.sqrt(var / n_samples)


def mc_rate_full_gain(rng, gamma_bar, eigenvalues, n_samples):
    """Sample E[log2(1 + gbar ||h||^2)] by drawing h ~ CN(0, R) directly."""
    lam = np.asarray(eigenvalues, float)
    half_lam = 0.5 * lam  # variance correction for the scaled draws

    def sampler(k):
        z = _cscg_rows_scaled(rng, k, lam.size)
        gain = np.sum((z.real * z.real + z.imag * z.imag) * half_lam, axis=1)
        return np.log2(1.0 + gamma_bar * gain)

    return _chunked_mean_se(sampler, n_samples)


def mc_rate_fixed_beam(rng, gamma_bar, r_h, w, n_samples):
    root = psd_sqrt(r_h)
    w = np.asarray(w, dtype=np.complex128)
    beam = root.T @ w.conj() / np.sqrt(2.0)  # h^H w = conj(z @ root.T @ conj(w))

    def sampler(k):
        z = _cscg_rows_scaled(rng, k, root.shape[0])
        gain = np.abs(z @ beam) ** 2
        return np.log2(1.0 + gamma_bar * gain)

    return _chunked_mean_se(sampler, n_samples)


def _interleaved_real_form(m: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix K with x^H M x = g^T K g for interleaved g.

    g holds (Re x_0, Im x_0, Re x_1, ...); for Hermitian M the form is the
    symmetric block pattern [[Re M, -Im M], [Im M, Re M]] in that ordering.
    """
    n = m.shape[0]
    k = np.zeros((2 * n, 2 * n))
    k[0::2, 0::2] = m.real
    k[1::2, 1::2] = m.real
    k[0::2, 1::2] = -m.imag
    k[1::2, 0::2] = m.imag
    return k


def mc_quadratic_ratio(rng, a, b, n_samples):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = a.shape[0]
    # the ratio is scale-invariant, so unnormalized draws are fine; real
    # arithmetic halves the memory traffic of the streaming passes
    stacked = np.concatenate([_interleaved_real_form(b), _interleaved_real_form(a)], axis=1)

    def sampler(k):
        g = rng.standard_normal((k, 2 * n))
        y = g @ stacked
        num = np.einsum("ij,ij->i", g, y[:, : 2 * n])
        den = np.einsum("ij,ij->i", g, y[:, 2 * n:])
        return num / den

    return _chunked_mean_se(sampler, n_samples)


def _run_check(task) -> CheckRecord:
    name, index, seed, samples, payload = task
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    if name == "rate_full_gain":
        gamma, lam = payload
        closed = ergodic_rate_full_gain(gamma, lam)
        mean, se = mc_rate_full_gain(rng, gamma, lam, samples)
        dim = len(lam)
    elif name == "rate_fixed_beam":
        gamma, r, w = payload
        closed = ergodic_rate_fixed_beam(gamma, r, w)
        mean, se = mc_rate_fixed_beam(rng, gamma, r, w, samples)
        dim = r.shape[0]
    else:
        a, b = payload
        closed = expected_quadratic_ratio(a, b)
        mean, se = mc_quadratic_ratio(rng, a, b, samples)
        dim = a.shape[0]
    return CheckRecord(name, dim, closed, mean, se)


def verify_closed_forms(n_inputs: int = 20, samples: int = 1_000_000,
                        ratio_samples: int | None = None, seed: int = 20260810,
                        workers: int = 1) -> list:
    """Run all three closed forms against their sampling oracles.

    Returns a list of CheckRecord, n_inputs per closed form, dimensions
    cycling through 2..6. `ratio_samples` defaults to `samples`; the
    quadratic ratio converges more slowly, so callers wanting uniform
    confidence give it more. Results are independent of `workers`.
    """
    if ratio_samples is None:
        ratio_samples = samples
    rng = np.random.default_rng(seed)

    tasks = []
    index = 0
    for i in range(n_inputs):
        n = DIMS_CYCLE[i % len(DIMS_CYCLE)]
        lam = spaced_eigenvalues(rng, n)
        gamma = float(rng.uniform(0.5, 20.0))
        tasks.append(("rate_full_gain", index, seed, samples, (gamma, lam)))
        index += 1
    for i in range(n_inputs):
        n = DIMS_CYCLE[i % len(DIMS_CYCLE)]
        r = random_psd(rng, n, eigenvalues=spaced_eigenvalues(rng, n))
        w = _cscg(rng, n)
        w = w / np.linalg.norm(w)
        gamma = float(rng.uniform(0.5, 20.0))
        tasks.append(("rate_fixed_beam", index, seed, samples, (gamma, r, w)))
        index += 1
    for i in range(n_inputs):
        n = DIMS_CYCLE[i % len(DIMS_CYCLE)]
        a = random_psd(rng, n, eigenvalues=spaced_eigenvalues(rng, n))
        b = random_psd(rng, n)
        tasks.append(("quadratic_ratio", index, seed, ratio_samples, (a, b)))
        index += 1

    if workers <= 1:
        return [_run_check(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_check, tasks))
