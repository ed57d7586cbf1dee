"""Scenario configuration, covariance construction, and channel sampling.

Covariances follow the exponential correlation model: entry (m, n) of the
link covariance is pathloss * rho**|m - n|. Channels are correlated
Rayleigh: h = R^{1/2} z with z standard circularly-symmetric Gaussian.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .numerics import psd_sqrt

# Default scenario: 4 antennas per TX, unit noise, QoS threshold 1 bit/s/Hz,
# correlation 0.5, cross-link pathloss 0.3, 20000 Monte Carlo draws.
DEFAULT_BETA = ((1.0, 0.3), (0.3, 1.0))

LINK_ORDER = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Static description of the two-pair scenario.

    Pair 1 is the incumbent (carries the QoS threshold tau1), pair 2 the
    licensee. beta[i][j] is the pathloss of the link TX j -> RX i.
    """

    m1: int = 4
    m2: int = 4
    p1_max: float = 10.0
    p2_max: float = 10.0
    n0: float = 1.0
    tau1: float = 1.0
    rho: float = 0.5
    beta: np.ndarray = field(default=DEFAULT_BETA)
    seed: int = 0
    n_samples: int = 20000

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (2, 2):
            raise ValidationError(f"beta must be 2x2, got shape {beta.shape}")
        object.__setattr__(self, "beta", beta)
        if self.m1 < 1 or self.m2 < 1:
            raise ValidationError("antenna counts must be positive integers")
        if not (self.p1_max > 0.0 and self.p2_max > 0.0):
            raise ValidationError("power budgets must be positive")
        if not self.n0 > 0.0:
            raise ValidationError("noise power must be positive")
        if not self.tau1 > 0.0:
            raise ValidationError("tau1 must be strictly positive")
        if not (0.0 <= self.rho < 1.0):
            raise ValidationError("rho must lie in [0, 1)")
        if not np.all(beta > 0.0):
            raise ValidationError("all beta entries must be positive")
        if self.n_samples < 1:
            raise ValidationError("n_samples must be positive")

    def antennas(self, tx: int) -> int:
        return self.m1 if tx == 1 else self.m2

    def p_max(self, tx: int) -> float:
        return self.p1_max if tx == 1 else self.p2_max

    def with_snr_db(self, snr_db: float) -> "ScenarioConfig":
        """Equal power budgets at both TXs so that P_max / N0 hits `snr_db`."""
        p = self.n0 * 10.0 ** (snr_db / 10.0)
        return replace(self, p1_max=p, p2_max=p)


@dataclass(frozen=True)
class CovarianceSet:
    """The four link covariances plus the common noise power."""

    r11: np.ndarray
    r12: np.ndarray
    r21: np.ndarray
    r22: np.ndarray
    n0: float

    def link(self, rx: int, tx: int) -> np.ndarray:
        """Covariance of the channel TX `tx` -> RX `rx` (1-based)."""
        return getattr(self, f"r{rx}{tx}")

    def direct(self, i: int) -> np.ndarray:
        return self.link(i, i)

    def cross_into(self, rx: int) -> np.ndarray:
        return self.link(rx, 3 - rx)


@dataclass(frozen=True)
class ChannelDraw:
    """One joint realization of the four downlink channels."""

    h11: np.ndarray
    h12: np.ndarray
    h21: np.ndarray
    h22: np.ndarray

    def link(self, rx: int, tx: int) -> np.ndarray:
        return getattr(self, f"h{rx}{tx}")


def exp_correlation(m: int, rho: float) -> np.ndarray:
    """Unit-diagonal exponential correlation matrix rho**|i - j|."""
    idx = np.arange(m)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def build_covariances(cfg: ScenarioConfig) -> CovarianceSet:
    """Exponential-model covariances for all four links."""
    mats = {}
    for rx, tx in LINK_ORDER:
        m = cfg.antennas(tx)
        mats[(rx, tx)] = cfg.beta[rx - 1, tx - 1] * exp_correlation(m, cfg.rho)
    return CovarianceSet(
        r11=mats[(1, 1)],
        r12=mats[(1, 2)],
        r21=mats[(2, 1)],
        r22=mats[(2, 2)],
        n0=cfg.n0,
    )


def substream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based RNG stream keyed by (seed, *path).

    Streams with different paths are independent and reproducible across
    worker layouts, so Monte Carlo batches can run in any order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def _standard_cscg(rng: np.random.Generator, shape) -> np.ndarray:
    # unit-variance complex normal: each half carries variance 1/2
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.sqrt(2.0)


def sample_channel_batch(cov: CovarianceSet, rng: np.random.Generator, n: int) -> dict:
    """Draw `n` joint realizations; returns {(rx, tx): (n, M_tx) array}.

    Links are drawn in the fixed order (1,1), (1,2), (2,1), (2,2) so a
    given stream always yields the same values.
    """
    out = {}
    for rx, tx in LINK_ORDER:
        r = cov.link(rx, tx)
        root = psd_sqrt(r)
        z = _standard_cscg(rng, (n, r.shape[0]))
        out[(rx, tx)] = z @ root.T
    return out


def sample_channels(cov: CovarianceSet, rng: np.random.Generator) -> ChannelDraw:
    """Draw a single joint channel realization."""
    batch = sample_channel_batch(cov, rng, 1)
    return ChannelDraw(
        h11=batch[(1, 1)][0],
        h12=batch[(1, 2)][0],
        h21=batch[(2, 1)][0],
        h22=batch[(2, 2)][0],
    )


_CONFIG_KEYS = {
    "m1": int,
    "m2": int,
    "p1_max": float,
    "p2_max": float,
    "n0": float,
    "tau1": float,
    "rho": float,
    "beta11": float,
    "beta12": float,
    "beta21": float,
    "beta22": float,
    "seed": int,
    "n_samples": int,
}


def load_config(path) -> ScenarioConfig:
    """Read a `key = value` config file; unknown keys are rejected.

    All keys are optional and fall back to the default scenario. The 2x2
    pathloss array is flattened into beta11, beta12, beta21, beta22.
    """
    text = Path(path).read_text()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ValidationError(f"{path}:{lineno}: duplicate config key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](val.strip())
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc

    beta = np.asarray(DEFAULT_BETA, dtype=float).copy()
    for (i, j) in ((1, 1), (1, 2), (2, 1), (2, 2)):
        key = f"beta{i}{j}"
        if key in values:
            beta[i - 1, j - 1] = values.pop(key)
    return ScenarioConfig(beta=beta, **values)
