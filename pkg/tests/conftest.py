import numpy as np
import pytest

import specshare as ss


@pytest.fixture(scope="session")
def default_cfg():
    return ss.ScenarioConfig()


@pytest.fixture(scope="session")
def default_cov(default_cfg):
    return ss.build_covariances(default_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (g + g.conj().T)


def random_psd(rng, n, shift=0.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = g @ g.conj().T / n + shift * np.eye(n)
    return 0.5 * (m + m.conj().T)


def random_unit(rng, n):
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return w / np.linalg.norm(w)
