"""Statistically coordinated transmission: beamformers, power control, selection.

Both TXs evaluate the same eight (kind1, kind2, policy) combinations from
shared covariance information, resolve the non-full-power TX by bisection
against the incumbent's rate lower bound, and pick the feasible entry with
the best licensee bound. Nothing here touches a channel realization, so
both sides always agree.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import CovarianceSet, ScenarioConfig
from .errors import DegenerateChannelError, InfeasibleScenarioError, ValidationError
from .numerics import eigh, psd_inv_sqrt, validate_hermitian
from .rates import BeamformerKind, RateBound, ergodic_rate_full_gain, rate_lower_bound

# Bisection stops when the bound is within this of tau1 (bits/s/Hz).
BISECT_RATE_TOL = 1e-8
BISECT_MAX_ITER = 200

# A strategy counts as feasible when its incumbent bound clears tau1 - this.
FEASIBLE_SLACK = 1e-6


class PowerPolicy(str, Enum):
    P1_FULL = "P1_FULL"  # TX 1 at max power, TX 2 bisected
    P2_FULL = "P2_FULL"  # TX 2 at max power, TX 1 bisected


@dataclass(frozen=True)
class Beamformer:
    vector: np.ndarray
    kind: BeamformerKind
    owner: int

    def __post_init__(self):
        norm = float(np.linalg.norm(self.vector))
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"beamformer must be unit norm, got {norm!r}")
        if self.owner not in (1, 2):
            raise ValidationError(f"owner must be 1 or 2, got {self.owner!r}")


@dataclass(frozen=True)
class Strategy:
    """One resolved entry of the joint transmission table."""

    kind1: BeamformerKind
    kind2: BeamformerKind
    policy: PowerPolicy
    resolved_p1: float
    resolved_p2: float
    feasible: bool
    licensee_bound: RateBound
    incumbent_bound: RateBound

    @property
    def label(self) -> str:
        tag = "P1" if self.policy is PowerPolicy.P1_FULL else "P2"
        return f"{self.kind1.value}-{self.kind2.value}-{tag}"

    def sort_key(self):
        return (self.policy.value, self.kind1.value, self.kind2.value)


def mf_beamformer(h_direct, owner: int = 1) -> Beamformer:
    """Matched filter: the own direct channel, normalized."""
    h = np.asarray(h_direct, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(h))
    if norm <= 0.0:
        raise DegenerateChannelError("cannot match a zero channel vector")
    return Beamformer(vector=h / norm, kind=BeamformerKind.MF, owner=owner)


def szf_beamformer(r_direct, r_cross_out, ridge: float = 0.0, owner: int = 1) -> Beamformer:
    """Statistical zero-forcing beam from covariances only.

    Principal eigenvector of R_cross^{-1/2} R_direct R_cross^{-1/2}: the
    direction with the best statistical direct-gain-to-leakage trade-off.
    Depends only on second-order statistics, so both TXs compute the same
    vector. `r_cross_out` is the covariance of the link from this TX into
    the other pair's RX.
    """
    r_direct = validate_hermitian(r_direct)
    whitener = psd_inv_sqrt(r_cross_out, ridge=ridge)
    m = whitener @ r_direct @ whitener
    es = eigh(m)
    u = es.eigenvectors[:, -1]
    u = u / np.linalg.norm(u)
    return Beamformer(vector=u, kind=BeamformerKind.SZF, owner=owner)


def default_ridge(r_cross) -> float:
    """Ridge policy for near-singular cross covariances.

    Zero for well-conditioned input; 1e-9 * trace / n once the smallest
    eigenvalue drops below 1e-12 of the largest, with an absolute floor
    for the all-zero matrix (leakage is then zero in every direction, so
    the whitener only needs to exist).
    """
    r = validate_hermitian(r_cross)
    vals = np.linalg.eigvalsh(r)
    if vals[0] > 1e-12 * max(vals[-1], 0.0):
        return 0.0
    trace = float(np.real(np.trace(r)))
    return 1e-9 * (trace / r.shape[0]) if trace > 0.0 else 1e-9


def szf_vectors(cov: CovarianceSet) -> tuple:
    """The (u1, u2) statistical zero-forcing beams for both TXs."""
    u1 = szf_beamformer(cov.r11, cov.r21, ridge=default_ridge(cov.r21), owner=1)
    u2 = szf_beamformer(cov.r22, cov.r12, ridge=default_ridge(cov.r12), owner=2)
    return u1.vector, u2.vector


def interference_free_rate(cfg: ScenarioConfig, cov: CovarianceSet) -> float:
    """Incumbent ergodic rate under full-power MF with the licensee silent."""
    lam = eigh(cov.r11).eigenvalues
    return ergodic_rate_full_gain(cfg.p1_max / cfg.n0, lam)


def check_feasibility(cfg: ScenarioConfig, cov: CovarianceSet) -> bool:
    """True when tau1 is achievable at all (full-power MF, no interference)."""
    return interference_free_rate(cfg, cov) >= cfg.tau1


def resolve_power(kinds, policy: PowerPolicy, cov: CovarianceSet, cfg: ScenarioConfig,
                  szf_pair=None) -> tuple:
    """Resolve (p1, p2, feasible) for one strategy.

    The policy's full-power TX is pinned at its budget; the other TX's
    power is bisected so the incumbent bound meets tau1: under P1_FULL the
    bound falls with p2 (take the largest p2 still meeting tau1, all of
    the budget if slack); under P2_FULL it rises with p1 (take the
    smallest p1 meeting tau1, infeasible when even the full budget
    cannot). Infeasible strategies return the boundary attempt rather
    than raising so the caller can keep them in the table.
    """
    kinds = (BeamformerKind(kinds[0]), BeamformerKind(kinds[1]))
    tau1 = cfg.tau1

    def incumbent(p1: float, p2: float) -> float:
        return rate_lower_bound(1, kinds, (p1, p2), cov, szf_vectors=szf_pair).value

    if policy is PowerPolicy.P1_FULL:
        p1 = cfg.p1_max
        if incumbent(p1, 0.0) < tau1 - FEASIBLE_SLACK:
            return p1, 0.0, False
        if incumbent(p1, cfg.p2_max) >= tau1:
            return p1, cfg.p2_max, True
        p2 = _bisect(lambda p: incumbent(p1, p), 0.0, cfg.p2_max, tau1, increasing=False)
        return p1, p2, True

    p2 = cfg.p2_max
    if incumbent(cfg.p1_max, p2) < tau1 - FEASIBLE_SLACK:
        return cfg.p1_max, p2, False
    p1 = _bisect(lambda p: incumbent(p, p2), 0.0, cfg.p1_max, tau1, increasing=True)
    return p1, p2, True


def _bisect(f, lo: float, hi: float, target: float, increasing: bool) -> float:
    """Bisect a monotone f on [lo, hi] until |f(x) - target| <= tolerance."""
    x = 0.5 * (lo + hi)
    for _ in range(BISECT_MAX_ITER):
        val = f(x)
        if abs(val - target) <= BISECT_RATE_TOL:
            return x
        if (val > target) == increasing:
            hi = x
        else:
            lo = x
        x = 0.5 * (lo + hi)
    return x


def build_strategy(kinds, policy: PowerPolicy, cov: CovarianceSet, cfg: ScenarioConfig,
                   szf_pair=None) -> Strategy:
    """Resolve powers and evaluate both receivers' bounds for one entry."""
    kinds = (BeamformerKind(kinds[0]), BeamformerKind(kinds[1]))
    if szf_pair is None and BeamformerKind.SZF in kinds:
        szf_pair = szf_vectors(cov)
    p1, p2, feasible = resolve_power(kinds, policy, cov, cfg, szf_pair=szf_pair)
    incumbent = rate_lower_bound(1, kinds, (p1, p2), cov, szf_vectors=szf_pair)
    licensee = rate_lower_bound(2, kinds, (p1, p2), cov, szf_vectors=szf_pair)
    return Strategy(
        kind1=kinds[0],
        kind2=kinds[1],
        policy=policy,
        resolved_p1=p1,
        resolved_p2=p2,
        feasible=feasible,
        licensee_bound=licensee,
        incumbent_bound=incumbent,
    )


def strategy_table(cfg: ScenarioConfig, cov: CovarianceSet) -> list:
    """All eight (policy, kind1, kind2) entries in canonical order."""
    pair = szf_vectors(cov)
    table = []
    for policy in (PowerPolicy.P1_FULL, PowerPolicy.P2_FULL):
        for kind1 in (BeamformerKind.MF, BeamformerKind.SZF):
            for kind2 in (BeamformerKind.MF, BeamformerKind.SZF):
                table.append(build_strategy((kind1, kind2), policy, cov, cfg, szf_pair=pair))
    return table


def select_strategy(cfg: ScenarioConfig, cov: CovarianceSet) -> tuple:
    """Best feasible strategy (max licensee bound) plus the full table.

    Requires the scenario itself to be feasible; MF-MF under P1_FULL then
    guarantees at least one feasible entry (it contains the silent-licensee
    limit). Ties break lexicographically on (policy, kind1, kind2) so both
    TXs always agree.
    """
    if not check_feasibility(cfg, cov):
        raise InfeasibleScenarioError(
            f"tau1 = {cfg.tau1} exceeds the interference-free incumbent rate"
        )
    table = strategy_table(cfg, cov)
    feasible = [s for s in table if s.feasible]
    best = min(feasible, key=lambda s: (-s.licensee_bound.value,) + s.sort_key())
    return best, table
