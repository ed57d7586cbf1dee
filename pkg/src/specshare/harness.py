"""Monte Carlo verification engine, parameter sweeps, and report emission.

Sweep points are independent work units; each point derives its channel
draws from counter-based substreams keyed by (seed, point index, batch
index), so results are bit-identical no matter how many workers process
the points. All schemes at a point share the same draws (common random
numbers) for sharper comparisons.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .baselines import (
    BaselineResult,
    BaselineScheme,
    coordination_benchmark,
    interference_temperature_scheme,
    min_cross_eigenvalues,
)
from .channel import CovarianceSet, ScenarioConfig, build_covariances, sample_channel_batch, substream
from .coordination import Strategy, check_feasibility, select_strategy, szf_vectors
from .errors import ValidationError
from .rates import BeamformerKind

MC_BATCH = 5000
MIN_MC_SAMPLES = 100

SCHEME_COORDINATED = "coordinated"
SCHEME_INTTEMP = BaselineScheme.INTERFERENCE_TEMP.value
SCHEME_BENCHMARK = BaselineScheme.BENCHMARK.value
ALL_SCHEMES = (SCHEME_COORDINATED, SCHEME_INTTEMP, SCHEME_BENCHMARK)

CSV_HEADER = (
    "axis_value,scheme,strategy,kind1,kind2,policy,p1,p2,bound_rx1,bound_rx2,"
    "mc_rx1,mc_se_rx1,mc_rx2,mc_se_rx2,feasible,selected"
)


class SweepAxis(str, Enum):
    SNR_DB = "snr"
    TAU1 = "tau1"


@dataclass(frozen=True)
class SweepSpec:
    axis: SweepAxis
    points: tuple
    base: ScenarioConfig

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise ValidationError("sweep needs at least one point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValidationError("sweep points must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "axis", SweepAxis(self.axis))


@dataclass(frozen=True)
class SchemeRule:
    """Powers plus the beamforming rule needed to simulate one scheme.

    kinds present: per-draw MF beams or fixed statistical beams. kinds
    None: the idealized benchmark, whose interference is the deterministic
    floor p_other * lam_min(cross covariance).
    """

    p1: float
    p2: float
    kind1: BeamformerKind | None = None
    kind2: BeamformerKind | None = None
    u1: np.ndarray | None = None
    u2: np.ndarray | None = None
    lam_min_into_1: float = 0.0
    lam_min_into_2: float = 0.0

    @classmethod
    def precoded(cls, p1, p2, kind1, kind2, u1=None, u2=None):
        return cls(p1=float(p1), p2=float(p2), kind1=BeamformerKind(kind1),
                   kind2=BeamformerKind(kind2), u1=u1, u2=u2)

    @classmethod
    def idealized(cls, p1, p2, lam_min_into_1, lam_min_into_2):
        return cls(p1=float(p1), p2=float(p2),
                   lam_min_into_1=float(lam_min_into_1),
                   lam_min_into_2=float(lam_min_into_2))

    @classmethod
    def from_strategy(cls, strategy: Strategy, szf_pair):
        return cls.precoded(strategy.resolved_p1, strategy.resolved_p2,
                            strategy.kind1, strategy.kind2,
                            u1=szf_pair[0], u2=szf_pair[1])


@dataclass(frozen=True)
class McEstimate:
    mean1: float
    se1: float
    mean2: float
    se2: float


@dataclass(frozen=True)
class StrategyEntry:
    strategy: Strategy
    mc: McEstimate
    selected: bool


@dataclass(frozen=True)
class RateReport:
    """Everything evaluated at one sweep point."""

    axis_value: float
    feasible: bool
    entries: tuple          # 8 StrategyEntry, empty when the point is infeasible
    baselines: dict         # scheme name -> (BaselineResult, McEstimate)


def point_config(base: ScenarioConfig, axis: SweepAxis, value: float) -> ScenarioConfig:
    if axis is SweepAxis.SNR_DB:
        return base.with_snr_db(value)
    return replace(base, tau1=float(value))


def point_draws(cov: CovarianceSet, seed: int, point_index: int, n_samples: int,
                batch: int = MC_BATCH) -> dict:
    """Channel draws for a sweep point, assembled from keyed batch substreams."""
    parts = {}
    remaining = n_samples
    b = 0
    while remaining > 0:
        take = min(batch, remaining)
        rng = substream(seed, point_index, b)
        for link, arr in sample_channel_batch(cov, rng, take).items():
            parts.setdefault(link, []).append(arr)
        remaining -= take
        b += 1
    return {link: np.concatenate(chunks, axis=0) for link, chunks in parts.items()}


def _beam_gains(rule: SchemeRule, draws: dict, rx: int):
    """(desired_gain, interference_gain) arrays for receiver rx."""
    other = 3 - rx
    h_direct = draws[(rx, rx)]
    h_cross = draws[(rx, other)]

    own_kind = rule.kind1 if rx == 1 else rule.kind2
    if own_kind is BeamformerKind.MF:
        desired = np.sum(np.abs(h_direct) ** 2, axis=1)
    else:
        u_own = rule.u1 if rx == 1 else rule.u2
        desired = np.abs(h_direct.conj() @ u_own) ** 2

    other_kind = rule.kind2 if rx == 1 else rule.kind1
    if other_kind is BeamformerKind.MF:
        h_other_direct = draws[(other, other)]
        norms = np.linalg.norm(h_other_direct, axis=1)
        norms = np.where(norms > 0.0, norms, 1.0)
        u_other = h_other_direct / norms[:, None]
        interference = np.abs(np.sum(h_cross.conj() * u_other, axis=1)) ** 2
    else:
        u_other = rule.u2 if rx == 1 else rule.u1
        interference = np.abs(h_cross.conj() @ u_other) ** 2
    return desired, interference


def mc_ergodic_rates(rule: SchemeRule, cov: CovarianceSet, cfg: ScenarioConfig,
                     draws: dict | None = None) -> McEstimate:
    """Sample means and standard errors of both instantaneous rates.

    Per draw, receiver i sees rate log2(1 + p_i * S_i / (N0 + p_other * I_i))
    with the gains given by the scheme's beamforming rule. Passing shared
    `draws` gives common random numbers across schemes.
    """
    if cfg.n_samples < MIN_MC_SAMPLES:
        raise ValidationError(f"n_samples must be at least {MIN_MC_SAMPLES}")
    if draws is None:
        draws = point_draws(cov, cfg.seed, 0, cfg.n_samples)

    stats = []
    for rx, p_own, p_other in ((1, rule.p1, rule.p2), (2, rule.p2, rule.p1)):
        if p_own == 0.0:
            n = draws[(rx, rx)].shape[0]
            rates = np.zeros(n)
        elif rule.kind1 is None:
            lam_min = rule.lam_min_into_1 if rx == 1 else rule.lam_min_into_2
            gain = np.sum(np.abs(draws[(rx, rx)]) ** 2, axis=1)
            rates = np.log2(1.0 + p_own * gain / (cov.n0 + p_other * lam_min))
        else:
            desired, interference = _beam_gains(rule, draws, rx)
            rates = np.log2(1.0 + p_own * desired / (cov.n0 + p_other * interference))
        n = rates.size
        stats.append((float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(n))))
    return McEstimate(mean1=stats[0][0], se1=stats[0][1], mean2=stats[1][0], se2=stats[1][1])


def evaluate_point(base: ScenarioConfig, axis: SweepAxis, point_index: int,
                   value: float, schemes=ALL_SCHEMES) -> RateReport:
    """Full per-point pipeline: gate, strategy table, baselines, Monte Carlo."""
    cfg = point_config(base, axis, value)
    cov = build_covariances(cfg)
    if not check_feasibility(cfg, cov):
        return RateReport(axis_value=value, feasible=False, entries=(), baselines={})

    draws = point_draws(cov, cfg.seed, point_index, cfg.n_samples)
    entries = ()
    baselines = {}

    if SCHEME_COORDINATED in schemes:
        best, table = select_strategy(cfg, cov)
        pair = szf_vectors(cov)
        entries = tuple(
            StrategyEntry(
                strategy=s,
                mc=mc_ergodic_rates(SchemeRule.from_strategy(s, pair), cov, cfg, draws),
                selected=s is best,
            )
            for s in table
        )

    if SCHEME_INTTEMP in schemes:
        res = interference_temperature_scheme(cfg, cov)
        pair = szf_vectors(cov)
        rule = SchemeRule.precoded(res.p1, res.p2, BeamformerKind.MF, BeamformerKind.SZF,
                                   u1=pair[0], u2=pair[1])
        baselines[SCHEME_INTTEMP] = (res, mc_ergodic_rates(rule, cov, cfg, draws))

    if SCHEME_BENCHMARK in schemes:
        res = coordination_benchmark(cfg, cov)
        lam12, lam21 = min_cross_eigenvalues(cov)
        rule = SchemeRule.idealized(res.p1, res.p2, lam_min_into_1=lam12, lam_min_into_2=lam21)
        baselines[SCHEME_BENCHMARK] = (res, mc_ergodic_rates(rule, cov, cfg, draws))

    return RateReport(axis_value=value, feasible=True, entries=entries, baselines=baselines)


def _evaluate_point_args(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, schemes=ALL_SCHEMES, workers: int = 1) -> list:
    """Evaluate every sweep point; point infeasibility is flagged, not fatal."""
    unknown = set(schemes) - set(ALL_SCHEMES)
    if unknown:
        raise ValidationError(f"unknown schemes: {sorted(unknown)}")
    if not schemes:
        raise ValidationError("at least one scheme is required")
    tasks = [(spec.base, spec.axis, i, v, tuple(schemes)) for i, v in enumerate(spec.points)]
    if workers <= 1 or len(tasks) <= 1:
        return [evaluate_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_point_args, tasks))


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".12g")


def report_rows(reports, schemes=ALL_SCHEMES) -> list:
    """Flatten reports into CSV rows, one per (point, scheme)."""
    rows = []
    for rep in reports:
        for scheme in schemes:
            row = {
                "axis_value": _fmt(rep.axis_value),
                "scheme": scheme,
                "strategy": "",
                "kind1": "",
                "kind2": "",
                "policy": "",
                "p1": "nan",
                "p2": "nan",
                "bound_rx1": "nan",
                "bound_rx2": "nan",
                "mc_rx1": "nan",
                "mc_se_rx1": "nan",
                "mc_rx2": "nan",
                "mc_se_rx2": "nan",
                "feasible": "false",
                "selected": "false",
            }
            if rep.feasible:
                if scheme == SCHEME_COORDINATED:
                    entry = next(e for e in rep.entries if e.selected)
                    s, mc = entry.strategy, entry.mc
                    row.update(
                        strategy=s.label,
                        kind1=s.kind1.value,
                        kind2=s.kind2.value,
                        policy=s.policy.value,
                        p1=_fmt(s.resolved_p1),
                        p2=_fmt(s.resolved_p2),
                        bound_rx1=_fmt(s.incumbent_bound.value),
                        bound_rx2=_fmt(s.licensee_bound.value),
                        feasible="true" if s.feasible else "false",
                        selected="true",
                    )
                else:
                    res, mc = rep.baselines[scheme]
                    row.update(
                        strategy=scheme,
                        kind1="MF" if scheme == SCHEME_INTTEMP else "",
                        kind2="SZF" if scheme == SCHEME_INTTEMP else "",
                        policy=res.policy.value if res.policy is not None else "",
                        p1=_fmt(res.p1),
                        p2=_fmt(res.p2),
                        bound_rx1=_fmt(res.incumbent_rate.value),
                        bound_rx2=_fmt(res.licensee_rate.value),
                        feasible="true",
                    )
                row.update(
                    mc_rx1=_fmt(mc.mean1),
                    mc_se_rx1=_fmt(mc.se1),
                    mc_rx2=_fmt(mc.mean2),
                    mc_se_rx2=_fmt(mc.se2),
                )
            rows.append(row)
    return rows


def emit_outputs(reports, out_csv, schemes=ALL_SCHEMES, plots_dir=None, axis=None,
                 tau1=None) -> list:
    """Write the delimited report (and optional figures); returns the rows."""
    if not reports:
        raise ValidationError("nothing to emit: empty report table")
    if not schemes:
        raise ValidationError("nothing to emit: empty scheme list")
    rows = report_rows(reports, schemes=schemes)
    fieldnames = CSV_HEADER.split(",")
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with out_csv.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if plots_dir is not None:
        from .plots import render_sweep_plots

        render_sweep_plots(rows, axis=axis, outdir=plots_dir, tau1=tau1)
    return rows
