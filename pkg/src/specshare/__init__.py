"""Statistically coordinated precoding for a two-pair MISO shared-spectrum system.

A simulation library and CLI: beamformer design, QoS-constrained power
control on closed-form ergodic-rate lower bounds, strategy selection, two
reference schemes, and a Monte Carlo harness that verifies every closed
form against sampled correlated Rayleigh channels.
"""

from .baselines import (
    BaselineResult,
    BaselineScheme,
    coordination_benchmark,
    interference_temperature_scheme,
)
from .channel import (
    ChannelDraw,
    CovarianceSet,
    ScenarioConfig,
    build_covariances,
    load_config,
    sample_channel_batch,
    sample_channels,
    substream,
)
from .coordination import (
    Beamformer,
    PowerPolicy,
    Strategy,
    check_feasibility,
    interference_free_rate,
    mf_beamformer,
    resolve_power,
    select_strategy,
    strategy_table,
    szf_beamformer,
    szf_vectors,
)
from .harness import (
    McEstimate,
    RateReport,
    SchemeRule,
    StrategyEntry,
    SweepAxis,
    SweepSpec,
    emit_outputs,
    evaluate_point,
    mc_ergodic_rates,
    run_sweep,
)
from .numerics import (
    EigenSystem,
    eigh,
    exp_integral_e1,
    exp_scaled_e1,
    psd_inv_sqrt,
    psd_sqrt,
)
from .rates import (
    BeamformerKind,
    RateBound,
    ergodic_rate_fixed_beam,
    ergodic_rate_full_gain,
    expected_quadratic_ratio,
    mf_interference_gain,
    rate_lower_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineResult",
    "BaselineScheme",
    "Beamformer",
    "BeamformerKind",
    "ChannelDraw",
    "CovarianceSet",
    "EigenSystem",
    "McEstimate",
    "PowerPolicy",
    "RateBound",
    "RateReport",
    "ScenarioConfig",
    "SchemeRule",
    "Strategy",
    "StrategyEntry",
    "SweepAxis",
    "SweepSpec",
    "build_covariances",
    "check_feasibility",
    "coordination_benchmark",
    "eigh",
    "emit_outputs",
    "ergodic_rate_fixed_beam",
    "ergodic_rate_full_gain",
    "evaluate_point",
    "exp_integral_e1",
    "exp_scaled_e1",
    "expected_quadratic_ratio",
    "interference_free_rate",
    "interference_temperature_scheme",
    "load_config",
    "mc_ergodic_rates",
    "mf_beamformer",
    "mf_interference_gain",
    "psd_inv_sqrt",
    "psd_sqrt",
    "rate_lower_bound",
    "resolve_power",
    "run_sweep",
    "sample_channel_batch",
    "sample_channels",
    "select_strategy",
    "strategy_table",
    "substream",
    "szf_beamformer",
    "szf_vectors",
    "__version__",
]
