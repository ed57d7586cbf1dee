import dataclasses
import shutil
import subprocess

import numpy as np
import pytest

import specshare.cli as cli
from specshare.channel import ScenarioConfig, build_covariances
from specshare.coordination import szf_vectors
from specshare.errors import ValidationError
from specshare.harness import (
    ALL_SCHEMES,
    CSV_HEADER,
    McEstimate,
    SchemeRule,
    SweepAxis,
    SweepSpec,
    emit_outputs,
    evaluate_point,
    mc_ergodic_rates,
    point_draws,
    run_sweep,
)
from specshare.numerics import eigh
from specshare.rates import BeamformerKind, ergodic_rate_full_gain

MF = BeamformerKind.MF
SZF = BeamformerKind.SZF


@pytest.fixture(scope="module")
def small_cfg():
    return ScenarioConfig(n_samples=4000)


@pytest.fixture(scope="module")
def small_spec(small_cfg):
    return SweepSpec(axis=SweepAxis.SNR_DB, points=(0.0, 10.0, 20.0), base=small_cfg)


def test_sweep_spec_validation(small_cfg):
    with pytest.raises(ValidationError):
        SweepSpec(axis=SweepAxis.SNR_DB, points=(), base=small_cfg)
    with pytest.raises(ValidationError):
        SweepSpec(axis=SweepAxis.SNR_DB, points=(1.0, 1.0), base=small_cfg)
    with pytest.raises(ValidationError):
        SweepSpec(axis=SweepAxis.SNR_DB, points=(2.0, 1.0), base=small_cfg)


def test_mc_zero_powers_give_zero_rates(small_cfg, default_cov):
    rule = SchemeRule.precoded(0.0, 0.0, MF, MF)
    est = mc_ergodic_rates(rule, default_cov, small_cfg)
    assert est.mean1 == 0.0
    assert est.mean2 == 0.0


def test_mc_matches_closed_form_without_interference(small_cfg, default_cov):
    # silent TX 2: the matched-filter rate closed form is exact, not a bound
    cfg = dataclasses.replace(small_cfg, n_samples=20000)
    rule = SchemeRule.precoded(cfg.p1_max, 0.0, MF, MF)
    est = mc_ergodic_rates(rule, default_cov, cfg)
    closed = ergodic_rate_full_gain(cfg.p1_max / cfg.n0, eigh(default_cov.r11).eigenvalues)
    assert abs(est.mean1 - closed) < 3.0 * est.se1
    assert est.mean2 == 0.0


def test_mc_rejects_tiny_sample_counts(default_cov):
    cfg = ScenarioConfig(n_samples=50)
    with pytest.raises(ValidationError):
        mc_ergodic_rates(SchemeRule.precoded(1.0, 1.0, MF, MF), default_cov, cfg)


def test_point_draws_prefix_property(default_cov):
    # batched substreams: a shorter run is a prefix of a longer one
    short = point_draws(default_cov, seed=3, point_index=2, n_samples=5000)
    long = point_draws(default_cov, seed=3, point_index=2, n_samples=20000)
    for link in short:
        assert np.array_equal(short[link], long[link][:5000])


def test_point_draws_batch_layout_is_stable(default_cov):
    # odd sample counts split into the same batches regardless of caller
    a = point_draws(default_cov, seed=3, point_index=0, n_samples=7500)
    b = point_draws(default_cov, seed=3, point_index=0, n_samples=7500, batch=5000)
    for link in a:
        assert np.array_equal(a[link], b[link])
    assert a[(1, 1)].shape == (7500, 4)


def test_common_random_numbers_reduce_comparison_noise(small_cfg, default_cov):
    # identical rules on shared draws agree exactly
    draws = point_draws(default_cov, small_cfg.seed, 0, small_cfg.n_samples)
    pair = szf_vectors(default_cov)
    rule = SchemeRule.precoded(5.0, 5.0, MF, SZF, u1=pair[0], u2=pair[1])
    a = mc_ergodic_rates(rule, default_cov, small_cfg, draws)
    b = mc_ergodic_rates(rule, default_cov, small_cfg, draws)
    assert a == b


def test_se_scales_with_inverse_sqrt_samples(default_cov):
    # same seed family: nested draws across 5e3 / 2e4 / 8e4
    rule = SchemeRule.precoded(10.0, 10.0, MF, MF)
    ses = []
    for n in (5000, 20000, 80000):
        cfg = ScenarioConfig(n_samples=n)
        draws = point_draws(default_cov, cfg.seed, 0, n)
        est = mc_ergodic_rates(rule, default_cov, cfg, draws)
        ses.append(est.se1)
    for larger, smaller in zip(ses[:-1], ses[1:]):
        assert larger / smaller == pytest.approx(2.0, rel=0.2)


def test_single_point_sweep_matches_direct_invocation(small_cfg):
    spec = SweepSpec(axis=SweepAxis.SNR_DB, points=(10.0,), base=small_cfg)
    via_sweep = run_sweep(spec)[0]
    direct = evaluate_point(small_cfg, SweepAxis.SNR_DB, 0, 10.0)
    assert via_sweep == direct


def test_run_sweep_rejects_bad_schemes(small_spec):
    with pytest.raises(ValidationError):
        run_sweep(small_spec, schemes=("coordinated", "genie"))
    with pytest.raises(ValidationError):
        run_sweep(small_spec, schemes=())


def test_infeasible_points_are_flagged_not_fatal(small_cfg):
    cfg = dataclasses.replace(small_cfg, tau1=2.2)  # infeasible at SNR 0 only
    spec = SweepSpec(axis=SweepAxis.SNR_DB, points=(0.0, 10.0), base=cfg)
    reports = run_sweep(spec)
    assert not reports[0].feasible
    assert reports[1].feasible


def test_emit_outputs_golden(tmp_path, small_spec):
    reports = run_sweep(small_spec)
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    emit_outputs(reports, out_a)
    emit_outputs(run_sweep(small_spec), out_b)
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(small_spec.points) * len(ALL_SCHEMES)
    selected = [l for l in lines[1:] if l.endswith(",true")]
    assert len(selected) == len(small_spec.points)  # exactly one per point


def test_emit_outputs_validation(tmp_path, small_spec):
    with pytest.raises(ValidationError):
        emit_outputs([], tmp_path / "x.csv")
    reports = run_sweep(small_spec, schemes=("coordinated",))
    with pytest.raises(ValidationError):
        emit_outputs(reports, tmp_path / "x.csv", schemes=())


def test_worker_counts_agree(tmp_path, small_spec):
    serial = run_sweep(small_spec, workers=1)
    pooled = run_sweep(small_spec, workers=2)
    out_1 = tmp_path / "w1.csv"
    out_2 = tmp_path / "w2.csv"
    emit_outputs(serial, out_1)
    emit_outputs(pooled, out_2)
    assert out_1.read_bytes() == out_2.read_bytes()


def test_row_counts_five_points(tmp_path, small_cfg):
    cfg = dataclasses.replace(small_cfg, n_samples=500)
    spec = SweepSpec(axis=SweepAxis.TAU1, points=(0.5, 1.0, 1.5, 2.0, 2.5), base=cfg)
    rows = emit_outputs(run_sweep(spec), tmp_path / "five.csv")
    assert len(rows) == 15


def test_cli_sweep_writes_csv_and_plots(tmp_path):
    out = tmp_path / "sweep.csv"
    plots = tmp_path / "figs"
    code = cli.main([
        "sweep", "--axis", "snr", "--points", "5,15", "--samples", "800",
        "--seed", "7", "--out", str(out), "--plots", str(plots),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    pngs = sorted(p.name for p in plots.glob("*.png"))
    assert pngs == ["rate_rx1_vs_snr.png", "rate_rx2_vs_snr.png"]


def test_cli_sweep_scheme_filter(tmp_path):
    out = tmp_path / "two.csv"
    code = cli.main([
        "sweep", "--axis", "tau1", "--points", "0.5,1.0", "--samples", "500",
        "--schemes", "coordinated,benchmark", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    assert not any(",inttemp," in l for l in lines)


def test_cli_sweep_config_file(tmp_path):
    cfg_file = tmp_path / "scenario.cfg"
    cfg_file.write_text("tau1 = 1.5\nn_samples = 600\nseed = 3\n")
    out = tmp_path / "cfg.csv"
    code = cli.main(["sweep", "--axis", "snr", "--points", "10",
                     "--config", str(cfg_file), "--out", str(out)])
    assert code == 0
    assert out.exists()


def test_cli_exit_codes(tmp_path):
    # infeasible scenario -> 2
    cfg_file = tmp_path / "hard.cfg"
    cfg_file.write_text("tau1 = 99\n")
    assert cli.main(["strategies", "--config", str(cfg_file)]) == 2
    out = tmp_path / "never.csv"
    code = cli.main(["sweep", "--axis", "snr", "--points", "0,2",
                     "--config", str(cfg_file), "--samples", "500", "--out", str(out)])
    assert code == 2
    # bad config -> 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("frequency = 2.4\n")
    assert cli.main(["strategies", "--config", str(bad)]) == 1


def test_cli_strategies_prints_table(capsys):
    assert cli.main(["strategies"]) == 0
    out = capsys.readouterr().out
    assert "MF-MF-P1" in out
    assert "SZF-SZF-P2" in out
    assert "*" in out


def test_cli_verify_quick(capsys):
    code = cli.main(["verify-lemmas", "--samples", "20000", "--inputs", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("PASS") == 6
    assert "6/6 checks passed" in out


@pytest.mark.skipif(shutil.which("specshare") is None, reason="console script not on PATH")
def test_console_script_entry_point():
    proc = subprocess.run(["specshare", "strategies"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "MF-MF-P1" in proc.stdout
