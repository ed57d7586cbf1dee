"""Figure rendering for sweep reports (written next to the CSV)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SCHEME_STYLE = {
    "coordinated": dict(color="tab:blue", marker="o", label="coordinated"),
    "inttemp": dict(color="tab:red", marker="s", label="interference temperature"),
    "benchmark": dict(color="tab:green", marker="^", label="benchmark"),
}

AXIS_LABEL = {
    "snr": "transmit SNR (dB)",
    "tau1": "incumbent QoS threshold (bits/s/Hz)",
}


def render_sweep_plots(rows, axis, outdir, tau1=None) -> list:
    """One figure per receiver: Monte Carlo rate vs the sweep axis.

    Error bars are 3 standard errors; dashed lines show the closed-form
    bounds. Returns the written file paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    axis = getattr(axis, "value", axis) or "axis"

    written = []
    for rx in (1, 2):
        fig, ax = plt.subplots(figsize=(7, 5))
        for scheme, style in SCHEME_STYLE.items():
            pts = [r for r in rows if r["scheme"] == scheme and r["feasible"] == "true"]
            if not pts:
                continue
            xs = [float(r["axis_value"]) for r in pts]
            mc = [float(r[f"mc_rx{rx}"]) for r in pts]
            se = [3.0 * float(r[f"mc_se_rx{rx}"]) for r in pts]
            bound = [float(r[f"bound_rx{rx}"]) for r in pts]
            ax.errorbar(xs, mc, yerr=se, capsize=3, linewidth=1.5, **style)
            ax.plot(xs, bound, linestyle="--", linewidth=1.0, alpha=0.6,
                    color=style["color"])
        if rx == 1:
            if axis == "tau1":
                taus = sorted({float(r["axis_value"]) for r in rows})
                ax.plot(taus, taus, color="gray", linestyle=":", label="threshold")
            elif tau1 is not None:
                ax.axhline(tau1, color="gray", linestyle=":", label="threshold")
        ax.set_xlabel(AXIS_LABEL.get(axis, axis))
        ax.set_ylabel(f"ergodic rate of RX {rx} (bits/s/Hz)")
        ax.set_title(f"RX {rx} rate vs {AXIS_LABEL.get(axis, axis)}")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=9)
        fig.tight_layout()
        path = outdir / f"rate_rx{rx}_vs_{axis}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
