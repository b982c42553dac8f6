"""
Detecting grid events from eigenvalue outliers
==============================================

Six synthetic 118-node windows stand in for a power grid: a reference, a
step change, two slow ramps, a voltage-collapse-like oscillation and plain
noise. Each event window is tested on its own (P0) and fused with the
reference linearly (P1) and nonlinearly (P2). Outliers beyond the theoretical
support reject the noise-only hypothesis, and their size ranks the events.
"""

from pathlib import Path

from freefusion import run_battery, theoretical_bound
from freefusion.svgplot import render_overlay

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

labels = ["noise", "rampA", "rampB", "step", "collapse"]
print(f"{'':4}" + "".join(f"{k:>16}" for k in labels))
for poly in ["p0", "p1", "p2"]:
    bound = theoretical_bound(poly)
    res = run_battery(poly=poly, seed=0, bound=bound)
    cells = [f"{res.reports[k].decision.value} {res.reports[k].max_upper_excess:6.2f}" for k in labels]
    print(f"{poly:4}" + "".join(f"{c:>16}" for c in cells))
    print("     severity order:", " < ".join(res.ranking))
    hists = [(k, res.histograms[k]) for k in ("noise", "rampA")]
    (out / f"battery_{poly}.svg").write_text(
        render_overlay([(f"{poly} bound", bound)], hists, title=f"{poly}: noise vs ramp A"))

# P0 catches the ramps as well; fusion mainly adds a reference-calibrated ranking.
