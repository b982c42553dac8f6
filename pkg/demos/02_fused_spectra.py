"""
Spectra of fused covariance matrices
====================================

Two independent noise covariances S0 and S1 are asymptotically free. The
limiting spectrum of the linear fusion S0 + S1 follows from scalar
subordination. The spectrum of the nonlinear fusion S0 S1 + S1 S0 comes from
a 3 x 3 linearization and operator-valued subordination.
"""

import time
from pathlib import Path

import numpy as np

from freefusion import Histogram, MpParams, asd_p1, asd_p2, ks_distance
from freefusion.svgplot import render_overlay

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

t0 = time.perf_counter()
p1 = asd_p1(MpParams(), MpParams())
print(f"P1 bound in {time.perf_counter() - t0:.2f} s, support {p1.support}")
# S0 + S1 with c = 1 is a free Poisson law of rate 2
print("exact edges", 3 - 2 * np.sqrt(2), 3 + 2 * np.sqrt(2))

t0 = time.perf_counter()
p2 = asd_p2(MpParams(), MpParams())
print(f"P2 bound in {time.perf_counter() - t0:.2f} s, support {p2.support}")
print("P2 mass", round(p2.mass(), 5), "mean", round(p2.moment(1), 4), "(free value 2)")

# finite matrices
n = 600
gen = np.random.default_rng(1)
X, Y = gen.standard_normal((n, n)), gen.standard_normal((n, n))
S0, S1 = X @ X.T / n, Y @ Y.T / n
e1 = np.linalg.eigvalsh(S0 + S1)
e2 = np.linalg.eigvalsh(S0 @ S1 + S1 @ S0)
print("KS P1:", round(ks_distance(e1, p1), 4), " KS P2:", round(ks_distance(e2, p2), 4))

(out / "p1.svg").write_text(render_overlay(
    [("S0 + S1 limit", p1)], [("N = 600", Histogram.from_samples(e1, bins=60))],
    title="Linear fusion"))
(out / "p2.svg").write_text(render_overlay(
    [("S0 S1 + S1 S0 limit", p2)], [("N = 600", Histogram.from_samples(e2, bins=80))],
    title="Nonlinear fusion"))
