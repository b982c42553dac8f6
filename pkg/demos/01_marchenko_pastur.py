"""
The Marchenko-Pastur law
========================

Eigenvalues of a sample covariance matrix built from pure noise do not
cluster at 1. For N x T data with c = N/T they spread over
[(1 - sqrt(c))^2, (1 + sqrt(c))^2]. This script tabulates that law, checks it
against its own Cauchy transform, and compares it with simulated matrices.
"""

from pathlib import Path

import numpy as np

from freefusion import MpParams, empirical_spectrum, ks_distance, mp_cauchy_closed, mp_density, stieltjes_invert
from freefusion.svgplot import render_overlay

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

# square data (c = 1): the density blows up like 1/sqrt(x) at the origin
p = MpParams(sigma2=1.0, c=1.0)
d = mp_density(p)
print("support", d.support, "mass", round(d.mass(), 6), "mean", round(d.moment(1), 6))

# recover the same curve from G(z) just above the real axis
inv = stieltjes_invert(lambda z: mp_cauchy_closed(p, z), d.grid, eps=1e-4)
inner = (d.grid > 0.05) & (d.grid < 3.95)
print("inversion error away from the edges:", np.abs(inv.values - d.values)[inner].max())

# a rectangular case for comparison
thin = mp_density(MpParams(1.0, 0.25))
print("c = 0.25 support", thin.support)

# 118 nodes, 118 samples, 100 noisy trials
gen = np.random.default_rng(0)
h = empirical_spectrum(gen.standard_normal((118, 118)), trials=100, rng=0)
print("KS distance of the simulated spectrum:", round(ks_distance(h.eigenvalues(), d), 4))

svg = render_overlay([("MP c=1", d), ("MP c=0.25", thin)], [("simulated c=1", h)],
                     title="Marchenko-Pastur law")
(out / "marchenko_pastur.svg").write_text(svg)
