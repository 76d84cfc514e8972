"""Small two-point distance run, both normalisations side by side."""

from __future__ import annotations

import sys

from splitlimit.stats import RAYLEIGH_MEAN, two_point

n = int(sys.argv[1]) if len(sys.argv) > 1 else 500
for f in ("dh", "dh2c", "leaf3"):
    s = two_point(f, n, 400, seed=1).summary
    print(
        f"{f:6s} n={n} c_f*d/sqrt(n): mean {s['literal_mean']:.3f} KS {s['literal_ks']:.3f} | "
        f"d/(c_f*sqrt(n)): mean {s['corrected_mean']:.3f} KS {s['corrected_ks']:.3f} | "
        f"Rayleigh mean {RAYLEIGH_MEAN:.3f}"
    )
