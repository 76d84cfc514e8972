"""Monte-Carlo harness for rescaled distances in large random DH graphs.

Two rescalings of a distance (or jump count) ``d`` in a graph with ``m``
labeled vertices besides the root are reported side by side:

* ``literal``   = c_f * d / sqrt(m)
* ``corrected`` = d / (c_f * sqrt(m))

Only the second one has a Rayleigh limit with the constants produced by
``asymptotics`` (c_f = sqrt(2)/gamma). Both are kept so the discrepancy stays
visible in every report.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from . import crt
from .asymptotics import solve_constants
from .enumeration import check_family, enriched_subtree
from .sampler import boltzmann_arenas, exact_sampler, make_rng

CHUNK = 250  # replicates per RNG stream; independent of the worker count
RAYLEIGH_MEAN = math.sqrt(math.pi / 2)


class StatsError(ValueError):
    pass


def rayleigh_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-0.5 * np.square(np.maximum(x, 0))), 0.0)


def rayleigh_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x * np.exp(-0.5 * x * x), 0.0)


def ks_test(samples, cdf) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    xs = np.asarray(samples, dtype=float)
    if xs.size < 20:
        raise StatsError(f"KS test needs at least 20 samples, got {xs.size}")
    res = sps.kstest(xs, cdf, method="asymp")
    return float(res.statistic), float(res.pvalue)


@dataclass
class ExperimentReport:
    family: str
    n: int
    replicates: int
    k: int
    seed: int
    mode: str
    eps: float
    c_f: float
    sizes: list[int] = field(default_factory=list)
    raw: list[list[int]] = field(default_factory=list)  # distances (k=1) or per-edge jumps
    shapes: list[str] = field(default_factory=list)
    literal: list[float] = field(default_factory=list)
    corrected: list[float] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self, with_samples: bool = False) -> dict:
        d = asdict(self)
        if not with_samples:
            for key in ("sizes", "raw", "shapes", "literal", "corrected"):
                d.pop(key)
        return d

    def csv_text(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        meta = dict(header or {})
        meta.update({k: v for k, v in self.to_dict().items() if k != "summary"})
        for key, val in meta.items():
            buf.write(f"# {key}={val}\n")
        for key, val in self.summary.items():
            buf.write(f"# summary.{key}={val}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.k == 1:
            w.writerow(["replicate", "size", "distance", "literal", "corrected"])
            for i, (m, r, a, b) in enumerate(zip(self.sizes, self.raw, self.literal, self.corrected)):
                w.writerow([i, m, r[0], repr(a), repr(b)])
        else:
            edges = [f"jumps_e{j}" for j in range(2 * self.k - 1)]
            w.writerow(["replicate", "size", "shape", *edges, "literal_total", "corrected_total"])
            for i, (m, s, r, a, b) in enumerate(zip(self.sizes, self.shapes, self.raw, self.literal, self.corrected)):
                w.writerow([i, m, s, *r, repr(a), repr(b)])
        return buf.getvalue()

    def svg_text(self) -> str:
        """Histogram of the corrected sample over the limiting density."""
        dens = rayleigh_pdf if self.k == 1 else crt.total_length_pdf(self.k)
        title = f"{self.family} n={self.n} k={self.k} reps={self.replicates}"
        return histogram_svg(self.corrected, dens, title=title)


# -- workers ---------------------------------------------------------------------


def _arenas(family, n, count, rng, mode, eps):
    if mode == "boltzmann":
        return boltzmann_arenas(family, n, count, rng, eps=eps)
    if mode == "exact":
        s = exact_sampler(family, max(n, 8))
        return [s.sample(n, rng).arena for _ in range(count)]
    raise StatsError(f"unknown mode {mode!r}")


def _leaf_nodes(a) -> np.ndarray:
    return np.flatnonzero(np.asarray(a.kind, dtype=object) == "L")


def _two_point_chunk(args):
    family, n, count, seed, chunk, mode, eps = args
    rng = make_rng(seed, 2, chunk)
    out = []
    for a in _arenas(family, n, count, rng, mode, eps):
        leaves = _leaf_nodes(a)
        x, y = rng.choice(leaves, size=2, replace=False).tolist()
        out.append((len(leaves) - 1, a.path_jumps(a.path(x, y)) + 1))
    return out


def _k_point_chunk(args):
    family, n, k, count, seed, chunk, mode, eps = args
    rng = make_rng(seed, 3, chunk, k)
    out = []
    for a in _arenas(family, n, count, rng, mode, eps):
        leaves = _leaf_nodes(a)[1:]
        if len(leaves) < k:
            raise StatsError(f"tree of size {len(leaves)} cannot hold {k} marks")
        picks = rng.choice(leaves, size=k, replace=False).tolist()
        res = enriched_subtree(a, {v: i + 1 for i, v in enumerate(picks)})
        out.append((len(leaves), res.shape_key, list(res.jumps)))
    return out


def _run_chunks(fn, tasks, jobs):
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def _chunks(reps):
    return [(i, min(CHUNK, reps - i * CHUNK)) for i in range((reps + CHUNK - 1) // CHUNK)]


def _check(f, n, reps):
    check_family(f)
    if reps < 100:
        raise StatsError("at least 100 replicates are required")
    if n < 3:
        raise StatsError("n must be at least 3")


# -- experiments -----------------------------------------------------------------


def two_point(
    f: str, n: int, reps: int, seed: int, *, mode: str = "boltzmann", eps: float = 0.1, jobs: int | None = None
) -> ExperimentReport:
    """Distance between two distinct uniform vertices, rescaled both ways."""
    _check(f, n, reps)
    cf = solve_constants(f).c_f
    tasks = [(f, n, cnt, seed, i, mode, eps) for i, cnt in _chunks(reps)]
    rows = [r for part in _run_chunks(_two_point_chunk, tasks, jobs) for r in part]
    rep = ExperimentReport(f, n, reps, 1, seed, mode, eps, cf)
    for m, d in rows:
        rep.sizes.append(m)
        rep.raw.append([d])
        rep.literal.append(cf * d / math.sqrt(m))
        rep.corrected.append(d / (cf * math.sqrt(m)))
    ks_l, p_l = ks_test(rep.literal, rayleigh_cdf)
    ks_c, p_c = ks_test(rep.corrected, rayleigh_cdf)
    rep.summary = {
        "reference_mean": RAYLEIGH_MEAN,
        "literal_mean": float(np.mean(rep.literal)),
        "literal_ks": ks_l,
        "literal_p": p_l,
        "corrected_mean": float(np.mean(rep.corrected)),
        "corrected_ks": ks_c,
        "corrected_p": p_c,
        "mean_size": float(np.mean(rep.sizes)),
        "tolerances": "empirical",
    }
    return rep


def k_point(
    f: str,
    n: int,
    k: int,
    reps: int,
    seed: int,
    *,
    mode: str = "boltzmann",
    eps: float = 0.1,
    jobs: int | None = None,
) -> ExperimentReport:
    """Induced shape and per-edge jumps spanned by the root and k uniform vertices."""
    _check(f, n, reps)
    if k < 2:
        raise StatsError("k must be at least 2")
    cf = solve_constants(f).c_f
    tasks = [(f, n, k, cnt, seed, i, mode, eps) for i, cnt in _chunks(reps)]
    rows = [r for part in _run_chunks(_k_point_chunk, tasks, jobs) for r in part]
    rep = ExperimentReport(f, n, reps, k, seed, mode, eps, cf)
    degenerate = 0
    for m, key, jumps in rows:
        if key == "degenerate":
            degenerate += 1
            continue
        total = sum(jumps)
        rep.sizes.append(m)
        rep.shapes.append(key)
        rep.raw.append(jumps)
        rep.literal.append(cf * total / math.sqrt(m))
        rep.corrected.append(total / (cf * math.sqrt(m)))
    keys = [crt.shape_key(s) for s in crt.kproper_shapes(k)]
    counts = {key: rep.shapes.count(key) for key in keys}
    good = len(rep.shapes)
    p0 = 1 / len(keys)
    sigma = math.sqrt(p0 * (1 - p0) / good) if good else float("inf")
    freqs = {key: c / good for key, c in counts.items()} if good else {}
    chi = sps.chisquare([counts[key] for key in keys]) if len(keys) > 1 else None
    cdf = crt.total_length_cdf(k)
    ks_l, p_l = ks_test(rep.literal, cdf)
    ks_c, p_c = ks_test(rep.corrected, cdf)
    rep.summary = {
        "degenerate": degenerate,
        "shape_counts": counts,
        "shape_freqs": freqs,
        "shape_sigma": sigma,
        "shape_within_3sigma": all(abs(fr - p0) <= 3 * sigma for fr in freqs.values()),
        "shape_chi2_p": float(chi.pvalue) if chi is not None else 1.0,
        "literal_ks": ks_l,
        "literal_p": p_l,
        "corrected_ks": ks_c,
        "corrected_p": p_c,
        "tolerances": "empirical",
    }
    return rep


def ks_decrease(f: str, small: int, large: int, reps: int, seeds, **kw) -> list[dict]:
    """Matched two-point runs at two sizes, one row per seed batch."""
    rows = []
    for s in seeds:
        a = two_point(f, small, reps, s, **kw)
        b = two_point(f, large, reps, s, **kw)
        rows.append(
            {
                "seed": s,
                "literal": (a.summary["literal_ks"], b.summary["literal_ks"]),
                "corrected": (a.summary["corrected_ks"], b.summary["corrected_ks"]),
                "large_report": b,
            }
        )
    return rows


# -- SVG ---------------------------------------------------------------------------


def histogram_svg(values, density, *, bins: int = 40, title: str = "", width: int = 640, height: int = 400) -> str:
    xs = np.asarray(values, dtype=float)
    hi = float(max(np.quantile(xs, 0.995) * 1.1, 1e-9)) if xs.size else 1.0
    hist, edges = np.histogram(xs, bins=bins, range=(0, hi), density=True)
    grid = np.linspace(0, hi, 200)
    ref = np.asarray(density(grid), dtype=float)
    top = float(max(hist.max(initial=0), ref.max(initial=0), 1e-9)) * 1.1
    ml, mr, mt, mb = 50, 20, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + pw * x / hi

    def py(y):
        return mt + ph * (1 - y / top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="13">{title}</text>',
    ]
    for h, a, b in zip(hist, edges[:-1], edges[1:]):
        out.append(
            f'<rect x="{px(a):.2f}" y="{py(h):.2f}" width="{px(b) - px(a):.2f}" height="{py(0) - py(h):.2f}" '
            'fill="#9ecae1" stroke="#3182bd" stroke-width="0.5"/>'
        )
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(grid, ref))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#de2d26" stroke-width="2"/>')
    out.append(f'<line x1="{ml}" y1="{py(0)}" x2="{ml + pw}" y2="{py(0)}" stroke="black"/>')
    out.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{py(0)}" stroke="black"/>')
    for t in np.linspace(0, hi, 6):
        out.append(
            f'<text x="{px(t):.2f}" y="{py(0) + 16:.2f}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{t:.2f}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
