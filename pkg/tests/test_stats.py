from __future__ import annotations

import math

import numpy as np
import pytest

from splitlimit import stats as st
from splitlimit.sampler import make_rng


def test_ks_examples():
    rng = make_rng(0)
    u = rng.random(10_000)
    assert st.ks_test(u, lambda x: np.clip(x, 0, 1))[1] > 0.001
    assert st.ks_test(u, st.rayleigh_cdf)[1] < 1e-6
    r = np.sqrt(-2 * np.log(rng.random(10_000)))
    assert st.ks_test(r, st.rayleigh_cdf)[1] > 0.001
    with pytest.raises(st.StatsError):
        st.ks_test([0.1] * 19, st.rayleigh_cdf)


def test_two_point_report_shape():
    rep = st.two_point("dh", 200, 100, 5)
    assert rep.replicates == 100 and len(rep.literal) == 100
    for d, m, lit, cor in zip(rep.raw, rep.sizes, rep.literal, rep.corrected):
        assert d[0] >= 1
        assert lit == pytest.approx(rep.c_f * d[0] / math.sqrt(m))
        assert cor == pytest.approx(d[0] / (rep.c_f * math.sqrt(m)))
    assert set(rep.summary) >= {"literal_mean", "literal_ks", "corrected_mean", "corrected_ks"}


def test_reproducible_and_job_independent():
    a = st.two_point("leaf3", 150, 300, 9, jobs=1)
    b = st.two_point("leaf3", 150, 300, 9, jobs=2)
    assert a.raw == b.raw and a.summary == b.summary


def test_exact_mode_small():
    rep = st.two_point("dh2c", 20, 100, 1, mode="exact")
    assert all(m == 20 for m in rep.sizes)


def test_k_point_report():
    rep = st.k_point("dh", 300, 3, 150, 2)
    assert rep.summary["degenerate"] + len(rep.shapes) == 150
    assert sum(rep.summary["shape_counts"].values()) == len(rep.shapes)
    assert all(len(j) == 5 for j in rep.raw)
    with pytest.raises(st.StatsError):
        st.k_point("dh", 300, 1, 150, 2)


def test_guards():
    with pytest.raises(st.StatsError):
        st.two_point("dh", 200, 50, 1)
    with pytest.raises(ValueError):
        st.two_point("zz", 200, 100, 1)


def test_csv_and_svg():
    rep = st.two_point("dh", 100, 100, 3)
    text = rep.csv_text({"version": "x"})
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines[0] == "replicate,size,distance,literal,corrected"
    assert len(lines) == 101
    assert "# version=x" in text
    svg = rep.svg_text()
    assert svg.startswith("<svg") and "polyline" in svg
    krep = st.k_point("leaf3", 100, 2, 100, 3)
    assert krep.csv_text().splitlines()[-101].startswith("replicate,size,shape,jumps_e0")
