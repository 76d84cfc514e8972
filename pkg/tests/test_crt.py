from __future__ import annotations

import collections
import itertools
import math

import numpy as np
import pytest
from scipy import stats

from splitlimit import crt
from splitlimit.sampler import make_rng


def test_shape_counts():
    for k in range(1, 6):
        assert len(crt.kproper_shapes(k)) == crt.double_factorial(2 * k - 3)


def test_k1_shape():
    rng = make_rng(0)
    shape, lengths = crt.sample_kproper(1, rng)
    assert shape == 1 and lengths.shape == (1,)
    m = crt.distance_matrix(shape, lengths)
    assert m[0, 1] == lengths[0]


def test_k2_single_shape():
    rng = make_rng(1, 2)
    assert {crt.shape_key(crt.sample_shape(2, rng)) for _ in range(200)} == {"(1,2)"}


@pytest.mark.parametrize("k", [3, 4])
def test_uniform_shapes(k):
    rng = make_rng(1, k)
    draws = 100_000 if k == 3 else 20_000
    keys = [crt.shape_key(s) for s in crt.kproper_shapes(k)]
    freq = collections.Counter(crt.shape_key(crt.sample_shape(k, rng)) for _ in range(draws))
    assert set(freq) == set(keys)
    p0 = 1 / len(keys)
    sigma = math.sqrt(p0 * (1 - p0) / draws)
    if k == 3:
        assert all(abs(freq[key] / draws - p0) < 3 * sigma for key in keys)
    assert stats.chisquare([freq[key] for key in keys]).pvalue > 0.001


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_internal_degrees(k):
    layout = crt.edge_layout(crt.kproper_shapes(k)[-1])
    assert layout.n_edges == 2 * k - 1
    assert len(layout.branches) == k - 1  # each branch point has degree 3


def test_rayleigh_mean():
    x = crt.sample_lengths(1, make_rng(2), size=100_000)[:, 0]
    assert abs(x.mean() - crt.rayleigh_mean()) < 4 * x.std() / math.sqrt(x.size)
    assert stats.kstest(x, "rayleigh").pvalue > 0.001


def test_factorization_vs_rejection_k2():
    rng = make_rng(3)
    a = crt.sample_lengths(2, rng, size=100_000)
    b = crt.sample_lengths_rejection(2, rng, 100_000)
    assert stats.ks_2samp(a.sum(1), b.sum(1)).pvalue > 0.001
    assert stats.ks_2samp(a[:, 0], b[:, 0]).pvalue > 0.001


def test_total_length_law():
    s = crt.sample_lengths(3, make_rng(4), size=50_000).sum(1)
    assert stats.kstest(s, crt.total_length_cdf(3)).pvalue > 0.001


def test_zero_lengths():
    shape = crt.kproper_shapes(3)[0]
    assert not crt.distance_matrix(shape, np.zeros(5)).any()


def test_four_point_condition():
    rng = make_rng(5)
    for _ in range(50):
        shape, lengths = crt.sample_kproper(4, rng)
        d = crt.distance_matrix(shape, lengths)
        assert np.allclose(d, d.T) and not np.diag(d).any() and (d[~np.eye(5, dtype=bool)] > 0).all()
        for i, j, k, l in itertools.combinations(range(5), 4):
            sums = sorted([d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]])
            assert sums[2] - sums[1] < 1e-9


def test_exchangeable_marks():
    rng = make_rng(6)
    a, b = [], []
    for _ in range(20_000):
        shape, lengths = crt.sample_kproper(3, rng)
        d = crt.distance_matrix(shape, lengths)
        a.append(d[1, 2])
        b.append(d[2, 3])
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_bad_length_vector():
    with pytest.raises(ValueError):
        crt.distance_matrix(crt.kproper_shapes(2)[0], [1.0])
