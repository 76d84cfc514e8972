from __future__ import annotations

import math

import mpmath
import pytest

from splitlimit import asymptotics as A
from splitlimit import enumeration as en
from splitlimit.series import evaluate


def test_dh_constants():
    c = A.solve_constants("dh")
    assert abs(c.rho - 0.1597) < 1e-4
    assert abs(c.gamma_H - 3.9258) < 1e-4
    assert abs(c.c_f - 0.3602) < 1e-4
    assert abs(2 * c.F_at_rho**2 + 2 * c.F_at_rho - 1) < 1e-15


def test_other_family_constants():
    c2 = A.solve_constants("dh2c")
    assert abs(c2.gamma_H - 7.5022) < 1e-4 and abs(c2.c_f - 0.1885) < 1e-4
    s = c2.exact["F_at_rho"]
    with mpmath.workprec(128):
        assert abs(s - mpmath.expm1(2 * s - mpmath.mpf(1) / 2)) < mpmath.mpf(10) ** -30
        assert abs(c2.exact["rho"] - (2 * s * s + 2 * s - 1)) < mpmath.mpf(10) ** -30
    c3 = A.solve_constants("leaf3")
    assert abs(c3.gamma_H - 1.5263) < 1e-4 and abs(c3.c_f - 0.9266) < 1e-4
    assert c3.rho == pytest.approx(math.log(1 + math.exp(-1)), abs=1e-15)


@pytest.mark.parametrize("f", en.FAMILIES)
def test_scaling_constant_definition(f):
    c = A.solve_constants(f)
    assert c.c_f == pytest.approx(math.sqrt(2) / c.gamma_H, rel=1e-14)


@pytest.mark.parametrize("f", en.FAMILIES)
def test_constant_identities(f):
    rep = A.verify_constant_identities(f)
    assert rep.ok, rep.failures()


def test_leaf3_amplitude_closed_form():
    c = A.solve_constants("leaf3")
    with mpmath.workprec(128):
        r = c.exact["gamma_H"] ** 2 - 2 * (1 + mpmath.e) * mpmath.log(1 + mpmath.exp(-1))
    assert abs(r) < 1e-12


@pytest.mark.parametrize("f", en.FAMILIES)
def test_precision_doubling_is_stable(f):
    lo, hi = A.solve_constants(f, 128), A.solve_constants(f, 256)
    for key in ("rho", "F_at_rho", "gamma_F", "gamma_D", "gamma_H", "c_f"):
        assert abs(getattr(lo, key) - getattr(hi, key)) < 1e-15, key


def test_jump_series_tends_to_one_from_below():
    c = A.solve_constants("dh")
    H = en.H_series("dh", 300)
    vals = []
    for e in (0.2, 0.1, 0.05):
        v, _ = evaluate(H, c.rho * (1 - e), radius=c.rho, tol=mpmath.mpf("1e-6"))
        vals.append(float(v))
    assert vals[0] < vals[1] < vals[2] < 1


def test_singular_slope_matches_gamma_F():
    out = A.singular_slope_check()
    assert out["relative_error"] < 0.05


def test_semilarge_leaf3_small_n():
    r = A.semilarge_check("leaf3", 100)
    assert 0.85 < r.ratio < 1.15
    assert r.a_n == 10


def test_semilarge_rejects_tiny_power():
    with pytest.raises(ValueError):
        A.semilarge_check("dh", 4, 0.1)
