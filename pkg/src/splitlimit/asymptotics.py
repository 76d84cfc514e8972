"""Singularities, square-root amplitudes and the scaling constants of each family.

Every family series Y solves ``Y = G(z, Y)`` with G analytic, and meets its
dominant singularity where ``G_y = 1``. Near it ``Y = Y(rho) - gamma_Y sqrt(1 - z/rho)``
with ``gamma_Y = sqrt(2 rho G_z / G_yy)``; any analytic function of (z, Y)
inherits an amplitude by the chain rule.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath

from . import enumeration as en
from .series import TruncatedSeries, evaluate, exp_ge

TYPES = ("K", "SX", "SC")


class BracketError(ValueError):
    pass


def _root(fn: Callable, lo, hi, *, max_iter: int = 400):
    """Bisection to bracket, then Newton steps that fall back to bisection."""
    lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{mpmath.nstr(lo, 8)}, {mpmath.nstr(hi, 8)}]")
    for _ in range(20):
        mid = (lo + hi) / 2
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = (lo + hi) / 2
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec + 4)
    for _ in range(max_iter):
        fx = fn(x)
        if fx == 0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = mpmath.diff(fn, x)
        step = fx / d if d != 0 else mpmath.inf
        nxt = x - step
        if not (lo < nxt < hi):
            nxt = (lo + hi) / 2
        if abs(nxt - x) <= eps * max(1, abs(x)) or hi - lo <= eps * max(1, abs(x)):
            return nxt
        x = nxt
    return x


@dataclass
class FamilyConstants:
    family: str
    precision: int
    rho: float
    F_at_rho: float
    gamma_F: float
    gamma_D: float
    gamma_H: float
    c_f: float
    gamma_K: float | None = None
    gamma_X: float | None = None
    mu: float | None = None
    nu: float | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    exact: dict = field(default_factory=dict, repr=False)  # mpf values

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("exact")
        return out


# -- per-family analytic data ---------------------------------------------------


def _dh_G(z, w):
    return mpmath.exp(z / 2 + w / (2 * (1 + w)) + w * w / (1 + w)) - 1


def _dh2c_G(z, w):
    return mpmath.exp(z + (w - z) / (2 * (1 + w)) + (w * w - z * w) / (1 + w)) - 1


def _leaf3_G(z, y):
    L = mpmath.exp(z) - 1
    return L * (mpmath.exp(L + y) - 1)


def _jump_series(f: str):
    """The jump kernel as a function of (z, Y)."""
    if f == "dh":
        return lambda z, w: w / ((1 + w) * (1 - 2 * w))
    if f == "dh2c":
        return lambda z, w: (w - z) / ((1 + w) * (1 - 2 * w))
    return lambda z, y: (mpmath.exp(z) - 1) * mpmath.exp(mpmath.exp(z) - 1 + y)


def _total_series(f: str):
    """Total class series as a function of (z, Y)."""
    if f == "dh":
        return lambda z, w: w / (1 + w) - z + w * w / (1 + w)
    if f == "dh2c":
        return lambda z, w: (w - z) / (2 * (1 + w)) + (w * w - z * w) / (1 + w)

    def total(z, y):
        L = mpmath.exp(z) - 1
        star_c = mpmath.exp(L + y) - 1 - (L + y)
        return y + star_c + L + (y + star_c) * L

    return total


def _partial(fn, z, y, dz: int, dy: int):
    return mpmath.diff(fn, (z, y), (dz, dy))


def _lambdas(w) -> dict[str, mpmath.mpf]:
    root = mpmath.sqrt((1 + w) * (1 - 2 * w))
    return {"K": w / root, "SC": w / root, "SX": (1 - w) / root}


def _J_value(f: str, a: str, b: str, c: str, z, w):
    in_A = a != "SX" and b != "SC" and c != "SC"
    in_B = b != "SX" and a != "SC" and c != "SC"
    in_C = c != "SX" and a != "SC" and b != "SC"
    mult = int(in_A) + int(in_B) + int(in_C) + int("K" not in (a, b, c))
    last = (w - z) if f == "dh2c" else w
    return mult * (1 + w) + (last if "SC" not in (a, b, c) else 0)


def mu_nu(f: str, z, w) -> tuple:
    """Vertex weights: (Lambda_* / S, Lambda_* * S) with S the sum over essential pieces."""
    lam = _lambdas(w)
    dot = lam["K"] + lam["SX"] + (lam["SC"] if f == "dh" else 0)
    s = mpmath.fsum(
        lam[a] * lam[b] * lam[c] * _J_value(f, a, b, c, z, w) for a in TYPES for b in TYPES for c in TYPES
    )
    return dot / s, dot * s


@lru_cache(maxsize=None)
def solve_constants(f: str, precision: int = 128) -> FamilyConstants:
    en.check_family(f)
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    with mpmath.workprec(precision):
        if f == "dh":
            G = _dh_G
            w_star = (mpmath.sqrt(3) - 1) / 2
            rho = _root(lambda z: G(z, w_star) - w_star, mpmath.mpf("0.01"), mpmath.mpf("0.5"))
        elif f == "dh2c":
            G = _dh2c_G
            w_star = _root(lambda s: mpmath.exp(2 * s - mpmath.mpf(1) / 2) - 1 - s, mpmath.mpf("0.3"), mpmath.mpf(1))
            rho = 2 * w_star**2 + 2 * w_star - 1
        else:
            G = _leaf3_G
            rho = mpmath.log(1 + mpmath.exp(-1))
            w_star = 1 - mpmath.exp(-1)
        # value at the singularity recomputed from the characteristic equation alone
        w_rho = _root(lambda y: _partial(G, rho, y, 0, 1) - 1, mpmath.mpf("0.01"), mpmath.mpf("0.9"))
        Gz = _partial(G, rho, w_rho, 1, 0)
        Gww = _partial(G, rho, w_rho, 0, 2)
        gamma_F = mpmath.sqrt(2 * rho * Gz / Gww)
        Hf = _jump_series(f)
        Df = _total_series(f)
        gamma_H = _partial(Hf, rho, w_rho, 0, 1) * gamma_F
        gamma_D = _partial(Df, rho, w_rho, 0, 1) * gamma_F
        res = {
            "fixed_point": G(rho, w_rho) - w_rho,
            "tangency": _partial(G, rho, w_star, 0, 1) - 1,
            "F_closed_form": w_rho - w_star,
            "H_at_rho_minus_1": Hf(rho, w_rho) - 1,
        }
        if f == "dh":
            res["rho_closed_form"] = rho - 2 * (mpmath.log(1 + w_star) - w_star / (2 * (1 + w_star)) - w_star**2 / (1 + w_star))
            res["quadratic"] = 2 * w_rho**2 + 2 * w_rho - 1
            res["D_SX_at_rho"] = w_rho**2 / (1 + w_rho) - (2 - mpmath.sqrt(3)) / (1 + mpmath.sqrt(3))
            res["gamma_D_closed_form"] = gamma_D - (2 + mpmath.sqrt(3)) / mpmath.sqrt(6 + 4 * mpmath.sqrt(3)) * mpmath.sqrt(rho)
            res["gamma_H_closed_form"] = gamma_H - 2 * (3 - mpmath.sqrt(3)) / (
                mpmath.sqrt(6 + 4 * mpmath.sqrt(3)) * (2 - mpmath.sqrt(3)) ** 2
            ) * mpmath.sqrt(rho)
        if f == "dh2c":
            res["gamma_F_closed_form"] = gamma_F**2 - rho * (1 + w_rho) / (1 + 2 * w_rho)
        if f == "leaf3":
            res["gamma_E_closed_form"] = gamma_H**2 - 2 * (1 + mpmath.e) * rho
        gk = gx = mu = nu = None
        if f in ("dh", "dh2c"):
            if f == "dh":
                gk = _partial(lambda z, w: (w / (1 + w) - z) / 2, rho, w_rho, 0, 1) * gamma_F
                gx = _partial(lambda z, w: w * w / (1 + w), rho, w_rho, 0, 1) * gamma_F
            else:
                gk = _partial(lambda z, w: (w - z) / (2 * (1 + w)), rho, w_rho, 0, 1) * gamma_F
                gx = _partial(lambda z, w: (w * w - z * w) / (1 + w), rho, w_rho, 0, 1) * gamma_F
            mu, nu = mu_nu(f, rho, w_rho)
            res["gamma_H_sq_minus_2_rho_nu"] = gamma_H**2 - 2 * rho * nu
            res["gamma_H_mu_minus_gamma_D"] = gamma_H * mu - gamma_D
        c_f = mpmath.sqrt(2) / gamma_H
        exact = dict(rho=rho, F_at_rho=w_rho, gamma_F=gamma_F, gamma_D=gamma_D, gamma_H=gamma_H, c_f=c_f)

        def fl(x):
            return None if x is None else float(x)

        return FamilyConstants(
            family=f,
            precision=precision,
            rho=float(rho),
            F_at_rho=float(w_rho),
            gamma_F=float(gamma_F),
            gamma_D=float(gamma_D),
            gamma_H=float(gamma_H),
            c_f=float(c_f),
            gamma_K=fl(gk),
            gamma_X=fl(gx),
            mu=fl(mu),
            nu=fl(nu),
            residuals={k: float(v) for k, v in res.items()},
            exact=exact,
        )


@dataclass
class ConstantReport:
    family: str
    tolerance: float
    residuals: dict[str, float]

    @property
    def ok(self) -> bool:
        return all(abs(v) <= self.tolerance for v in self.residuals.values())

    def failures(self) -> dict[str, float]:
        return {k: v for k, v in self.residuals.items() if abs(v) > self.tolerance}


def verify_constant_identities(f: str, precision: int = 128, *, max_k: int = 4) -> ConstantReport:
    c = solve_constants(f, precision)
    res = dict(c.residuals)
    if f == "leaf3":
        with mpmath.workprec(precision):
            rho = c.exact["rho"]
            y = c.exact["F_at_rho"]
            outer = mpmath.exp(rho) * mpmath.exp(mpmath.exp(rho) - 1 + y)
            P = (mpmath.exp(rho) - 1) * mpmath.exp(mpmath.exp(rho) - 1 + y)
            for k in range(1, max_k + 1):
                N = outer ** (k + 1) * P ** (k - 1)
                res[f"N_k{k}_rel"] = float(N / (mpmath.e + 1) ** (k + 1) - 1)
    tol = 1e-12 if f == "leaf3" else 1e-8
    return ConstantReport(f, tol, res)


def singular_slope_check(order: int = 600, eps: float = 0.05) -> dict[str, float]:
    """Square-root amplitude of F from two evaluations of its truncated series.

    With d(e) = F(rho) - F(rho(1-e)) = g sqrt(e) - c e + ..., the pair e and
    4e eliminates the linear term: g ~ (4 d(e) - d(4e)) / (2 sqrt(e)).
    """
    c = solve_constants("dh", 128)
    F = en.F_series("dh", order)
    with mpmath.workprec(128):
        rho = c.exact["rho"]
        top = c.exact["F_at_rho"]
        d = []
        for e in (eps, 4 * eps):
            v, _ = evaluate(F, rho * (1 - mpmath.mpf(e)), radius=rho, tol=mpmath.mpf("1e-10"))
            d.append(top - v)
        est = (4 * d[0] - d[1]) / (2 * mpmath.sqrt(eps))
    return {"estimate": float(est), "gamma_F": c.gamma_F, "relative_error": float(abs(est / c.gamma_F - 1))}


# -- semi-large powers ---------------------------------------------------------------


def _to_mpf(q) -> mpmath.mpf:
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def _kernel_series(f: str, order: int, k: int = 1) -> tuple[TruncatedSeries, TruncatedSeries]:
    """(prefactor series, jump series) exactly to ``order``."""
    one = TruncatedSeries.constant(1, order)
    if f == "leaf3":
        ez = exp_ge(TruncatedSeries.z(order), 0)
        inner = exp_ge(ez - 1 + en.ESX_series(order), 0)
        P = (ez - 1) * inner
        N = (ez * inner) ** (k + 1) * P ** (k - 1)
        return N, P
    F = en.F_series(f, order)
    den = ((one + F) * (one - 2 * F)).reciprocal()
    if f == "dh":
        return (one + F) * (one - 2 * F).reciprocal(), F * den
    return den, (F - TruncatedSeries.z(order)) * den


def _prefactor_value(f: str, c: FamilyConstants, k: int = 1):
    rho, w = c.exact["rho"], c.exact["F_at_rho"]
    if f == "dh":
        return (1 + w) / (1 - 2 * w)
    if f == "dh2c":
        return 1 / ((1 + w) * (1 - 2 * w))
    outer = mpmath.exp(rho) * mpmath.exp(mpmath.exp(rho) - 1 + w)
    P = (mpmath.exp(rho) - 1) * mpmath.exp(mpmath.exp(rho) - 1 + w)
    return outer ** (k + 1) * P ** (k - 1)


def rayleigh(x):
    return x / 2 * mpmath.exp(-x * x / 4)


@dataclass
class SemilargeReport:
    family: str
    n: int
    x: float
    a_n: int
    exact: float
    predicted: float
    ratio: float
    coefficient_ratio: float


def semilarge_check(f: str, n: int, x: float = 1.0, *, k: int = 1, precision: int = 128) -> SemilargeReport:
    """Exact [z^n] M H^a_n against the Rayleigh-shaped prediction, a_n = floor(x sqrt n)."""
    en.check_family(f)
    a_n = math.floor(x * math.sqrt(n))
    if a_n < 1:
        raise ValueError("x * sqrt(n) must be at least 1")
    if n > 500:
        raise ValueError("exact extraction is capped at n = 500")
    c = solve_constants(f, precision)
    M, H = _kernel_series(f, n, k)
    exact_lab = (M * H**a_n).labeled(n)
    total_lab = en.family_series(f, n)["D"].labeled(n)
    with mpmath.workprec(precision):
        rho = c.exact["rho"]
        sigma = 1  # the jump kernel equals 1 at the singularity
        exact = _to_mpf(exact_lab) / mpmath.factorial(n)
        pred = rayleigh(mpmath.mpf(x) * c.exact["gamma_H"] / sigma) * _prefactor_value(f, c, k) * mpmath.mpf(sigma) ** a_n
        pred /= n * rho**n * mpmath.sqrt(mpmath.pi)
        coef = _to_mpf(total_lab) / mpmath.factorial(n)
        coef_pred = c.exact["gamma_D"] / (2 * mpmath.sqrt(mpmath.pi)) * rho ** (-n) * mpmath.mpf(n) ** (-1.5)
        return SemilargeReport(f, n, float(x), a_n, float(exact), float(pred), float(exact / pred), float(coef / coef_pred))
