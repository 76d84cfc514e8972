"""Exact truncated power series and fixed-point solving of labeled specifications.

Coefficients are exact rationals. Internally every series stores the
*labeled* coefficient ``n! [z^n]`` so that binomial convolutions of
combinatorial classes stay in the integers; ``coefficient`` converts back
to the ordinary ``[z^n]`` value.

A series is either univariate in ``z`` or bivariate in ``(z, u)``. In the
bivariate case each ``z``-coefficient is a polynomial in ``u`` stored as a
list, truncated at u-degree ``order``.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import mpmath

Scalar = "int | Fraction"


class IllFoundedError(ValueError):
    """Raised when a specification does not determine its coefficients."""


class UnitSeriesError(ValueError):
    """Raised when an exponential is applied to a series with a nonzero constant term."""


class TailBoundError(ValueError):
    """Raised when a truncated evaluation cannot certify the requested tolerance."""


@lru_cache(maxsize=None)
def binomial_row(n: int) -> tuple[int, ...]:
    return tuple(math.comb(n, k) for k in range(n + 1))


def _norm(q):
    if isinstance(q, Fraction) and q.denominator == 1:
        return int(q.numerator)
    return q


def _div(x, d):
    if isinstance(x, int) and isinstance(d, int) and x % d == 0:
        return x // d
    return _norm(Fraction(x) / d)


# -- u-polynomial helpers (lists of scalars, index = u-degree) ------------

def _pnorm(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(p: Sequence, q: Sequence) -> list:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] += c
    return _pnorm(out)


def _psub(p: Sequence, q: Sequence) -> list:
    out = list(p) + [0] * max(0, len(q) - len(p))
    for i, c in enumerate(q):
        out[i] -= c
    return _pnorm(out)


def _pscale(c, p: Sequence) -> list:
    if c == 0:
        return []
    return [c * a for a in p]


def _pmul(p: Sequence, q: Sequence, cap: int) -> list:
    if not p or not q:
        return []
    out = [0] * min(len(p) + len(q) - 1, cap + 1)
    for i, a in enumerate(p):
        if a == 0 or i > cap:
            continue
        for j, b in enumerate(q):
            if i + j > cap:
                break
            out[i + j] += a * b
    return _pnorm(out)


class _Ring:
    """Coefficient arithmetic for one series shape (scalars or u-polynomials)."""

    def __init__(self, bivariate: bool, cap: int):
        self.bivariate = bivariate
        self.cap = cap
        self.zero = [] if bivariate else 0
        self.one = [1] if bivariate else 1

    def add(self, a, b):
        return _padd(a, b) if self.bivariate else a + b

    def sub(self, a, b):
        return _psub(a, b) if self.bivariate else a - b

    def mul(self, a, b):
        return _pmul(a, b, self.cap) if self.bivariate else a * b

    def scale(self, c, a):
        return _pscale(c, a) if self.bivariate else c * a

    def is_zero(self, a) -> bool:
        return (not a) if self.bivariate else a == 0

    def lift(self, c):
        """Turn a scalar (or polynomial) into a coefficient of this ring."""
        if self.bivariate:
            if isinstance(c, (list, tuple)):
                return _pnorm([_norm(Fraction(x)) if isinstance(x, Fraction) else x for x in c])
            return _pnorm([c])
        if isinstance(c, (list, tuple)):
            raise TypeError("u-polynomial coefficient in a univariate series")
        return c

    def normalize(self, a):
        if self.bivariate:
            return _pnorm([_norm(x) for x in a])
        return _norm(a)

    def div(self, a, d):
        if self.bivariate:
            return _pnorm([_div(x, d) for x in a])
        return _div(a, d)


class TruncatedSeries:
    """Power series in z (optionally with a second variable u) truncated at z-degree ``order``."""

    __slots__ = ("order", "bivariate", "_c")

    def __init__(self, labeled: Sequence, order: int, bivariate: bool = False):
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.order = order
        self.bivariate = bivariate
        ring = _Ring(bivariate, order)
        coeffs = [ring.normalize(ring.lift(c)) for c in list(labeled)[: order + 1]]
        coeffs += [ring.zero] * (order + 1 - len(coeffs))
        self._c = coeffs

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_coefficients(cls, coeffs: Sequence, order: int | None = None, bivariate: bool = False):
        """Build from ordinary coefficients ``[z^n]`` (scalars, or u-polynomial lists)."""
        order = len(coeffs) - 1 if order is None else order
        labeled = []
        for n, c in enumerate(list(coeffs)[: order + 1]):
            f = math.factorial(n)
            if isinstance(c, (list, tuple)):
                labeled.append([Fraction(x) * f for x in c])
            else:
                labeled.append(Fraction(c) * f)
        return cls(labeled, order, bivariate)

    @classmethod
    def zero(cls, order: int, bivariate: bool = False):
        return cls([], order, bivariate)

    @classmethod
    def constant(cls, c, order: int, bivariate: bool = False):
        return cls([c], order, bivariate)

    @classmethod
    def z(cls, order: int, bivariate: bool = False):
        return cls([0, 1], order, bivariate)

    @classmethod
    def u(cls, order: int):
        return cls([[0, 1]], order, True)

    # -- access ------------------------------------------------------------

    @property
    def ring(self) -> _Ring:
        return _Ring(self.bivariate, self.order)

    def labeled(self, n: int, j: int | None = None):
        """``n! [z^n]`` (or ``n! [z^n u^j]``)."""
        if n > self.order:
            raise IndexError(f"z-degree {n} beyond truncation order {self.order}")
        c = self._c[n]
        if j is None:
            return list(c) if self.bivariate else c
        if not self.bivariate:
            return c if j == 0 else 0
        return c[j] if j < len(c) else 0

    def coefficient(self, n: int, j: int | None = None):
        """Ordinary coefficient ``[z^n]`` (or ``[z^n u^j]``) as an exact rational."""
        c = self.labeled(n, j)
        f = math.factorial(n)
        if isinstance(c, list):
            return [Fraction(x, 1) / f for x in c]
        return Fraction(c) / f

    def labeled_counts(self) -> list:
        return [self.labeled(n) for n in range(self.order + 1)]

    def u_degree(self, n: int) -> int:
        """Largest u-exponent present in the z^n coefficient (-1 if that coefficient is zero)."""
        if not self.bivariate:
            return 0 if self._c[n] != 0 else -1
        return len(self._c[n]) - 1

    def lift(self) -> "TruncatedSeries":
        """View a univariate series as bivariate (u-degree 0)."""
        if self.bivariate:
            return self
        return TruncatedSeries([[c] for c in self._c], self.order, True)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries(self._c[: order + 1], order, self.bivariate)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            a, b = self, other
            if a.bivariate != b.bivariate:
                raise TypeError("mixing univariate and bivariate series; call lift() first")
            if a.order != b.order:
                raise ValueError("truncation orders differ")
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.constant(other, self.order, self.bivariate)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self.ring
        return TruncatedSeries([r.add(a, b) for a, b in zip(self._c, other._c)], self.order, self.bivariate)

    __radd__ = __add__

    def __neg__(self):
        r = self.ring
        return TruncatedSeries([r.scale(-1, a) for a in self._c], self.order, self.bivariate)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self.ring
        return TruncatedSeries([r.sub(a, b) for a, b in zip(self._c, other._c)], self.order, self.bivariate)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            r = self.ring
            return TruncatedSeries([r.scale(other, a) for a in self._c], self.order, self.bivariate)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self.ring
        a, b = self._c, other._c
        out = []
        for n in range(self.order + 1):
            row = binomial_row(n)
            acc = r.zero
            for k in range(n + 1):
                if r.is_zero(a[k]) or r.is_zero(b[n - k]):
                    continue
                acc = r.add(acc, r.scale(row[k], r.mul(a[k], b[n - k])))
            out.append(acc)
        return TruncatedSeries(out, self.order, self.bivariate)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        result = TruncatedSeries.constant(1, self.order, self.bivariate)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def reciprocal(self) -> "TruncatedSeries":
        """1/s; requires the z^0 coefficient to be a nonzero constant."""
        r = self.ring
        c0 = self._c[0]
        if self.bivariate:
            if len(c0) != 1 or c0[0] == 0:
                raise ZeroDivisionError("constant term must be a nonzero constant to invert")
            inv0 = Fraction(1) / c0[0]
        else:
            if c0 == 0:
                raise ZeroDivisionError("constant term is zero")
            inv0 = Fraction(1) / c0
        inv0 = _norm(inv0)
        out = [r.lift(inv0)]
        for n in range(1, self.order + 1):
            row = binomial_row(n)
            acc = r.zero
            for k in range(1, n + 1):
                if r.is_zero(self._c[k]):
                    continue
                acc = r.add(acc, r.scale(row[k], r.mul(self._c[k], out[n - k])))
            out.append(r.normalize(r.scale(-inv0, acc)))
        return TruncatedSeries(out, self.order, self.bivariate)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        other = self._coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries.constant(other, self.order, self.bivariate)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.bivariate != self.bivariate:
            a, b = self.lift(), other.lift()
        else:
            a, b = self, other
        m = min(a.order, b.order)
        return all(a._c[n] == b._c[n] for n in range(m + 1))

    def __hash__(self):
        return hash((self.order, self.bivariate, tuple(tuple(c) if isinstance(c, list) else c for c in self._c)))

    def __repr__(self):
        head = ", ".join(str(c) for c in self._c[:6])
        kind = "bivariate" if self.bivariate else "univariate"
        return f"TruncatedSeries({kind}, order={self.order}, labeled=[{head}{', ...' if self.order > 5 else ''}])"

    # -- calculus and substitutions --------------------------------------------

    def derivative_z(self) -> "TruncatedSeries":
        """d/dz, truncated one order lower."""
        if self.order == 0:
            return TruncatedSeries.zero(0, self.bivariate)
        return TruncatedSeries(self._c[1:], self.order - 1, self.bivariate)

    def derivative_u(self) -> "TruncatedSeries":
        if not self.bivariate:
            return TruncatedSeries.zero(self.order)
        return TruncatedSeries([[j * c for j, c in enumerate(p)][1:] for p in self._c], self.order, True)

    def at_u(self, value=1) -> "TruncatedSeries":
        """Substitute u := value, giving a univariate series."""
        if not self.bivariate:
            return self
        value = _norm(Fraction(value))
        out = []
        for p in self._c:
            acc = 0
            for c in reversed(p):
                acc = acc * value + c
            out.append(acc)
        return TruncatedSeries(out, self.order, False)

    def u_coefficient(self, j: int) -> "TruncatedSeries":
        return TruncatedSeries([self.labeled(n, j) for n in range(self.order + 1)], self.order, False)

    def map_u(self, func: Callable[[list], list]) -> "TruncatedSeries":
        return TruncatedSeries([func(list(p)) for p in self._c], self.order, True)


def exp_ge(s: TruncatedSeries, r: int = 0) -> TruncatedSeries:
    """exp(s) minus its first r Taylor terms, i.e. sets of at least r components."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    ring = s.ring
    if not ring.is_zero(s._c[0]):
        raise UnitSeriesError("exp of unit series")
    # E' = s' E in labeled form: e_{n} = sum_k C(n-1,k) s_{k+1} e_{n-1-k}
    e = [ring.one]
    for n in range(1, s.order + 1):
        row = binomial_row(n - 1)
        acc = ring.zero
        for k in range(n):
            if ring.is_zero(s._c[k + 1]):
                continue
            acc = ring.add(acc, ring.scale(row[k], ring.mul(s._c[k + 1], e[n - 1 - k])))
        e.append(acc)
    result = TruncatedSeries(e, s.order, s.bivariate)
    power = TruncatedSeries.constant(1, s.order, s.bivariate)
    for ell in range(r):
        result = result - power * Fraction(1, math.factorial(ell))
        if ell + 1 < r:
            power = power * s
    return result


# -- specifications and the fixed-point solver ----------------------------------


class Expr:
    """Node of a specification expression DAG."""

    def __add__(self, other):
        return Sum((self, as_expr(other)))

    def __radd__(self, other):
        return Sum((as_expr(other), self))

    def __sub__(self, other):
        return Sum((self, Scale(-1, as_expr(other))))

    def __rsub__(self, other):
        return Sum((as_expr(other), Scale(-1, self)))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scale(other, self)
        return Prod(self, as_expr(other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scale(other, self)
        return Prod(as_expr(other), self)

    def children(self) -> tuple["Expr", ...]:
        return ()


class _Atom(Expr):
    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name


ZAtom = _Atom("z")
UAtom = _Atom("u")


class Const(Expr):
    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return repr(self.value)


class Known(Expr):
    """An already computed series used as a parameter of a system."""

    def __init__(self, series: TruncatedSeries, name: str = "known"):
        self.series = series
        self.name = name

    def __repr__(self):
        return self.name


class Var(Expr):
    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name


class Sum(Expr):
    def __init__(self, terms: Iterable[Expr]):
        flat: list[Expr] = []
        for t in terms:
            if isinstance(t, Sum):
                flat.extend(t.terms)
            else:
                flat.append(t)
        self.terms = tuple(flat)

    def children(self):
        return self.terms

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


class Scale(Expr):
    def __init__(self, factor, arg: Expr):
        self.factor = _norm(Fraction(factor))
        self.arg = arg

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{self.factor}*{self.arg!r}"


class Prod(Expr):
    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{self.left!r}*{self.right!r}"


class ExpGe(Expr):
    """Labeled Set with at least ``r`` components."""

    def __init__(self, arg: Expr, r: int = 0):
        self.arg = arg
        self.r = r

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Set>={self.r}({self.arg!r})"


class Tag(Expr):
    """Algebraically transparent marker telling samplers how to build a node."""

    def __init__(self, label: str, arg: Expr):
        self.label = label
        self.arg = arg

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{self.label}[{self.arg!r}]"


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, TruncatedSeries):
        return Known(x)
    if isinstance(x, (int, Fraction, list, tuple)):
        return Const(x)
    raise TypeError(f"cannot use {type(x).__name__} in a specification")


class SpecSystem:
    """A system ``name = expression`` over unknown series, optionally in (z, u)."""

    def __init__(self, equations: Mapping[str, Expr], bivariate: bool = False):
        self.equations = {k: as_expr(v) for k, v in equations.items()}
        self.bivariate = bivariate
        names = set(self.equations)
        for node in self.nodes():
            if isinstance(node, Var) and node.name not in names:
                raise KeyError(f"variable {node.name!r} has no equation")

    def nodes(self) -> list[Expr]:
        """All expression nodes, children before parents."""
        seen: set[int] = set()
        order: list[Expr] = []
        for root in self.equations.values():
            stack: list[tuple[Expr, bool]] = [(root, False)]
            while stack:
                node, done = stack.pop()
                if done:
                    order.append(node)
                    continue
                if id(node) in seen:
                    continue
                seen.add(id(node))
                stack.append((node, True))
                for ch in node.children():
                    if id(ch) not in seen:
                        stack.append((ch, False))
        return order


class _Affine:
    """const + sum_j lin[j] * x_j over the unknowns' current-degree coefficients."""

    __slots__ = ("const", "lin")

    def __init__(self, const, lin: dict | None = None):
        self.const = const
        self.lin = lin or {}


class Solution:
    """Series of every node of a solved system."""

    def __init__(self, system: SpecSystem, order: int, values: dict[int, list], ring: _Ring):
        self.system = system
        self.order = order
        self._values = values
        self._ring = ring

    def series(self, node: Expr | str) -> TruncatedSeries:
        if isinstance(node, str):
            node = self.system.equations[node]
        return TruncatedSeries(self._values[id(node)], self.order, self._ring.bivariate)

    def __getitem__(self, name: str) -> TruncatedSeries:
        return self.series(self.system.equations[name])

    def as_dict(self) -> dict[str, TruncatedSeries]:
        return {k: self[k] for k in self.system.equations}


def solve_system(system: SpecSystem, order: int) -> Solution:
    """Solve degree by degree; each degree is settled by repeated passes over all equations."""
    ring = _Ring(system.bivariate, order)
    nodes = system.nodes()
    names = list(system.equations)
    rhs = {name: system.equations[name] for name in names}
    vals: dict[int, list] = {id(nd): [] for nd in nodes}
    unknown_vals: dict[str, list] = {name: [] for name in names}
    for nd in nodes:
        if isinstance(nd, Known):
            s = nd.series.lift() if system.bivariate else nd.series
            if s.bivariate != system.bivariate:
                raise TypeError("bivariate parameter in a univariate system")
            if s.order < order:
                raise ValueError(f"parameter {nd.name} truncated below order {order}")
    known_series = {
        id(nd): (nd.series.lift() if system.bivariate else nd.series) for nd in nodes if isinstance(nd, Known)
    }
    exp_state: dict[int, list] = {}
    pow_state: dict[int, list[list]] = {}

    def var_value(node: Var, n: int):
        return unknown_vals[node.name][n]

    # degree 0: Jacobi passes starting from zero until nothing changes
    current: dict[str, object] = {name: ring.zero for name in names}

    def eval0(node):
        if isinstance(node, Var):
            return current[node.name]
        if node is ZAtom:
            return ring.zero
        if node is UAtom:
            return [0, 1] if ring.bivariate else _fail_u()
        if isinstance(node, Const):
            return ring.lift(node.value)
        if isinstance(node, Known):
            return known_series[id(node)]._c[0]
        if isinstance(node, Sum):
            acc = ring.zero
            for t in node.terms:
                acc = ring.add(acc, cache0[id(t)])
            return acc
        if isinstance(node, Scale):
            return ring.scale(node.factor, cache0[id(node.arg)])
        if isinstance(node, Tag):
            return cache0[id(node.arg)]
        if isinstance(node, Prod):
            return ring.mul(cache0[id(node.left)], cache0[id(node.right)])
        if isinstance(node, ExpGe):
            if not ring.is_zero(cache0[id(node.arg)]):
                raise UnitSeriesError("exp of unit series")
            return ring.one if node.r == 0 else ring.zero
        raise TypeError(f"unknown node {node!r}")

    for _ in range(len(names) + 2):
        cache0: dict[int, object] = {}
        for nd in nodes:
            cache0[id(nd)] = eval0(nd)
        new = {name: ring.normalize(cache0[id(rhs[name])]) for name in names}
        if new == current:
            break
        current = new
    else:
        raise IllFoundedError("ill-founded specification")
    for name in names:
        unknown_vals[name].append(current[name])
    for nd in nodes:
        vals[id(nd)].append(ring.normalize(cache0[id(nd)]))
        if isinstance(nd, ExpGe):
            exp_state[id(nd)] = [ring.one]
            pow_state[id(nd)] = [[ring.zero] for _ in range(max(0, nd.r - 2))]

    # degrees >= 1: coefficients are affine in the unknowns' current coefficients
    def add_aff(x: _Affine, y: _Affine, sign: int = 1) -> _Affine:
        lin = dict(x.lin)
        for j, c in y.lin.items():
            lin[j] = ring.add(lin[j], ring.scale(sign, c)) if j in lin else ring.scale(sign, c)
        return _Affine(ring.add(x.const, ring.scale(sign, y.const)), lin)

    def mul_aff(k, x: _Affine) -> _Affine:
        """Multiply an affine form by a known ring element."""
        if ring.is_zero(k):
            return _Affine(ring.zero)
        return _Affine(ring.mul(k, x.const), {j: ring.mul(k, c) for j, c in x.lin.items()})

    for n in range(1, order + 1):
        row = binomial_row(n)
        row1 = binomial_row(n - 1)
        aff: dict[int, _Affine] = {}
        for nd in nodes:
            key = id(nd)
            if isinstance(nd, Var):
                aff[key] = _Affine(ring.zero, {nd.name: ring.one})
            elif nd is ZAtom:
                aff[key] = _Affine(ring.one if n == 1 else ring.zero)
            elif nd is UAtom:
                aff[key] = _Affine(ring.zero)
            elif isinstance(nd, Const):
                aff[key] = _Affine(ring.zero)
            elif isinstance(nd, Known):
                aff[key] = _Affine(known_series[id(nd)]._c[n])
            elif isinstance(nd, Sum):
                acc = _Affine(ring.zero)
                for t in nd.terms:
                    acc = add_aff(acc, aff[id(t)])
                aff[key] = acc
            elif isinstance(nd, Scale):
                a = aff[id(nd.arg)]
                aff[key] = _Affine(ring.scale(nd.factor, a.const), {j: ring.scale(nd.factor, c) for j, c in a.lin.items()})
            elif isinstance(nd, Tag):
                aff[key] = aff[id(nd.arg)]
            elif isinstance(nd, Prod):
                a, b = vals[id(nd.left)], vals[id(nd.right)]
                acc = ring.zero
                for k in range(1, n):
                    if ring.is_zero(a[k]) or ring.is_zero(b[n - k]):
                        continue
                    acc = ring.add(acc, ring.scale(row[k], ring.mul(a[k], b[n - k])))
                out = _Affine(acc)
                out = add_aff(out, mul_aff(b[0], aff[id(nd.left)]))
                out = add_aff(out, mul_aff(a[0], aff[id(nd.right)]))
                aff[key] = out
            elif isinstance(nd, ExpGe):
                a = vals[id(nd.arg)]
                e = exp_state[key]
                acc = ring.zero
                for k in range(n - 1):
                    if ring.is_zero(a[k + 1]):
                        continue
                    acc = ring.add(acc, ring.scale(row1[k], ring.mul(a[k + 1], e[n - 1 - k])))
                exp_aff = add_aff(_Affine(acc), aff[id(nd.arg)])
                aff[("exp", key)] = exp_aff  # type: ignore[index]
                out = exp_aff
                if nd.r >= 2:
                    out = add_aff(out, aff[id(nd.arg)], -1)
                # powers A^ell, ell >= 2, do not involve the current degree of A
                for idx, pw in enumerate(pow_state[key]):
                    ell = idx + 2
                    prev = a if idx == 0 else pow_state[key][idx - 1]
                    pacc = ring.zero
                    for k in range(1, n):
                        if ring.is_zero(a[k]) or ring.is_zero(prev[n - k]):
                            continue
                        pacc = ring.add(pacc, ring.scale(row[k], ring.mul(a[k], prev[n - k])))
                    aff[("pow", key, ell)] = pacc  # type: ignore[index]
                    out = add_aff(out, _Affine(ring.div(pacc, math.factorial(ell))), -1)
                aff[key] = out
            else:
                raise TypeError(f"unknown node {nd!r}")

        # settle the unknowns: pass until every coefficient depends only on settled ones
        solved: dict[str, object] = {}
        pending = set(names)
        while pending:
            progress = False
            for name in names:
                if name not in pending:
                    continue
                form = aff[id(rhs[name])]
                if any(j in pending and not ring.is_zero(c) for j, c in form.lin.items()):
                    continue
                v = form.const
                for j, c in form.lin.items():
                    if not ring.is_zero(c):
                        v = ring.add(v, ring.mul(c, solved[j]))
                solved[name] = ring.normalize(v)
                pending.discard(name)
                progress = True
            if not progress:
                raise IllFoundedError("ill-founded specification")

        def resolve(form: _Affine):
            v = form.const
            for j, c in form.lin.items():
                if not ring.is_zero(c):
                    v = ring.add(v, ring.mul(c, solved[j]))
            return ring.normalize(v)

        for name in names:
            unknown_vals[name].append(solved[name])
        for nd in nodes:
            key = id(nd)
            if isinstance(nd, Var):
                vals[key].append(solved[nd.name])
            else:
                vals[key].append(resolve(aff[key]))
            if isinstance(nd, ExpGe):
                exp_state[key].append(resolve(aff[("exp", key)]))  # type: ignore[index]
                for idx in range(len(pow_state[key])):
                    pow_state[key][idx].append(ring.normalize(aff[("pow", key, idx + 2)]))  # type: ignore[index]
    return Solution(system, order, vals, ring)


def _fail_u():
    raise TypeError("u appears in a univariate system")


def solve_fixpoint(system: SpecSystem, order: int) -> dict[str, TruncatedSeries]:
    """Unique solution of a well-founded system, truncated at ``order``."""
    return solve_system(system, order).as_dict()


def evaluate(
    s: TruncatedSeries,
    z0,
    u0=None,
    *,
    radius=None,
    tol=mpmath.mpf("1e-30"),
    prec: int = 128,
):
    """Numerically evaluate a truncated series at ``z0`` (and ``u0``).

    Returns ``(value, tail_bound)``. The tail beyond the truncation order is
    bounded geometrically by ``|last term| * q / (1 - q)`` with
    ``q = z0 / radius``; when ``radius`` is omitted it is estimated from the
    ratio of the last two nonzero ordinary coefficients.
    """
    with mpmath.workprec(prec):
        z0 = mpmath.mpf(z0)
        if z0 < 0:
            raise ValueError("evaluation point must be nonnegative")
        if s.bivariate:
            if u0 is None:
                raise ValueError("bivariate series needs u0")
            u0 = mpmath.mpf(u0)
            terms = []
            for n in range(s.order + 1):
                p = s._c[n]
                acc = mpmath.mpf(0)
                for c in reversed(p):
                    acc = acc * u0 + mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator
                terms.append(acc / mpmath.factorial(n))
        else:
            terms = [
                mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator / mpmath.factorial(n)
                for n, c in enumerate(s._c)
            ]
        value = mpmath.fsum(t * z0**n for n, t in enumerate(terms))
        if radius is None:
            nz = [n for n, t in enumerate(terms) if t != 0]
            if len(nz) >= 2:
                a, b = nz[-2], nz[-1]
                radius = abs(terms[a] / terms[b]) ** (mpmath.mpf(1) / (b - a))
            else:
                radius = mpmath.inf
        radius = mpmath.mpf(radius)
        if z0 == 0:
            tail = mpmath.mpf(0)
        else:
            q = z0 / radius
            if q >= 1:
                raise TailBoundError("evaluation point at or beyond the radius of convergence")
            last = abs(terms[-1] * z0 ** (len(terms) - 1))
            tail = last * q / (1 - q)
        if tail > tol:
            raise TailBoundError(f"tail bound {mpmath.nstr(tail, 5)} exceeds tolerance {mpmath.nstr(tol, 5)}")
        return value, tail


def dump_csv(s: TruncatedSeries, j: int | None = None) -> str:
    """CSV with columns ``n,labeled_count``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "labeled_count"])
    for n in range(s.order + 1):
        c = s.labeled(n, j) if s.bivariate else s.labeled(n)
        if isinstance(c, list):
            c = "|".join(str(x) for x in c)
        w.writerow([n, str(c)])
    return buf.getvalue()
