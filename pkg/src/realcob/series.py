"""Exact arithmetic for the universal 2-typical formal group law.

Everything is computed over the coefficient ring Z[v_1, ..., v_nmax] with
exact rational intermediates (the Hazewinkel logarithm has denominators
2^i that must cancel before any mod-2 reduction).  Series in the
orientation variable u are truncated at an explicit order; nothing is
ever extended silently.

The 2-series [2]_F(u) = F(u, u) is obtained by solving the functional
equation log(g(u)) = 2 log(u) coefficient by coefficient, which keeps the
arithmetic sparse (the logarithm is supported on 2-power exponents).  An
independent Lagrange-inversion oracle for exp is provided for tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .grading import vexp_weight

VExp = tuple[int, ...]  # exponents of v_1, v_2, ... with trailing zeros trimmed


def _trim(exps: tuple[int, ...]) -> VExp:
    k = len(exps)
    while k and exps[k - 1] == 0:
        k -= 1
    return exps[:k]


def _mul_exp(a: VExp, b: VExp) -> VExp:
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    return tuple(out)


class RationalPoly:
    """Polynomial in v_1..v_nmax with exact rational coefficients.

    Stored as a map from exponent vectors to nonzero Fractions; the
    generator bound nmax is enforced at construction time.
    """

    __slots__ = ("terms", "nmax")

    def __init__(self, terms: dict[VExp, Fraction] | None = None, nmax: int = 0):
        self.terms: dict[VExp, Fraction] = {}
        self.nmax = nmax
        if terms:
            for exp, c in terms.items():
                if c:
                    exp = _trim(tuple(exp))
                    if len(exp) > nmax:
                        raise ValueError(
                            f"monomial {exp} exceeds generator bound nmax={nmax}"
                        )
                    self.terms[exp] = Fraction(c)

    @classmethod
    def zero(cls, nmax: int = 0) -> "RationalPoly":
        return cls({}, nmax)

    @classmethod
    def const(cls, c, nmax: int = 0) -> "RationalPoly":
        return cls({(): Fraction(c)}, nmax)

    @classmethod
    def v(cls, n: int, nmax: int) -> "RationalPoly":
        if not 1 <= n <= nmax:
            raise ValueError(f"v_{n} out of range for nmax={nmax}")
        exp = tuple(0 for _ in range(n - 1)) + (1,)
        return cls({exp: Fraction(1)}, nmax)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, Fraction(0)) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        res = RationalPoly.zero(max(self.nmax, other.nmax))
        res.terms = out
        return res

    def __neg__(self) -> "RationalPoly":
        res = RationalPoly.zero(self.nmax)
        res.terms = {exp: -c for exp, c in self.terms.items()}
        return res

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + (-other)

    def __mul__(self, other: "RationalPoly") -> "RationalPoly":
        out: dict[VExp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = _mul_exp(e1, e2)
                s = out.get(exp, Fraction(0)) + c1 * c2
                if s:
                    out[exp] = s
                else:
                    out.pop(exp, None)
        res = RationalPoly.zero(max(self.nmax, other.nmax))
        res.terms = out
        return res

    def scale(self, c) -> "RationalPoly":
        c = Fraction(c)
        res = RationalPoly.zero(self.nmax)
        if c:
            res.terms = {exp: c * t for exp, t in self.terms.items()}
        return res

    def kill_v_below(self, n: int) -> "RationalPoly":
        """Set v_1, ..., v_{n-1} to zero."""
        res = RationalPoly.zero(self.nmax)
        for exp, c in self.terms.items():
            if any(exp[i] for i in range(min(n - 1, len(exp)))):
                continue
            res.terms[exp] = c
        return res

    def reduce_mod2(self) -> "RationalPoly":
        """Reduce coefficients mod 2; requires odd denominators."""
        res = RationalPoly.zero(self.nmax)
        for exp, c in self.terms.items():
            if c.denominator % 2 == 0:
                raise ValueError(f"coefficient {c} not 2-integral")
            if c.numerator % 2:
                res.terms[exp] = Fraction(1)
        return res

    def subs_v_zero(self) -> Fraction:
        """Constant term after v_n -> 0 for all n."""
        return self.terms.get((), Fraction(0))

    def weights(self) -> set[int]:
        """Set of 1-part degrees of the monomials present."""
        return {vexp_weight(exp) for exp in self.terms}

    def sorted_terms(self) -> list[tuple[VExp, Fraction]]:
        return sorted(self.terms.items())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"v{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(exp)
                if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)

    __repr__ = __str__


@dataclass(frozen=True)
class Reduction:
    """Imposed relations on series coefficients.

    ``mod2`` kills 2; ``v_killed_below = n`` additionally kills
    v_1, ..., v_{n-1} (the ideal (2, v_1, ..., v_{n-1})).
    """

    mod2: bool = False
    v_killed_below: int = 0

    def apply(self, poly: RationalPoly) -> RationalPoly:
        if self.v_killed_below > 1:
            poly = poly.kill_v_below(self.v_killed_below)
        if self.mod2:
            poly = poly.reduce_mod2()
        return poly

    def label(self) -> str:
        if not self.mod2:
            return "none"
        if self.v_killed_below > 1:
            return f"2,v<{self.v_killed_below}"
        return "2"


NO_REDUCTION = Reduction()
MOD2 = Reduction(mod2=True)


class TruncatedSeries:
    """Series in u with RationalPoly coefficients, truncated at u^trunc."""

    __slots__ = ("coeffs", "trunc", "nmax", "reduction")

    def __init__(
        self,
        coeffs: dict[int, RationalPoly],
        trunc: int,
        nmax: int,
        reduction: Reduction = NO_REDUCTION,
    ):
        if trunc <= 0:
            raise ValueError("truncation order must be positive")
        self.trunc = trunc
        self.nmax = nmax
        self.reduction = reduction
        self.coeffs = {e: p for e, p in coeffs.items() if e < trunc and p}

    @classmethod
    def zero(cls, trunc: int, nmax: int, reduction: Reduction = NO_REDUCTION):
        return cls({}, trunc, nmax, reduction)

    @classmethod
    def u_power(cls, j: int, trunc: int, nmax: int) -> "TruncatedSeries":
        return cls({j: RationalPoly.const(1, nmax)}, trunc, nmax)

    def coefficient(self, j: int) -> RationalPoly:
        if j >= self.trunc:
            raise IndexError(f"u^{j} beyond truncation order {self.trunc}")
        return self.coeffs.get(j, RationalPoly.zero(self.nmax))

    def _check(self, other: "TruncatedSeries") -> None:
        if self.trunc != other.trunc:
            raise ValueError(
                f"mismatched truncation orders {self.trunc} != {other.trunc}"
            )

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        out = dict(self.coeffs)
        for e, p in other.coeffs.items():
            s = out.get(e)
            out[e] = p if s is None else s + p
        return TruncatedSeries(out, self.trunc, max(self.nmax, other.nmax))

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return self + other.scale(-1)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        out: dict[int, RationalPoly] = {}
        for e1, p1 in self.coeffs.items():
            for e2, p2 in other.coeffs.items():
                e = e1 + e2
                if e >= self.trunc:
                    continue
                prod = p1 * p2
                s = out.get(e)
                out[e] = prod if s is None else s + prod
        return TruncatedSeries(out, self.trunc, max(self.nmax, other.nmax))

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(
            {e: p.scale(c) for e, p in self.coeffs.items()},
            self.trunc,
            self.nmax,
            self.reduction,
        )

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def lowest_term(self) -> tuple[int, RationalPoly] | None:
        if not self.coeffs:
            return None
        j = min(self.coeffs)
        return j, self.coeffs[j]

    def reduce(self, reduction: Reduction) -> "TruncatedSeries":
        out = {e: reduction.apply(p) for e, p in self.coeffs.items()}
        return TruncatedSeries(out, self.trunc, self.nmax, reduction)

    def subs_v_zero(self) -> dict[int, Fraction]:
        out = {}
        for e, p in self.coeffs.items():
            c = p.subs_v_zero()
            if c:
                out[e] = c
        return out

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """Substitute ``inner`` (with zero constant term) for u."""
        if inner.coeffs.get(0):
            raise ValueError("inner series must have zero constant term")
        result = TruncatedSeries.zero(self.trunc, max(self.nmax, inner.nmax))
        power = TruncatedSeries.u_power(0, self.trunc, self.nmax)
        for e in range(0, self.trunc):
            p = self.coeffs.get(e)
            if p is not None:
                result = result + power.scale_poly(p)
            if e + 1 < self.trunc:
                power = power * inner
                if power.is_zero():
                    break
        return result

    def scale_poly(self, p: RationalPoly) -> "TruncatedSeries":
        out = {e: q * p for e, q in self.coeffs.items()}
        return TruncatedSeries(out, self.trunc, self.nmax)

    def sorted_items(self) -> list[tuple[int, RationalPoly]]:
        return sorted(self.coeffs.items())

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e, p in self.sorted_items():
            u_part = "" if e == 0 else ("u" if e == 1 else f"u^{e}")
            for exp, c in p.sorted_terms():
                mono = "*".join(
                    f"v{i + 1}" + (f"^{x}" if x > 1 else "")
                    for i, x in enumerate(exp)
                    if x
                )
                factors = [s for s in (str(c) if c != 1 or not (mono or u_part) else "", mono, u_part) if s]
                parts.append("*".join(factors) if factors else "1")
        return " + ".join(parts)

    def to_json_obj(self) -> dict:
        terms = []
        for e, p in self.sorted_items():
            for exp, c in p.sorted_terms():
                terms.append({"u": e, "v": list(exp), "coef": f"{c.numerator}/{c.denominator}"})
        return {
            "trunc": self.trunc,
            "modulus": self.reduction.label(),
            "terms": terms,
        }


class MultiSeries:
    """Multivariate series truncated at a total degree, for FGL identities."""

    __slots__ = ("arity", "trunc", "terms", "nmax")

    def __init__(self, arity: int, trunc: int, terms: dict[tuple, RationalPoly], nmax: int):
        self.arity = arity
        self.trunc = trunc
        self.nmax = nmax
        self.terms = {
            e: p for e, p in terms.items() if sum(e) < trunc and p
        }

    @classmethod
    def zero(cls, arity: int, trunc: int, nmax: int) -> "MultiSeries":
        return cls(arity, trunc, {}, nmax)

    @classmethod
    def variable(cls, i: int, arity: int, trunc: int, nmax: int) -> "MultiSeries":
        exp = tuple(1 if k == i else 0 for k in range(arity))
        return cls(arity, trunc, {exp: RationalPoly.const(1, nmax)}, nmax)

    def _check(self, other: "MultiSeries") -> None:
        if (self.arity, self.trunc) != (other.arity, other.trunc):
            raise ValueError("mismatched arity or truncation")

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        self._check(other)
        out = dict(self.terms)
        for e, p in other.terms.items():
            s = out.get(e)
            out[e] = p if s is None else s + p
        return MultiSeries(self.arity, self.trunc, out, max(self.nmax, other.nmax))

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "MultiSeries":
        return MultiSeries(
            self.arity, self.trunc,
            {e: p.scale(c) for e, p in self.terms.items()}, self.nmax,
        )

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        self._check(other)
        out: dict[tuple, RationalPoly] = {}
        for e1, p1 in self.terms.items():
            d1 = sum(e1)
            for e2, p2 in other.terms.items():
                if d1 + sum(e2) >= self.trunc:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = p1 * p2
                s = out.get(e)
                out[e] = prod if s is None else s + prod
        return MultiSeries(self.arity, self.trunc, out, max(self.nmax, other.nmax))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.arity == other.arity and self.trunc == other.trunc and self.terms == other.terms

    def coefficient_of(self, i: int, k: int) -> "MultiSeries":
        """Coefficient of (variable i)^k, as a series in the remaining slots."""
        out: dict[tuple, RationalPoly] = {}
        for e, p in self.terms.items():
            if e[i] != k:
                continue
            rest = e[:i] + (0,) + e[i + 1:]
            out[rest] = p
        return MultiSeries(self.arity, self.trunc, out, self.nmax)

    def subs(self, args: list["MultiSeries"]) -> "MultiSeries":
        """Substitute one series per variable (all must share arity/trunc)."""
        if len(args) != self.arity:
            raise ValueError("wrong number of substitution arguments")
        for a in args:
            if a.terms.get(tuple(0 for _ in range(a.arity))):
                raise ValueError("substituted series must have zero constant term")
        arity = args[0].arity
        trunc = args[0].trunc
        nmax = max([self.nmax] + [a.nmax for a in args])
        result = MultiSeries.zero(arity, trunc, nmax)
        # Cache powers of each argument as needed.
        powers: list[list[MultiSeries]] = [
            [MultiSeries(arity, trunc, {tuple(0 for _ in range(arity)): RationalPoly.const(1, nmax)}, nmax), a]
            for a in args
        ]
        for e, p in self.terms.items():
            term = MultiSeries(arity, trunc, {tuple(0 for _ in range(arity)): p}, nmax)
            for i, k in enumerate(e):
                while len(powers[i]) <= k:
                    powers[i].append(powers[i][-1] * powers[i][1])
                term = term * powers[i][k]
                if term.is_zero():
                    break
            result = result + term
        return result

    def scale_by_poly(self, p: RationalPoly) -> "MultiSeries":
        return MultiSeries(
            self.arity, self.trunc,
            {e: q * p for e, q in self.terms.items()}, max(self.nmax, p.nmax),
        )

    def reduce(self, reduction: Reduction) -> "MultiSeries":
        return MultiSeries(
            self.arity, self.trunc,
            {e: reduction.apply(p) for e, p in self.terms.items()}, self.nmax,
        )

    def subs_v_zero(self) -> dict[tuple, Fraction]:
        out = {}
        for e, p in self.terms.items():
            c = p.subs_v_zero()
            if c:
                out[e] = c
        return out


def _validate(nmax: int, N: int) -> None:
    if nmax < 1:
        raise ValueError(f"nmax must be >= 1, got {nmax}")
    if N < 2:
        raise ValueError(f"truncation order must be >= 2, got {N}")


@lru_cache(maxsize=None)
def hazewinkel_log_coefficients(nmax: int, imax: int) -> tuple[RationalPoly, ...]:
    """l_0, ..., l_imax with 2*l_n = sum_{i<n} l_i v_{n-i}^{2^i}, l_0 = 1.

    Generators beyond nmax are set to zero, so the returned coefficients
    are the images of the Hazewinkel l_n in Q[v_1..v_nmax].
    """
    ls: list[RationalPoly] = [RationalPoly.const(1, nmax)]
    for n in range(1, imax + 1):
        acc = RationalPoly.zero(nmax)
        for i in range(n):
            if n - i > nmax:
                continue
            v_pow = RationalPoly.v(n - i, nmax)
            power = 1 << i
            vp = RationalPoly.const(1, nmax)
            for _ in range(power):
                vp = vp * v_pow
            acc = acc + ls[i] * vp
        ls.append(acc.scale(Fraction(1, 2)))
    return tuple(ls)


def hazewinkel_log(nmax: int, N: int) -> TruncatedSeries:
    """log(u) = sum l_i u^{2^i} truncated at u^N."""
    _validate(nmax, N)
    imax = 0
    while (1 << (imax + 1)) < N:
        imax += 1
    ls = hazewinkel_log_coefficients(nmax, imax)
    coeffs = {1 << i: ls[i] for i in range(imax + 1) if (1 << i) < N}
    return TruncatedSeries(coeffs, N, nmax)


@lru_cache(maxsize=None)
def exp_coefficients(nmax: int, N: int) -> tuple[RationalPoly, ...]:
    """e_1..e_{N-1} with exp(x) = sum e_m x^m inverting the logarithm.

    Solved degree by degree from exp(log(u)) = u.
    """
    _validate(nmax, N)
    log = hazewinkel_log(nmax, N)
    es: list[RationalPoly] = [RationalPoly.const(1, nmax)]
    # log_powers[k] = log(u)^{k+1}
    log_powers = [log]
    for m in range(2, N):
        log_powers.append(log_powers[-1] * log)
        c = RationalPoly.zero(nmax)
        for k in range(1, m):
            c = c + es[k - 1] * log_powers[k - 1].coefficient(m)
        es.append(-c)
    return tuple(es)


@lru_cache(maxsize=None)
def exp_coefficients_lagrange(nmax: int, N: int) -> tuple[RationalPoly, ...]:
    """Independent oracle for exp via Lagrange inversion.

    e_n = (1/n) [u^{n-1}] (u / log(u))^n, computed through an explicit
    power-series inverse rather than the triangular solve above.
    """
    _validate(nmax, N)
    log = hazewinkel_log(nmax, N)
    # h = u/log(u): invert 1 + l_1 u + l_2 u^3 + ...
    shifted = TruncatedSeries(
        {e - 1: p for e, p in log.coeffs.items()}, N, nmax
    )
    one = TruncatedSeries({0: RationalPoly.const(1, nmax)}, N, nmax)
    tail = shifted - one
    # Geometric series: (1 + t)^{-1} = sum (-t)^k; t has positive valuation.
    inv = one
    power = one
    for _ in range(1, N):
        power = power * tail.scale(-1)
        if power.is_zero():
            break
        inv = inv + power
    es = []
    h_pow = inv
    for n in range(1, N):
        es.append(h_pow.coefficient(n - 1).scale(Fraction(1, n)))
        h_pow = h_pow * inv
    return tuple(es)


@lru_cache(maxsize=None)
def _two_series_raw(nmax: int, N: int) -> TruncatedSeries:
    """[2]_F(u) over Z[v_1..v_nmax], solved from log(g) = 2 log(u).

    Writing g = sum g_b u^b, the coefficient of u^b in
    sum_i l_i g^{2^i} only involves g_{<b} for i >= 1, so the equation
    determines g_b triangularly.  Powers g^{2^i} are maintained as a
    squaring chain whose u^b slots are filled in the same sweep.
    """
    _validate(nmax, N)
    imax = 0
    while (1 << (imax + 1)) < N:
        imax += 1
    ls = hazewinkel_log_coefficients(nmax, imax)
    two_powers = {1 << i: i for i in range(imax + 1)}

    zero = RationalPoly.zero(nmax)
    g: list[RationalPoly] = [zero, RationalPoly.const(2, nmax)]  # g_0, g_1
    # chain[i] holds the slots of g^{2^i}; chain[0] aliases g.
    chain: list[list[RationalPoly]] = [g] + [
        [zero, zero] for _ in range(imax)
    ]
    for b in range(2, N):
        # Extend each squaring level at slot b from the previous level,
        # using only slots < b of that level (components have valuation 1).
        for i in range(1, imax + 1):
            prev = chain[i - 1]
            acc = RationalPoly.zero(nmax)
            for a in range(1, b):
                if a < len(prev) and (b - a) < len(prev):
                    pa, pb = prev[a], prev[b - a]
                    if pa and pb:
                        acc = acc + pa * pb
            chain[i].append(acc)
        rhs = ls[two_powers[b]].scale(2) if b in two_powers else zero
        c = RationalPoly.zero(nmax)
        for i in range(1, imax + 1):
            if (1 << i) <= b and ls[i]:
                c = c + ls[i] * chain[i][b]
        g.append(rhs - c)
    coeffs = {b: g[b] for b in range(1, N) if g[b]}
    series = TruncatedSeries(coeffs, N, nmax)
    for _, p in series.coeffs.items():
        for c in p.terms.values():
            if c.denominator != 1:
                raise AssertionError("2-series acquired a denominator")
    return series


def two_series(nmax: int, N: int, reduction: Reduction = NO_REDUCTION) -> TruncatedSeries:
    """[2]_F(u) truncated at u^N, reduced by the requested relations.

    Under the reduction (2, v_1..v_{n-1}) the lowest nonzero term is
    v_n u^{2^n}.
    """
    series = _two_series_raw(nmax, N)
    if reduction == NO_REDUCTION:
        return series
    return series.reduce(reduction)


def formal_group_law(nmax: int, N: int, arity: int = 2) -> MultiSeries:
    """F(x_1, ..., x_arity) = exp(log x_1 + ... + log x_arity), total degree < N."""
    _validate(nmax, N)
    es = exp_coefficients(nmax, N)
    log = hazewinkel_log(nmax, N)
    s = MultiSeries.zero(arity, N, nmax)
    for i in range(arity):
        for e, p in log.coeffs.items():
            exp = tuple(e if k == i else 0 for k in range(arity))
            s = s + MultiSeries(arity, N, {exp: p}, nmax)
    return _exp_of(s, es, N, nmax)


def _exp_of(s: MultiSeries, es, N: int, nmax: int) -> MultiSeries:
    result = MultiSeries.zero(s.arity, N, nmax)
    power = s
    for m in range(1, N):
        coeff = es[m - 1]
        if coeff:
            result = result + power.scale_by_poly(coeff)
        if m + 1 < N:
            power = power * s
            if power.is_zero():
                break
    return result


def fgl_sum(xs: TruncatedSeries, ys: TruncatedSeries, N: int) -> TruncatedSeries:
    """x +_F y for univariate series sharing nmax and truncation.

    Computed as exp(log(xs) + log(ys)); reduces to xs + ys when all
    v_n are set to zero.
    """
    if xs.trunc != ys.trunc:
        raise ValueError("mismatched truncation orders")
    nmax = max(xs.nmax, ys.nmax, 1)
    _validate(nmax, N)
    log = hazewinkel_log(nmax, max(N, xs.trunc))
    es = exp_coefficients(nmax, max(N, xs.trunc))
    s = log.compose(xs) + log.compose(ys)
    result = TruncatedSeries.zero(s.trunc, nmax)
    power = s
    for m in range(1, s.trunc):
        coeff = es[m - 1]
        if coeff:
            result = result + power.scale_poly(coeff)
        if m + 1 < s.trunc:
            power = power * s
            if power.is_zero():
                break
    return TruncatedSeries({e: p for e, p in result.coeffs.items() if e < N}, N, nmax)


def phi_w_series(n: int, nmax: int, N: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """The phi_n and w_n series at level n.

    phi_n is [2]_F(u) reduced mod (2, v_1..v_{n-1}); its u^{2^n}
    coefficient is v_n (for n >= 1; the n = 0 term 2u dies mod 2).
    w_n = phi_n - v_n u^{2^n} is the residual, supported above u^{2^n}.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    if N <= (1 << (n + 1)):
        raise ValueError(
            f"truncation {N} too small to expose the u^{2 ** (n + 1)} term"
        )
    reduction = Reduction(mod2=True, v_killed_below=n)
    phi = two_series(nmax, N, reduction)
    w_coeffs = dict(phi.coeffs)
    if n >= 1:
        lead = w_coeffs.pop(1 << n, None)
        if lead is None or lead != RationalPoly.v(n, nmax).reduce_mod2():
            raise AssertionError(
                f"phi_{n} does not have lowest term v_{n} u^{2 ** n}"
            )
    w = TruncatedSeries(w_coeffs, N, nmax, reduction)
    if w.coeffs.get(1 << n):
        raise AssertionError(f"w_{n} has a residual u^{2 ** n} term")
    return phi, w


def b_image(k: int, nmax: int, N: int) -> TruncatedSeries:
    """Coefficient of x^k in x +_F u, as a truncated series in u.

    Each monomial is homogeneous of weight k - 1 in the convention where
    u has weight -1 and v_n weight 2^n - 1; the pullback generator b_k
    maps to ``b_generator_image(k)`` = coefficient of x^{k+1}, whose
    monomials all have weight k, i.e. degree k(1 + gamma*alpha).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if N <= 0:
        raise ValueError("N must be positive")
    nmax = max(nmax, 1)
    total = k + N + 1
    F = formal_group_law(nmax, total)
    coeff = F.coefficient_of(0, k)
    out: dict[int, RationalPoly] = {}
    for e, p in coeff.terms.items():
        j = e[1]
        if j < N:
            out[j] = out.get(j, RationalPoly.zero(nmax)) + p
    return TruncatedSeries(out, N, nmax)


def b_generator_image(k: int, nmax: int, N: int) -> TruncatedSeries:
    """Image of the degree-k(1+gamma*alpha) polynomial generator b_k."""
    return b_image(k + 1, nmax, N)


def iter_v_monomials(weight: int, nmax: int) -> Iterator[VExp]:
    """All v-exponent vectors of given 1-part weight (parts 2^n - 1)."""

    def rec(rem: int, n: int) -> Iterator[tuple[int, ...]]:
        if n == 0:
            if rem == 0:
                yield ()
            return
        part = (1 << n) - 1
        for e in range(rem // part + 1):
            for rest in rec(rem - e * part, n - 1):
                yield rest + (e,)

    for exps in rec(weight, nmax):
        yield _trim(exps)
