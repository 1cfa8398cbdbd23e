"""Combinatorics of the stunted-projective-space differential tables.

Three rule families drive the Borel cohomology spectral sequence of
RP^infty_m:

* vertical rules (coefficient v_n) act inside a u-column,
* horizontal rules (coefficient w_n, a genuine series) push to higher
  u-columns,
* special rules originate on the sigma-classes divisible by 2^{n+1} and
  are controlled by the bottom cell.

A rule at level n lives on page 2^{n+1} - 1.  For each u-column the
active levels are determined by a pair of pattern numbers: (s, t) for an
odd bottom cell m = 2k+1, (a, b) for an even one m = 2k.  Per column i
with finite t: horizontal levels are [0, s) and {t}, vertical levels are
[s, t), and the special rule sits at level t.  Columns with t = infinity
(i past 2k) follow the RP^infty pattern: horizontal for 2^p <= i,
vertical above.

The alternating binary decompositions and the epsilon/delta chains give
an independent route to the special-rule start columns; the two are
cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

INFINITE_PAGE = None  # sentinel for t = infinity / right-infinite ranges


def _ilog2(n: int) -> int:
    if n <= 0:
        raise ValueError("ilog2 of non-positive number")
    return n.bit_length() - 1


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# ---------------------------------------------------------------------------
# Alternating binary decompositions
# ---------------------------------------------------------------------------

ODD_EVEN_Q = "odd-stunted-even-q"
ODD_ODD_Q = "odd-stunted-odd-q"
EVEN_STUNTED = "even-stunted"


@dataclass(frozen=True)
class AltDecomposition:
    """Signed 2-power decomposition with strictly decreasing exponents."""

    form: str
    exponents: tuple[int, ...]

    def value(self) -> int:
        total = sum(
            (1 if i % 2 == 0 else -1) * (1 << n)
            for i, n in enumerate(self.exponents)
        )
        if self.form == ODD_ODD_Q:
            total -= 1
        return total

    @property
    def q(self) -> int:
        return len(self.exponents)

    def __str__(self) -> str:
        parts = []
        for i, n in enumerate(self.exponents):
            sign = "+" if i % 2 == 0 else "-"
            parts.append(f"{sign}2^{n}")
        s = "".join(parts).lstrip("+")
        if self.form == ODD_ODD_Q:
            s += "-1"
        return s


def _alt_candidates(target: int, q: int, max_exp: int):
    """Alternating sums of q strictly decreasing 2-powers equal to target."""

    def rec(rem: int, count: int, bound: int, acc: tuple[int, ...]):
        if count == 0:
            if rem == 0:
                yield acc
            return
        sign = 1 if len(acc) % 2 == 0 else -1
        for n in range(bound, -1, -1):
            # Cheap bound: the remaining alternating sum with top 2^n is
            # between 2^{n-1}-ish and 2^n; prune loosely.
            if sign == 1 and (1 << n) < rem - ((1 << n) - 1):
                break
            yield from rec(rem - sign * (1 << n), count - 1, n - 1, acc + (n,))

    yield from rec(target, q, max_exp, ())


def _search_form(target: int, parity: int | None, max_q: int, max_exp: int):
    """Minimal-q alternating representation; parity constrains q mod 2."""
    for q in range(1, max_q + 1):
        if parity is not None and q % 2 != parity:
            continue
        for exps in _alt_candidates(target, q, max_exp):
            return exps
    return None


def alt_decompose(ell: int, form: str) -> AltDecomposition:
    """Unique minimal-q decomposition of ``ell`` in the requested form.

    ``form`` may be one of the two odd-stunted tags, the even-stunted
    tag, or the shorthand "odd" which tries the even-q form first, then
    the odd-q form, taking the smaller q.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    max_exp = ell.bit_length() + 1
    max_q = max_exp + 2

    if form in (ODD_EVEN_Q, ODD_ODD_Q, "odd"):
        even = (
            _search_form(ell, 0, max_q, max_exp)
            if form in (ODD_EVEN_Q, "odd")
            else None
        )
        odd = (
            _search_form(ell + 1, 1, max_q, max_exp)
            if form in (ODD_ODD_Q, "odd")
            else None
        )
        best = None
        if even is not None:
            best = AltDecomposition(ODD_EVEN_Q, even)
        if odd is not None and (best is None or len(odd) < len(best.exponents)):
            best = AltDecomposition(ODD_ODD_Q, odd)
        if best is None:
            raise ValueError(f"{ell} admits no {form} decomposition")
        return best

    if form == EVEN_STUNTED:
        for q in range(1, max_q + 1):
            for exps in _alt_candidates(ell, q, max_exp):
                if q >= 2 and exps[-2] <= exps[-1] + 1:
                    continue
                return AltDecomposition(EVEN_STUNTED, exps)
        raise ValueError(f"{ell} admits no even-stunted decomposition")

    raise ValueError(f"unknown decomposition form {form!r}")


# ---------------------------------------------------------------------------
# epsilon- and delta-chains
# ---------------------------------------------------------------------------


def epsilon_of(ell: int) -> int:
    """epsilon(ell) = 2 ell - 2^{n_1} + 1 for the odd-stunted decomposition."""
    dec = alt_decompose(ell, "odd")
    return 2 * ell - (1 << dec.exponents[0]) + 1


def epsilon_chain(ell: int) -> tuple[int, list[int], list[int]]:
    """(epsilon(ell), chain ell_1..ell_q, start columns eps_q..eps_1).

    ell_{i+1} = 2^{n_i} - ell_i - 1 with the n_i from ell's own
    decomposition; eps_i = 1 + ell + sum_{j>i} epsilon(ell_j).  The
    eps_i are the start columns of the special differentials, listed for
    i = q down to 1 (increasing column order).
    """
    dec = alt_decompose(ell, "odd")
    n = dec.exponents
    q = dec.q
    chain = [ell]
    for i in range(q - 1):
        chain.append((1 << n[i]) - chain[i] - 1)
    eps_vals = [epsilon_of(x) for x in chain]
    starts = []
    for i in range(q, 0, -1):
        starts.append(1 + ell + sum(eps_vals[j] for j in range(i, q)))
    return epsilon_of(ell), chain, starts


def delta_of(ell: int) -> int:
    """delta(ell) = 2 ell - 2^{n_1} for the even-stunted decomposition."""
    dec = alt_decompose(ell, EVEN_STUNTED)
    return 2 * ell - (1 << dec.exponents[0])


def delta_chain(ell: int) -> tuple[int, list[int], list[int]]:
    """(delta(ell), chain ell_1..ell_q, start columns delta_q..delta_1)."""
    dec = alt_decompose(ell, EVEN_STUNTED)
    n = dec.exponents
    q = dec.q
    chain = [ell]
    for i in range(q - 1):
        chain.append((1 << n[i]) - chain[i])
    d_vals = [delta_of(x) for x in chain]
    starts = []
    for i in range(q, 0, -1):
        starts.append(ell + sum(d_vals[j] for j in range(i, q)))
    return delta_of(ell), chain, starts


def chain_levels(ell: int, odd: bool) -> list[tuple[int, int]]:
    """(start column, level) pairs for the special rules, column order."""
    dec = alt_decompose(ell, "odd" if odd else EVEN_STUNTED)
    starts = (epsilon_chain(ell) if odd else delta_chain(ell))[2]
    levels = list(reversed(dec.exponents))
    return list(zip(starts, levels))


# ---------------------------------------------------------------------------
# Pattern numbers (s, t) and (a, b)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def st_numbers(k: int, i: int) -> tuple[int, int | None]:
    """(s_{k,i}, t_{k,i}) for the odd bottom cell m = 2k+1; t=None is infinity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if i <= k:
        raise ValueError(f"need i >= k+1, got k={k}, i={i}")
    if i > 2 * k:
        return (_ilog2(i), INFINITE_PAGE)
    if _is_pow2(k + 1):
        ell = _ilog2(k + 1)
        return (_ilog2(i - k) + 1, ell)
    ell = _ilog2(2 * k)  # unique power with k+1 <= 2^ell <= 2k
    if i < (1 << ell):
        return st_numbers((1 << ell) - k - 1, (1 << ell) - 2 * k - 1 + i)
    return (_ilog2(i - (2 * k + 1 - (1 << ell))) + 1, ell)


@lru_cache(maxsize=None)
def ab_numbers(k: int, i: int) -> tuple[int, int | None]:
    """(a_{k,i}, b_{k,i}) for the even bottom cell m = 2k; b=None is infinity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if i < k:
        raise ValueError(f"need i >= k, got k={k}, i={i}")
    if i >= 2 * k:
        return (_ilog2(i), INFINITE_PAGE)
    if _is_pow2(k):
        ell = _ilog2(k)
        a = 0 if i == k else _ilog2(i - k) + 1
        return (a, ell)
    ell = _ilog2(2 * k - 1)  # unique power with k <= 2^ell < 2k
    if i < (1 << ell):
        return ab_numbers((1 << ell) - k, (1 << ell) - 2 * k + i)
    return (_ilog2(i - (2 * k - (1 << ell))) + 1, ell)


# ---------------------------------------------------------------------------
# Differential rules
# ---------------------------------------------------------------------------

VERTICAL = "vertical"
HORIZONTAL = "horizontal"
SPECIAL = "special"


@dataclass(frozen=True)
class DifferentialRule:
    """One family of differentials d_page on sigma^(res mod mod) u^[lo, hi]."""

    page: int
    sigma_res: int
    sigma_mod: int
    u_lo: int
    u_hi: int | None  # None = right-infinite
    klass: str
    level: int

    def __post_init__(self):
        if self.page != (1 << (self.level + 1)) - 1:
            raise ValueError("page must be 2^(level+1) - 1")
        if self.sigma_mod != (1 << (self.level + 1)):
            raise ValueError("sigma modulus must be 2^(level+1)")
        expected = 0 if self.klass == SPECIAL else (1 << self.level)
        if self.sigma_res != expected:
            raise ValueError(f"sigma residue must be {expected} for {self.klass}")
        if self.u_hi is not None and self.u_hi < self.u_lo:
            raise ValueError("empty u-range")

    def applies(self, sigma_exp: int, u_exp: int) -> bool:
        if u_exp < self.u_lo:
            return False
        if self.u_hi is not None and u_exp > self.u_hi:
            return False
        return sigma_exp % self.sigma_mod == self.sigma_res

    def range_text(self) -> str:
        if self.u_hi is None:
            return f"i>={self.u_lo}"
        if self.u_hi == self.u_lo:
            return f"u^{self.u_lo}"
        return f"{self.u_lo}<=i<={self.u_hi}"

    def __str__(self) -> str:
        return (
            f"d_{self.page} sigma^({self.sigma_res} mod {self.sigma_mod}) "
            f"{self.range_text()}"
        )

    def to_json_obj(self) -> dict:
        return {
            "page": self.page,
            "sigma_res": self.sigma_res,
            "sigma_mod": self.sigma_mod,
            "u_lo": self.u_lo,
            "u_hi": self.u_hi,
            "class": self.klass,
            "level": self.level,
        }


def bottom_column(m: int | None) -> int:
    """Lowest u-exponent of the E1-term for RP^infty_m (0 for m = infinity)."""
    if m is None:
        return 0
    if m < 1:
        raise ValueError("m must be >= 1")
    return (m + 1) // 2


def column_levels(m: int | None, i: int, level_cap: int) -> dict[str, list[int]]:
    """Active rule levels at u-column i, split by class.

    Levels are capped at ``level_cap`` (vertical families above any
    column are infinite in the RP^infty regime).
    """
    if m is None:
        k2 = None
    else:
        k2 = m // 2
    tail = (
        m is None
        or (m % 2 == 1 and i > 2 * k2)
        or (m % 2 == 0 and i >= 2 * k2)
    )
    if tail:
        # RP^infty pattern: horizontal for 2^p <= i, vertical above.
        split = _ilog2(i) if i >= 1 else -1
        return {
            HORIZONTAL: [p for p in range(0, split + 1) if p <= level_cap],
            VERTICAL: [p for p in range(split + 1, level_cap + 1)],
            SPECIAL: [],
        }
    if m % 2 == 1:
        s, t = st_numbers(k2, i)
    else:
        s, t = ab_numbers(k2, i)
    horiz = [p for p in range(0, s) if p <= level_cap]
    if t is not None and t <= level_cap and t not in horiz:
        horiz.append(t)
    vert = [p for p in range(s, t) if p <= level_cap] if t is not None else []
    spec = [t] if (t is not None and t <= level_cap) else []
    return {HORIZONTAL: horiz, VERTICAL: vert, SPECIAL: spec}


def tail_start(m: int | None) -> int:
    """First column governed by the RP^infty pattern (2k for m=2k, 2k+1 for m=2k+1)."""
    return 0 if m is None else m


@dataclass(frozen=True)
class DifferentialTable:
    m: int | None
    i_max: int
    rules: tuple[DifferentialRule, ...]

    def rules_for(self, klass: str) -> list[DifferentialRule]:
        return [r for r in self.rules if r.klass == klass]

    def to_json_obj(self) -> dict:
        return {
            "m": self.m if self.m is not None else "inf",
            "i_max": self.i_max,
            "rules": [r.to_json_obj() for r in self.rules],
        }

    def to_text(self) -> str:
        """Aligned text table grouped as in the worked examples."""
        name = self.m if self.m is not None else "inf"
        lines = [f"BCSS differentials for RP^inf_{name} (columns <= {self.i_max})"]
        for klass, title in (
            (SPECIAL, "special differentials"),
            (VERTICAL, "vertical differentials"),
            (HORIZONTAL, "horizontal differentials"),
        ):
            group = self.rules_for(klass)
            if not group:
                continue
            lines.append(f"  {title}:")
            for r in group:
                lines.append(
                    f"    d_{r.page:<3} sigma^({r.sigma_res} mod {r.sigma_mod}):"
                    f" {r.range_text()}"
                )
        if self.m is not None and self.i_max == self.m - 1:
            lines.append(
                f"  differentials for i >= {tail_start(self.m)}"
                " are the same as for RP^inf"
            )
        return "\n".join(lines)


def differential_table(
    m: int | None,
    i_max: int | None = None,
    level_cap: int | None = None,
) -> DifferentialTable:
    """All differential-rule families for RP^infty_m up to column i_max.

    For finite m the default horizon is m - 1 (the structured range; the
    worked examples stop there and note that higher columns follow the
    RP^infty table).  Horizontal families that remain active into the
    stable tail are emitted with an infinite right end; everything else
    is clipped at i_max.
    """
    if m is not None and m < 1:
        raise ValueError("m must be >= 1")
    bot = bottom_column(m)
    if i_max is None:
        i_max = (m - 1) if m is not None else 16
    if i_max < bot:
        raise ValueError("i_max below the bottom column")
    if level_cap is None:
        cap = max(i_max.bit_length() + 1, 2)
    else:
        cap = level_cap

    # Scan one column past the horizon to decide right-infinite ranges.
    horizon = i_max + 1
    active: dict[tuple[str, int], list[int]] = {}
    for i in range(bot, horizon + 1):
        levels = column_levels(m, i, cap)
        for klass, ps in levels.items():
            for p in ps:
                active.setdefault((klass, p), []).append(i)

    rules: list[DifferentialRule] = []
    for (klass, p), cols in active.items():
        runs: list[list[int]] = []
        for c in cols:
            if runs and c == runs[-1][1] + 1:
                runs[-1][1] = c
            else:
                runs.append([c, c])
        for lo, hi in runs:
            if lo > i_max:
                continue
            if hi > i_max:
                persists = klass == HORIZONTAL and horizon >= tail_start(m)
                hi_out = None if persists else i_max
            else:
                hi_out = hi
            res = 0 if klass == SPECIAL else (1 << p)
            rules.append(
                DifferentialRule(
                    page=(1 << (p + 1)) - 1,
                    sigma_res=res,
                    sigma_mod=1 << (p + 1),
                    u_lo=lo,
                    u_hi=hi_out,
                    klass=klass,
                    level=p,
                )
            )
    rules.sort(
        key=lambda r: (
            {SPECIAL: 0, VERTICAL: 1, HORIZONTAL: 2}[r.klass],
            r.page,
            r.u_lo,
        )
    )
    return DifferentialTable(m=m, i_max=i_max, rules=tuple(rules))
