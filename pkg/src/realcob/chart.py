"""Finite-window spectral sequence engine.

Two closely related engines share the rule tables from ``patterns`` and
the series from ``series``:

* the Tate engine inverts the Euler class a from the start.  Monomials
  sigma^s u^j v^E are graded by d = s + j - V (V the v-weight); every
  differential raises d by one and the filtration coordinate
  Q = V + s - j by the page number, so slots (d, Q) carry all the
  linear algebra, done over F2 with bitmask Gaussian elimination.
  After the d1-step everything is 2-torsion; the only integral
  correction is the multiply-by-2 rule at bottom columns, which kills
  its sigma-odd sources and leaves targets alone.

* the Borel engine keeps the a-exponent as an explicit coordinate with
  cells keyed by the RO-degree pair (c1, c_alpha).  The a = 0 line
  carries integral classes which never enter the F2 page spaces; they
  emit mod-2 shadows and record 2-divisibility markers when hit.

Truncation policy: a class whose rule image leaves the window (in u, in
v-weight, or past the materialized degree band) is killed outright
("analytic kill"): the rule tables assert these differentials are
injective on the surviving span, and audited counters report every such
event.  Only classes with sigma-exponent 0 can be genuine permanent
cycles in the Tate range, and no rule image ever lands on a v-free
monomial, so analytic kills can never erase a true survivor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grading import vexp_weight
from .patterns import (
    HORIZONTAL,
    SPECIAL,
    VERTICAL,
    DifferentialRule,
    DifferentialTable,
    bottom_column,
    differential_table,
)
from .series import (
    MOD2,
    Reduction,
    iter_v_monomials,
    two_series,
)

VExp = tuple[int, ...]
Monomial = tuple[int, int, VExp]  # (sigma_exp, u_exp, v_exps)


# ---------------------------------------------------------------------------
# Window and 2-series data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Monomial window for a chart run."""

    u_max: int
    v_cap: int
    nmax: int
    deg_lo: int
    deg_hi: int

    def degree_band(self, page_steps: int) -> range:
        # Missing incoming data at the bottom edge walks up one degree
        # per page step, so materialize that much margin below.
        return range(self.deg_lo - page_steps - 1, self.deg_hi + 2)


class SeriesData:
    """Mod-2 series terms feeding the rule matrices."""

    def __init__(self, nmax: int, u_max: int):
        self.nmax = nmax
        self.u_max = u_max
        N = u_max + 2
        self.mod2_terms: list[tuple[int, VExp]] = []
        full = two_series(nmax, N, MOD2)
        for j, poly in full.sorted_items():
            for exp in sorted(poly.terms):
                self.mod2_terms.append((j, exp))
        # w_n operator terms: (u-shift, v-monomial) with shift >= 1,
        # from ([2]_F mod (2, v_1..v_{n-1}) minus the v_n u^{2^n} head)
        # divided by u^{2^n}.
        self.w_ops: dict[int, list[tuple[int, VExp]]] = {}
        for n in range(0, nmax):
            red = Reduction(mod2=True, v_killed_below=n)
            series = two_series(nmax, N, red)
            head = 1 << n
            ops = []
            for j, poly in series.sorted_items():
                if j <= head:
                    continue
                for exp in sorted(poly.terms):
                    ops.append((j - head, exp))
            self.w_ops[n] = ops
        # Rewriting rule for v1 u^j with j past the quotient edge:
        # v1 u^j = sum of the other mod-2 terms shifted by j - 2.
        self.v1_tail = [
            (j - 2, exp) for j, exp in self.mod2_terms if not (j == 2 and exp == (1,))
        ]


def _mul_vexp(a: VExp, b: VExp) -> VExp:
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _v_gen(n: int) -> VExp:
    return tuple(0 for _ in range(n - 1)) + (1,)


# ---------------------------------------------------------------------------
# F2 linear algebra on bitmasks
# ---------------------------------------------------------------------------


class BitEchelon:
    """Row space over F2; rows are int bitmasks."""

    __slots__ = ("pivots",)

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def reduce(self, v: int) -> int:
        while v:
            b = v.bit_length() - 1
            row = self.pivots.get(b)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        """Insert v; returns True if the rank grew."""
        v = self.reduce(v)
        if v == 0:
            return False
        self.pivots[v.bit_length() - 1] = v
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)


def nullspace(rows: list[int]) -> list[int]:
    """Combinations (as bitmasks over row indices) that sum to zero."""
    ech: dict[int, tuple[int, int]] = {}
    kernel: list[int] = []
    for i, row in enumerate(rows):
        tag = 1 << i
        while row:
            b = row.bit_length() - 1
            if b not in ech:
                ech[b] = (row, tag)
                break
            erow, etag = ech[b]
            row ^= erow
            tag ^= etag
        else:
            kernel.append(tag)
    return kernel


# ---------------------------------------------------------------------------
# Quotient-basis bookkeeping (the 2-series relation)
# ---------------------------------------------------------------------------


class QuotientBasis:
    """Monomial basis of the E1-term modulo the 2-series ideal.

    The ideal's Hermite pivots are the monomials v1 u^j with j past the
    bottom-dependent edge; excluded monomials rewrite into higher-u
    tails, mod 2, via the 2-series.
    """

    def __init__(self, m: int | None, window: Window, sdata: SeriesData):
        self.m = m
        self.window = window
        self.sdata = sdata
        self.bot = bottom_column(m)
        # v1-divisible monomials are excluded from u^edge on; the ideal
        # starts at u^k [2]_F for both parities, so edge = k + 2.
        self.v1_edge = (0 if m is None else m // 2) + 2
        self._cache: dict[Monomial, tuple[list[Monomial], bool]] = {}

    def admissible(self, mono: Monomial) -> bool:
        s, j, exps = mono
        if j < self.bot or j > self.window.u_max:
            return False
        if vexp_weight(exps) > self.window.v_cap:
            return False
        if exps and exps[0] >= 1 and j >= self.v1_edge:
            return False
        return True

    def reduce_monomial(self, mono: Monomial) -> tuple[list[Monomial], bool]:
        """Rewrite into admissible monomials; True flags dropped terms."""
        cached = self._cache.get(mono)
        if cached is not None:
            return cached
        s, j, exps = mono
        if j > self.window.u_max or vexp_weight(exps) > self.window.v_cap:
            result: tuple[list[Monomial], bool] = ([], True)
        elif exps and exps[0] >= 1 and j >= self.v1_edge:
            # v1 u^j = (tail of [2]_F mod 2) u^{j-2}, valid because
            # u^{j-2} multiples of the 2-series lie in the ideal.
            rest = (exps[0] - 1,) + exps[1:]
            while rest and rest[-1] == 0:
                rest = rest[:-1]
            acc: dict[Monomial, int] = {}
            overflow = False
            for shift, term in self.sdata.v1_tail:
                sub, ov = self.reduce_monomial(
                    (s, j - 2 + shift, _mul_vexp(rest, term))
                )
                overflow = overflow or ov
                for t in sub:
                    acc[t] = acc.get(t, 0) ^ 1
            result = ([k for k, c in acc.items() if c], overflow)
        else:
            result = ([mono], False)
        self._cache[mono] = result
        return result


# ---------------------------------------------------------------------------
# Rule application
# ---------------------------------------------------------------------------


def _nu2(s: int) -> int | None:
    """2-adic valuation of s; None for s = 0."""
    if s == 0:
        return None
    return (s & -s).bit_length() - 1


def monomial_images(
    mono: Monomial,
    level: int,
    klass: str,
    qb: QuotientBasis,
) -> tuple[list[Monomial], bool]:
    """Image monomials of one rule application; True flags lost terms.

    Level-0 vertical rules (coefficient 2) have no mod-2 image; callers
    treat their sources via the kill rule instead.  Horizontal operators
    are genuine infinite series, so part of the true image always lies
    beyond any finite u-window: horizontal sources are flagged
    unconditionally (they die analytically) while the visible terms
    still quotient their in-window targets.
    """
    s, j, exps = mono
    shift = 1 << level
    if klass in (VERTICAL, SPECIAL):
        if level == 0:
            return ([], False)
        target = (s + shift, j, _mul_vexp(exps, _v_gen(level)))
        return qb.reduce_monomial(target)
    terms: dict[Monomial, int] = {}
    for du, vm in qb.sdata.w_ops[level]:
        t = (s + shift, j + du, _mul_vexp(exps, vm))
        reduced, _ = qb.reduce_monomial(t)
        for r in reduced:
            terms[r] = terms.get(r, 0) ^ 1
    return [k for k, c in terms.items() if c], True


# ---------------------------------------------------------------------------
# The Tate engine
# ---------------------------------------------------------------------------


@dataclass
class PageStats:
    """Per-page audit: exact rank bookkeeping across one homology step.

    ``rank_out`` is the rank of the full differential (including the
    action on out-of-window targets, tracked by phantom coordinates);
    ``absorbed`` is the in-window quotient consumed by its image.  The
    conservation law rank(E_{r+1}) = rank(E_r) - 2 rank(d_r) holds
    verbatim when nothing leaves the window (analytic_kills = 0); in
    general the difference rank_out - absorbed is exactly the flux of
    differentials whose targets are out of window.
    """

    page: int
    dim_before: int
    dim_after: int
    rank_out: int
    absorbed: int
    analytic_kills: int
    two_kills: int
    d_squared_ok: bool
    euler_ok: bool
    conservation_exact: bool


@dataclass
class TateResult:
    m: int | None
    window: Window
    pages: list[PageStats]
    survivors: dict[int, int]  # degree -> F2-rank on the certified band
    survivor_classes: dict[int, list[list[Monomial]]]
    certified: list[int]
    analytic_events: int


def _slot_key(mono: Monomial) -> tuple[int, int]:
    s, j, exps = mono
    V = vexp_weight(exps)
    return (s + j - V, V + s - j)  # (degree d, filtration Q)


class _Slot:
    __slots__ = ("monos", "index", "reps", "boundaries", "killed_mask")

    def __init__(self, monos: list[Monomial]):
        self.monos = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.reps: list[int] = [1 << i for i in range(len(monos))]
        self.boundaries = BitEchelon()
        self.killed_mask = 0


def tate_run(
    m: int | None,
    window: Window,
    table: DifferentialTable | None = None,
    sdata: SeriesData | None = None,
) -> TateResult:
    """Run the a-inverted spectral sequence on the given window."""
    if sdata is None:
        sdata = SeriesData(window.nmax, window.u_max)
    qb = QuotientBasis(m, window, sdata)
    bot = qb.bot

    # Levels with any in-window action; pages 2^{n+1}-1 for n <= L.
    level_cap = max(1, (window.u_max + window.v_cap + abs(window.deg_hi) + 4).bit_length())
    if table is None:
        table = differential_table(m, i_max=window.u_max, level_cap=level_cap)
    rules = list(table.rules)

    page_list = sorted({r.page for r in rules})
    steps = len(page_list)
    band = window.degree_band(steps)

    # Materialize slots.
    slots: dict[tuple[int, int], _Slot] = {}
    by_degree: dict[int, list[tuple[int, int]]] = {}
    vmonos = {
        V: list(iter_v_monomials(V, window.nmax)) for V in range(window.v_cap + 1)
    }
    for d in band:
        for j in range(bot, window.u_max + 1):
            for V in range(window.v_cap + 1):
                s = d + V - j
                for exps in vmonos[V]:
                    mono = (s, j, exps)
                    if qb.admissible(mono):
                        key = _slot_key(mono)
                        slots.setdefault(key, _Slot([])).monos.append(mono)
    for key, slot in slots.items():
        slot.index = {mo: i for i, mo in enumerate(slot.monos)}
        slot.reps = [1 << i for i in range(len(slot.monos))]
        by_degree.setdefault(key[0], []).append(key)

    rules_by_page: dict[int, list[DifferentialRule]] = {}
    for r in rules:
        rules_by_page.setdefault(r.page, []).append(r)

    stats: list[PageStats] = []
    analytic_events = 0
    band_set = set(band)

    for page in page_list:
        page_rules = rules_by_page[page]
        dim_before = sum(len(s.reps) for s in slots.values())
        two_kills = 0

        # The multiply-by-2 rule: level-0 verticals kill their sigma-odd
        # sources integrally (kernel of an injective x2 map).
        kill_rules = [r for r in page_rules if r.klass == VERTICAL and r.level == 0]
        if kill_rules:
            for key, slot in slots.items():
                mask = 0
                for i, mono in enumerate(slot.monos):
                    if any(r.applies(mono[0], mono[1]) for r in kill_rules):
                        mask |= 1 << i
                if mask:
                    new_reps = []
                    for v in slot.reps:
                        if v & mask:
                            two_kills += 1
                        else:
                            new_reps.append(v)
                    slot.reps = new_reps

        # Monomial-level images for the matrix rules of this page.
        matrix_rules = [
            r for r in page_rules if not (r.klass == VERTICAL and r.level == 0)
        ]
        mono_images: dict[tuple[int, int], dict[int, tuple[int, bool]]] = {}
        for key, slot in slots.items():
            per = {}
            for i, mono in enumerate(slot.monos):
                acc = None
                lossy = False
                for r in matrix_rules:
                    out = rule_images(r, mono, qb)
                    if out is None:
                        continue
                    terms, ov = out
                    lossy = lossy or ov
                    if acc is None:
                        acc = {}
                    for t in terms:
                        acc[t] = acc.get(t, 0) ^ 1
                if acc is None and not lossy:
                    continue
                tkey = (key[0] + 1, key[1] + page)
                tslot = slots.get(tkey)
                img = 0
                if acc:
                    for t, c in acc.items():
                        if not c:
                            continue
                        if tslot is not None and t in tslot.index:
                            img |= 1 << tslot.index[t]
                        else:
                            lossy = True
                per[i] = (img, lossy)
            if per:
                mono_images[key] = per

        # Assemble per-slot rows, kernels, and boundary emissions.
        rank_out = 0
        analytic_this = 0
        emissions: dict[tuple[int, int], list[int]] = {}
        kernels: dict[tuple[int, int], list[int]] = {}
        composite_ok = True
        for key, slot in slots.items():
            per = mono_images.get(key)
            if not per or not slot.reps:
                kernels[key] = list(slot.reps)
                continue
            tkey = (key[0] + 1, key[1] + page)
            tslot = slots.get(tkey)
            rows = []
            phantom_base = len(tslot.monos) if tslot is not None else 0
            for ri, rep in enumerate(slot.reps):
                img = 0
                phantom = 0
                v = rep
                while v:
                    b = v & -v
                    i = b.bit_length() - 1
                    v ^= b
                    if i in per:
                        term, lossy = per[i]
                        img ^= term
                        if lossy:
                            phantom |= 1 << i
                            analytic_this += 1
                # Reduce the visible part against existing boundaries.
                if tslot is not None:
                    img = tslot.boundaries.reduce(img)
                rows.append((img | (phantom << phantom_base), img, ri))
            raw_rows = [r[0] for r in rows]
            combos = nullspace(raw_rows)
            rank_out += len(rows) - len(combos)
            kern = []
            for combo in combos:
                vec = 0
                c = combo
                while c:
                    b = c & -c
                    ri = b.bit_length() - 1
                    c ^= b
                    vec ^= slot.reps[ri]
                if vec:
                    kern.append(vec)
            kernels[key] = kern
            if tslot is not None:
                ems = emissions.setdefault(tkey, [])
                for _, img, _ in rows:
                    if img:
                        ems.append(img)

        # d^2 = 0 on visible composites: emitted images must be cycles.
        absorbed_total = 0
        for tkey, ems in emissions.items():
            tslot = slots[tkey]
            per = mono_images.get(tkey)
            if per:
                for img in ems:
                    comp = 0
                    lossy = False
                    v = img
                    while v:
                        b = v & -v
                        i = b.bit_length() - 1
                        v ^= b
                        if i in per:
                            term, lv = per[i]
                            comp ^= term
                            lossy = lossy or lv
                    t2 = slots.get((tkey[0] + 1, tkey[1] + page))
                    if comp and not lossy:
                        if t2 is None or not t2.boundaries.contains(comp):
                            composite_ok = False

        # Commit boundaries, then rebuild representative spaces.
        for tkey, ems in emissions.items():
            tslot = slots[tkey]
            for img in ems:
                if tslot.boundaries.add(img):
                    absorbed_total += 1
        for key, slot in slots.items():
            ech = BitEchelon()
            new_reps = []
            for vec in kernels.get(key, slot.reps):
                v = slot.boundaries.reduce(vec)
                if v and ech.add(v):
                    new_reps.append(v)
            slot.reps = new_reps

        dim_after = sum(len(s.reps) for s in slots.values())
        euler_ok = dim_after == dim_before - two_kills - rank_out - absorbed_total
        analytic_events += analytic_this
        stats.append(
            PageStats(
                page=page,
                dim_before=dim_before,
                dim_after=dim_after,
                rank_out=rank_out,
                absorbed=absorbed_total,
                analytic_kills=analytic_this,
                two_kills=two_kills,
                d_squared_ok=composite_ok,
                euler_ok=euler_ok,
            )
        )

    certified = [d for d in range(window.deg_lo, window.deg_hi + 1) if d in band_set]
    survivors: dict[int, int] = {}
    classes: dict[int, list[list[Monomial]]] = {}
    for d in certified:
        count = 0
        reps_here: list[list[Monomial]] = []
        for key in by_degree.get(d, []):
            slot = slots[key]
            for vec in slot.reps:
                count += 1
                mons = []
                v = vec
                while v:
                    b = v & -v
                    i = b.bit_length() - 1
                    v ^= b
                    mons.append(slot.monos[i])
                reps_here.append(sorted(mons))
        survivors[d] = count
        classes[d] = reps_here
    return TateResult(
        m=m,
        window=window,
        pages=stats,
        survivors=survivors,
        survivor_classes=classes,
        certified=certified,
        analytic_events=analytic_events,
    )


@dataclass
class TateRankReport:
    m: int | None
    expected_bottom: int
    per_degree: dict[int, tuple[int, int]]  # degree -> (rank, expected)
    passed: bool


def tate_rank_check(result: TateResult) -> TateRankReport:
    """Compare a-inverted survivor ranks against the cell model.

    RP^infty_m has one cell in each dimension >= m; after inverting a
    each cell contributes a single F2[a, 1/a]-line, so the expected rank
    is 1 per degree >= m (0 below), with m = 0 for RP^infty itself.
    """
    bottom = 0 if result.m is None else result.m
    per = {}
    ok = True
    for d, rank in sorted(result.survivors.items()):
        expected = 1 if d >= bottom else 0
        per[d] = (rank, expected)
        if rank != expected:
            ok = False
    return TateRankReport(result.m, bottom, per, ok)
