"""Locally analytic and locally Iwasawa function modules on Z_p^d.

Functions are stored per residue class: an LAFunction of level m keeps,
for each class a mod p^m, the Tate expansion f_a with f(a + p^m x) =
f_a(x).  An LIFunction of level m+1 keeps bounded expansions read on the
open unit disc, f(a + p^{m+1} x) = g_a(p x).  Both kinds may carry extra
weight variables at the end of the ring so that whole families over a
weight disc move through the same code paths (space variables first,
weight variables last).

Group elements act through explicit Iwahori factorizations on the big
cell.  A rank-2 character applies to the pair (a + c z, det); a rank-3
character (the two-factor wiring) applies to (t1, t1', det/(t1 t1')).
Matrix entries are exact integers, so the recentring division by p^m is
done under m guard digits and the class engines lose no precision.
"""

import itertools
import math

from .padic import PadicNum, PrecisionError, ival, teichmuller
from .series import (
    BOUNDED,
    TATE,
    IwasawaElement,
    TruncatedSeries,
    extend_vars,
    iwasawa_eval,
    series_exp_small,
    series_inverse,
    series_log_one_unit,
    substitute_vars,
)
from .characters import is_m_analytic, omega_pullback


def _as_int_matrix(g):
    (a, b), (c, d) = g
    return int(a), int(b), int(c), int(d)


def _check_iwahori(g, p):
    a, b, c, d = _as_int_matrix(g)
    det = a * d - b * c
    if a % p == 0 or c % p != 0 or det % p == 0:
        raise ValueError("group element outside the wired parahoric")
    return det


def _divexact_series(f, k):
    """Divide every coefficient by p^k exactly; the precision drops by k."""
    if k == 0:
        return f
    if f.prec <= k:
        raise PrecisionError("division consumes the whole working precision")
    q = f.p ** k
    data = {}
    for e, c in f.coeffs.items():
        if c % q:
            raise PrecisionError("coefficient not divisible by p^%d" % k)
        data[e] = c // q
    return TruncatedSeries(f.p, f.prec - k, f.nvars, f.degree, data, f.profile)


def _monomial_substitute(f, repl):
    """Simultaneous substitution x_i -> repl[i] (series in the same ring).

    Variables absent from repl are kept.  Power products are built by
    truncated multiplication, which computes the kept degree range of the
    exact composite exactly.
    """
    if not repl:
        return f
    prec = min([f.prec] + [g.prec for g in repl.values()])
    cache = {i: [TruncatedSeries.constant(f.p, prec, f.nvars, f.degree, 1, g.profile)]
             for i, g in repl.items()}

    def power(i, k):
        col = cache[i]
        while len(col) <= k:
            col.append(col[-1] * repl[i].reduce(prec))
        return col[k]

    out = TruncatedSeries.constant(f.p, prec, f.nvars, f.degree, 0, f.profile)
    for e, c in f.coeffs.items():
        rest = tuple(0 if i in repl else ei for i, ei in enumerate(e))
        term = TruncatedSeries(f.p, prec, f.nvars, f.degree, {rest: c}, f.profile)
        for i, ei in enumerate(e):
            if ei and i in repl:
                term = term * power(i, ei)
        out = out + term
    return out


def _family_vars(kappa):
    return kappa.analytic[0].series.nvars if kappa.is_family() else 0


def _apply_character(kappa, bases, nvars, degree, prec):
    """kappa evaluated on a tuple of series and scalar bases.

    Series bases must be congruent to a unit constant mod p.  Scalar
    bases may be non-units only where the component is a nonnegative
    algebraic exponent (then the power is an exact integer operation).
    Returns a series in the given ring, weight variables last.
    """
    p = kappa.p
    woff = nvars - _family_vars(kappa)
    out = TruncatedSeries.constant(p, prec, nvars, degree, 1, TATE)
    scalar = PadicNum(p, prec, 1)
    for i, base in enumerate(bases):
        a = kappa.torsion[i]
        s = kappa.analytic[i]
        if isinstance(base, int):
            base = PadicNum(p, prec, base)
        if isinstance(base, PadicNum):
            base = base.reduce(min(base.prec, prec))
            if base.is_unit():
                value = kappa.component(i)(base)
                if isinstance(value, IwasawaElement):
                    out = out * extend_vars(value.series, nvars, offset=woff)
                else:
                    scalar = scalar * value
            else:
                algebraic = (isinstance(s, PadicNum) and a >= 0
                             and (s - PadicNum(p, s.prec, a)).is_zero())
                if not algebraic:
                    raise ValueError("non-unit base needs a nonnegative "
                                     "algebraic exponent")
                scalar = scalar * base ** a
            continue
        base = base.reduce(min(base.prec, prec))
        root = teichmuller(base.constant_term())
        if a % (p - 1):
            scalar = scalar * root ** (a % (p - 1))
        lg = series_log_one_unit(base.scale(root.invert()))
        if lg.nvars != nvars:
            lg = extend_vars(lg, nvars, offset=0)
        if isinstance(s, IwasawaElement):
            expo = lg * extend_vars(s.series, nvars, offset=woff)
        else:
            expo = lg.scale(s)
        out = out * series_exp_small(expo)
    return out.scale(scalar)


def _mobius_data(g, p, work_prec, nvars, degree, var, center, level, class_mod=None):
    """Iwahori cocycle and recentred coordinate at one residue class.

    For z = center + p^level x_var the factorization n(z) g = q-bar
    n(mob(z)) gives t1 = a + c z (leading diagonal of q-bar).  Returns
    (t1, det, target, y) with target = mob(center) mod p^class_mod and
    y = (mob(z) - target) / p^level, certified with no precision loss
    because the matrix entries are exact.
    """
    a, b, c, d = _as_int_matrix(g)
    det = a * d - b * c
    arg = TruncatedSeries.variable(p, work_prec, nvars, degree, var).scale(p ** level)
    arg = arg + TruncatedSeries.constant(p, work_prec, nvars, degree, center)
    t1 = arg.scale(c) + TruncatedSeries.constant(p, work_prec, nvars, degree, a)
    mob = (arg.scale(d) + TruncatedSeries.constant(p, work_prec, nvars, degree, b)) \
        * series_inverse(t1)
    cm = level if class_mod is None else class_mod
    target = mob.constant_term().lift() % p ** cm
    y = mob - TruncatedSeries.constant(p, work_prec, nvars, degree, target)
    return t1, det, target, _divexact_series(y, level)


def _add_values(x, y, p, wvars, degree):
    """Accumulate moment-table entries, promoting ints to family constants."""
    xi, yi = isinstance(x, IwasawaElement), isinstance(y, IwasawaElement)
    if xi and not yi:
        y = IwasawaElement.constant(p, x.series.prec, wvars, degree, y if isinstance(y, int) else y.lift())
    elif yi and not xi:
        x = IwasawaElement.constant(p, y.series.prec, wvars, degree, x if isinstance(x, int) else x.lift())
    return x + y


class LAFunction:
    """Level-m locally analytic function on Z_p^d, optionally in a family.

    table maps each class a in (Z/p^m)^d to the Tate series of
    f(a + p^m x); the series ring has the d space variables first and
    wvars weight variables last.  Missing classes mean the zero series.
    """

    def __init__(self, p, prec, dim, level, degree, table, wvars=0):
        if dim < 1 or level < 0 or wvars < 0:
            raise ValueError("need dim >= 1, level >= 0, wvars >= 0")
        self.p = p
        self.prec = prec
        self.dim = dim
        self.level = level
        self.degree = degree
        self.wvars = wvars
        self.table = {}
        for key in itertools.product(range(p ** level), repeat=dim):
            f = table.get(key)
            if f is None:
                f = TruncatedSeries.constant(p, prec, dim + wvars, degree, 0)
            if f.nvars != dim + wvars:
                raise ValueError("class series in the wrong ring")
            self.table[key] = f.with_profile(TATE).reduce(min(f.prec, prec))
        if set(table) - set(self.table):
            raise ValueError("table key outside (Z/p^level)^dim")

    @classmethod
    def constant(cls, p, prec, dim, level, degree, value, wvars=0):
        one = TruncatedSeries.constant(p, prec, dim + wvars, degree, value)
        keys = itertools.product(range(p ** level), repeat=dim)
        return cls(p, prec, dim, level, degree, {k: one for k in keys}, wvars)

    @classmethod
    def coordinate(cls, p, prec, dim, level, degree, i, wvars=0):
        """The function z -> z_i."""
        table = {}
        for key in itertools.product(range(p ** level), repeat=dim):
            f = TruncatedSeries.variable(p, prec, dim + wvars, degree, i).scale(p ** level)
            table[key] = f + TruncatedSeries.constant(p, prec, dim + wvars, degree, key[i])
        return cls(p, prec, dim, level, degree, table, wvars)

    @classmethod
    def from_polynomial(cls, f, level=0, wvars=0):
        """Wrap a global polynomial (series over Z_p^d) at the given level."""
        dim = f.nvars - wvars
        base = cls(f.p, f.prec, dim, 0, f.degree, {(0,) * dim: f}, wvars)
        return base.refine(level)

    def copy_with(self, table, level=None, prec=None):
        return LAFunction(self.p, self.prec if prec is None else prec, self.dim,
                          self.level if level is None else level,
                          self.degree, table, self.wvars)

    def refine(self, new_level):
        """Re-expand the class data at a deeper level (exact)."""
        if new_level < self.level:
            raise ValueError("refinement only deepens the level")
        if new_level == self.level:
            return self
        step = new_level - self.level
        zeros = (0,) * self.wvars
        table = {}
        for key in itertools.product(range(self.p ** new_level), repeat=self.dim):
            src = tuple(k % self.p ** self.level for k in key)
            offs = tuple((k - s) // self.p ** self.level for k, s in zip(key, src))
            f = self.table[src].shift_center(offs + zeros)
            table[key] = f.rescale_vars((step,) * self.dim + zeros)
        return LAFunction(self.p, self.prec, self.dim, new_level, self.degree,
                          table, self.wvars)

    def evaluate(self, point, weights=None):
        if isinstance(point, (int, PadicNum)):
            point = (point,)
        if len(point) != self.dim:
            raise ValueError("need one coordinate per dimension")
        key, local = [], []
        q = self.p ** self.level
        for z in point:
            if isinstance(z, PadicNum):
                if z.prec <= self.level:
                    raise PrecisionError("point too coarse to pick a residue class")
                a = z.lift() % q
                key.append(a)
                local.append((z - a).shift(-self.level) if self.level else z)
            else:
                a = z % q
                key.append(a)
                local.append((z - a) // q)
        f = self.table[tuple(key)]
        if self.wvars == 0:
            return f.evaluate(local)
        rest = substitute_vars(f, dict(enumerate(local)))
        if isinstance(rest, PadicNum):
            return rest
        if weights is None:
            return IwasawaElement(rest)
        return iwasawa_eval(IwasawaElement(rest), weights)

    def agrees(self, other, prec=None):
        if isinstance(other, LIFunction):
            other = other.to_la()
        if (self.p, self.dim, self.wvars) != (other.p, other.dim, other.wvars):
            raise ValueError("mismatched function spaces")
        lvl = max(self.level, other.level)
        a, b = self.refine(lvl), other.refine(lvl)
        return all(a.table[k].agrees(b.table[k], prec) for k in a.table)

    def scale(self, c):
        return self.copy_with({k: f.scale(c) for k, f in self.table.items()})

    def __add__(self, other):
        if not isinstance(other, LAFunction):
            return NotImplemented
        lvl = max(self.level, other.level)
        a, b = self.refine(lvl), other.refine(lvl)
        return a.copy_with({k: a.table[k] + b.table[k] for k in a.table}, level=lvl)

    def __repr__(self):
        return "LAFunction(p=%d, N=%d, d=%d, level=%d, D=%d, wvars=%d)" % (
            self.p, self.prec, self.dim, self.level, self.degree, self.wvars)


class LIFunction:
    """Level-(m+1) locally Iwasawa function: f(a + p^{m+1} x) = g_a(p x).

    The stored series are bounded on the open unit disc; evaluation reads
    them at points of valuation >= 1.
    """

    def __init__(self, p, prec, dim, level, degree, table, wvars=0):
        if level < 1:
            raise ValueError("locally Iwasawa levels start at 1")
        if dim < 1 or wvars < 0:
            raise ValueError("need dim >= 1 and wvars >= 0")
        self.p = p
        self.prec = prec
        self.dim = dim
        self.level = level
        self.degree = degree
        self.wvars = wvars
        self.table = {}
        for key in itertools.product(range(p ** level), repeat=dim):
            f = table.get(key)
            if f is None:
                f = TruncatedSeries.constant(p, prec, dim + wvars, degree, 0, BOUNDED)
            if f.nvars != dim + wvars:
                raise ValueError("class series in the wrong ring")
            self.table[key] = f.with_profile(BOUNDED).reduce(min(f.prec, prec))
        if set(table) - set(self.table):
            raise ValueError("table key outside (Z/p^level)^dim")

    def copy_with(self, table, level=None, prec=None):
        return LIFunction(self.p, self.prec if prec is None else prec, self.dim,
                          self.level if level is None else level,
                          self.degree, table, self.wvars)

    def to_la(self):
        """Forget integrality: the same function as an LAFunction of equal level."""
        ks = (1,) * self.dim + (0,) * self.wvars
        table = {k: f.rescale_vars(ks).with_profile(TATE)
                 for k, f in self.table.items()}
        return LAFunction(self.p, self.prec, self.dim, self.level, self.degree,
                          table, self.wvars)

    def evaluate(self, point, weights=None):
        return self.to_la().evaluate(point, weights)

    def agrees(self, other, prec=None):
        if isinstance(other, LIFunction):
            if (self.p, self.dim, self.wvars, self.level) != \
                    (other.p, other.dim, other.wvars, other.level):
                raise ValueError("mismatched function spaces")
            return all(self.table[k].agrees(other.table[k], prec) for k in self.table)
        return self.to_la().agrees(other, prec)

    def scale(self, c):
        return self.copy_with({k: f.scale(c) for k, f in self.table.items()})

    def __add__(self, other):
        if not isinstance(other, LIFunction) or self.level != other.level:
            return NotImplemented
        return self.copy_with({k: self.table[k] + other.table[k] for k in self.table})

    def __repr__(self):
        return "LIFunction(p=%d, N=%d, d=%d, level=%d, D=%d, wvars=%d)" % (
            self.p, self.prec, self.dim, self.level, self.degree, self.wvars)


def character_function(kappa, level, degree):
    """The function z -> kappa(z) of a rank-1 character, supported on the
    units (class series kappa(a + p^level x); zero classes off the units).

    For a family character this is the universal-character-built function
    over the weight disc; specializing at an algebraic exponent k gives
    the data of z^k.
    """
    if kappa.rank != 1:
        raise ValueError("character functions use rank-1 characters")
    if level < 1:
        raise ValueError("the unit-support function needs level >= 1")
    p, N = kappa.p, kappa.prec
    wv = _family_vars(kappa)
    nvars = 1 + wv
    table = {}
    for a in range(p ** level):
        if a % p == 0:
            continue
        base = TruncatedSeries.variable(p, N, nvars, degree, 0).scale(p ** level) \
            + TruncatedSeries.constant(p, N, nvars, degree, a)
        table[(a,)] = _apply_character(kappa, [base], nvars, degree, N)
    return LAFunction(p, N, 1, level, degree, table, wv)


def la_to_li(f):
    """Inclusion LA_m -> LI_{m+1}: exact re-expansion on smaller balls."""
    p = f.p
    zeros = (0,) * f.wvars
    table = {}
    for key in itertools.product(range(p ** (f.level + 1)), repeat=f.dim):
        src = tuple(k % p ** f.level for k in key)
        offs = tuple((k - s) // p ** f.level for k, s in zip(key, src))
        table[key] = f.table[src].shift_center(offs + zeros).with_profile(BOUNDED)
    return LIFunction(p, f.prec, f.dim, f.level + 1, f.degree, table, f.wvars)


def li_to_la(g):
    """Inclusion LI_{m+1} -> LA_{m+1} (restriction; forgets integrality)."""
    return g.to_la()


def fil_degree(f):
    """Largest n with f in (p, T, weight-vars)^n; +inf for the zero function."""
    if isinstance(f, TwistedFunction):
        f = f.payload
    if not isinstance(f, LIFunction):
        raise ValueError("the filtration lives on locally Iwasawa data")
    best = math.inf
    for g in f.table.values():
        for e, c in g.coeffs.items():
            best = min(best, ival(c, f.p) + sum(e))
    return best


class TwistedFunction:
    """A function-module element together with its twisting character.

    The character records how parabolic translates act; the payload is
    the restriction to the big-cell coordinate.  Families carry the
    weight disc their variables range over.
    """

    def __init__(self, kappa, payload, tag, disc=None):
        if kappa.is_family() != (disc is not None):
            raise ValueError("families need their weight disc, scalars must not have one")
        if _family_vars(kappa) != payload.wvars:
            raise ValueError("payload weight variables do not match the character")
        self.kappa = kappa
        self.payload = payload
        self.tag = tag.lower()
        self.disc = disc

    def evaluate(self, point, weights=None):
        return self.payload.evaluate(point, weights)

    def agrees(self, other, prec=None):
        return (self.kappa == other.kappa and self.tag == other.tag
                and self.payload.agrees(other.payload, prec))

    def __repr__(self):
        return "TwistedFunction(tag=%s, %r, %r)" % (self.tag, self.kappa, self.payload)


def _wired_factors(tag, g, p, rank):
    """Per-space-variable Iwahori matrices for a wired group element."""
    if tag == "gl2":
        if rank != 2:
            raise ValueError("the gl2 wiring needs a rank-2 character")
        _check_iwahori(g, p)
        return [g]
    if tag == "bf":
        if rank != 3:
            raise ValueError("the two-factor wiring needs a rank-3 character")
        g1, g2 = g
        if _check_iwahori(g1, p) != _check_iwahori(g2, p):
            raise ValueError("two-factor elements must share their determinant")
        return [g1, g2]
    if tag == "tp":
        raise ValueError("the triple-product group action is not wired; "
                         "the branching evaluators cover that example")
    raise ValueError("unsupported example tag %r" % (tag,))


def act_group(g, F):
    """Twisted right translation by a wired parahoric element.

    (g . f)(n(z)) = f(n(z) g) = kappa(q-bar) f(n(mob(z))) through the
    Iwahori factorization n(z) g = q-bar n(mob(z)).  Locally Iwasawa
    payloads run the same engine in the open-disc coordinate.
    """
    kappa, payload = F.kappa, F.payload
    p, N = payload.p, payload.prec
    factors = _wired_factors(F.tag, g, p, kappa.rank)
    if len(factors) != payload.dim:
        raise ValueError("group element does not match the payload dimension")
    is_li = isinstance(payload, LIFunction)
    m = payload.level - 1 if is_li else payload.level
    if not kappa.is_family() and not is_m_analytic(kappa, m):
        raise ValueError("character not analytic enough for this level")
    nvars = payload.dim + payload.wvars
    work = N + m
    table = {}
    for key in payload.table:
        t1s, ys, target = [], [], []
        det = None
        for i, mat in enumerate(factors):
            t1, det, tgt, y = _mobius_data(mat, p, work, nvars, payload.degree,
                                           i, key[i], m, class_mod=payload.level)
            t1s.append(t1.reduce(N))
            ys.append(y.reduce(N))
            target.append(tgt)
        fsrc = payload.table[tuple(target)]
        moved = _monomial_substitute(fsrc, dict(enumerate(ys)))
        if kappa.rank == 2:
            bases = [t1s[0], det]
        else:
            third = TruncatedSeries.constant(p, N, nvars, payload.degree, det) \
                * series_inverse(t1s[0] * t1s[1])
            bases = [t1s[0], t1s[1], third]
        kfac = _apply_character(kappa, bases, nvars, payload.degree, N)
        table[key] = (kfac * moved).with_profile(BOUNDED if is_li else TATE)
    return TwistedFunction(kappa, payload.copy_with(table), F.tag, F.disc)


def act_compact(powers, F):
    """Strictly contracting torus action z_i -> p^{s_i} z_i (no twist factor).

    The level drops by min(s_i), to the floor of the payload kind; excess
    contraction turns into coefficient rescaling.
    """
    payload = F.payload if isinstance(F, TwistedFunction) else F
    if isinstance(powers, int):
        powers = (powers,) * payload.dim
    powers = tuple(int(s) for s in powers)
    if len(powers) != payload.dim or any(s < 1 for s in powers):
        raise ValueError("compact operators need every contraction exponent >= 1")
    p = payload.p
    is_li = isinstance(payload, LIFunction)
    floor = 1 if is_li else 0
    new_level = max(payload.level - min(powers), floor)
    zeros = (0,) * payload.wvars
    table = {}
    for key in itertools.product(range(p ** new_level), repeat=payload.dim):
        src = tuple((k * p ** s) % p ** payload.level for k, s in zip(key, powers))
        offs = tuple((k * p ** s - c) // p ** payload.level
                     for k, s, c in zip(key, powers, src))
        if is_li:
            offs = tuple(o * p for o in offs)
        excess = tuple(new_level + s - payload.level for s in powers)
        f = payload.table[src].shift_center(offs + zeros)
        if any(excess):
            f = f.rescale_vars(excess + zeros)
        table[key] = f
    out = payload.copy_with(table, level=new_level)
    if isinstance(F, TwistedFunction):
        return TwistedFunction(F.kappa, out, F.tag, F.disc)
    return out


def specialize_rho(F, lam):
    """Specialize a family at an in-disc weight: evaluate every weight
    variable and replace the character by the chosen one."""
    if F.disc is None:
        raise ValueError("only families specialize")
    coords = F.disc.coordinates_of(lam)
    if not is_m_analytic(lam, F.disc.m):
        raise ValueError("weight not analytic at the disc level")
    payload = F.payload
    values = {payload.dim + i: x for i, x in enumerate(coords)}
    table = {k: substitute_vars(f, values) for k, f in payload.table.items()}
    prec = min(f.prec for f in table.values())
    cls = type(payload)
    out = cls(payload.p, prec, payload.dim, payload.level, payload.degree,
              {k: f.reduce(prec) for k, f in table.items()}, 0)
    return TwistedFunction(lam, out, F.tag, None)


def weight_schedule(prec, j):
    """Moment-table precision: coefficient j is kept mod p^max(prec-j, 0)."""
    return max(prec - j, 0)


class FiniteDistribution:
    """Approximate distribution on Z_p: a level-m moment table.

    table[a][j] is the value on the class-a basis function
    1_a((z-a)/p^m)^j for 0 <= j <= cutoff, stored mod
    p^{weight_schedule(prec, j)}.  Entries are ints for a single weight;
    families may mix ints (exact constants) with IwasawaElements.
    """

    def __init__(self, p, prec, level, cutoff, table, wvars=0):
        if level < 0 or cutoff < 0:
            raise ValueError("need level >= 0 and cutoff >= 0")
        self.p = p
        self.prec = prec
        self.level = level
        self.cutoff = cutoff
        self.wvars = wvars
        self.table = {}
        for a in range(p ** level):
            row = list(table.get(a, ()))
            if len(row) > cutoff + 1:
                raise ValueError("moment row longer than the cutoff allows")
            row += [0] * (cutoff + 1 - len(row))
            self.table[a] = [self._store(v, j) for j, v in enumerate(row)]
        if set(table) - set(self.table):
            raise ValueError("table key outside Z/p^level")

    def _store(self, v, j):
        w = weight_schedule(self.prec, j)
        if w == 0:
            return 0
        if isinstance(v, PadicNum):
            v = v.lift()
        if isinstance(v, IwasawaElement):
            if self.wvars != v.series.nvars:
                raise ValueError("family value in the wrong weight ring")
            return IwasawaElement(v.series.reduce(min(v.series.prec, w)))
        return v % self.p ** w

    @classmethod
    def zero(cls, p, prec, level, cutoff, wvars=0):
        return cls(p, prec, level, cutoff, {}, wvars)

    @classmethod
    def dirac(cls, p, prec, level, cutoff, point):
        """Evaluation at a fixed point of Z_p."""
        a = point % p ** level
        x0 = (point - a) // p ** level if level else point
        row = [pow(x0, j, p ** prec) for j in range(cutoff + 1)]
        return cls(p, prec, level, cutoff, {a: row})

    def as_family(self, wvars):
        """The same table viewed over a weight ring (entries stay exact)."""
        if self.wvars:
            raise ValueError("already a family")
        out = FiniteDistribution.zero(self.p, self.prec, self.level, self.cutoff, wvars)
        for a, row in self.table.items():
            out.table[a] = list(row)
        return out

    def _check_space(self, other):
        if (self.p, self.prec, self.level, self.cutoff, self.wvars) != \
                (other.p, other.prec, other.level, other.cutoff, other.wvars):
            raise ValueError("mismatched distribution spaces")

    def __add__(self, other):
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        self._check_space(other)
        table = {a: [_add_values(x, y, self.p, self.wvars, self._wdegree())
                     for x, y in zip(self.table[a], other.table[a])]
                 for a in self.table}
        return FiniteDistribution(self.p, self.prec, self.level, self.cutoff,
                                  table, self.wvars)

    def scale(self, c):
        if isinstance(c, PadicNum):
            c = c.lift()
        table = {a: [v.scale(c) if isinstance(v, IwasawaElement) else v * c
                     for v in row]
                 for a, row in self.table.items()}
        return FiniteDistribution(self.p, self.prec, self.level, self.cutoff,
                                  table, self.wvars)

    def _wdegree(self):
        for row in self.table.values():
            for v in row:
                if isinstance(v, IwasawaElement):
                    return v.series.degree
        return 0

    def total_mass(self):
        return self.pair(LAFunction.constant(self.p, self.prec, 1, self.level, 0, 1))

    def agrees(self, other):
        self._check_space(other)
        for a in self.table:
            for j, (x, y) in enumerate(zip(self.table[a], other.table[a])):
                w = weight_schedule(self.prec, j)
                if w == 0:
                    continue
                if isinstance(x, IwasawaElement) or isinstance(y, IwasawaElement):
                    d = _add_values(x, _neg_value(y), self.p, self.wvars, self._wdegree())
                    if not d.series.reduce(min(d.series.prec, w)).is_zero():
                        return False
                elif (x - y) % self.p ** w:
                    return False
        return True

    def pair(self, f):
        """<eps, f> for an LAFunction (honest interval result).

        The certificate combines the table schedule with the actual
        coefficient valuations of f, including the unseen tail between
        the cutoff and f's degree cap.
        """
        if isinstance(f, TwistedFunction):
            f = f.payload
        if isinstance(f, LIFunction):
            f = f.to_la()
        if f.dim != 1:
            raise ValueError("distributions pair with one-dimensional functions")
        if f.level > self.level:
            raise ValueError("function level exceeds the distribution level")
        f = f.refine(self.level)
        p = self.p
        cert = min(self.prec, f.prec)
        total = None
        for a, row in self.table.items():
            g = f.table[(a,)]
            by_j = {}
            for e, c in g.coeffs.items():
                by_j.setdefault(e[0], {})[e[len(e) - f.wvars:]] = c
            for j, data in sorted(by_j.items()):
                v = min(ival(c, p) for c in data.values())
                if j > self.cutoff:
                    cert = min(cert, v)
                    continue
                w = weight_schedule(self.prec, j)
                cert = min(cert, w + v)
                if w == 0:
                    continue
                val = row[j]
                if isinstance(val, int) and val == 0:
                    continue
                if f.wvars:
                    tser = IwasawaElement(TruncatedSeries(
                        p, g.prec, f.wvars, g.degree, data, BOUNDED))
                    term = val * tser if isinstance(val, IwasawaElement) \
                        else tser.scale(val)
                else:
                    c = data[()]
                    term = val.scale(c) if isinstance(val, IwasawaElement) else c * val
                total = term if total is None else _add_values(
                    total, term, p, max(f.wvars, self.wvars), g.degree)
        if cert < 1:
            raise PrecisionError("pairing consumes the whole working precision")
        if total is None:
            total = 0
        if isinstance(total, IwasawaElement):
            return IwasawaElement(total.series.reduce(min(total.series.prec, cert)))
        return PadicNum(p, cert, total)

    def pair_series(self, f):
        """<eps, f> for a global 1-variable series (a level-0 function)."""
        if f.nvars != 1:
            raise ValueError("global pairing needs a 1-variable series")
        moments = moment(self, min(self.cutoff, f.degree))
        p = self.p
        cert = min(self.prec, f.prec)
        total = None
        for e, c in sorted(f.coeffs.items()):
            j = e[0]
            v = ival(c, p)
            if j > self.cutoff:
                cert = min(cert, v)
                continue
            cert = min(cert, v + weight_schedule(self.prec, j))
            mj = moments[j]
            term = mj.scale(c) if isinstance(mj, IwasawaElement) else mj * c
            total = term if total is None else _add_values(
                total, term, p, self.wvars, self._wdegree())
        if cert < 1:
            raise PrecisionError("pairing consumes the whole working precision")
        if total is None:
            return PadicNum(p, cert, 0)
        if isinstance(total, IwasawaElement):
            return IwasawaElement(total.series.reduce(min(total.series.prec, cert)))
        return total.reduce(min(total.prec, cert))

    def act(self, g, kappa):
        """Dual action of one wired matrix: <eps|g, f> = <eps, g . f>.

        Works for the full monoid (non-unit determinants included) when
        the weight is algebraic in the determinant slot.  Needs level >= 1
        and cutoff >= prec - level so the unseen moment tail stays below
        the stored precision.
        """
        p, N, m, M = self.p, self.prec, self.level, self.cutoff
        if m < 1 or M < N - m:
            raise PrecisionError("moment table too short for an honest action")
        if kappa.rank != 2:
            raise ValueError("the distribution action uses rank-2 weights")
        a_, b_, c_, d_ = _as_int_matrix(g)
        det = a_ * d_ - b_ * c_
        if a_ % p == 0 or c_ % p != 0 or det % p ** N == 0:
            raise ValueError("group element outside the wired monoid")
        wv = self.wvars
        if _family_vars(kappa) != wv:
            raise ValueError("character weight ring does not match the table")
        nvars = 1 + wv
        wdeg = kappa.analytic[0].series.degree if kappa.is_family() else 0
        degree = M + wdeg
        out = FiniteDistribution.zero(p, N, m, M, wv)
        for c0 in range(p ** m):
            row = self.table[c0]
            if all(isinstance(v, int) and v == 0 for v in row):
                continue
            t1, _, target, y = _mobius_data(g, p, N + m, nvars, degree, 0, c0, m)
            kfac = _apply_character(kappa, [t1.reduce(N), det], nvars, degree, N)
            dst = out.table[target]
            power = TruncatedSeries.constant(p, N, nvars, degree, 1)
            for i in range(M + 1):
                s = kfac * power
                acc = dst[i]
                for l in range(M + 1):
                    val = row[l]
                    if isinstance(val, int) and val == 0:
                        continue
                    sl = _coeff_series(s, l, wv)
                    if sl is None:
                        continue
                    if isinstance(sl, TruncatedSeries):
                        term = val * IwasawaElement(sl) \
                            if isinstance(val, IwasawaElement) \
                            else IwasawaElement(sl).scale(val)
                    else:
                        term = val.scale(sl) if isinstance(val, IwasawaElement) \
                            else sl * val
                    acc = _add_values(acc, term, p, wv, wdeg)
                dst[i] = acc
                if i < M:
                    power = power * y
        out.table = {a: [out._store(v, j) for j, v in enumerate(row)]
                     for a, row in out.table.items()}
        return out


def _neg_value(v):
    return -v if isinstance(v, (int, IwasawaElement)) else -v.lift()


def _coeff_series(s, l, wvars):
    """Coefficient of x^l: an int for scalar rings, a weight series otherwise."""
    if wvars == 0:
        c = s.coeffs.get((l,), 0)
        return c if c else None
    data = {e[1:]: c for e, c in s.coeffs.items() if e[0] == l}
    if not data:
        return None
    return TruncatedSeries(s.p, s.prec, wvars, s.degree, data, BOUNDED)


def moment(eps, k):
    """Moments of the global monomials z^i for i = 0..k."""
    if k > eps.cutoff:
        raise ValueError("moment degree beyond the table cutoff")
    p, m, N = eps.p, eps.level, eps.prec
    q = p ** N
    out = []
    for i in range(k + 1):
        total = None
        cert = N
        for a, row in eps.table.items():
            for j in range(i + 1):
                coef = (math.comb(i, j) * pow(a, i - j, q) * p ** (m * j)) % q
                if coef == 0:
                    continue
                val = row[j]
                cert = min(cert, weight_schedule(N, j) + ival(coef, p))
                if isinstance(val, int) and val == 0:
                    continue
                term = val.scale(coef) if isinstance(val, IwasawaElement) else coef * val
                total = term if total is None else _add_values(
                    total, term, p, eps.wvars, eps._wdegree())
        if cert < 1:
            raise PrecisionError("moment beyond the table's honest range")
        if total is None:
            total = 0
        if isinstance(total, IwasawaElement):
            out.append(IwasawaElement(total.series.reduce(min(total.series.prec, cert))))
        else:
            out.append(PadicNum(p, cert, total))
    return out


def sp_mu(eps, lam, disc, tag="bf"):
    """Specialize a family of distributions at an in-disc weight and push
    to the algebraic dual: the moment vector of the pulled-back weight.

    The evaluation-at-identity distribution goes to the evaluation-at-
    identity vector (1, 0, ..., 0).
    """
    mu = omega_pullback(lam, tag)
    if mu.is_family():
        raise ValueError("specialization needs a scalar weight")
    c = mu.torsion[0]
    if c < 0:
        raise ValueError("weight mismatch: negative branching degree")
    if c > eps.cutoff:
        raise ValueError("weight mismatch: branching degree beyond the cutoff")
    coords = disc.coordinates_of(lam)
    rows = {}
    drop = 0
    for a, row in eps.table.items():
        new_row = []
        for j, v in enumerate(row):
            if isinstance(v, IwasawaElement):
                ev = iwasawa_eval(v, coords)
                drop = max(drop, weight_schedule(eps.prec, j) - ev.prec)
                new_row.append(ev.lift())
            else:
                new_row.append(v)
        rows[a] = new_row
    prec = eps.prec - drop
    if prec < 1:
        raise PrecisionError("specialization consumes the whole working precision")
    scalar = FiniteDistribution(eps.p, prec, eps.level, eps.cutoff, rows)
    return moment(scalar, c)
