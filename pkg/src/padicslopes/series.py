"""Truncated multivariate power series over Z/p^N with growth-profile bookkeeping.

A series carries independent dials: truncation degree D (total degree) and
precision N.  The growth profile records the coefficient-valuation lower bound
that survives truncation: 'tate' and 'bounded' certify integrality only,
'scaled(m)' certifies v_p(c_α) ≥ ceil(|α|/p^m).
"""

from __future__ import annotations

from .errors import PrecisionError
from .padic import PadicNum, ival, inv_mod, _series_degree_bound

TATE = ("tate",)
BOUNDED = ("bounded",)


def scaled(m):
    if m < 0:
        raise ValueError("scaled profile level must be ≥ 0")
    return ("scaled", m)


def profile_min_val(profile, total_degree, p):
    """Certified valuation lower bound for a coefficient of given total degree."""
    if profile[0] == "scaled":
        return -(-total_degree // p ** profile[1])
    return 0


def _strength(profile):
    # smaller = stronger; used to pick the weaker profile of a product/sum
    if profile[0] == "scaled":
        return (0, profile[1])
    return (1, 0) if profile[0] == "tate" else (1, 1)


def profile_join(a, b):
    """Profile certified for a product or sum of series with profiles a, b."""
    if a[0] == "scaled" and b[0] == "scaled":
        return scaled(max(a[1], b[1]))
    return a if _strength(a) >= _strength(b) else b


class TruncatedSeries:
    """Series in nvars variables, coefficients int residues mod p^prec."""

    __slots__ = ("p", "prec", "nvars", "degree", "coeffs", "profile")

    def __init__(self, p, prec, nvars, degree, coeffs=None, profile=TATE):
        if p < 3:
            raise ValueError("p must be an odd prime")
        if nvars < 1 or degree < 0:
            raise ValueError("need nvars ≥ 1 and degree ≥ 0")
        self.p = p
        self.prec = prec
        self.nvars = nvars
        self.degree = degree
        self.profile = profile
        q = p ** prec
        data = {}
        if coeffs:
            for expo, c in coeffs.items():
                expo = tuple(expo)
                if len(expo) != nvars or any(e < 0 for e in expo):
                    raise ValueError("bad exponent %r" % (expo,))
                if sum(expo) > degree:
                    continue
                c = (c.residue if isinstance(c, PadicNum) else c) % q
                if c:
                    data[expo] = c
        self.coeffs = data

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, p, prec, nvars, degree, value, profile=TATE):
        return cls(p, prec, nvars, degree, {(0,) * nvars: value}, profile)

    @classmethod
    def variable(cls, p, prec, nvars, degree, i, profile=TATE):
        expo = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(p, prec, nvars, degree, {expo: 1}, profile)

    def modulus(self):
        return self.p ** self.prec

    def coeff(self, expo):
        return PadicNum(self.p, self.prec, self.coeffs.get(tuple(expo), 0))

    def constant_term(self):
        return self.coeff((0,) * self.nvars)

    def is_zero(self):
        return not self.coeffs

    def check_profile(self):
        """Scan-verify the recorded coefficient-valuation lower bounds."""
        for expo, c in self.coeffs.items():
            need = profile_min_val(self.profile, sum(expo), self.p)
            if need and ival(c, self.p) < need:
                return False
        return True

    def with_profile(self, profile):
        out = self._shallow(self.coeffs, self.prec, self.degree, profile)
        if not out.check_profile():
            raise ValueError("claimed profile fails coefficient scan")
        return out

    def _shallow(self, coeffs, prec, degree, profile):
        s = TruncatedSeries.__new__(TruncatedSeries)
        s.p, s.prec, s.nvars, s.degree, s.profile = self.p, prec, self.nvars, degree, profile
        s.coeffs = dict(coeffs)
        return s

    def truncate(self, degree):
        data = {e: c for e, c in self.coeffs.items() if sum(e) <= degree}
        return self._shallow(data, self.prec, min(degree, self.degree), self.profile)

    def reduce(self, prec):
        if prec > self.prec:
            raise PrecisionError("cannot increase series precision")
        q = self.p ** prec
        data = {e: c % q for e, c in self.coeffs.items() if c % q}
        return self._shallow(data, prec, self.degree, self.profile)

    def _compat(self, other):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected TruncatedSeries")
        if other.p != self.p:
            raise ValueError("mixed primes")
        if other.nvars != self.nvars:
            raise ValueError("variable-count mismatch: %d vs %d" % (self.nvars, other.nvars))
        return min(self.prec, other.prec), min(self.degree, other.degree)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, PadicNum)):
            other = TruncatedSeries.constant(self.p, self.prec, self.nvars, self.degree, other, self.profile)
        prec, degree = self._compat(other)
        q = self.p ** prec
        data = dict()
        for e, c in self.coeffs.items():
            if sum(e) <= degree:
                data[e] = c % q
        for e, c in other.coeffs.items():
            if sum(e) <= degree:
                v = (data.get(e, 0) + c) % q
                if v:
                    data[e] = v
                else:
                    data.pop(e, None)
        return self._shallow(data, prec, degree, profile_join(self.profile, other.profile))

    __radd__ = __add__

    def __neg__(self):
        return self._shallow({e: self.modulus() - c for e, c in self.coeffs.items()},
                             self.prec, self.degree, self.profile)

    def __sub__(self, other):
        if isinstance(other, (int, PadicNum)):
            other = TruncatedSeries.constant(self.p, self.prec, self.nvars, self.degree, other, self.profile)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        """Multiply by a scalar (int or PadicNum)."""
        if isinstance(c, PadicNum):
            if c.p != self.p:
                raise ValueError("mixed primes")
            prec = min(self.prec, c.prec)
            c = c.residue
        else:
            prec = self.prec
        q = self.p ** prec
        data = {}
        for e, v in self.coeffs.items():
            w = (v * c) % q
            if w:
                data[e] = w
        return self._shallow(data, prec, self.degree, self.profile)

    def __mul__(self, other):
        if isinstance(other, (int, PadicNum)):
            return self.scale(other)
        prec, degree = self._compat(other)
        q = self.p ** prec
        data = {}
        for e1, c1 in self.coeffs.items():
            d1 = sum(e1)
            if d1 > degree:
                continue
            for e2, c2 in other.coeffs.items():
                if d1 + sum(e2) > degree:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                data[e] = (data.get(e, 0) + c1 * c2) % q
        data = {e: c for e, c in data.items() if c}
        return self._shallow(data, prec, degree, profile_join(self.profile, other.profile))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.p, self.prec, self.nvars, self.degree, self.coeffs) == \
            (other.p, other.prec, other.nvars, other.degree, other.coeffs)

    def __hash__(self):
        return hash((self.p, self.prec, self.nvars, self.degree, tuple(sorted(self.coeffs.items()))))

    def agrees(self, other, prec=None):
        prec = min(self.prec, other.prec) if prec is None else prec
        q = self.p ** prec
        keys = set(self.coeffs) | set(other.coeffs)
        return all((self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) % q == 0 for k in keys)

    def __repr__(self):
        n = len(self.coeffs)
        return "TruncatedSeries(p=%d, N=%d, d=%d, D=%d, %s, %d terms)" % (
            self.p, self.prec, self.nvars, self.degree, self.profile[0], n)

    # -- substitution ---------------------------------------------------------

    def rescale_vars(self, k):
        """Substitute T_i ↦ p^{k_i}·T_i; k an exponent ≥ 0 per variable or one
        shared exponent ≥ 1.  A uniform rescale strengthens the profile to
        scaled(0) bounds."""
        if isinstance(k, int):
            if k < 1:
                raise ValueError("rescale exponent must be ≥ 1")
            ks = (k,) * self.nvars
        else:
            ks = tuple(k)
            if len(ks) != self.nvars or any(x < 0 for x in ks):
                raise ValueError("need one exponent ≥ 0 per variable")
        q = self.modulus()
        data = {}
        for e, c in self.coeffs.items():
            d = sum(ei * ki for ei, ki in zip(e, ks))
            v = (c * pow(self.p, d, q)) % q
            if v:
                data[e] = v
        uniform = min(ks, default=0) >= 1
        prof = scaled(0) if uniform and self.profile[0] in ("tate", "bounded") else self.profile
        return self._shallow(data, self.prec, self.degree, prof)


    def shift_center(self, offsets):
        """Substitute T_i ↦ T_i + a_i for integral offsets (recentering)."""
        if len(offsets) != self.nvars:
            raise ValueError("need one offset per variable")
        offs = [a.residue if isinstance(a, PadicNum) else a for a in offsets]
        out = TruncatedSeries(self.p, self.prec, self.nvars, self.degree, {}, self.profile)
        q = self.modulus()
        for e, c in self.coeffs.items():
            term = {(0,) * self.nvars: c}
            for i, ei in enumerate(e):
                if ei == 0:
                    continue
                base = {}  # (T_i + a_i)^ei expanded once, then convolved in
                binom = 1
                for j in range(ei + 1):
                    expo = tuple(j if t == i else 0 for t in range(self.nvars))
                    base[expo] = (binom * pow(offs[i], ei - j, q)) % q
                    binom = binom * (ei - j) // (j + 1)
                new = {}
                for e1, c1 in term.items():
                    for e2, c2 in base.items():
                        ee = tuple(a + b for a, b in zip(e1, e2))
                        if sum(ee) <= self.degree:
                            new[ee] = (new.get(ee, 0) + c1 * c2) % q
                term = new
            for ee, cc in term.items():
                out.coeffs[ee] = (out.coeffs.get(ee, 0) + cc) % q
        out.coeffs = {e: c for e, c in out.coeffs.items() if c}
        out.profile = BOUNDED if self.profile[0] != "tate" else TATE
        return out

    def evaluate(self, point):
        """Value of the stored truncation at integral coordinates (exact substitution)."""
        if len(point) != self.nvars:
            raise ValueError("need one coordinate per variable")
        prec = self.prec
        coords = []
        for x in point:
            if isinstance(x, PadicNum):
                if x.p != self.p:
                    raise ValueError("mixed primes")
                prec = min(prec, x.prec)
                coords.append(x.residue)
            else:
                coords.append(x)
        q = self.p ** prec
        total = 0
        for e, c in self.coeffs.items():
            t = c
            for x, k in zip(coords, e):
                if k:
                    t = (t * pow(x % q, k, q)) % q
            total += t
        return PadicNum(self.p, prec, total)

    # -- serialization ---------------------------------------------------------

    def to_record(self):
        prof = {"kind": self.profile[0]}
        if self.profile[0] == "scaled":
            prof["m"] = self.profile[1]
        entries = [[list(e), c] for e, c in sorted(self.coeffs.items())]
        return {"p": self.p, "N": self.prec, "d": self.nvars, "D": self.degree,
                "profile": prof, "entries": entries}

    @classmethod
    def from_record(cls, rec):
        prof = rec["profile"]
        profile = scaled(prof["m"]) if prof["kind"] == "scaled" else (prof["kind"],)
        coeffs = {tuple(e): c for e, c in rec["entries"]}
        return cls(rec["p"], rec["N"], rec["d"], rec["D"], coeffs, profile)


def series_mul(a, b):
    """Product truncated to the min degree bound, profile joined."""
    return a * b


def series_compose(f, g, f_is_polynomial=False):
    """f ∘ g by Horner on the outer 1-variable series f.

    Needs v_p(g(0)) ≥ 1 unless f is exactly a polynomial (not a truncation).
    """
    if f.nvars != 1:
        raise ValueError("outer series must be 1-variable")
    if not f_is_polynomial and g.constant_term().is_unit():
        raise ValueError("divergent composition: g(0) a unit under a truncated outer series")
    prec = min(f.prec, g.prec)
    out = TruncatedSeries.constant(g.p, prec, g.nvars, g.degree, 0, g.profile)
    for k in range(f.degree, -1, -1):
        out = out * g
        c = f.coeffs.get((k,), 0)
        if c:
            out = out + TruncatedSeries.constant(g.p, prec, g.nvars, g.degree, c, g.profile)
    return out


def extend_vars(f, nvars, offset=0):
    """Reinterpret f in a larger polynomial ring: old variable i becomes
    variable offset + i; degree cap, precision and profile carry over."""
    if offset < 0 or offset + f.nvars > nvars:
        raise ValueError("old variables must embed into the new ring")
    pre, post = offset, nvars - offset - f.nvars
    data = {(0,) * pre + e + (0,) * post: c for e, c in f.coeffs.items()}
    return TruncatedSeries(f.p, f.prec, nvars, f.degree, data, f.profile)


def substitute_vars(f, values):
    """Evaluate a subset of variables at integral points, keeping the rest.

    values maps variable index -> int or PadicNum.  Residues substitute
    exactly; a coordinate known only mod p^n perturbs each output
    coefficient by at most p^(n + gain), with gain the minimum over the
    monomials it meets of v_p(coeff) plus the valuation floors of the other
    substituted factors, so the result precision is reduced accordingly.
    Substituting every variable returns the scalar value.
    """
    if not values:
        return f
    keep = [i for i in range(f.nvars) if i not in values]
    subs = {}
    precs = {}
    vfloors = {}
    for i, x in values.items():
        if not 0 <= i < f.nvars:
            raise ValueError("no variable %r" % (i,))
        if isinstance(x, int):
            x = PadicNum(f.p, f.prec, x)
        elif x.p != f.p:
            raise ValueError("mixed primes")
        subs[i] = x.residue
        precs[i] = x.prec
        vfloors[i] = x.valuation_floor
    certified = f.prec
    for i in precs:
        if precs[i] >= certified:
            continue
        gain = None
        for e, c in f.coeffs.items():
            if e[i] and c:
                g = ival(c, f.p) + (e[i] - 1) * vfloors[i] + sum(
                    e[j] * vfloors[j] for j in precs if j != i)
                gain = g if gain is None else min(gain, g)
        if gain is not None:
            certified = min(certified, precs[i] + gain)
    if certified < 1:
        raise PrecisionError("substitution consumes the whole working precision")
    q = f.p ** f.prec
    data = {}
    for e, c in f.coeffs.items():
        for i, r in subs.items():
            if e[i]:
                c = (c * pow(r, e[i], q)) % q
        out_e = tuple(e[i] for i in keep)
        if c:
            data[out_e] = (data.get(out_e, 0) + c) % q
    certified = min(certified, f.prec)
    if not keep:
        return PadicNum(f.p, certified, data.get((), 0))
    out = TruncatedSeries(f.p, f.prec, len(keep), f.degree, data, f.profile)
    return out.reduce(certified)


def series_inverse(f):
    """Multiplicative inverse of a series with unit constant term."""
    c0 = f.constant_term()
    if not c0.is_unit():
        raise ValueError("series inverse needs a unit constant term")
    q = f.modulus()
    inv0 = inv_mod(c0.residue, q)
    minus_r = (c0 - f).scale(inv0)  # f = c0·(1 - minus_r), minus_r has zero constant term
    out = TruncatedSeries.constant(f.p, f.prec, f.nvars, f.degree, 1, f.profile)
    power = TruncatedSeries.constant(f.p, f.prec, f.nvars, f.degree, 1, f.profile)
    for _ in range(f.degree):
        power = power * minus_r
        if power.is_zero():
            break
        out = out + power
    return out.scale(inv0)


def min_coeff_val(f):
    """min over stored coefficients of v_p; None for the zero series."""
    if not f.coeffs:
        return None
    return min(ival(c, f.p) for c in f.coeffs.values())


def series_exp_small(g):
    """exp of a series all of whose coefficients have v_p ≥ 1 (p odd)."""
    v = min_coeff_val(g)
    if v is not None and v < 1:
        raise ValueError("series exp needs every coefficient divisible by p")
    p, N = g.p, g.prec
    bound = _series_degree_bound(p, N)
    guard = bound // (p - 1) + 2
    work = g._shallow(g.coeffs, N, g.degree, g.profile)
    work.prec = N + guard  # residues exact as integers; error terms stay ≥ N after /n!
    q = p ** (N + guard)
    total = TruncatedSeries.constant(p, N + guard, g.nvars, g.degree, 1, g.profile)
    power = TruncatedSeries.constant(p, N + guard, g.nvars, g.degree, 1, g.profile)
    fact_v, fact_unit = 0, 1
    for n in range(1, bound + 1):
        power = power * work
        if power.is_zero():
            break
        vn = ival(n, p) if n % p == 0 else 0
        fact_v += vn
        fact_unit = (fact_unit * (n // p ** vn)) % q
        inv = inv_mod(fact_unit, q)
        data = {}
        for e, c in power.coeffs.items():
            if c % p ** fact_v:
                raise PrecisionError("exp term not divisible as certified")
            data[e] = ((c // p ** fact_v) * inv) % q
        total = total + power._shallow(data, N + guard, g.degree, g.profile)
    return total.reduce(N)


def series_log_one_unit(f):
    """log(f) for a series with f ≡ 1: constant term 1 mod p is not enough —
    needs f - 1 with every coefficient of v_p ≥ 1."""
    one = TruncatedSeries.constant(f.p, f.prec, f.nvars, f.degree, 1, f.profile)
    t = f - one
    v = min_coeff_val(t)
    if v is not None and v < 1:
        raise ValueError("series log needs f ≡ 1 with p dividing every other coefficient")
    p, N = f.p, f.prec
    bound = _series_degree_bound(p, N)
    guard = 1
    while p ** guard <= bound:
        guard += 1
    q = p ** (N + guard)
    work = t._shallow(t.coeffs, N + guard, t.degree, t.profile)
    total = TruncatedSeries.constant(p, N + guard, f.nvars, f.degree, 0, f.profile)
    power = TruncatedSeries.constant(p, N + guard, f.nvars, f.degree, 1, f.profile)
    for n in range(1, bound + 1):
        power = power * work
        if power.is_zero():
            break
        vn = ival(n, p) if n % p == 0 else 0
        inv = inv_mod(n // p ** vn, q)
        data = {}
        for e, c in power.coeffs.items():
            if c % p ** vn:
                raise PrecisionError("log term not divisible as certified")
            d = ((c // p ** vn) * inv) % q
            if n % 2 == 0:
                d = (-d) % q
            data[e] = d
        total = total + power._shallow(data, N + guard, f.degree, f.profile)
    return total.reduce(N)


class IwasawaElement:
    """Element of the n-variable Iwasawa algebra: bounded-profile truncated series."""

    __slots__ = ("series",)

    def __init__(self, series):
        if series.profile[0] == "tate":
            series = series.with_profile(BOUNDED)
        if not series.check_profile():
            raise ValueError("Iwasawa element must have integral coefficients")
        self.series = series

    @classmethod
    def constant(cls, p, prec, nvars, degree, value):
        return cls(TruncatedSeries.constant(p, prec, nvars, degree, value, BOUNDED))

    @classmethod
    def variable(cls, p, prec, nvars, degree, i):
        return cls(TruncatedSeries.variable(p, prec, nvars, degree, i, BOUNDED))

    def __add__(self, other):
        o = other.series if isinstance(other, IwasawaElement) else other
        return IwasawaElement(self.series + o)

    def __sub__(self, other):
        o = other.series if isinstance(other, IwasawaElement) else other
        return IwasawaElement(self.series - o)

    def __mul__(self, other):
        o = other.series if isinstance(other, IwasawaElement) else other
        out = self.series * o
        return IwasawaElement(out if out.profile[0] != "tate" else out.with_profile(BOUNDED))

    def __neg__(self):
        return IwasawaElement(-self.series)

    def scale(self, c):
        return IwasawaElement(self.series.scale(c))

    def __eq__(self, other):
        return isinstance(other, IwasawaElement) and self.series == other.series

    def __hash__(self):
        return hash(("iwasawa", self.series))

    def agrees(self, other, prec=None):
        o = other.series if isinstance(other, IwasawaElement) else other
        return self.series.agrees(o, prec)

    def __repr__(self):
        return "IwasawaElement(%r)" % (self.series,)


def iwasawa_eval(F, point):
    """Specialize an Iwasawa element at in-disc coordinates (each v_p ≥ 1).

    The result precision is capped at D+1: the dropped tail of a bounded
    series at valuation-≥1 coordinates is divisible by p^{D+1}.  A
    coordinate known only mod p^n perturbs the value by at most
    p^(n + gain_i), where gain_i = min over monomials containing x_i of
    v_p(coeff) + deg - 1: every cofactor coordinate has v_p ≥ 1.
    """
    series = F.series if isinstance(F, IwasawaElement) else F
    coords, precs = [], []
    for x in point:
        if isinstance(x, int):
            x = PadicNum(series.p, series.prec, x)
        if x.is_unit():
            raise ValueError("point outside disc: coordinate with v_p = 0")
        coords.append(x.residue)
        precs.append(x.prec)
    certified = min(series.prec, series.degree + 1)
    for i, n in enumerate(precs):
        if n >= certified:
            continue
        gain = None
        for e, c in series.coeffs.items():
            if e[i] and c:
                g = ival(c, series.p) + sum(e) - 1
                gain = g if gain is None else min(gain, g)
        if gain is not None:
            certified = min(certified, n + gain)
    value = series.evaluate(coords)
    return value.reduce(min(certified, value.prec))
