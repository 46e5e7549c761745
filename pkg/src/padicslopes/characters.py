"""Characters of unit tori in split form, weight discs, and pullback maps.

A continuous character of (Z_p^x)^n is stored coordinatewise as
omega(z)^a * <z>^s, where omega is the Teichmuller projection, <z> the
one-unit part, a an integer (acting through its class mod p-1), and s a
p-adic exponent.  When s is an Iwasawa element the character is the
universal one on a disc of weights and evaluation lands in the Iwasawa
ring of the disc.
"""

from fractions import Fraction

from .padic import PadicNum, inv_mod, log_one_unit, one_unit_part, one_unit_pow, teichmuller
from .series import IwasawaElement, iwasawa_eval, series_exp_small


class Character:
    """Split-form character of the n-fold unit torus.

    torsion holds plain integer exponents.  They act only through their
    class mod p-1, but the representative is kept: star-weight formation
    halves torsion exponents, and halving is not well defined mod p-1.
    analytic entries are PadicNum (single weight) or IwasawaElement
    (family over a disc); mixing the two kinds is not allowed.
    """

    __slots__ = ("p", "prec", "rank", "torsion", "analytic", "level")

    def __init__(self, p, prec, torsion, analytic, level=0):
        torsion = tuple(int(a) for a in torsion)
        entries = []
        for s in analytic:
            if isinstance(s, int):
                s = PadicNum(p, prec, s)
            elif isinstance(s, PadicNum):
                if s.p != p:
                    raise ValueError("mixed primes in analytic exponents")
                s = s.reduce(min(s.prec, prec))
            elif isinstance(s, IwasawaElement):
                if s.series.p != p:
                    raise ValueError("mixed primes in analytic exponents")
            else:
                raise TypeError("analytic exponent must be int, PadicNum or IwasawaElement")
            entries.append(s)
        if len(torsion) != len(entries) or not entries:
            raise ValueError("need matching, nonempty torsion and analytic exponent lists")
        kinds = {isinstance(s, IwasawaElement) for s in entries}
        if len(kinds) > 1:
            raise ValueError("cannot mix scalar and family exponents in one character")
        PadicNum(p, prec, 0)  # validates p odd, prec >= 1
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "rank", len(entries))
        object.__setattr__(self, "torsion", torsion)
        object.__setattr__(self, "analytic", tuple(entries))
        object.__setattr__(self, "level", int(level))

    def __setattr__(self, name, value):
        raise AttributeError("Character is immutable")

    @classmethod
    def algebraic(cls, p, prec, weights, level=0):
        """z ↦ prod z_i^{k_i}: torsion and analytic exponents both k_i."""
        weights = tuple(int(k) for k in weights)
        return cls(p, prec, weights, weights, level)

    @classmethod
    def trivial(cls, p, prec, rank=1):
        return cls.algebraic(p, prec, (0,) * rank)

    def is_family(self):
        return isinstance(self.analytic[0], IwasawaElement)

    def component(self, i):
        return Character(self.p, self.prec, (self.torsion[i],), (self.analytic[i],), self.level)

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        return (self.p == other.p and self.prec == other.prec
                and tuple(a % (self.p - 1) for a in self.torsion)
                == tuple(a % (self.p - 1) for a in other.torsion)
                and self.analytic == other.analytic)

    def __hash__(self):
        return hash((self.p, self.prec,
                     tuple(a % (self.p - 1) for a in self.torsion), self.analytic))

    def __call__(self, point):
        return char_eval(self, point)

    def __repr__(self):
        kind = "family" if self.is_family() else "scalar"
        return "Character(p=%d, N=%d, rank=%d, %s, level=%d)" % (
            self.p, self.prec, self.rank, kind, self.level)


def _coerce_point(kappa, point):
    if isinstance(point, (int, PadicNum)):
        point = (point,)
    if len(point) != kappa.rank:
        raise ValueError("need one unit coordinate per torus component")
    coords = []
    for z in point:
        if isinstance(z, int):
            z = PadicNum(kappa.p, kappa.prec, z)
        elif z.p != kappa.p:
            raise ValueError("mixed primes")
        if not z.is_unit():
            raise ValueError("torus points have unit coordinates")
        coords.append(z)
    return coords


def char_eval(kappa, point):
    """kappa(point) = prod omega(z_i)^{a_i} <z_i>^{s_i}.

    Scalar exponents give a PadicNum; family exponents give the
    IwasawaElement of values over the disc.  Multiplicative in the point.
    """
    coords = _coerce_point(kappa, point)
    scalar = PadicNum(kappa.p, kappa.prec, 1)
    family = None
    for z, a, s in zip(coords, kappa.torsion, kappa.analytic):
        scalar = scalar * teichmuller(z) ** a
        if isinstance(s, PadicNum):
            scalar = scalar * one_unit_pow(z, s)
        else:
            expo = s.scale(log_one_unit(one_unit_part(z)))
            factor = IwasawaElement(series_exp_small(expo.series))
            family = factor if family is None else family * factor
    if family is None:
        return scalar
    return IwasawaElement(family.series.scale(scalar))


def is_m_analytic(kappa, m):
    """W_m membership: v_p(kappa(g_i) - 1) > 1/(p^m (p-1)) on each
    one-unit generator g_i (the point with 1+p in slot i, 1 elsewhere)."""
    if kappa.is_family():
        raise ValueError("m-analyticity test needs scalar exponents")
    if m < 0:
        raise ValueError("analyticity level must be >= 0")
    p = kappa.p
    bound = Fraction(1, p ** m * (p - 1))
    for i in range(kappa.rank):
        gen = tuple(1 + p if j == i else 1 for j in range(kappa.rank))
        v = (char_eval(kappa, gen) - 1).valuation()
        if v is None:
            v = kappa.prec  # at-least-prec sentinel; still a valid lower bound
        if not Fraction(v) > bound:
            return False
    return True


class WeightDisc:
    """Wide-open disc of weights around a scalar-exponent center.

    The universal character replaces each center exponent s_i by
    s_i + p^m T_i with T_i ranging over the open unit disc (in-disc
    points have v_p >= 1), so the disc covers exponents congruent to the
    center mod p^{m+1}.  Shrinking increments m.
    """

    __slots__ = ("center", "m", "degree")

    def __init__(self, center, m, degree):
        if center.is_family():
            raise ValueError("disc center must have scalar exponents")
        if m < 0:
            raise ValueError("radius exponent must be >= 0")
        self.center = center
        self.m = m
        self.degree = degree

    def universal(self):
        """Character with Iwasawa-element exponents s_i + p^m T_i."""
        c = self.center
        n = c.rank
        exps = []
        for i, s in enumerate(c.analytic):
            t = IwasawaElement.variable(c.p, c.prec, n, self.degree, i)
            exps.append(t.scale(c.p ** self.m) + IwasawaElement.constant(
                c.p, c.prec, n, self.degree, s.residue))
        return Character(c.p, c.prec, c.torsion, exps, self.m)

    def shrink(self):
        return WeightDisc(self.center, self.m + 1, self.degree)

    def coordinates_of(self, weight):
        """Disc coordinates of an in-disc scalar character; errors outside."""
        if weight.is_family():
            raise ValueError("expected scalar exponents")
        if tuple(a % (weight.p - 1) for a in weight.torsion) != tuple(
                a % (weight.p - 1) for a in self.center.torsion):
            raise ValueError("weight outside disc: torsion differs")
        coords = []
        for s, s0 in zip(weight.analytic, self.center.analytic):
            diff = s - s0
            coords.append(diff.shift(-self.m))  # errors if not divisible by p^m
        for t in coords:
            if t.is_unit():
                raise ValueError("weight outside disc: offset of v_p = 0 after scaling")
        return coords

    def specialize(self, family_value, weight):
        """Evaluate a disc-family value at an in-disc scalar weight."""
        return iwasawa_eval(family_value, self.coordinates_of(weight))


# -- pullback along the spherical-pair torus maps ----------------------------

def _omega_point_map(tag):
    """The monomial map on torus points whose pullback is omega_pullback."""
    if tag == "BF":
        return lambda x, w: (x, x, w * x ** -2)
    if tag == "TP":
        return lambda z: (z, z, z)
    if tag == "GSP4":
        return lambda x, y: (x * y, x, (x * y).invert(), x.invert() * y)
    raise ValueError("unsupported example tag %r" % (tag,))


def _lincomb(kappa, rows):
    """New exponent data from integer linear combinations of components."""
    torsion = tuple(sum(c * kappa.torsion[i] for i, c in row) for row in rows)
    analytic = []
    for row in rows:
        acc = None
        for i, c in row:
            term = kappa.analytic[i].scale(c) if kappa.is_family() else kappa.analytic[i] * c
            acc = term if acc is None else acc + term
        analytic.append(acc)
    return torsion, tuple(analytic)


def omega_pullback(kappa, tag):
    """Restrict a torus character along the wired spherical-pair map.

    BF: rank 3 (k, k', j) -> rank 2, highest weight k+k'-2j with det
    twist j.  TP: rank 3 -> rank 1 along the diagonal torus, exponent
    k1+k2+k3.  GSP4: rank 4 (a, b, q, r) -> rank 2 (a+b-q-r, a-q+r).
    """
    tag = tag.upper()
    if tag == "BF":
        if kappa.rank != 3:
            raise ValueError("BF pullback needs a rank-3 character")
        rows = (((0, 1), (1, 1), (2, -2)), ((2, 1),))
    elif tag == "TP":
        if kappa.rank != 3:
            raise ValueError("TP pullback needs a rank-3 character")
        rows = (((0, 1), (1, 1), (2, 1)),)
    elif tag == "GSP4":
        if kappa.rank != 4:
            raise ValueError("GSP4 pullback needs a rank-4 character")
        rows = (((0, 1), (1, 1), (2, -1), (3, -1)), ((0, 1), (2, -1), (3, 1)))
    else:
        raise ValueError("unsupported example tag %r" % (tag,))
    torsion, analytic = _lincomb(kappa, rows)
    return Character(kappa.p, kappa.prec, torsion, analytic, kappa.level)


def _as_component(k, p, prec):
    if isinstance(k, int):
        return Character.algebraic(p, prec, (k,))
    if isinstance(k, Character):
        if k.rank != 1:
            raise ValueError("star weights take rank-1 components")
        return k
    raise TypeError("component must be int or rank-1 Character")


def star_weights(k1, k2, k3, tag):
    """Starred weights of the two rank-3 examples.

    BF: (k1-k3, k2-k3).  TP: k*_i = r - k_i with 2r = k1+k2+k3, the unique
    solution of k*_{s(1)} + k*_{s(2)} = k_{s(3)} over all permutations s;
    needs k1+k2+k3 even so the torsion exponents halve.
    """
    tag = tag.upper()
    if all(isinstance(k, int) for k in (k1, k2, k3)):
        if tag == "BF":
            return (k1 - k3, k2 - k3)
        if tag == "TP":
            if (k1 + k2 + k3) % 2:
                raise ValueError("TP star weights need k1+k2+k3 even")
            r = (k1 + k2 + k3) // 2
            return (r - k1, r - k2, r - k3)
        raise ValueError("unsupported example tag %r" % (tag,))
    p = next(k.p for k in (k1, k2, k3) if isinstance(k, Character))
    prec = min(k.prec for k in (k1, k2, k3) if isinstance(k, Character))
    a, b, c = (_as_component(k, p, prec) for k in (k1, k2, k3))
    if tag == "BF":
        return (_component_sub(a, c), _component_sub(b, c))
    if tag != "TP":
        raise ValueError("unsupported example tag %r" % (tag,))
    tsum = a.torsion[0] + b.torsion[0] + c.torsion[0]
    if tsum % 2:
        raise ValueError("TP star weights need k1+k2+k3 even")
    r_tor = tsum // 2
    half = inv_mod(2, p ** prec)
    if any(k.is_family() for k in (a, b, c)):
        if not all(k.is_family() for k in (a, b, c)):
            raise ValueError("cannot mix scalar and family star components")
        s_r = (a.analytic[0] + b.analytic[0] + c.analytic[0]).scale(half)
    else:
        s_r = (a.analytic[0] + b.analytic[0] + c.analytic[0]) * half
    out = []
    for k in (a, b, c):
        out.append(Character(p, prec, (r_tor - k.torsion[0],),
                             (s_r - k.analytic[0],), max(a.level, b.level, c.level)))
    return tuple(out)


def _component_sub(a, b):
    if a.is_family() != b.is_family():
        raise ValueError("cannot mix scalar and family star components")
    return Character(a.p, min(a.prec, b.prec), (a.torsion[0] - b.torsion[0],),
                     (a.analytic[0] - b.analytic[0],), max(a.level, b.level))
