"""Explicit branching-law evaluators for the wired spherical pairs.

Three examples are wired.  The two-factor example (tag "bf") pairs GL2
embedded diagonally in GL2 x_{GL1} GL2; the triple-product example (tag
"tp") pairs GL2 in three fibered GL2 factors; the "gsp4" tag carries
weight combinatorics only.  Classical twigs are the explicit highest
weight vectors, big twigs their one-parameter-family versions evaluated
through the closed-form products on the shrunk big cell, and the branch
map integrates a finite distribution against the twig kernel.

All twigs are normalized so the value at the distinguished u-point is
exactly 1.  For the triple-product kernel the literature normalizes by
2^{-r} instead; with the wired u that constant does not make the u-value
1, so the exact u-value is divided out and the difference is recorded in
the provenance.
"""

from .padic import PadicNum, inv_mod, log_one_unit, one_unit_part
from .series import IwasawaElement, TruncatedSeries, iwasawa_eval, series_exp_small
from .characters import Character, char_eval, star_weights
from .coeffmod import LAFunction, _apply_character, _family_vars


class TwigValue:
    """A twig evaluation: the scalar (or family) value plus provenance."""

    __slots__ = ("value", "provenance")

    def __init__(self, value, provenance):
        self.value = value
        self.provenance = dict(provenance)

    def specialize(self, disc, weight):
        """Evaluate a family twig value at an in-disc scalar weight."""
        if not isinstance(self.value, IwasawaElement):
            raise ValueError("only family twig values specialize")
        return iwasawa_eval(self.value, disc.coordinates_of(weight))

    def __repr__(self):
        return "TwigValue(%r, %s)" % (self.value, self.provenance.get("example"))


class SphericalPairData:
    """The wired spherical pair: tag, the elements u and tau, and the
    coordinate charts the evaluators use."""

    __slots__ = ("tag", "u", "tau", "charts")

    def __init__(self, tag, u, tau, charts):
        self.tag = tag
        self.u = u
        self.tau = tau
        self.charts = dict(charts)

    @classmethod
    def for_example(cls, tag, p):
        tag = tag.lower()
        ident = ((1, 0), (0, 1))
        if tag == "bf":
            return cls(
                "bf",
                (ident, ((1, 1), (0, 1))),
                (((p, 0), (0, 1)), ((p, 0), (0, 1))),
                {"n_chart": "n(z1, z2) upper unipotent per factor",
                 "h_chart": "J_H element given by its inverse matrix "
                            "((i1, i2), (i3, i4)) with p | i3",
                 "branch_chart": "w -> inverse matrix ((1, 0), (p w, 1))"})
        if tag == "tp":
            return cls(
                "tp",
                (ident, ((1, -1), (0, 1)), ((1, 1), (0, 1))),
                (((p, 0), (0, 1)),) * 3,
                {"n_chart": "n(z1, z2, z3) upper unipotent per factor",
                 "h_chart": "h in GL2(Z_p); only det(h) enters",
                 "branch_chart": "constant in the chart variable"})
        if tag == "gsp4":
            return cls("gsp4", None, None,
                       {"note": "weight combinatorics only; no twig evaluator"})
        raise ValueError("unsupported example tag %r" % (tag,))

    def u_coordinates(self):
        """(1,0)-row of each factor of u, flattened."""
        if self.u is None:
            raise ValueError("the gsp4 wiring has no twig coordinates")
        out = []
        for (row, _) in self.u:
            out.extend(row)
        return tuple(out)

    def __repr__(self):
        return "SphericalPairData(tag=%s)" % self.tag


def _as_padic(z, p, prec):
    if isinstance(z, PadicNum):
        if z.p != p:
            raise ValueError("mixed primes")
        return z
    return PadicNum(p, prec, z)


def _mul_values(x, y):
    if isinstance(x, IwasawaElement):
        return x * y if isinstance(y, IwasawaElement) else x.scale(y)
    if isinstance(y, IwasawaElement):
        return y.scale(x)
    return x * y


def _char_product(factors, p, prec):
    """Product of rank-1 character values prod_i chi_i(b_i).

    Family characters fold into a single exponential: each factor is an
    omega-part times exp(log<b> * s), and exp is additive in the kept
    range, so one series_exp_small serves the whole product.  The scalar
    route multiplies char_eval values directly.
    """
    if not factors:
        return PadicNum(p, prec, 1)
    if not factors[0][0].is_family():
        out = PadicNum(p, prec, 1)
        for chi, base in factors:
            out = out * char_eval(chi, base)
        return out
    scalar = PadicNum(p, prec, 1)
    expo = None
    for chi, base in factors:
        base = _as_padic(base, p, prec)
        scalar = scalar * char_eval(
            Character(p, prec, (chi.torsion[0],), (PadicNum(p, prec, 0),)), base)
        lg = log_one_unit(one_unit_part(base))
        term = chi.analytic[0].series.scale(lg)
        expo = term if expo is None else expo + term
    return IwasawaElement(series_exp_small(expo).scale(scalar))


def _describe_weights(kappa):
    kind = "family" if kappa.is_family() else "scalar"
    return {"kind": kind, "torsion": list(kappa.torsion), "prec": kappa.prec}


# -- classical twigs ----------------------------------------------------------


def classical_twig_bf(k, kp, j, point, p=None, prec=None):
    """The two-factor highest weight vector x1^{k-j} y1^{k'-j} det^j.

    point = (x1, x2, y1, y2); at the u-coordinates (1, 0, 1, 1) the value
    is exactly 1.
    """
    if not (0 <= j <= min(k, kp)):
        raise ValueError("need 0 <= j <= min(k, k')")
    coords = list(point)
    for z in coords:
        if isinstance(z, PadicNum):
            p = z.p
            prec = z.prec if prec is None else min(prec, z.prec)
    if p is None or prec is None:
        raise ValueError("integer points need explicit p and precision")
    x1, x2, y1, y2 = (_as_padic(z, p, prec) for z in coords)
    det = x1 * y2 - x2 * y1
    value = x1 ** (k - j) * y1 ** (kp - j) * det ** j
    return TwigValue(value, {
        "example": "bf", "weights": [k, kp, j],
        "point": [str(z) for z in coords],
        "det_twist": "det^(j-k-k') carried as metadata"})


def classical_twig_tp(r1, r2, r3, rows, p=None, prec=None):
    """The normalized triple-product invariant built from pairwise dets.

    rows = ((x1,x2), (y1,y2), (z1,z2)); the raw value is the product of
    the three pairwise 2x2 determinants with exponents r-r3, r-r2, r-r1
    where 2r = r1+r2+r3, divided by its value at the u-rows (1,0),
    (1,-1), (1,1) so the u-point gives exactly 1.  Needs r1+r2+r3 even
    and the triangle inequalities r_i + r_j >= r_l.
    """
    if (r1 + r2 + r3) % 2:
        raise ValueError("need r1+r2+r3 even")
    r = (r1 + r2 + r3) // 2
    if min(r - r1, r - r2, r - r3) < 0:
        raise ValueError("triangle inequality fails: some r_i + r_j < r_l")
    coords = [z for row in rows for z in row]
    for z in coords:
        if isinstance(z, PadicNum):
            p = z.p
            prec = z.prec if prec is None else min(prec, z.prec)
    if p is None or prec is None:
        raise ValueError("integer points need explicit p and precision")
    (x1, x2), (y1, y2), (z1, z2) = [
        tuple(_as_padic(z, p, prec) for z in row) for row in rows]
    dxy = x1 * y2 - x2 * y1
    dxz = x1 * z2 - x2 * z1
    dyz = y1 * z2 - y2 * z1
    raw = dxy ** (r - r3) * dxz ** (r - r2) * dyz ** (r - r1)
    # u-rows give pairwise determinants (-1, 1, 2)
    norm = PadicNum(p, prec, -1) ** (r - r3) * PadicNum(p, prec, 2) ** (r - r1)
    value = raw * norm.invert()
    return TwigValue(value, {
        "example": "tp", "weights": [r1, r2, r3],
        "point": [str(z) for z in coords],
        "normalization": "divided by the u-point value; the 2^-r of the "
                         "literature does not normalize the wired u"})


# -- big twigs ----------------------------------------------------------------


def _bf_star_characters(kappa):
    if kappa.rank != 3:
        raise ValueError("the two-factor twig needs a rank-3 weight")
    s1, s2 = star_weights(kappa.component(0), kappa.component(1),
                          kappa.component(2), "bf")
    return s1, s2, kappa.component(2)


def big_twig_bf(kappa, z1, z2, imat):
    """The two-factor Big Twig on the shrunk cell.

    Evaluates (i1 + p i3 z1)^{k*_1} (i1 + i3(1 + p z2))^{k*_2}
    (det(i)(1 + p(z2 - z1)))^{k_3} where ((i1, i2), (i3, i4)) is the
    inverse matrix of the J_H element, p | i3 and i1 a unit.  Scalar
    weights give a PadicNum, disc families an IwasawaElement over the
    weight ring.
    """
    p, prec = kappa.p, kappa.prec
    s1, s2, chi3 = _bf_star_characters(kappa)
    (i1, i2), (i3, i4) = imat
    if i1 % p == 0:
        raise ValueError("base outside the shrunk cell: i1 must be a unit")
    if i3 % p:
        raise ValueError("lower-left entry of the J_H chart must be divisible by p")
    deti = i1 * i4 - i2 * i3
    if deti % p == 0:
        raise ValueError("J_H element needs a unit determinant")
    z1 = _as_padic(z1, p, prec)
    z2 = _as_padic(z2, p, prec)
    b1 = z1 * (p * i3) + i1
    b2 = z2 * (p * i3) + (i1 + i3)
    b3 = ((z2 - z1) * p + 1) * deti
    value = _char_product([(s1, b1), (s2, b2), (chi3, b3)], p, prec)
    return TwigValue(value, {
        "example": "bf", "weights": _describe_weights(kappa),
        "point": [str(z1), str(z2)], "h_inverse": [[i1, i2], [i3, i4]],
        "tau": "diag(p, 1) in both factors"})


def _tp_star_characters(kappa):
    if kappa.rank != 3:
        raise ValueError("the triple-product twig needs a rank-3 weight")
    return star_weights(kappa.component(0), kappa.component(1),
                        kappa.component(2), "tp")


def big_twig_tp(kappa, t, zs, h):
    """The triple-product Big Twig on the shrunk cell, u-normalized.

    t = three unit torus coordinates, zs = (z1, z2, z3), h an integral
    2x2 matrix with unit determinant.  Evaluates t^kappa *
    chi*_3(-d_xy) chi*_2(d_xz) chi*_1(d_yz / 2) *
    (chi*_1 chi*_2 chi*_3)(det h)^{-1} with d_xy = -1 + p(z2 - z1),
    d_xz = 1 + p(z3 - z1), d_yz = 2 + p(z3 - z2); every chi-base is a
    unit by construction, which is the content of cell shrinking.
    """
    p, prec = kappa.p, kappa.prec
    stars = _tp_star_characters(kappa)
    (h1, h2), (h3, h4) = h
    deth = h1 * h4 - h2 * h3
    if deth % p == 0:
        raise ValueError("H-element needs a unit determinant")
    z1, z2, z3 = (_as_padic(z, p, prec) for z in zs)
    t = tuple(_as_padic(x, p, prec) for x in t)
    if len(t) != 3 or any(not x.is_unit() for x in t):
        raise ValueError("torus coordinates must be three units")
    half = PadicNum(p, prec, inv_mod(2, p ** prec))
    dxy = (z2 - z1) * p - 1
    dxz = (z3 - z1) * p + 1
    dyz = (z3 - z2) * p + 2
    dh_inv = PadicNum(p, prec, deth).invert()
    factors = [(kappa.component(i), t[i]) for i in range(3)]
    factors += [(stars[2], -dxy), (stars[1], dxz), (stars[0], dyz * half)]
    factors += [(s, dh_inv) for s in stars]
    value = _char_product(factors, p, prec)
    return TwigValue(value, {
        "example": "tp", "weights": _describe_weights(kappa),
        "point": [str(z) for z in (z1, z2, z3)],
        "torus": [str(x) for x in t], "h_det": deth,
        "twist": "tensor (k*_123 o det)^{-1} carried as metadata",
        "normalization": "u-point value divided out"})


# -- the branch map -----------------------------------------------------------


def branch_map(eps, kappa, point, pair):
    """Integrate a finite distribution against the Big-Twig kernel.

    The J_H variable runs over the wired chart w -> ((1, 0), (p w, 1))
    (given, as always, by the inverse matrix).  For the two-factor
    example the kernel is an analytic function of w and the result is
    the honest pairing; for the triple product the kernel only sees
    det = 1 of the chart, so the result is the twig value times the
    total mass.  A cutoff too short for one certified digit surfaces as
    the pairing's PrecisionError.
    """
    p = eps.p
    if kappa.p != p:
        raise ValueError("mixed primes")
    tag = pair.tag
    if tag == "bf":
        z1, z2 = point
        s1, s2, chi3 = _bf_star_characters(kappa)
        prec = min(eps.prec, kappa.prec)
        z1 = _as_padic(z1, p, prec)
        z2 = _as_padic(z2, p, prec)
        prec = min(prec, z1.prec, z2.prec)
        wv = _family_vars(kappa)
        wdeg = kappa.analytic[0].series.degree if kappa.is_family() else 0
        nvars = 1 + wv
        degree = max(eps.cutoff, prec) + wdeg
        w = TruncatedSeries.variable(p, prec, nvars, degree, 0)
        one = TruncatedSeries.constant(p, prec, nvars, degree, 1)
        b1 = one + w.scale(z1 * (p * p))
        b2 = one + w.scale((z2 * p + 1) * p)
        b3 = (z2 - z1) * p + 1
        star3 = Character(p, min(s1.prec, s2.prec, chi3.prec),
                          (s1.torsion[0], s2.torsion[0], chi3.torsion[0]),
                          (s1.analytic[0], s2.analytic[0], chi3.analytic[0]))
        kernel = _apply_character(star3, [b1, b2, b3], nvars, degree, prec)
        f = LAFunction(p, prec, 1, 0, degree, {(0,): kernel}, wv)
        value = eps.pair(f)
        prov_point = [str(z1), str(z2)]
    elif tag == "tp":
        t, zs, h = point
        twig = big_twig_tp(kappa, t, zs, h)
        value = _mul_values(twig.value, eps.total_mass())
        prov_point = twig.provenance["point"]
    else:
        raise ValueError("the %s wiring has no branch map" % tag)
    return TwigValue(value, {
        "example": tag, "weights": _describe_weights(kappa),
        "point": prov_point, "cutoff": eps.cutoff, "level": eps.level})


# -- symplectic rank-2 weight combinatorics -----------------------------------


def gsp4_weights(a, b, q, r):
    """Branching datum for the symplectic rank-2 example.

    Returns ((c, d), exponents) with c = a + b - q - r, d = a - q + r and
    the five-term exponent vector (a+b, a, -2a-b, r-q+a, q) of the
    associated torus character.  Legal range: 0 <= q <= a, 0 <= r <= b.
    """
    if not (0 <= q <= a and 0 <= r <= b):
        raise ValueError("need 0 <= q <= a and 0 <= r <= b")
    c = a + b - q - r
    d = a - q + r
    return (c, d), (a + b, a, -2 * a - b, r - q + a, q)
