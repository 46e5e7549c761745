"""Distribution-valued symbols and the slopes of their p-coset operator.

A symbol assigns to each generator a level-m moment table.  The honest
finite coefficient module keeps moment j to width p^(prec - j): that
mixed schedule is forced, because the moment-j output of a monoid
matrix picks up unit-size contributions from input moments l > j only
in valuation at least l - j, so a uniform-width truncation would either
claim digits the module cannot carry or discard ones it can.  All
computations below run on full-width integer coordinates mod p^prec and
interpret coordinate grade j as honest mod p^(prec - j); the linear
algebra pivots only within a grade, which is exactly what that
interpretation permits.

Slope honesty.  Relation blocks obey val >= max(0, l - j) between input
moment l and output moment j, and the p-coset blocks obey the stronger
column bound val >= l, which survives restriction to the symbol space.
The Fredholm coefficient c_r is then a sum of r by r principal minors
whose value is determined mod p^(prec - gmax + G(r-1)), where G counts
the r smallest column grades and gmax the largest grade present, and
whose valuation is at least G(r).  At the default schedule that floor
is one digit, which certifies exactly the slope-zero structure: unit
coefficients stay visibly units and non-units visibly non-units.  The
slope-zero multiset is therefore exact, while steeper polygon segments
are reported only as far as their vertices stay certified.

Lifting.  A slope-zero classical eigensymbol is lifted by placing point
masses that reproduce its monomial values and then smoothing with the
p-coset operator divided by the eigenvalue: the specialization is fixed
by the eigen-equation while the fiber directions carry positive slope
and contract by at least one filtration level per application.
Positive-slope input would lose digits at each division faster than the
smoothing gains, so it is refused rather than returned below the floor.
"""

import math
from fractions import Fraction

import numpy as np

from ..errors import DegenerateVertexError, PrecisionError, TruncationError
from ..padic import PadicNum
from ..coeffmod import FiniteDistribution
from ..slopes import PRECISION_FLOOR, FredholmSeries, newton_slopes
from .presentation import ManinPresentation
from .classical import classical_symbols, slope_multiset_at_most
from .fastlin import (berkowitz_mod, graded_kernel, graded_restrict,
                      kernel_gauges, mod_matmul)

_BLOCK_CACHE = {}


def _series_mul(a, b, jmax, modulus):
    out = [0] * (jmax + 1)
    for i, x in enumerate(a):
        if x == 0 or i > jmax:
            continue
        for j, y in enumerate(b):
            if i + j > jmax:
                break
            out[i + j] = (out[i + j] + x * y) % modulus
    return out


def action_block(w, p, prec, m, jmax, k):
    """Matrix of the weight-k dual action of w on level-m moment tables.

    Coordinates are (class, moment) pairs with the moment index fastest.
    Entries are exact integers mod p^prec: the series work runs at a
    modulus high enough that the division by p^m in the recentred
    coordinate loses nothing.  Cached per argument tuple.
    """
    key = (w, p, prec, m, jmax, k)
    hit = _BLOCK_CACHE.get(key)
    if hit is not None:
        return hit
    a, b, c, d = w
    det = a * d - b * c
    if a % p == 0 or c % p:
        raise ValueError("matrix outside the wired monoid")
    if det % p ** prec == 0:
        raise ValueError("determinant vanishes at working precision")
    pm = p ** m
    nmom = jmax + 1
    q = p ** prec
    big = p ** (prec + m * jmax)
    lift = big * pm
    block = np.zeros((pm * nmom, pm * nmom), dtype=np.int64)
    for c0 in range(pm):
        u0 = (a + c * c0) % lift
        u1 = (c * pm) % lift
        inv0 = pow(u0, -1, lift)
        inv = [inv0]
        for _ in range(jmax):
            inv.append((-inv[-1] * u1 % lift) * inv0 % lift)
        w0, w1 = (b + d * c0) % lift, (d * pm) % lift
        mob = [(w0 * inv[l] + (w1 * inv[l - 1] if l else 0)) % lift
               for l in range(nmom)]
        target = mob[0] % pm
        y = []
        for l in range(nmom):
            entry = (mob[l] - target) % lift if l == 0 else mob[l]
            if entry % pm:
                raise ArithmeticError("recentred coordinate is not integral")
            y.append((entry // pm) % big)
        kappa = [1]
        for _ in range(k - 2):
            kappa = _series_mul(kappa + [0] * jmax, [u0 % big, u1 % big],
                                jmax, big)
        kappa = kappa + [0] * (nmom - len(kappa))
        power = kappa
        base_out = target * nmom
        base_in = c0 * nmom
        for i in range(nmom):
            for l in range(nmom):
                block[base_out + i, base_in + l] = power[l] % q
            if i < jmax:
                power = _series_mul(power, y, jmax, big)
    _BLOCK_CACHE[key] = block
    return block


def _assemble_oms(pres, term_lists, p, prec, m, jmax, k):
    pm, nmom = p ** m, jmax + 1
    bs = pm * nmom
    n = pres.size() * bs
    q = p ** prec
    out = np.zeros((len(term_lists) * bs, n), dtype=np.int64)
    for r, terms in enumerate(term_lists):
        for sign, x, tw in terms:
            blk = action_block(tw, p, prec, m, jmax, k)
            dst = out[r * bs:(r + 1) * bs, x * bs:(x + 1) * bs]
            dst += blk if sign > 0 else -blk
            np.mod(dst, q, out=dst)
    return out


def relation_matrix_oms(pres, p, prec, m, jmax, k):
    rows = [[(1, x, tw) for x, tw in rel] for rel in pres.relations()]
    return _assemble_oms(pres, rows, p, prec, m, jmax, k)


def up_matrix_oms(pres, p, prec, m, jmax, k):
    return _assemble_oms(pres, pres.up_terms(p), p, prec, m, jmax, k)


def specialization_matrix(p, prec, m, jmax, k):
    """Global moments of the monomials z^i, i <= k - 2, from table coords.

    The moment-i row is honest mod p^(prec - i), one width step per
    monomial degree, which the caller reflects in the result precision.
    """
    if k - 2 > jmax:
        raise ValueError("moment cutoff below the weight's monomial range")
    pm, nmom = p ** m, jmax + 1
    q = p ** prec
    rows = []
    for i in range(k - 1):
        row = [0] * (pm * nmom)
        for a in range(pm):
            for l in range(i + 1):
                row[a * nmom + l] = (math.comb(i, l) * pow(a, i - l, q)
                                     * pow(p, m * l, q)) % q
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def section_matrix(p, prec, m, jmax, k):
    """Point masses at 0..k-2 reproducing prescribed monomial values."""
    if k - 1 > p:
        raise PrecisionError("point-mass section needs k - 1 distinct "
                             "residues mod p")
    q = p ** prec
    pm, nmom = p ** m, jmax + 1
    vand = [[pow(c, i, q) for c in range(k - 1)] for i in range(k - 1)]
    inv = _invert_unit_matrix(vand, p, q)
    out = np.zeros((pm * nmom, k - 1), dtype=np.int64)
    for c in range(k - 1):
        for i in range(k - 1):
            out[(c % pm) * nmom + 0, i] = inv[c][i]
    return out


def _invert_unit_matrix(rows, p, q):
    n = len(rows)
    work = [list(r) + [1 if i == j else 0 for j in range(n)]
            for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c] % p), None)
        if piv is None:
            raise PrecisionError("section system has no unit pivot")
        work[c], work[piv] = work[piv], work[c]
        inv = pow(work[c][c], -1, q)
        work[c] = [x * inv % q for x in work[c]]
        for i in range(n):
            if i != c and work[i][c]:
                f = work[i][c]
                work[i] = [(x - f * y) % q for x, y in zip(work[i], work[c])]
    return [row[n:] for row in work]


class SymbolModule:
    """The schedule-truncated symbol space at one configuration.

    Coordinates are (generator, class, moment); the moment index is the
    grade, honest mod p^(prec - grade).  A cutoff below prec - 1 cannot
    keep the full width honest, so the precision drops to cutoff + 1.
    """

    def __init__(self, level_used, k, p, m, prec, cutoff):
        if m < 1:
            raise ValueError("distribution tables need level at least 1")
        prec = min(prec, cutoff + 1)
        if prec < PRECISION_FLOOR:
            raise PrecisionError("precision below the working floor")
        self.presentation = ManinPresentation(level_used)
        self.k = k
        self.p = p
        self.m = m
        self.prec = prec
        self.jmax = prec - 1
        if self.k - 2 > self.jmax:
            raise ValueError("weight needs more moments than the schedule "
                             "keeps at this precision")
        nmom = self.jmax + 1
        self.block_size = p ** m * nmom
        pres = self.presentation
        self.relations = relation_matrix_oms(pres, p, prec, m, self.jmax, k)
        self.up_free = up_matrix_oms(pres, p, prec, m, self.jmax, k)
        col_grades = [i % nmom for i in range(pres.size() * self.block_size)]
        row_grades = [i % nmom
                      for i in range(self.relations.shape[0])]
        self.col_grades = col_grades
        self.kernel, self.anchors, self.gradings = graded_kernel(
            self.relations, p, prec, row_grades, col_grades)
        # Width deficit of each generator: zero for full ones, the
        # narrow-constraint width W for a thin generator p^W * e.
        self.discounts = [g - col_grades[a]
                          for g, a in zip(self.gradings, self.anchors)]
        self.gauges = kernel_gauges(self.kernel, p, prec, col_grades)
        image = mod_matmul(self.up_free, self.kernel, p ** prec)
        self.up_symbols = graded_restrict(self.kernel, self.anchors,
                                          self.gradings, image, p, prec,
                                          col_grades)
        self._check_column_grading()

    def thin_rank(self):
        """Number of thin (torsion) generators the relations forced."""
        return sum(1 for d in self.discounts if d > 0)

    def _check_column_grading(self):
        """The p-coset operator keeps val >= source gauge; verify it.

        Column j of the restricted operator is the readout of U applied
        to generator j, whose measured gauge the image cannot drop; a
        thin readout divides by p^W, so its rows see the gauge less the
        discount, capped at their own honesty width.
        """
        p, n = self.p, self.prec
        for j in range(len(self.gradings)):
            col = self.up_symbols[:, j]
            for i in np.nonzero(col)[0]:
                i = int(i)
                need = min(max(0, self.gauges[j] - self.discounts[i]),
                           n - self.gradings[i])
                if need > 0 and int(col[i]) % p ** need:
                    raise PrecisionError(
                        "restricted operator breaks the column grading "
                        "at generator gauge %d" % self.gauges[j])

    def rank(self):
        return self.kernel.shape[1]

    def coordinate_gauge(self, vec):
        """Filtration level: min over coordinates of valuation + grade."""
        q = self.p ** self.prec
        nmom = self.jmax + 1
        best = self.prec
        for idx in np.nonzero(vec % q)[0]:
            val = 0
            x = int(vec[idx]) % q
            while x % self.p == 0:
                x //= self.p
                val += 1
            best = min(best, val + int(idx) % nmom)
        return best

    def relation_gauge(self, coords):
        res = mod_matmul(self.relations, coords.reshape(-1, 1),
                         self.p ** self.prec).ravel()
        return self.coordinate_gauge(res)

    def fredholm_coefficients(self):
        """det(1 - tU) on the symbol space with per-coefficient honesty.

        Coefficient r is a sum of r x r principal minors.  Row i of the
        restricted operator is honest mod p^(prec - grade_i), and its
        entries in column j carry valuation at least gauge_j minus the
        row's thin discount, so an ambiguity in one entry moves the
        coefficient by at least the worst row width plus the r-1 best
        remaining gauges less the r-1 worst discounts.  Residue-zero
        coefficients instead carry the structural floor: each principal
        minor has valuation at least the sum of gauge - discount over
        its index set.
        """
        rank = self.rank()
        raw = berkowitz_mod(self.up_symbols, rank, self.p, self.prec)
        gmax = max(self.gradings) if self.gradings else 0
        gauges_up = sorted(self.gauges)
        disc_down = sorted(self.discounts, reverse=True)
        floors_up = sorted(g - d for g, d in zip(self.gauges,
                                                 self.discounts))
        pg = [0]
        for g in gauges_up:
            pg.append(pg[-1] + g)
        pd = [0]
        for d in disc_down:
            pd.append(pd[-1] + d)
        pf = [0]
        for f in floors_up:
            pf.append(pf[-1] + f)
        out = [PadicNum(self.p, self.prec, 1)]
        for r in range(1, len(raw)):
            width = self.prec - gmax + max(0, pg[r - 1] - pd[r - 1])
            width = max(1, min(self.prec, width))
            value = raw[r] % self.p ** width
            if value == 0:
                floor = min(self.prec, max(width, pf[r]))
                out.append(PadicNum(self.p, max(floor, 1), 0))
            else:
                out.append(PadicNum(self.p, width, value))
        return out


class OverconvergentSymbol:
    """A distribution value for each generator, with its filtration level.

    values are moment tables on the standard schedule; coords is the
    full-width coordinate vector the computations run on.  The certified
    level is the filtration gauge of the relation residual: level prec
    means the relations hold to the full honesty of the schedule.
    """

    def __init__(self, module, coords):
        self.module = module
        self.coords = np.array(coords, dtype=np.int64) % (module.p ** module.prec)
        self.weight = module.k
        self.level = module.m
        self.prec = module.prec
        self.certified_level = module.relation_gauge(self.coords)
        self.values = self._tables()

    def _tables(self):
        mod = self.module
        nmom, pm = mod.jmax + 1, mod.p ** mod.m
        out = []
        for g in range(mod.presentation.size()):
            base = g * mod.block_size
            table = {a: [int(self.coords[base + a * nmom + j])
                         for j in range(nmom)] for a in range(pm)}
            out.append(FiniteDistribution(mod.p, mod.prec, mod.m,
                                          mod.jmax, table))
        return out

    def specialize(self):
        """Values on the monomials z^i, one row per generator.

        The degree-i moment is honest one width step down per degree,
        and the returned interval precisions say so.
        """
        mod = self.module
        sp = specialization_matrix(mod.p, mod.prec, mod.m, mod.jmax, mod.k)
        q = mod.p ** mod.prec
        out = []
        for g in range(mod.presentation.size()):
            base = g * mod.block_size
            seg = self.coords[base:base + mod.block_size]
            vals = mod_matmul(sp, seg.reshape(-1, 1), q).ravel()
            out.append([PadicNum(mod.p, mod.prec - i, int(v))
                        for i, v in enumerate(vals)])
        return out

    def is_zero(self):
        return not np.any(self.coords)

    def verify(self, level=None):
        """Check the Manin relations hold mod the filtration."""
        want = self.prec if level is None else level
        if self.certified_level < min(want, self.prec):
            raise PrecisionError("relations certified only to filtration "
                                 "level %d" % self.certified_level)
        return True


def lift_symbol(phi, m, prec, cutoff=None):
    """Lift a slope-zero classical eigensymbol to distribution values.

    phi is an EigenSymbol from the classical computation (or any object
    with the same fields).  The zero symbol lifts to the zero symbol.
    Critical-slope input is refused outright; positive noncritical slope
    would spend more digits on eigenvalue divisions than the smoothing
    recovers, so it is refused with the floor message.
    """
    space = phi.space
    k, p = space.k, space.p
    if not phi.is_zero():
        # The lift cannot outrun the certification of its input.
        avail = min([phi.alpha.prec]
                    + [c.prec for row in phi.values for c in row])
        prec = min(prec, avail)
    if cutoff is None:
        cutoff = prec - 1
    module = SymbolModule(space.level_used, k, p, m, prec, cutoff)
    prec = module.prec
    if phi.is_zero():
        return OverconvergentSymbol(module, np.zeros(
            module.presentation.size() * module.block_size, dtype=np.int64))
    v = phi.alpha.valuation()
    if v is None:
        raise PrecisionError("eigenvalue is residue zero, slope unknown")
    if v >= k - 1:
        raise ValueError("critical slope input refused")
    if v > 0:
        raise PrecisionError("positive slope lifting breaches the precision "
                             "floor at this schedule")
    q = p ** prec
    nmom = module.jmax + 1
    sec = section_matrix(p, prec, m, module.jmax, k)
    coords = np.zeros(module.presentation.size() * module.block_size,
                      dtype=np.int64)
    for g in range(module.presentation.size()):
        lam = np.array([val.lift() % q for val in phi.values[g]],
                       dtype=np.int64)
        seg = mod_matmul(sec, lam.reshape(-1, 1), q).ravel()
        coords[g * module.block_size:(g + 1) * module.block_size] = seg
    alpha = phi.alpha.lift() % q
    alpha_inv = pow(alpha, -1, q)
    gauge = module.relation_gauge(coords)
    last = None
    for _ in range(prec + 2):
        coords = (mod_matmul(module.up_free, coords.reshape(-1, 1), q).ravel()
                  * alpha_inv) % q
        new_gauge = module.relation_gauge(coords)
        if new_gauge < gauge:
            raise ArithmeticError("smoothing decreased the filtration level")
        gauge = new_gauge
        if last is not None and np.array_equal(coords, last):
            break
        last = coords.copy()
    if gauge < prec:
        raise PrecisionError("smoothing stalled at filtration level %d"
                             % gauge)
    eigen_res = (mod_matmul(module.up_free, coords.reshape(-1, 1), q).ravel()
                 - coords * alpha) % q
    for idx in np.nonzero(eigen_res)[0]:
        width = prec - (int(idx) % nmom)
        if int(eigen_res[idx]) % p ** width:
            raise PrecisionError("lift is not an eigenvector at the "
                                 "schedule width")
    out = OverconvergentSymbol(module, coords)
    sp = out.specialize()
    for g in range(module.presentation.size()):
        for got, want in zip(sp[g], phi.values[g]):
            mp = min(got.prec, want.prec)
            if not got.reduce(mp).agrees(want.reduce(mp)):
                raise ArithmeticError("specialization does not round-trip")
    return out


class UpSlopeReport:
    """Comparison of small-slope data between the two computations."""

    __slots__ = ("polygon", "overconvergent_slopes", "classical_slopes",
                 "match", "metadata")

    def __init__(self, polygon, oms, classical, metadata):
        self.polygon = polygon
        self.overconvergent_slopes = oms
        self.classical_slopes = classical
        self.match = oms == classical
        self.metadata = metadata

    def __repr__(self):
        return "UpSlopeReport(match=%r, slopes=%r)" % (
            self.match, self.overconvergent_slopes)


def _certified_small_slopes(coeffs, p, h):
    """Slope <= h multiset from honest interval coefficients.

    Builds the hull of the residue-nonzero points and reads the
    multiset.  A residue-zero coefficient never sits at a vertex, but
    its floor must still keep it from dipping under the certified data:
    below the interpolated hull inside the small-slope range, or at or
    below the separating line of slope h past the boundary vertex, the
    data cannot decide and TruncationError is the honest answer.
    """
    pts = []
    floors = []
    for r, c in enumerate(coeffs):
        v = c.valuation()
        if v is None:
            floors.append((r, c.prec))
        else:
            pts.append((r, v))
    hull = [(0, 0)]
    for r, v in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (r - x1) >= (v - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((r, v))
    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    small = slope_multiset_at_most(segments, h)
    d = len(small)
    vd = Fraction(dict(hull).get(d, 0))

    def hull_height(r):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= r <= x2:
                return y1 + Fraction(y2 - y1, x2 - x1) * (r - x1)
        return Fraction(0)

    for r, fl in floors:
        if r <= d:
            if Fraction(fl) < hull_height(r):
                raise TruncationError(
                    "coefficient %d is only known above valuation %d, "
                    "under the certified hull; raise the working "
                    "precision" % (r, fl))
        elif Fraction(fl) <= vd + h * (r - d):
            raise TruncationError(
                "coefficient %d is only known above valuation %d, too "
                "coarse to separate slopes at %s" % (r, fl, h))
    for r, v in pts:
        if r > d and Fraction(v) <= vd + h * (r - d):
            raise ArithmeticError("hull misread the slope boundary")
    return small, segments


def up_slopes(N, k, p, m, h, prec=8, cutoff=None):
    """Newton data of the p-coset operator on distribution symbols.

    Compares the slope <= h multiset with the classical computation at
    the same completed level and reports both.  h must stay below the
    critical bound k - 1.  The full characteristic polynomial of the
    operator on the symbol space is computed, so the multiset needs no
    tail argument; the mixed schedule limits how much of the steeper
    polygon is certified, and the report only keeps the certified part.
    """
    h = Fraction(h)
    if h >= k - 1:
        raise ValueError("slope bound at or above the critical value k - 1")
    if cutoff is None:
        cutoff = prec - 1
    classical = classical_symbols(N, k, p, prec)
    module = SymbolModule(classical.level_used, k, p, m, prec, cutoff)
    cl_small = classical.slope_multiset(h)
    coeffs = module.fredholm_coefficients()
    oms_small, segments = _certified_small_slopes(coeffs, p, h)
    polygon = _reported_polygon(module, coeffs)
    meta = dict(classical.metadata())
    meta.update({
        "m": m,
        "schedule_precision": module.prec,
        "coefficient_floor": max(1, module.prec - max(module.gradings,
                                                      default=0)),
        "symbol_rank": module.rank(),
        "thin_rank": module.thin_rank(),
    })
    return UpSlopeReport(polygon, oms_small, cl_small, meta)


def _reported_polygon(module, coeffs):
    """Longest certified prefix polygon, for the human-facing report."""
    series = FredholmSeries(module.p, coeffs,
                            exact_degree=len(coeffs) - 1)
    degree = series.degree
    while degree > 0:
        try:
            return newton_slopes(series, degree)
        except DegenerateVertexError:
            degree -= 1
    return newton_slopes(series, 0)
