"""Slope decompositions of compact operators at finite truncation.

An operator is held as a T x T matrix of PadicNum entries, the truncation
of a compact operator in an orthonormalizable basis, together with a
per-column decay certificate.  Fredholm determinants come from a
division-free exterior-power recursion cut at the requested degree, so no
coefficient ever pays a factorial's worth of digits.

The slope <= h part at height h is extracted in three steps: Newton
polygon of det(1 - tu), factorization F = Q * S across the vertex at h,
then N = ker(Q*(u)^{deg Q}) with Q*(x) = x^d Q(1/x).  Projectors carry no
closed formula here; each one is certified by its defining identities
(idempotence, commutation, rank, annihilation, determinant match on the
finite part, invertibility on the complement) and the certified precision
of the entries is reported.  Anything that cannot be certified at the
working precision raises instead of rounding.

All slopes are exact Fractions.  The precision floor (default 4 digits)
rejects decompositions whose certified output precision has degraded too
far to mean anything.
"""

from fractions import Fraction

from .errors import (DegenerateVertexError, PrecisionError, TowerError,
                     TruncationError)
from .linalg import (as_padic_matrix, column_span_form, det, echelon,
                     fredholm_poly, identity_matrix, kernel_basis, mat_mul,
                     mat_poly, matrix_agrees, min_matrix_prec, rank,
                     solve_columns, transpose)
from .padic import PadicNum
from .series import TruncatedSeries

PRECISION_FLOOR = 4


class CompactOperator:
    """Finite truncation of a compact operator.

    decay is the per-column valuation floor; when omitted it is scanned
    from the matrix (exact column valuations, the finite-rank reading).
    A supplied certificate is verified entry by entry.  The stability
    flag stays None until fredholm_det has compared the truncation
    against the one five columns smaller.
    """

    def __init__(self, p, prec, rows, decay=None, labels=None):
        mat = as_padic_matrix(p, prec, rows)
        if len(mat) != len(mat[0]):
            raise ValueError("truncations are square")
        self.p = p
        self.size = len(mat)
        self.rows = tuple(tuple(row) for row in mat)
        self.prec = min_matrix_prec(mat)
        floors = []
        for j in range(self.size):
            col = [row[j] for row in self.rows]
            vals = [(x.valuation() if x.valuation() is not None else x.prec)
                    for x in col]
            floors.append(min(vals))
        if decay is None:
            decay = floors
        else:
            decay = list(decay)
            if len(decay) != self.size:
                raise ValueError("decay certificate length mismatch")
            for j, c in enumerate(decay):
                if floors[j] < c:
                    raise ValueError(
                        "decay certificate fails in column %d" % j)
        self.decay = tuple(decay)
        if labels is None:
            labels = tuple("e%d" % i for i in range(self.size))
        else:
            labels = tuple(labels)
            if len(labels) != self.size:
                raise ValueError("label count mismatch")
        self.labels = labels
        self.stable = None

    @classmethod
    def diagonal(cls, p, prec, entries, **kw):
        n = len(entries)
        rows = [[entries[i] if i == j else 0 for j in range(n)]
                for i in range(n)]
        return cls(p, prec, rows, **kw)

    def truncate(self, k):
        """Principal k x k sub-operator, labels and certificate sliced."""
        if not 0 < k <= self.size:
            raise ValueError("bad truncation size")
        rows = [row[:k] for row in self.rows[:k]]
        return CompactOperator(self.p, self.prec, rows,
                               labels=self.labels[:k])

    def __repr__(self):
        return "CompactOperator(p=%d, size=%d, prec=%d)" % (
            self.p, self.size, self.prec)


class FredholmSeries:
    """Truncation of det(1 - t u); constant term exactly 1.

    exact_degree, when set, asserts that every coefficient beyond the
    stored ones vanishes identically (the series is that polynomial).
    """

    def __init__(self, p, coeffs, exact_degree=None):
        if not coeffs:
            raise ValueError("need at least the constant term")
        self.p = p
        self.coeffs = tuple(coeffs)
        c0 = self.coeffs[0]
        if c0.residue != 1 % c0.modulus():
            raise ValueError("constant term must be exactly 1")
        if exact_degree is not None and exact_degree != len(coeffs) - 1:
            raise ValueError("exact degree must match the stored degree")
        self.exact_degree = exact_degree

    @classmethod
    def one(cls, p, prec):
        return cls(p, [PadicNum(p, prec, 1)], exact_degree=0)

    @classmethod
    def from_coefficients(cls, p, prec, values, exact_degree=None):
        return cls(p, [PadicNum(p, prec, v) for v in values],
                   exact_degree=exact_degree)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def prec(self):
        return min(c.prec for c in self.coeffs)

    def coefficient(self, k):
        if k <= self.degree:
            return self.coeffs[k]
        if self.exact_degree is not None:
            return PadicNum(self.p, self.prec, 0)
        raise IndexError("coefficient %d beyond the stored degree" % k)

    def series(self):
        """The same data as a one-variable series at the common precision."""
        prec = self.prec
        deg = max(self.degree, 1)
        out = TruncatedSeries.constant(self.p, prec, 1, deg, 0)
        t = TruncatedSeries.variable(self.p, prec, 1, deg, 0)
        power = TruncatedSeries.constant(self.p, prec, 1, deg, 1)
        for k, c in enumerate(self.coeffs):
            if k:
                power = power * t
            out = out + power.scale(c.reduce(prec))
        return out

    def mul(self, other, through=None):
        if through is None:
            through = self.degree + other.degree
        cs = _poly_mul(list(self.coeffs), list(other.coeffs), through)
        exact = None
        if self.exact_degree is not None and other.exact_degree is not None \
                and self.exact_degree + other.exact_degree <= through:
            exact = len(cs) - 1
        return FredholmSeries(self.p, cs, exact_degree=exact)

    def agrees(self, other, through=None):
        if through is None:
            through = min(self.degree, other.degree)
        return all(self.coefficient(k).agrees(other.coefficient(k))
                   for k in range(through + 1))

    def __repr__(self):
        inner = ", ".join(str(c.residue) for c in self.coeffs[:5])
        if self.degree > 4:
            inner += ", ..."
        return "FredholmSeries[%s; degree %d]" % (inner, self.degree)


class NewtonPolygon:
    """Lower hull of certified coefficient valuations, slopes ascending."""

    def __init__(self, vertices, segments):
        self.vertices = tuple((int(k), int(v)) for k, v in vertices)
        self.segments = tuple((Fraction(s), int(m)) for s, m in segments)
        for (s1, _), (s2, _) in zip(self.segments, self.segments[1:]):
            if not s1 < s2:
                raise ValueError("slopes must ascend strictly")
        for _, m in self.segments:
            if m <= 0:
                raise ValueError("multiplicities are positive")

    def slopes(self):
        out = []
        for s, m in self.segments:
            out.extend([s] * m)
        return out

    @property
    def total_multiplicity(self):
        return sum(m for _, m in self.segments)

    def multiplicity_at_most(self, h):
        h = Fraction(h)
        return sum(m for s, m in self.segments if s <= h)

    def __eq__(self, other):
        return isinstance(other, NewtonPolygon) and \
            self.segments == other.segments

    def __repr__(self):
        if not self.segments:
            return "NewtonPolygon[]"
        return "NewtonPolygon[%s]" % ", ".join(
            "%s x%d" % (s, m) for s, m in self.segments)


class SlopeDecomposition:
    """Certified slope <= h decomposition of one operator."""

    def __init__(self, operator, h, Q, S, basis, complement, projector,
                 certified_prec):
        self.operator = operator
        self.h = Fraction(h)
        self.Q = Q
        self.S = S
        self.basis = tuple(tuple(v) for v in basis)
        self.complement = tuple(tuple(v) for v in complement)
        self.projector = tuple(tuple(row) for row in projector)
        self.certified_prec = certified_prec

    @property
    def dimension(self):
        return len(self.basis)

    def span_form(self):
        return column_span_form(
            [list(v) for v in self.basis], self.operator.p,
            self.certified_prec)

    def __repr__(self):
        return "SlopeDecomposition(h=%s, dim=%d, prec=%d)" % (
            self.h, self.dimension, self.certified_prec)


class MultiSlopeDecomposition:
    """Common slope <= (h_1..h_n) part of commuting operators."""

    def __init__(self, operators, hs, h_aux, basis, projector, steps,
                 certified_prec):
        self.operators = tuple(operators)
        self.hs = tuple(Fraction(h) for h in hs)
        self.h_aux = Fraction(h_aux)
        self.basis = tuple(tuple(v) for v in basis)
        self.projector = tuple(tuple(row) for row in projector)
        self.steps = tuple(steps)
        self.certified_prec = certified_prec

    @property
    def dimension(self):
        return len(self.basis)

    def span_form(self):
        return column_span_form(
            [list(v) for v in self.basis], self.operators[0].p,
            self.certified_prec)

    def __repr__(self):
        return "MultiSlopeDecomposition(hs=%s, dim=%d, prec=%d)" % (
            list(map(str, self.hs)), self.dimension, self.certified_prec)


def _poly_mul(a, b, through=None):
    if not a or not b:
        return []
    n = len(a) + len(b) - 2
    if through is not None:
        n = min(n, through)
    out = []
    for k in range(n + 1):
        acc = None
        for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            term = a[i] * b[k - i]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _poly_sub(a, b):
    p = (a or b)[0].p
    prec = min(c.prec for c in a + b)
    n = max(len(a), len(b))
    zero = PadicNum(p, prec, 0)
    out = []
    for k in range(n):
        x = a[k] if k < len(a) else zero
        y = b[k] if k < len(b) else zero
        out.append(x - y)
    return out


def _series_div(f, q, out_degree):
    """f / q as power series through out_degree; q[0] must be a unit."""
    inv0 = q[0].invert()
    out = []
    for k in range(out_degree + 1):
        acc = f[k] if k < len(f) else f[0] - f[0]
        for i in range(1, min(k, len(q) - 1) + 1):
            acc = acc - q[i] * out[k - i]
        out.append(acc * inv0)
    return out


def _poly_div_monic(num, den):
    """Exact division by a monic polynomial; the remainder must vanish
    at working precision or PrecisionError is raised."""
    num = list(num)
    dd = len(den) - 1
    if den[dd].residue != 1 % den[dd].modulus():
        raise ValueError("divisor must be monic")
    out_deg = len(num) - 1 - dd
    if out_deg < 0:
        raise ValueError("division by a higher-degree polynomial")
    quot = [None] * (out_deg + 1)
    for k in range(out_deg, -1, -1):
        c = num[k + dd]
        quot[k] = c
        for i in range(dd + 1):
            num[k + i] = num[k + i] - c * den[i]
    for c in num[:dd]:
        if c.valuation() is not None:
            raise PrecisionError(
                "polynomial division leaves a nonzero remainder")
    return quot


def fredholm_det(u, degree):
    """det(1 - t u) on the truncation, through the requested degree.

    The coefficient of t^k is (-1)^k times the sum of principal k x k
    minors.  Stability is checked against the truncation five columns
    smaller, at the width the decay certificate grants the dropped
    columns: every minor the shrink removes meets one of them, so the
    coefficients can only move above that floor.  A coefficient that
    moves anyway raises TruncationError, since the certificate was then
    too weak for the requested degree.  A flat certificate (the exact
    finite-rank reading) grants the comparison no width and the check
    carries no content, which is honest: there is no tail to be
    insensitive to.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    cut = min(degree, u.size)
    coeffs = fredholm_poly([list(r) for r in u.rows], cut)
    if u.size > 5:
        tol = min(min(u.decay[u.size - 5:]), u.prec)
        if tol > 0:
            smaller = [list(row[:u.size - 5]) for row in u.rows[:u.size - 5]]
            check = fredholm_poly(smaller, min(cut, u.size - 5))
            for k in range(min(len(coeffs), len(check))):
                w = min(tol, coeffs[k].prec, check[k].prec)
                if not coeffs[k].reduce(w).agrees(check[k].reduce(w)):
                    u.stable = False
                    raise TruncationError(
                        "Fredholm coefficient %d moves when the truncation "
                        "shrinks by 5; enlarge the truncation or strengthen "
                        "the decay certificate" % k)
    u.stable = True
    exact = u.size if cut == u.size else None
    return FredholmSeries(u.p, coeffs, exact_degree=exact)


def newton_slopes(F, degree=None):
    """Lower convex hull of (k, v_p(coefficient k)) with certification.

    Residue-zero coefficients only certify a valuation floor; if such a
    floor sits strictly below the computed hull the vertex structure is
    not certified and DegenerateVertexError is raised.
    """
    if degree is None:
        degree = F.degree
    degree = min(degree, F.degree)
    pts = []
    for k in range(degree + 1):
        c = F.coefficient(k)
        pts.append((k, c.valuation(), c.prec))
    hull = [(0, 0)]
    for k, v, _ in pts[1:]:
        if v is None:
            continue
        while len(hull) >= 2:
            (k1, v1), (k2, v2) = hull[-2], hull[-1]
            # pop while the new point does not turn left
            if (v2 - v1) * (k - k1) >= (v - v1) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append((k, v))
    last = hull[-1][0]
    for k, v, pr in pts:
        if v is not None or k > last:
            continue
        # linear interpolation of the hull at k
        for (k1, v1), (k2, v2) in zip(hull, hull[1:]):
            if k1 <= k <= k2:
                line = Fraction(v1) + Fraction(v2 - v1, k2 - k1) * (k - k1)
                if Fraction(pr) <= line:
                    raise DegenerateVertexError(
                        "coefficient %d is residue-zero at precision %d, "
                        "below the hull; increase the working precision"
                        % (k, pr))
                break
    segments = []
    for (k1, v1), (k2, v2) in zip(hull, hull[1:]):
        segments.append((Fraction(v2 - v1, k2 - k1), k2 - k1))
    return NewtonPolygon(hull, segments)


def slope_factor(F, h):
    """Factor F = Q * S with every slope of Q at most h, S steeper.

    Q(0) = S(0) = 1 and deg Q is the hull multiplicity of slopes <= h.
    The vertex at that multiplicity must be certified, and every stored
    coefficient beyond it must sit strictly above the separating line of
    slope h, otherwise DegenerateVertexError.  The factor pair is found
    by a quadratically convergent update whose linear step is solved by
    certified elimination; Q * S = F is re-checked before returning.
    """
    h = Fraction(h)
    if F.prec < PRECISION_FLOOR:
        raise PrecisionError("working precision below the floor of %d"
                             % PRECISION_FLOOR)
    p = F.p
    polygon = newton_slopes(F)
    d = polygon.multiplicity_at_most(h)
    if d == 0:
        return FredholmSeries.one(p, F.prec), F
    D = F.degree
    vd = dict(polygon.vertices)[d]
    if d == D:
        if F.exact_degree == D:
            return F, FredholmSeries.one(p, F.prec)
        raise DegenerateVertexError(
            "slopes at most %s may continue past the stored degree %d"
            % (h, D))
    for k in range(d + 1, D + 1):
        c = F.coefficient(k)
        line = Fraction(vd) + h * (k - d)
        v = c.valuation()
        if v is None:
            if Fraction(c.prec) <= line:
                raise DegenerateVertexError(
                    "cannot separate slopes at %s: coefficient %d is "
                    "residue-zero below the separating line" % (h, k))
        elif Fraction(v) <= line:
            raise DegenerateVertexError(
                "coefficient %d undercuts the separating line at %s"
                % (k, h))
    qc = [F.coefficient(k) for k in range(d + 1)]
    sc = _series_div([F.coefficient(k) for k in range(D + 1)], qc, D - d)
    converged = False
    for _ in range(F.prec + 2):
        err = _poly_sub([F.coefficient(k) for k in range(D + 1)],
                        _poly_mul(qc, sc, D))
        if all(e.valuation() is None for e in err[:D + 1]):
            converged = True
            break
        # solve dq * S + ds * Q = err for corrections without constant term
        mat = []
        rhs = []
        for k in range(1, D + 1):
            row = []
            for i in range(1, d + 1):
                row.append(sc[k - i] if 0 <= k - i <= D - d
                           else PadicNum(p, F.prec, 0))
            for j in range(1, D - d + 1):
                row.append(qc[k - j] if 0 <= k - j <= d
                           else PadicNum(p, F.prec, 0))
            mat.append(row)
            rhs.append([err[k]])
        sol = solve_columns(mat, rhs)
        for i in range(1, d + 1):
            qc[i] = qc[i] + sol[i - 1][0]
        for j in range(1, D - d + 1):
            sc[j] = sc[j] + sol[d + j - 1][0]
    if not converged:
        raise PrecisionError(
            "slope factorization did not stabilize at working precision")
    Q = FredholmSeries(p, qc, exact_degree=d)
    S = FredholmSeries(p, sc)
    if not Q.mul(S, through=D).agrees(F, through=D):
        raise PrecisionError("factor product drifted from F")
    qpoly = newton_slopes(Q)
    if any(s > h for s in qpoly.slopes()):
        raise DegenerateVertexError("a slope of Q exceeds %s" % h)
    return Q, S


def _matrix_power(a, k, p, prec):
    out = identity_matrix(p, prec, len(a))
    for _ in range(k):
        out = mat_mul(out, a)
    return out


def _column_space_basis(a):
    """Basis vectors of the column span, primitive-shifted."""
    work, pivots = echelon(transpose(a))
    out = []
    for pi, pj, pv in pivots:
        out.append([x.shift(-pv) for x in work[pi]])
    return out


def _projector_from_splitting(kept, complement, p, prec):
    """Projector onto span(kept) along span(complement); certified by
    solving against the combined basis, PrecisionError if it is not a
    basis at working precision."""
    n = len(kept[0]) if kept else len(complement[0])
    cols = [list(v) for v in kept] + [list(v) for v in complement]
    if len(cols) != n:
        raise PrecisionError("splitting bases do not fill the space")
    B = transpose(cols)
    target = transpose([list(v) for v in kept] +
                       [[PadicNum(p, prec, 0)] * n
                        for _ in range(len(complement))])
    eT = solve_columns(transpose(B), transpose(target))
    return transpose(eT)


def _tail_clears(u, vd, h, d, degree):
    """Whether coefficients past the stored degree cannot move the
    slope <= h factor at working precision.

    Coefficient r is a sum of r x r minors, so it sits at or above the
    sum of the r smallest column floors; non-decreasing certificates
    make that a prefix sum, extended flat past the truncation.  The
    factor moves by p to the (floor minus separating line) when a tail
    coefficient lands, so the minimum gap over the tail must reach the
    working precision.
    """
    T = u.size
    prefix = 0
    for j in range(min(degree, T)):
        prefix += u.decay[j]
    gap_min = None
    r = degree
    while True:
        r += 1
        prefix += u.decay[r - 1] if r <= T else u.decay[-1]
        gap = Fraction(prefix) - (Fraction(vd) + h * (r - d))
        if gap_min is None or gap < gap_min:
            gap_min = gap
        if r >= T:
            if Fraction(u.decay[-1]) <= h:
                return False
            return gap_min >= u.prec


def riesz_decompose(u, h):
    """Slope <= h decomposition of the truncation, fully certified.

    Certification: e^2 = e, e u = u e, rank e = deg Q, Q*(u) e = 0,
    det(1 - t u | im e) = Q, and Q*(u) invertible on im(1 - e).  Any
    failure raises PrecisionError with the identity named.  The Fredholm
    degree is grown adaptively until the vertex at h is certified and
    the dropped tail certifiably cannot reach the factor, up to the full
    truncation size where the series is the whole determinant.
    """
    if u.prec < PRECISION_FLOOR:
        raise PrecisionError("working precision below the floor of %d"
                             % PRECISION_FLOOR)
    h = Fraction(h)
    p = u.p
    T = u.size
    degree = min(T, 8)
    while True:
        F = fredholm_det(u, degree)
        try:
            Q, S = slope_factor(F, h)
        except DegenerateVertexError:
            if degree >= T:
                raise
            degree = min(T, degree + 6)
            continue
        if degree >= T:
            break
        vd = F.coefficient(Q.degree).valuation()
        if _tail_clears(u, vd, h, Q.degree, degree):
            break
        degree = min(T, degree + 6)
    d = Q.degree
    prec = u.prec
    if d == 0:
        basis = ()
        complement = [[PadicNum(p, prec, 1 if i == j else 0)
                       for i in range(T)] for j in range(T)]
        zero = [[PadicNum(p, prec, 0)] * T for _ in range(T)]
        return SlopeDecomposition(u, h, Q, S, basis, complement, zero, prec)
    qstar = list(reversed(Q.coeffs))
    A = mat_poly(qstar, [list(r) for r in u.rows])
    Ad = _matrix_power(A, d, p, prec) if d > 1 else A
    kern = kernel_basis(Ad)
    if len(kern) != d:
        raise PrecisionError(
            "finite part dimension %d does not match deg Q = %d; "
            "precision too low to certify the kernel" % (len(kern), d))
    complement = _column_space_basis(Ad)
    if len(complement) != T - d:
        raise PrecisionError(
            "complement rank %d not certified (expected %d)"
            % (len(complement), T - d))
    e = _projector_from_splitting(kern, complement, p, prec)
    urows = [list(r) for r in u.rows]
    if not matrix_agrees(mat_mul(e, e), e):
        raise PrecisionError("projector identity e^2 = e fails")
    if not matrix_agrees(mat_mul(e, urows), mat_mul(urows, e)):
        raise PrecisionError("projector identity e u = u e fails")
    if rank(e) != d:
        raise PrecisionError("rank of the projector is not deg Q")
    ann = mat_mul(A, e)
    if any(x.valuation() is not None for row in ann for x in row):
        raise PrecisionError("Q*(u) does not annihilate the finite part")
    Kcols = transpose([list(v) for v in kern])
    restricted = solve_columns(Kcols, mat_mul(urows, Kcols))
    qn = fredholm_poly(restricted, d)
    if not all(qn[k].agrees(Q.coeffs[k]) for k in range(d + 1)):
        raise PrecisionError("det(1 - t u) on the finite part is not Q")
    if complement:
        # invertibility on the complement: the determinant must be a
        # certified nonzero scalar (a unit of the fraction field; its
        # valuation is the sum of the kept slopes' contributions, so it
        # is not a p-adic unit once h > 0)
        Mcols = transpose([list(v) for v in complement])
        on_comp = solve_columns(Mcols, mat_mul(A, Mcols))
        if det(on_comp).valuation() is None:
            raise PrecisionError(
                "Q*(u) is not certified invertible on the complement")
    certified = min(min_matrix_prec(e), min(c.prec for c in Q.coeffs))
    if certified < PRECISION_FLOOR:
        raise PrecisionError(
            "certified precision %d fell below the floor of %d"
            % (certified, PRECISION_FLOOR))
    return SlopeDecomposition(u, h, Q, S, kern, complement, e, certified)


def _check_commuting(ops):
    mats = [[list(r) for r in u.rows] for u in ops]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if not matrix_agrees(mat_mul(mats[i], mats[j]),
                                 mat_mul(mats[j], mats[i])):
                raise ValueError(
                    "operators %d and %d do not commute at working "
                    "precision" % (i, j))
    return mats


def multi_slope_decompose(us, hs, h_aux):
    """Common slope part of pairwise-commuting operators.

    A first cut at h_aux is taken for the product operator, making the
    remaining work finite, then each operator is cut at its own bound
    inside the nested subspace.  h_aux must dominate both the sum and
    the product of the individual bounds; the sum is what keeps every
    simultaneous small-slope vector inside the auxiliary part (the
    product-operator slope of such a vector is the sum of its individual
    slopes).
    """
    if not us:
        raise ValueError("need at least one operator")
    if len(us) != len(hs):
        raise ValueError("one bound per operator")
    sizes = {u.size for u in us}
    if len(sizes) != 1 or {u.p for u in us} != {us[0].p}:
        raise ValueError("operators must share a truncation and a prime")
    for u in us:
        if u.prec < PRECISION_FLOOR:
            raise PrecisionError("working precision below the floor of %d"
                                 % PRECISION_FLOOR)
    hs = [Fraction(h) for h in hs]
    h_aux = Fraction(h_aux)
    total = sum(hs)
    prod = Fraction(1)
    for h in hs:
        prod *= h
    if h_aux <= prod or h_aux < total:
        raise ValueError(
            "h_aux must exceed the product and dominate the sum of the "
            "individual bounds")
    mats = _check_commuting(us)
    p = us[0].p
    prec = min(u.prec for u in us)
    T = us[0].size
    u0 = mats[0]
    for m in mats[1:]:
        u0 = mat_mul(u0, m)
    aux = CompactOperator(p, prec, u0, labels=us[0].labels)
    dec0 = riesz_decompose(aux, h_aux)
    steps = [dec0]
    basis = [list(v) for v in dec0.basis]
    comp_blocks = [[list(v) for v in dec0.complement]]
    for u, h in zip(us, hs):
        if not basis:
            break
        W = transpose(basis)
        inside = solve_columns(W, mat_mul([list(r) for r in u.rows], W))
        sub = CompactOperator(p, prec, inside)
        dec = riesz_decompose(sub, h)
        steps.append(dec)
        lifted_comp = []
        for v in dec.complement:
            col = mat_mul(W, [[x] for x in v])
            lifted_comp.append([r[0] for r in col])
        comp_blocks.append(lifted_comp)
        new_basis = []
        for v in dec.basis:
            col = mat_mul(W, [[x] for x in v])
            new_basis.append([r[0] for r in col])
        basis = new_basis
    complement = [v for block in comp_blocks for v in block]
    if basis:
        e = _projector_from_splitting(basis, complement, p, prec)
    else:
        e = [[PadicNum(p, prec, 0)] * T for _ in range(T)]
    if not matrix_agrees(mat_mul(e, e), e):
        raise PrecisionError("common projector is not idempotent")
    for m in mats:
        if not matrix_agrees(mat_mul(e, m), mat_mul(m, e)):
            raise PrecisionError(
                "common projector does not commute with an operator")
    if rank(e) != len(basis):
        raise PrecisionError("common projector rank mismatch")
    certified = min_matrix_prec(e) if basis else prec
    if certified < PRECISION_FLOOR:
        raise PrecisionError(
            "certified precision %d fell below the floor of %d"
            % (certified, PRECISION_FLOOR))
    return MultiSlopeDecomposition(us, hs, h_aux, basis, e, steps, certified)


def _bezout_projector_poly(u, h):
    """Coefficients (low to high) of a polynomial P with P(u) the slope
    <= h projector of u, built from the full characteristic polynomial:
    split chi = Q* G across the vertex, solve a Q* + b G = 1, take b G.
    """
    p = u.p
    T = u.size
    F = fredholm_det(u, T)
    Q, S = slope_factor(F, h)
    d = Q.degree
    if d == 0:
        return [], Q
    chi = list(reversed(F.coeffs))
    qstar = list(reversed(Q.coeffs))
    if d == T:
        return [PadicNum(p, F.prec, 1)], Q
    G = _poly_div_monic(chi, qstar)
    zero = PadicNum(p, F.prec, 0)
    n_a = T - d
    mat = []
    rhs = []
    for k in range(T):
        row = []
        for i in range(n_a):
            row.append(qstar[k - i] if 0 <= k - i <= d else zero)
        for j in range(d):
            row.append(G[k - j] if 0 <= k - j <= T - d else zero)
        mat.append(row)
        rhs.append([PadicNum(p, F.prec, 1 if k == 0 else 0)])
    sol = solve_columns(mat, rhs)
    b = [sol[n_a + j][0] for j in range(d)]
    return _poly_mul(b, G), Q


def projector_poly_tower(us, hs, r_max, h_aux=None):
    """Projector congruence tower: polynomials e_r in the operators.

    Each level r = 1..r_max is a dict mapping exponent tuples (one entry
    per operator) to integer coefficients mod p^r.  Applying level r on
    the truncation agrees with the true common projector mod p^r, and
    consecutive levels satisfy e_{r+1} = e_r mod p^r by construction.
    Uses the full characteristic polynomial of each operator, so it is
    meant for small truncations.
    """
    if r_max < 1:
        raise ValueError("need at least one tower level")
    hs = [Fraction(h) for h in hs]
    if h_aux is None:
        total = sum(hs)
        prod = Fraction(1)
        for h in hs:
            prod *= h
        h_aux = max(total, prod) + 1
    mdec = multi_slope_decompose(us, hs, h_aux)
    p = us[0].p
    prec = min(u.prec for u in us)
    if r_max > prec:
        raise TowerError(
            "tower height %d exceeds the working precision %d"
            % (r_max, prec))
    n = len(us)
    aux_rows = [list(r) for r in us[0].rows]
    for u in us[1:]:
        aux_rows = mat_mul(aux_rows, [list(r) for r in u.rows])
    aux_op = CompactOperator(p, prec, aux_rows)
    aux_poly, _ = _bezout_projector_poly(aux_op, h_aux)
    total_poly = {}
    for k, c in enumerate(aux_poly):
        if c.valuation() is not None:
            total_poly[(k,) * n] = c
    for i, (u, h) in enumerate(zip(us, hs)):
        poly_i, _ = _bezout_projector_poly(u, h)
        if not poly_i:
            total_poly = {}
            break
        new = {}
        for expts, c in total_poly.items():
            for k, ck in enumerate(poly_i):
                if ck.valuation() is None:
                    continue
                key = list(expts)
                key[i] += k
                key = tuple(key)
                prev = new.get(key)
                term = c * ck
                new[key] = term if prev is None else prev + term
        total_poly = new
    applied = evaluate_operator_poly(total_poly, [
        [list(r) for r in u.rows] for u in us], p, prec)
    if not matrix_agrees(applied, [list(r) for r in mdec.projector]):
        raise TowerError(
            "tower polynomial does not reproduce the certified projector")
    min_prec = min((c.prec for c in total_poly.values()), default=prec)
    if r_max > min_prec:
        raise TowerError(
            "precision exhausted at %d digits before the requested "
            "tower height %d" % (min_prec, r_max))
    levels = []
    for r in range(1, r_max + 1):
        q = p ** r
        level = {}
        for expts, c in total_poly.items():
            residue = c.residue % q
            if residue:
                level[expts] = residue
        levels.append(level)
    return levels


def evaluate_operator_poly(poly, mats, p, prec):
    """Evaluate an exponent-dict polynomial on commuting matrices."""
    T = len(mats[0]) if mats else 0
    powers = [[identity_matrix(p, prec, T)] for _ in mats]
    out = [[PadicNum(p, prec, 0)] * T for _ in range(T)]
    for expts, c in sorted(poly.items()):
        term = identity_matrix(p, prec, T)
        for i, k in enumerate(expts):
            while len(powers[i]) <= k:
                powers[i].append(mat_mul(powers[i][-1], mats[i]))
            term = mat_mul(term, powers[i][k])
        if isinstance(c, PadicNum):
            scale = c
        else:
            scale = PadicNum(p, prec, c)
        for a in range(T):
            for b in range(T):
                out[a][b] = out[a][b] + term[a][b] * scale
    return out


def h_crit(pairing, v):
    """Critical bound (pairing + 1) * v for one simple direction.

    The sign is fixed so that dominant weights give positive bounds: the
    comparison non_critical performs is h < h_crit with h >= 0, which is
    vacuous unless h_crit can be positive.  With pairing = k and v = 1
    this reproduces the classical small-slope bound k + 1.
    """
    return (Fraction(pairing) + 1) * Fraction(v)


def non_critical(hs, h_crits):
    """Strict componentwise test h_i < h_i^crit."""
    hs = [Fraction(h) for h in hs]
    crits = [Fraction(c) for c in h_crits]
    if len(hs) != len(crits):
        raise ValueError("one critical bound per slope")
    return all(h < c for h, c in zip(hs, crits))
