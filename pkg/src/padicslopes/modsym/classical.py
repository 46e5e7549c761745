"""Classical modular symbols with exact rational arithmetic.

Coefficient values are linear functionals on polynomials of degree at
most k - 2, stored as the vector of values on the monomials z^i.  A
matrix g = [[a, b], [c, d]] with positive determinant acts on the
functional side by

    (lam | g)(f) = lam((a + c z)^{k-2} f((b + d z)/(a + c z))),

which on monomials is integral polynomial expansion, so every relation
and operator block over the generator module has integer entries.  No
determinant power is inserted; the p-coset operator is the plain coset
sum and its eigenvalues are reported in that normalization.

Two independent computations of the same space are kept side by side:
an exact one over the rationals (kernel, restriction, characteristic
polynomial) whose slope data is exact, and an interval-arithmetic one
mod p^prec used for eigenvector extraction.  They cross-check each
other coefficient by coefficient, and the symbol-space rank is checked
against the genus and cusp counts computed from the level alone.
"""

from fractions import Fraction

import sympy

from ..errors import PrecisionError
from ..padic import PadicNum
from ..linalg import (as_padic_matrix, fredholm_poly, kernel_basis, mat_mul,
                      solve_columns)
from ..slopes import CompactOperator, riesz_decompose
from .presentation import ManinPresentation, symbol_space_dimension

DESK_COLUMN_CAP = 1200


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _linear_power(c0, c1, e):
    out = [1]
    for _ in range(e):
        out = _poly_mul(out, [c0, c1])
    return out


def action_matrix_classical(w, k):
    """Matrix of the weight-k dual action of w on monomial values.

    Row i gives the expansion of (a + cz)^{k-2-i} (b + dz)^i, so the new
    value vector is this matrix applied to the old one.
    """
    a, b, c, d = w
    dim = k - 1
    rows = []
    for i in range(dim):
        poly = _poly_mul(_linear_power(a, c, k - 2 - i), _linear_power(b, d, i))
        poly = poly + [0] * (dim - len(poly))
        rows.append(poly[:dim])
    return rows


def _assemble(pres, k, term_lists):
    """Stack value-action blocks into one integer matrix.

    term_lists is a list of [(sign, generator, twist)] rows; each row
    contributes k - 1 scalar equations.
    """
    dim = k - 1
    n = pres.size() * dim
    out = []
    for terms in term_lists:
        block = [[0] * n for _ in range(dim)]
        for sign, x, tw in terms:
            act = action_matrix_classical(tw, k)
            base = x * dim
            for i in range(dim):
                row = block[i]
                for j in range(dim):
                    row[base + j] += sign * act[i][j]
        out.extend(block)
    return out


def relation_matrix(pres, k):
    rows = [[(1, x, tw) for x, tw in rel] for rel in pres.relations()]
    return _assemble(pres, k, rows)


def up_matrix_free(pres, k, p):
    return _assemble(pres, k, pres.up_terms(p))


def fraction_valuation(x, p):
    num, den = x.p, x.q
    if num == 0:
        raise ValueError("zero has no valuation")
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def exact_newton_slopes(coeffs, p):
    """Slope multiset of det(1 - tX) from exact coefficients.

    Returns a sorted list of (slope, multiplicity) Fractions covering
    the finite slopes; trailing zero coefficients (rank drop) are
    reported separately by the caller.
    """
    pts = []
    for r, c in enumerate(coeffs):
        if c != 0:
            pts.append((r, fraction_valuation(sympy.Rational(c), p)))
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return out


def slope_multiset_at_most(slopes, h):
    out = []
    for s, m in slopes:
        if s <= h:
            out.extend([s] * m)
    return sorted(out)


class EigenSymbol:
    """An ordinary eigenvector of the p-coset operator, mod p^prec."""

    __slots__ = ("space", "alpha", "slope", "vector", "values")

    def __init__(self, space, alpha, vector, values):
        self.space = space
        self.alpha = alpha
        self.slope = 0
        self.vector = vector
        self.values = values

    def is_zero(self):
        return all(v.residue == 0 for row in self.values for v in row)

    def __repr__(self):
        return "EigenSymbol(alpha=%r)" % (self.alpha,)


class ClassicalSymbolSpace:
    """Weight-k symbols for Gamma_0(level_used) with the p-coset operator."""

    def __init__(self, N, k, p, prec):
        if k < 2 or k > 12:
            raise ValueError("weight must lie between 2 and 12")
        if k % 2:
            raise ValueError("odd weights vanish for these groups")
        if N < 1 or N > 30:
            raise ValueError("level out of the supported range")
        if N % p == 0 and N % (p * p) == 0:
            raise ValueError("p may divide the level at most once")
        self.N = N
        self.k = k
        self.p = p
        self.prec = prec
        self.level_used = N if N % p == 0 else N * p
        self.p_adjoined = N % p != 0
        self.presentation = ManinPresentation(self.level_used)
        if self.presentation.size() * (k - 1) > DESK_COLUMN_CAP:
            raise ValueError("level-weight combination beyond desk scale")
        self._build()

    def _build(self):
        pres, k, p, prec = self.presentation, self.k, self.p, self.prec
        rel = relation_matrix(pres, k)
        up = up_matrix_free(pres, k, p)

        # Exact route: kernel, restriction and characteristic polynomial
        # over the rationals.
        rel_s = sympy.Matrix(rel)
        null = rel_s.nullspace()
        self.dimension = len(null)
        pres.check_dimension(k, self.dimension)
        self.cuspidal_dimension = 2 * _oracle_cusp_dim(self.level_used, k)
        self.boundary_dimension = self.dimension - self.cuspidal_dimension
        basis = sympy.Matrix.hstack(*null) if null else sympy.zeros(len(rel[0]), 0)
        up_s = sympy.Matrix(up)
        rhs = up_s * basis
        if self.dimension:
            x, params = basis.gauss_jordan_solve(rhs)
            if params.shape[0]:
                raise ArithmeticError("restriction of the coset operator "
                                      "is underdetermined")
            if basis * x != rhs:
                raise ArithmeticError("coset operator left the symbol space")
            coeffs = x.charpoly().all_coeffs()
        else:
            coeffs = [sympy.Integer(1)]
        self.fredholm_exact = [Fraction(c.p, c.q) for c in coeffs]
        for c in self.fredholm_exact:
            if c != 0 and fraction_valuation(sympy.Rational(c), p) < 0:
                raise ArithmeticError("characteristic polynomial is not "
                                      "p-integral")
        self.exact_slopes = exact_newton_slopes(self.fredholm_exact, p)

        # Interval route mod p^prec: saturated kernel with unit free
        # coordinates, integral restriction, Fredholm cross-check.
        rel_p = as_padic_matrix(p, prec, rel)
        kern = kernel_basis(rel_p)
        if len(kern) != self.dimension:
            raise PrecisionError("mod p^%d kernel rank drifted from the "
                                 "exact rank" % prec)
        kmat = [[vec[i] for vec in kern] for i in range(len(rel[0]))]
        self.symbol_basis = kmat
        up_p = as_padic_matrix(p, prec, up)
        image = mat_mul(up_p, kmat)
        self.up_matrix = solve_columns(kmat, image) if self.dimension else []
        self._check_against_exact()

    def _check_against_exact(self):
        p = self.p
        if not self.dimension:
            return
        mp = min(v.prec for row in self.up_matrix for v in row)
        mine = fredholm_poly(as_padic_matrix(p, mp, [[v.lift() for v in row]
                                                     for row in self.up_matrix]),
                             self.dimension)
        q = p ** mp
        for r, c in enumerate(self.fredholm_exact):
            want = (c.numerator * pow(c.denominator, -1, q)) % q
            got = mine[r]
            if not got.agrees(PadicNum(p, got.prec, want)):
                raise ArithmeticError(
                    "interval Fredholm coefficient %d disagrees with the "
                    "exact characteristic polynomial" % r)

    def slope_multiset(self, h):
        """Exact finite slopes at most h, with multiplicity."""
        return slope_multiset_at_most(self.exact_slopes, Fraction(h))

    @property
    def ordinary_multiplicity(self):
        return len(self.slope_multiset(0))

    def ordinary_eigensymbols(self):
        """Slope-zero eigenvectors with simple unit eigenvalues.

        Eigenvalues whose residue mod p is a multiple root are skipped
        and reported in the second return value rather than guessed at.
        """
        p, prec = self.p, self.prec
        if not self.dimension or self.ordinary_multiplicity == 0:
            return [], []
        op = CompactOperator(p, prec, self.up_matrix)
        dec = riesz_decompose(op, 0)
        bmat = [[vec[i] for vec in dec.basis] for i in range(self.dimension)]
        inside = solve_columns(bmat, mat_mul(self.up_matrix, bmat))
        mp = min(v.prec for row in inside for v in row)
        chi = fredholm_poly(as_padic_matrix(p, mp,
                                            [[v.lift() for v in row] for row in inside]),
                            len(dec.basis))
        coeffs = [c.lift() for c in chi]
        wp = min(mp, min(c.prec for c in chi))
        out, skipped = [], []
        for r0 in range(1, p):
            if _poly_eval(coeffs, r0, p) % p:
                continue
            if _poly_eval(_poly_derivative(coeffs), r0, p) % p == 0:
                skipped.append(r0)
                continue
            alpha = _hensel_root(coeffs, r0, p, wp)
            shifted = [[x - (alpha if i == j else PadicNum(p, prec, 0))
                        for j, x in enumerate(row)] for i, row in enumerate(inside)]
            eig = kernel_basis(shifted)
            if len(eig) != 1:
                skipped.append(r0)
                continue
            w = eig[0]
            coords = [sum((bmat[i][j] * w[j] for j in range(len(w))),
                          PadicNum(p, prec, 0)) for i in range(self.dimension)]
            full = [sum((self.symbol_basis[i][j] * coords[j]
                         for j in range(self.dimension)), PadicNum(p, prec, 0))
                    for i in range(len(self.symbol_basis))]
            dim = self.k - 1
            values = [full[g * dim:(g + 1) * dim]
                      for g in range(self.presentation.size())]
            out.append(EigenSymbol(self, alpha, coords, values))
        return out, skipped

    def metadata(self):
        return {
            "level_used": self.level_used,
            "p_adjoined": self.p_adjoined,
            "weight": self.k,
            "convention": "p-coset operator, no determinant normalization",
        }


def _oracle_cusp_dim(M, k):
    from .presentation import cusp_form_dimension
    return cusp_form_dimension(M, k)


def _poly_eval(coeffs, x, mod):
    """Evaluate with descending coefficients mod the given modulus."""
    acc = 0
    for c in coeffs:
        acc = (acc * x + c) % mod
    return acc


def _poly_derivative(coeffs):
    d = len(coeffs) - 1
    return [c * (d - i) for i, c in enumerate(coeffs[:-1])]


def _hensel_root(coeffs, r0, p, prec):
    """Lift a simple root mod p to a root mod p^prec."""
    q = p ** prec
    x = r0 % q
    deriv = _poly_derivative(coeffs)
    for _ in range(prec + 2):
        fx = _poly_eval(coeffs, x, q)
        if fx == 0:
            break
        dx = _poly_eval(deriv, x, q)
        x = (x - fx * pow(dx, -1, q)) % q
    if _poly_eval(coeffs, x, q):
        raise PrecisionError("eigenvalue refinement stalled")
    return PadicNum(p, prec, x)


def classical_symbols(N, k, p, prec=8):
    """Weight-k symbol space at the p-completed level with its operator.

    When p does not divide N the level is enlarged to N p so the p-coset
    operator is defined; when p divides N exactly once the level is used
    as is.  The returned space carries both the exact characteristic
    data and the mod p^prec operator matrix.
    """
    return ClassicalSymbolSpace(N, k, p, prec)
