"""Dense p-adic linear algebra on PadicNum entries.

Gaussian elimination pivots on the entry of maximal p-adic magnitude
(minimal valuation) over the whole remaining submatrix.  That keeps every
forward multiplier and every kernel back-substitution integral, so the
only precision losses are the pivot-valuation shifts, and those are
tracked automatically by the interval arithmetic.  A genuinely
non-integral quotient (solving A x = b with x outside Z_p^n) raises
PrecisionError instead of fabricating digits.

The Fredholm coefficient routine is the division-free Berkowitz
recursion truncated at the requested degree; cost O(D T^3).
"""

from .errors import PrecisionError
from .padic import PadicNum


def as_padic_matrix(p, prec, rows):
    out = []
    width = None
    for row in rows:
        cur = []
        for x in row:
            if isinstance(x, PadicNum):
                if x.p != p:
                    raise ValueError("mixed primes")
                cur.append(x)
            else:
                cur.append(PadicNum(p, prec, x))
        if width is None:
            width = len(cur)
        elif len(cur) != width:
            raise ValueError("ragged matrix")
        out.append(cur)
    if not out or width == 0:
        raise ValueError("empty matrix")
    return out


def identity_matrix(p, prec, n):
    return [[PadicNum(p, prec, 1 if i == j else 0) for j in range(n)]
            for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    if len(a[0]) != k:
        raise ValueError("shape mismatch")
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a, v):
    return [r[0] for r in mat_mul(a, [[x] for x in v])]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[x * c for x in row] for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def mat_poly(coeffs, a):
    """sum coeffs[i] * a^i, low degree first; coeffs ints or PadicNum."""
    n = len(a)
    p = a[0][0].p
    prec = min(x.prec for row in a for x in row)
    out = None
    power = identity_matrix(p, prec, n)
    for i, c in enumerate(coeffs):
        if i:
            power = mat_mul(power, a)
        term = mat_scale(power, c)
        out = term if out is None else mat_add(out, term)
    if out is None:
        out = [[PadicNum(p, prec, 0)] * n for _ in range(n)]
    return out


def matrix_agrees(a, b):
    return all(x.agrees(y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def min_matrix_prec(a):
    return min(x.prec for row in a for x in row)


def pdiv(x, y):
    """x / y with an integral quotient; honest precision drop by v(y)."""
    v = y.valuation()
    if v is None:
        raise PrecisionError("division by a residue-zero pivot")
    q = x * y.shift(-v).invert()
    try:
        return q.shift(-v) if v else q
    except ValueError:
        raise PrecisionError("non-integral quotient at working precision")


def _pivot_search(work, rows_left, cols_left):
    best = None
    for i in rows_left:
        for j in cols_left:
            v = work[i][j].valuation()
            if v is None:
                continue
            if best is None or v < best[2]:
                best = (i, j, v)
    return best


def echelon(a):
    """Forward elimination with full min-valuation pivoting.

    Returns (work, pivots) where pivots is the list of (row, col,
    valuation) in elimination order; work rows outside the pivot rows
    are reduced to residue-zero entries in the pivot columns.
    """
    work = [list(row) for row in a]
    m, n = len(work), len(work[0])
    rows_left = list(range(m))
    cols_left = list(range(n))
    pivots = []
    while rows_left and cols_left:
        best = _pivot_search(work, rows_left, cols_left)
        if best is None:
            break
        pi, pj, pv = best
        pivots.append(best)
        rows_left.remove(pi)
        cols_left.remove(pj)
        piv = work[pi][pj]
        for i in rows_left:
            entry = work[i][pj]
            if entry.valuation() is None:
                continue
            mult = pdiv(entry, piv)  # integral: pivot has min valuation
            for j in range(n):
                work[i][j] = work[i][j] - mult * work[pi][j]
    return work, pivots


def rank(a):
    return len(echelon(a)[1])


def det(a):
    n = len(a)
    if len(a[0]) != n:
        raise ValueError("determinant of a non-square matrix")
    work, pivots = echelon(a)
    p = a[0][0].p
    if len(pivots) < n:
        return PadicNum(p, min_matrix_prec(work), 0)
    out = PadicNum(p, min_matrix_prec(a), 1)
    for pi, pj, _ in pivots:
        out = out * work[pi][pj]
    # permutation sign: rows and columns in pivot order
    for seq in ([pi for pi, _, _ in pivots], [pj for _, pj, _ in pivots]):
        perm = list(seq)
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    perm[i], perm[j] = perm[j], perm[i]
                    out = -out
    return out


def kernel_basis(a):
    """Integral basis of the right kernel, one vector per free column.

    Back-substitution divides only by pivots, and every numerator sits in
    the pivot's remaining submatrix, so quotients are integral and the
    certified precision of each entry reflects the pivot losses.
    """
    work, pivots = echelon(a)
    n = len(work[0])
    p = a[0][0].p
    prec = min_matrix_prec(a)
    pivot_cols = {pj: (pi, pv) for pi, pj, pv in pivots}
    free_cols = [j for j in range(n) if j not in pivot_cols]
    basis = []
    for f in free_cols:
        x = [PadicNum(p, prec, 0)] * n
        x[f] = PadicNum(p, prec, 1)
        for pi, pj, pv in reversed(pivots):
            acc = work[pi][f]
            for qj in pivot_cols:
                if qj != pj:
                    acc = acc + work[pi][qj] * x[qj]
            x[pj] = -pdiv(acc, work[pi][pj])
        basis.append(x)
    return basis


def solve_columns(a, b):
    """Solve a X = b column by column; a of full certified column rank.

    a may be rectangular (more rows than columns); non-pivot rows of the
    transformed right-hand side must vanish at working precision, which
    certifies the targets lie in the column span.  Raises PrecisionError
    if a pivot cannot be certified, the system is inconsistent, or the
    solution is not integral at the working precision.
    """
    m, n = len(a), len(a[0])
    if m < n:
        raise ValueError("need at least as many rows as unknowns")
    cols = len(b[0])
    work = [list(ra) + list(rb) for ra, rb in zip(a, b)]
    rows_left = list(range(m))
    cols_left = list(range(n))
    pivots = []
    while rows_left and cols_left:
        best = _pivot_search(work, rows_left, cols_left)
        if best is None:
            break
        pi, pj, pv = best
        pivots.append(best)
        rows_left.remove(pi)
        cols_left.remove(pj)
        piv = work[pi][pj]
        for i in rows_left:
            entry = work[i][pj]
            if entry.valuation() is None:
                continue
            mult = pdiv(entry, piv)
            for j in range(n + cols):
                work[i][j] = work[i][j] - mult * work[pi][j]
    if len(pivots) < n:
        raise PrecisionError("matrix rank not certified at working precision")
    for i in rows_left:
        for c in range(cols):
            if work[i][n + c].valuation() is not None:
                raise PrecisionError(
                    "system inconsistent at working precision")
    p = a[0][0].p
    prec = min(min_matrix_prec(a), min_matrix_prec(b))
    xs = [[PadicNum(p, prec, 0)] * cols for _ in range(n)]
    for pi, pj, pv in reversed(pivots):
        solved = [qj for _, qj, _ in pivots if qj != pj]
        for c in range(cols):
            acc = work[pi][n + c]
            for qj in solved:
                acc = acc - work[pi][qj] * xs[qj][c]
            xs[pj][c] = pdiv(acc, work[pi][pj])
    return xs


def invert_matrix(a):
    p = a[0][0].p
    return solve_columns(a, identity_matrix(p, min_matrix_prec(a), len(a)))


def column_span_form(vectors, p, prec):
    """Canonical form of the saturated span of the given vectors.

    Echelon rows are primitive-shifted (every entry of a pivot row sits in
    columns that were still live at its pivot step, so the shifted pivot is
    a unit), unit-normalized, then Jordan-reduced and sorted by pivot
    column.  Two saturated spans agree iff their forms agree entrywise at
    the shared precision.
    """
    if not vectors:
        return []
    work, pivots = echelon([list(v) for v in vectors])
    rows = []
    for pi, pj, pv in pivots:
        row = [x.shift(-pv) for x in work[pi]]
        rows.append((pj, [x * row[pj].invert() for x in row]))
    # zero out every pivot column above and below its own row
    for pj, row in rows:
        for qj, other in rows:
            if qj != pj:
                factor = other[pj]
                for j in range(len(other)):
                    other[j] = other[j] - factor * row[j]
    rows.sort(key=lambda t: t[0])
    return [tuple(row) for _, row in rows]


def fredholm_poly(a, degree):
    """Coefficients c_0..c_D of det(1 - t a) on the truncation.

    Truncated Berkowitz recursion: division-free, exact mod the common
    entry modulus, cost O(D T^3).  Returns PadicNum coefficients at the
    minimal entry precision; coefficients beyond the matrix size are
    exactly zero and are not returned.
    """
    n = len(a)
    if len(a[0]) != n:
        raise ValueError("square matrices only")
    p = a[0][0].p
    prec = min_matrix_prec(a)
    q = p ** prec
    rows = [[x.reduce(prec).residue % q for x in row] for row in a]
    degree = min(degree, n)
    poly = [1]
    for r in range(1, n + 1):
        cap = min(r, degree)
        lead = rows[r - 1][r - 1]
        rvec = rows[r - 1][:r - 1]
        cvec = [rows[i][r - 1] for i in range(r - 1)]
        toep = [1, (-lead) % q]
        w = cvec
        for i in range(cap - 1):
            if i:
                w = [sum(rows[x][y] * w[y] for y in range(r - 1)) % q
                     for x in range(r - 1)]
            toep.append((-sum(rv * wv for rv, wv in zip(rvec, w))) % q)
        new = []
        for i in range(cap + 1):
            acc = 0
            for j in range(min(i, len(poly) - 1) + 1):
                if i - j < len(toep):
                    acc += toep[i - j] * poly[j]
            new.append(acc % q)
        poly = new
    return [PadicNum(p, prec, c) for c in poly[:degree + 1]]
