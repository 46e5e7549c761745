"""Coset presentation of modular symbols for Gamma_0(M).

Generators are the classes of P^1(Z/M); the class of (c:d) stands for
the path {g.0 -> g.oo} where g is a fixed integral lift with bottom row
congruent to (c, d) mod M.  A symbol is a tuple of coefficient-module
values, one per generator, and membership in the symbol space is cut
out by two families of linear relations:

  two-term:   value(x) + value(x.sigma)|twist = 0
  three-term: value(x) + value(x.A)|twist + value(x.B)|twist = 0

with sigma = [[0,-1],[1,0]] and A, B the unimodular maps sending
{0 -> oo} to the other two sides of the ideal triangle (0, 1, oo).  The
twists are the Gamma_0(M) elements that move the fixed lift of one
class to the actual matrix produced by the identity, so relations hold
for every coefficient module with a right monoid action.

Matrices act on cusps by the usual fractional-linear rule; coefficient
values are acted on through whatever right action the caller supplies.
Arbitrary paths between cusps decompose into generator paths by the
continued-fraction trick, which is also how the p-coset operator at a
prime dividing M is evaluated.

The dimension oracle (index, elliptic point counts, cusps, genus, cusp
form dimensions) is computed from scratch so the relation-matrix rank
can be checked without consulting any tables.
"""

import math
from fractions import Fraction

SIGMA = (0, -1, 1, 0)
TRIANGLE_A = (1, -1, 1, 0)
TRIANGLE_B = (0, 1, -1, 1)
INFINITY = (1, 0)


def _xgcd(a, b):
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def mat2_mul(g, h):
    a, b, c, d = g
    e, f, u, v = h
    return (a * e + b * u, a * f + b * v, c * e + d * u, c * f + d * v)


def mat2_det(g):
    return g[0] * g[3] - g[1] * g[2]


def mat2_inv_unimodular(g):
    a, b, c, d = g
    det = a * d - b * c
    if det == 1:
        return (d, -b, -c, a)
    if det == -1:
        return (-d, b, c, -a)
    raise ValueError("matrix is not unimodular")


def apply_to_cusp(g, cusp):
    """Fractional-linear action on a cusp (num, den), with (1, 0) = oo."""
    a, b, c, d = g
    n, m = cusp
    num, den = a * n + b * m, c * n + d * m
    if den == 0:
        if num == 0:
            raise ValueError("matrix killed the cusp")
        return INFINITY
    g0 = math.gcd(num, den)
    num, den = num // g0, den // g0
    if den < 0:
        num, den = -num, -den
    return (num, den)


def unimodular_chain(r, s):
    """Decompose the path {r -> s} into generator-shaped pieces.

    Returns a list of (sign, matrix) with the matrices in SL_2(Z), such
    that {r -> s} = sum sign * {M.0 -> M.oo} as divisors.  Endpoints are
    cusps in (num, den) form.
    """
    if r == s:
        return []
    out = []
    if s != INFINITY:
        out.extend(_chain_from_infinity(s))
    if r != INFINITY:
        out.extend((-sign, m) for sign, m in _chain_from_infinity(r))
    return out


def _chain_from_infinity(cusp):
    """Unimodular pieces of {oo -> a/b} via continued-fraction convergents."""
    a, b = cusp
    if b == 0:
        return []
    # Convergents p_i/q_i of a/b with floor-type quotients; the bridge
    # matrices (p_i, +-p_{i-1}; q_i, +-q_{i-1}) are unimodular and move
    # {0 -> oo} to {p_{i-1}/q_{i-1} -> p_i/q_i}.
    quotients = []
    num, den = a, b
    while den:
        q, rem = divmod(num, den)
        quotients.append(q)
        num, den = den, rem
    pm1, qm1 = 1, 0
    p0, q0 = quotients[0], 1
    sign = 1
    chain = [(1, (p0, -pm1, q0, -qm1))]
    for quot in quotients[1:]:
        p1, q1 = quot * p0 + pm1, quot * q0 + qm1
        chain.append((1, (p1, sign * p0, q1, sign * q0)))
        pm1, qm1, p0, q0 = p0, q0, p1, q1
        sign = -sign
    return chain


def level_index(M):
    """Index of Gamma_0(M) in the modular group."""
    out = M
    for q in _prime_divisors(M):
        out = out * (q + 1) // q
    return out


def _prime_divisors(M):
    out = []
    n = M
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def elliptic_order2(M):
    if M % 4 == 0:
        return 0
    out = 1
    for q in _prime_divisors(M):
        if q == 2:
            continue
        out *= 1 + (1 if q % 4 == 1 else -1)
    return out


def elliptic_order3(M):
    if M % 9 == 0:
        return 0
    out = 1
    for q in _prime_divisors(M):
        if q == 3:
            continue
        out *= 1 + (1 if q % 3 == 1 else -1)
    return out


def cusp_count(M):
    total = 0
    for d in range(1, M + 1):
        if M % d == 0:
            g = math.gcd(d, M // d)
            total += _euler_phi(g)
    return total


def _euler_phi(n):
    out = n
    for q in _prime_divisors(n):
        out = out * (q - 1) // q
    return out


def genus_x0(M):
    num = 12 + level_index(M) - 3 * elliptic_order2(M) - 4 * elliptic_order3(M) \
        - 6 * cusp_count(M)
    if num % 12:
        raise ArithmeticError("genus formula did not come out integral")
    return num // 12


def cusp_form_dimension(M, k):
    """dim S_k(Gamma_0(M)) for even k >= 2; odd weights vanish."""
    if k % 2 or k < 2:
        return 0
    g = genus_x0(M)
    if k == 2:
        return g
    return ((k - 1) * (g - 1) + (k // 2 - 1) * cusp_count(M)
            + elliptic_order2(M) * (k // 4) + elliptic_order3(M) * (k // 3))


def eisenstein_dimension(M, k):
    if k % 2 or k < 2:
        return 0
    c = cusp_count(M)
    return c - 1 if k == 2 else c


def symbol_space_dimension(M, k):
    """Expected rank of the weight-k symbol space: 2 dim S_k + dim Eis_k."""
    return 2 * cusp_form_dimension(M, k) + eisenstein_dimension(M, k)


def p1_classes(M):
    """Canonical representatives of P^1(Z/M), lexicographically smallest."""
    if M < 2:
        raise ValueError("need level at least 2")
    units = [u for u in range(1, M) if math.gcd(u, M) == 1]
    seen = set()
    reps = []
    for c in range(M):
        for d in range(M):
            if (c, d) in seen or math.gcd(math.gcd(c, d), M) != 1:
                continue
            orbit = {((u * c) % M, (u * d) % M) for u in units}
            reps.append(min(orbit))
            seen.update(orbit)
    return sorted(reps)


def lift_to_sl2(c, d, M):
    """An SL_2(Z) matrix whose bottom row is congruent to (c, d) mod M."""
    c0, d0 = c % M, d % M
    if c0 == 0 and d0 == 0:
        raise ValueError("(0, 0) is not a projective point")
    for t in range(M + 1):
        d1 = d0 + t * M
        if math.gcd(c0, d1) == 1:
            g, x, y = _xgcd(c0, d1)
            # x*c0 + y*d1 = 1, so (y, -x; c0, d1) has determinant 1
            return (y, -x, c0, d1)
    raise ArithmeticError("no coprime lift found")


class ManinPresentation:
    """Coset generators and relation data for Gamma_0(M) symbols.

    Relations are stored as term lists [(generator index, twist matrix),
    ...] meaning that the twisted sum of values vanishes.  Twists are
    returned ready to act on values (the inverses of the coset movers),
    and each is checked to lie in Gamma_0(M).
    """

    def __init__(self, M):
        if M < 2:
            raise ValueError("need level at least 2")
        self.level = M
        self.reps = p1_classes(M)
        self.index = {x: i for i, x in enumerate(self.reps)}
        self.lifts = [lift_to_sl2(c, d, M) for c, d in self.reps]
        self._units = [u for u in range(1, M) if math.gcd(u, M) == 1]
        if len(self.reps) != level_index(M):
            raise ArithmeticError("projective line size disagrees with the index")
        self._relations = None

    def size(self):
        return len(self.reps)

    def classify(self, c, d):
        """Index of the class of (c : d)."""
        M = self.level
        c0, d0 = c % M, d % M
        if math.gcd(math.gcd(c0, d0), M) != 1:
            raise ValueError("pair does not define a projective point")
        best = min(((u * c0) % M, (u * d0) % M) for u in self._units)
        return self.index[best]

    def coset_split(self, gamma):
        """Write gamma = delta * lift(x) with delta in Gamma_0(M).

        Returns (x, delta).  gamma must be in SL_2(Z).
        """
        if mat2_det(gamma) != 1:
            raise ValueError("coset splitting needs a unimodular matrix")
        x = self.classify(gamma[2], gamma[3])
        delta = mat2_mul(gamma, mat2_inv_unimodular(self.lifts[x]))
        if delta[2] % self.level:
            raise ArithmeticError("coset splitting left the congruence group")
        return x, delta

    def relations(self):
        """Two- and three-term relation term lists, one list per relation."""
        if self._relations is not None:
            return self._relations
        ident = (1, 0, 0, 1)
        rels = []
        for i, g in enumerate(self.lifts):
            x, delta = self.coset_split(mat2_mul(g, SIGMA))
            rels.append([(i, ident), (x, mat2_inv_unimodular(delta))])
        for i, g in enumerate(self.lifts):
            terms = [(i, ident)]
            for side in (TRIANGLE_A, TRIANGLE_B):
                x, delta = self.coset_split(mat2_mul(g, side))
                terms.append((x, mat2_inv_unimodular(delta)))
            rels.append(terms)
        self._relations = rels
        return rels

    def path_terms(self, matrix):
        """Evaluation recipe for the path {g.0 -> g.oo} of an integral g.

        Returns [(sign, generator index, twist)] so that a symbol's value
        on the path is the signed sum of generator values acted on by the
        twists.  The matrix may have any positive determinant.
        """
        r = apply_to_cusp(matrix, (0, 1))
        s = apply_to_cusp(matrix, INFINITY)
        out = []
        for sign, piece in unimodular_chain(r, s):
            x, delta = self.coset_split(piece)
            out.append((sign, x, mat2_inv_unimodular(delta)))
        return out

    def up_terms(self, p):
        """Evaluation recipe for the p-coset operator, one list per generator.

        Each entry of the outer list describes the operator's value at
        that generator as [(sign, source index, twist)] where the twist
        has determinant p.  Requires p to divide the level.
        """
        if self.level % p:
            raise ValueError("the p-coset operator needs p to divide the level")
        out = []
        for g in self.lifts:
            terms = []
            for a in range(p):
                beta = (1, a, 0, p)
                for sign, x, tw in self.path_terms(mat2_mul(beta, g)):
                    terms.append((sign, x, mat2_mul(tw, beta)))
            out.append(terms)
        return out

    def check_dimension(self, k, found_rank):
        """Compare a computed symbol-space rank with the internal count."""
        expected = symbol_space_dimension(self.level, k)
        if found_rank != expected:
            raise ArithmeticError(
                "symbol space rank %d disagrees with the dimension count %d"
                % (found_rank, expected))
        return expected
