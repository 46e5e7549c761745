"""Fixed-precision arithmetic in Z_p: residues mod p^N with valuation tracking.

Only odd p is supported.  A value is immutable; arithmetic never claims more
precision than the standard interval rules allow.
"""

from __future__ import annotations

from .errors import PrecisionError


def ival(n, p):
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of integer 0 is undefined")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def inv_mod(a, modulus):
    return pow(a, -1, modulus)


class PadicNum:
    """Element of Z_p known modulo p^prec."""

    __slots__ = ("p", "prec", "residue")

    def __init__(self, p, prec, value):
        if p < 3:
            raise ValueError("p must be an odd prime (p = 2 unsupported)")
        if prec < 1:
            raise ValueError("precision must be positive")
        self.p = p
        self.prec = prec
        self.residue = value % (p ** prec)

    # -- basic structure ---------------------------------------------------

    def modulus(self):
        return self.p ** self.prec

    def valuation(self):
        """Tracked valuation; None is the at-least-prec sentinel."""
        if self.residue == 0:
            return None
        return ival(self.residue, self.p)

    @property
    def valuation_floor(self):
        """Integer in [0, prec]; prec means 'at least prec'."""
        v = self.valuation()
        return self.prec if v is None else v

    def is_zero(self):
        return self.residue == 0

    def is_unit(self):
        return self.residue % self.p != 0

    def reduce(self, prec):
        if prec > self.prec:
            raise PrecisionError("cannot increase precision from %d to %d" % (self.prec, prec))
        return PadicNum(self.p, prec, self.residue)

    def lift(self):
        """Smallest non-negative integer representative."""
        return self.residue

    def __repr__(self):
        return "%d + O(%d^%d)" % (self.residue, self.p, self.prec)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.residue == other % self.modulus()
        if not isinstance(other, PadicNum):
            return NotImplemented
        return (self.p, self.prec, self.residue) == (other.p, other.prec, other.residue)

    def __hash__(self):
        return hash((self.p, self.prec, self.residue))

    def agrees(self, other, prec=None):
        """Equality after reduction to the common (or given) precision."""
        other = self._coerce(other)
        n = min(self.prec, other.prec)
        if prec is not None:
            if prec > n:
                raise PrecisionError("agreement requested beyond known precision")
            n = prec
        q = self.p ** n
        return (self.residue - other.residue) % q == 0

    def _coerce(self, other):
        if isinstance(other, PadicNum):
            if other.p != self.p:
                raise ValueError("mixed primes %d and %d" % (self.p, other.p))
            return other
        if isinstance(other, int):
            return PadicNum(self.p, self.prec, other)
        raise TypeError("cannot coerce %r" % (other,))

    # -- arithmetic; precision per interval rules --------------------------

    def __add__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        other = self._coerce(other)
        n = min(self.prec, other.prec)
        return PadicNum(self.p, n, self.residue + other.residue)

    __radd__ = __add__

    def __neg__(self):
        return PadicNum(self.p, self.prec, -self.residue)

    def __sub__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        other = self._coerce(other)
        # known mod p^min(Na+vb, Nb+va); a zero operand contributes its full floor
        n = min(self.prec + other.valuation_floor, other.prec + self.valuation_floor)
        return PadicNum(self.p, n, self.residue * other.residue)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("integer exponents only; use one_unit_pow for p-adic exponents")
        if k < 0:
            return self.invert() ** (-k)
        out = PadicNum(self.p, self.prec, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def invert(self):
        if not self.is_unit():
            raise ZeroDivisionError("inverse of a non-unit at precision %d" % self.prec)
        return PadicNum(self.p, self.prec, inv_mod(self.residue, self.modulus()))

    def __truediv__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        other = self._coerce(other)
        return self * other.invert()

    def __rtruediv__(self, other):
        if not isinstance(other, (int, PadicNum)):
            return NotImplemented
        return self._coerce(other) / self

    def shift(self, k):
        """Multiply by p^k; k < 0 divides exactly and lowers precision by |k|."""
        if k >= 0:
            return PadicNum(self.p, self.prec + k, self.residue * self.p ** k)
        k = -k
        if self.prec <= k:
            raise PrecisionError("shift below working precision")
        if self.residue % self.p ** k != 0:
            raise ValueError("not divisible by p^%d" % k)
        return PadicNum(self.p, self.prec - k, self.residue // self.p ** k)

    def divexact(self, n):
        """Divide by a nonzero integer whose p-part divides self exactly."""
        v = ival(n, self.p)
        unit = n // self.p ** v
        out = self.shift(-v) if v else self
        return out * PadicNum(self.p, out.prec, inv_mod(unit % out.modulus(), out.modulus()))

    def unit_part(self):
        v = self.valuation()
        if v is None:
            raise PrecisionError("unit part of zero residue")
        return self.shift(-v)


def padic(p, prec, value):
    return PadicNum(p, prec, value)


def teichmuller(z, N=None):
    """Teichmüller representative: the (p-1)-st root of unity congruent to z mod p.

    Computed by iterating z ↦ z^p mod p^N to stability.
    """
    if not isinstance(z, PadicNum):
        raise TypeError("z must be a PadicNum")
    if N is not None and N < z.prec:
        z = z.reduce(N)
    if not z.is_unit():
        raise ValueError("Teichmüller lift needs a unit")
    p, q = z.p, z.modulus()
    w = z.residue
    for _ in range(z.prec + 1):
        w2 = pow(w, p, q)
        if w2 == w:
            break
        w = w2
    else:
        raise AssertionError("Teichmüller iteration failed to stabilize")
    return PadicNum(p, z.prec, w)


def _series_degree_bound(p, N):
    # guarantees every dropped log/exp term vanishes mod p^N for one-units, p odd
    return -((-N * (p - 1)) // (p - 2)) + 2


def log_one_unit(u):
    """log of a one-unit (v_p(u - 1) ≥ 1), exact mod p^prec."""
    if not isinstance(u, PadicNum):
        raise TypeError("u must be a PadicNum")
    p, N = u.p, u.prec
    t = (u.residue - 1) % u.modulus()
    if t % p != 0:
        raise ValueError("log needs a one-unit")
    bound = _series_degree_bound(p, N)
    guard = 1
    while p ** guard <= bound:
        guard += 1
    q = p ** (N + guard)
    total = 0
    power = 1
    for n in range(1, bound + 1):
        power = (power * t) % q
        v = ival(n, p) if n % p == 0 else 0
        unit = n // p ** v
        term = (power // p ** v) * inv_mod(unit, q)
        if n % 2 == 0:
            term = -term
        total += term
    return PadicNum(p, N, total)


def exp_small(x):
    """exp of x with v_p(x) ≥ 1, exact mod p^prec (p odd)."""
    if not isinstance(x, PadicNum):
        raise TypeError("x must be a PadicNum")
    p, N = x.p, x.prec
    if x.residue % p != 0:
        raise ValueError("exp needs v_p(x) ≥ 1")
    bound = _series_degree_bound(p, N)
    guard = (bound // (p - 1)) + 2
    q = p ** (N + guard)
    t = x.residue % q
    total = 1
    power = 1
    fact_v = 0
    fact_unit = 1
    for n in range(1, bound + 1):
        power = (power * t) % q
        v = ival(n, p) if n % p == 0 else 0
        fact_v += v
        fact_unit = (fact_unit * (n // p ** v)) % q
        total += (power // p ** fact_v) * inv_mod(fact_unit, q)
    return PadicNum(p, N, total)


def one_unit_part(z):
    """⟨z⟩ = z/ω(z); congruent to 1 mod p."""
    return z / teichmuller(z)


def one_unit_pow(z, s, N=None):
    """⟨z⟩^s = exp(s·log⟨z⟩) for a unit z and p-adic exponent s."""
    if not isinstance(z, PadicNum):
        raise TypeError("z must be a PadicNum")
    if N is not None and N < z.prec:
        z = z.reduce(N)
    if not z.is_unit():
        raise ValueError("one_unit_pow needs a unit base")
    if isinstance(s, int):
        s = PadicNum(z.p, z.prec, s)
    u = one_unit_part(z)
    return exp_small(s * log_one_unit(u))
