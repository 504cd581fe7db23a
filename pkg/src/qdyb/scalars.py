"""Exact scalar arithmetic: rationals, a large prime field, and q-numbers.

Every identity in this package is checked over an exact field.  Two
backends are provided:

* the rational numbers (``fractions.Fraction``), the default;
* a prime field F_P for a configurable prime P > 2**61, used for fast
  probabilistic (Schwartz-Zippel style) identity checking.

On top of the field sit the standard q-integers

    [j] = (q^j - qbar^j) / (q - qbar),      qbar := 1/q,

q-factorials, the generalized q-integer with base d

    [k]_d = (d^k - (d - lam)^k) / lam,      lam := q - qbar,

and the two-term recursion solution

    f(p, beta) = qbar^p + [j=p] * beta,

which satisfies f(p+1) + f(p-1) = [2] f(p) with f(0) = 1 and
f(1) = qbar + beta.  Zeros of f are the dynamical poles of the theory;
any evaluation that hits one raises :class:`PoleError` instead of
silently substituting a limit.

All values are immutable; nothing here keeps global mutable state.
"""

from fractions import Fraction


class PoleError(ArithmeticError):
    """A dynamical pole: an f-value or q-integer in a denominator vanished."""


class DegenerateParameterError(ValueError):
    """Parameter data violating a genericity precondition."""


#: default prime for the modular backend (largest prime below 2**64, > 2**61)
DEFAULT_PRIME = 2**64 - 59


class ModInt:
    """An element of F_p.  Arithmetic stays exact; division by zero raises."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.v = v % p
        self.p = p

    def _lift(self, other):
        if isinstance(other, ModInt):
            assert other.p == self.p, "mixed prime fields"
            return other
        if isinstance(other, int):
            return ModInt(other, self.p)
        if isinstance(other, Fraction):
            return ModInt(other.numerator, self.p) / ModInt(other.denominator, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        return ModInt(self.v + o.v, self.p) if o is not NotImplemented else o

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return ModInt(self.v - o.v, self.p) if o is not NotImplemented else o

    def __rsub__(self, other):
        o = self._lift(other)
        return ModInt(o.v - self.v, self.p) if o is not NotImplemented else o

    def __mul__(self, other):
        o = self._lift(other)
        return ModInt(self.v * o.v, self.p) if o is not NotImplemented else o

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        return ModInt(pow(self.v, e, self.p), self.p)

    def __neg__(self):
        return ModInt(-self.v, self.p)

    def inverse(self):
        if self.v == 0:
            raise ZeroDivisionError("inverse of 0 in F_p")
        return ModInt(pow(self.v, self.p - 2, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, ModInt):
            return self.v == other.v and self.p == other.p
        if isinstance(other, int):
            return self.v == other % self.p
        if isinstance(other, Fraction):
            return self == self._lift(other)
        return NotImplemented

    def __bool__(self):
        return self.v != 0

    def __hash__(self):
        return hash((self.v, self.p))

    def __repr__(self):
        return "ModInt(%d mod %d)" % (self.v, self.p)


class RationalField:
    """The field Q.  Identity checks over it are proofs at the sample point."""

    name = "rational"
    exact = True

    def of(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise TypeError("cannot coerce %r into Q" % (x,))

    zero = Fraction(0)
    one = Fraction(1)

    def fmt(self, x):
        return str(Fraction(x))

    def __repr__(self):
        return "RationalField()"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")


class PrimeField:
    """F_p for a fixed prime p.  Identity checks are probabilistic."""

    exact = False

    def __init__(self, p=DEFAULT_PRIME):
        assert p > 2, "need an odd prime"
        self.p = p
        self.zero = ModInt(0, p)
        self.one = ModInt(1, p)
        self.name = "prime(%d)" % p

    def of(self, x):
        if isinstance(x, ModInt):
            assert x.p == self.p
            return x
        if isinstance(x, int):
            return ModInt(x, self.p)
        if isinstance(x, Fraction):
            return ModInt(x.numerator, self.p) / ModInt(x.denominator, self.p)
        if isinstance(x, str):
            return self.of(Fraction(x))
        raise TypeError("cannot coerce %r into F_p" % (x,))

    def fmt(self, x):
        return str(x.v)

    def __repr__(self):
        return "PrimeField(%d)" % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("prime", self.p))


RATIONAL = RationalField()


class QContext:
    """Deformation context: the field, q, the rank n, and optionally an
    exact n-th root of q (needed by anything using q**(1/n) powers).

    Genericity guard: [j] != 0 for 2 <= j <= n+1 is enforced on
    construction, which is what every antisymmetrizer denominator needs.
    """

    __slots__ = ("field", "q", "n", "root", "qbar", "lam")

    def __init__(self, q, n, root=None, field=RATIONAL):
        self.field = field
        self.q = field.of(q)
        self.n = n
        if not self.q:
            raise DegenerateParameterError("q must be nonzero")
        self.qbar = field.one / self.q
        self.lam = self.q - self.qbar
        self.root = None if root is None else field.of(root)
        if self.root is not None and self.root**n != self.q:
            raise DegenerateParameterError("root**n != q")
        for j in range(2, n + 2):
            if not qnum(j, self):
                raise DegenerateParameterError("[%d] = 0 for this q" % j)

    def qpow(self, e):
        """q**e for integer e, or rational e with denominator dividing n
        (via the stored root)."""
        if isinstance(e, Fraction) and e.denominator != 1:
            if self.root is None:
                raise DegenerateParameterError(
                    "fractional q-power %s needs ctx.root" % e)
            m = e * self.n
            if m.denominator != 1:
                raise DegenerateParameterError(
                    "q-power %s not expressible through the n-th root" % e)
            return self.root ** int(m)
        return self.q ** int(e)

    def __repr__(self):
        return "QContext(q=%s, n=%d%s, %s)" % (
            self.q, self.n,
            "" if self.root is None else ", root=%s" % (self.root,),
            self.field.name)


def qnum(j, ctx):
    """The q-integer [j]; at q = +-1 the continuation j*q^(j-1)."""
    q, qbar = ctx.q, ctx.qbar
    if q == qbar:  # q = 1 or q = -1
        return ctx.field.of(j) * q ** ((j - 1) % 2)
    return (q**j - qbar**j) / (q - qbar)


def qfact(j, ctx):
    """[j]! = [1][2]...[j]; the empty product for j = 0."""
    assert j >= 0
    r = ctx.field.one
    for m in range(2, j + 1):
        r = r * qnum(m, ctx)
    return r


def qnum_base(k, d, ctx):
    """[k]_d = (d^k - (d-lam)^k)/lam, the q-integer with general base d.

    Reduces to [k] at d = q.  At lam = 0 the continuation is k*d^(k-1).
    """
    lam = ctx.lam
    d = ctx.field.of(d)
    if not lam:
        return ctx.field.of(k) * d ** (k - 1)
    return (d**k - (d - lam) ** k) / lam


def qfact_base(k, d, ctx):
    """[k]_d! = [1]_d [2]_d ... [k]_d."""
    r = ctx.field.one
    for m in range(2, k + 1):
        r = r * qnum_base(m, d, ctx)
    return r


def f_poly(p, beta, ctx):
    """f(p, beta) = qbar^p + [p] beta.

    Solves f(p+1) + f(p-1) = [2] f(p) with f(0) = 1, f(1) = qbar + beta.
    Accepts rational p with denominator dividing n when ctx has a root
    (used by canonical shifts).
    """
    beta = ctx.field.of(beta)
    if isinstance(p, Fraction) and p.denominator != 1:
        qp = ctx.qpow(p)
        qbp = ctx.field.one / qp
        num = (qp - qbp) / ctx.lam if ctx.lam else None
        if num is None:
            raise DegenerateParameterError("fractional f at q = +-1")
        return qbp + num * beta
    p = int(p)
    return ctx.qbar**p + qnum(p, ctx) * beta


def xi_of_f(p, beta, ctx):
    """xi(p) = f(p-1, beta)/f(p, beta), raising PoleError at f(p) = 0."""
    den = f_poly(p, beta, ctx)
    if not den:
        raise PoleError("dynamical pole: f(%s, %s) = 0" % (p, beta))
    return f_poly(p - 1, beta, ctx) / den


def fmt_scalar(x):
    """Serialize a scalar as 'num/den' (rational) or a residue string."""
    if isinstance(x, ModInt):
        return str(x.v)
    return str(Fraction(x))
