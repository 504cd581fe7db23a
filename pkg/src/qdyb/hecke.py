"""Hecke algebra words, their tensor representations, q-antisymmetrizers.

The abstract algebra H_k(q) has generators g_1 .. g_{k-1} with

    g_i g_{i+1} g_i = g_{i+1} g_i g_{i+1},
    g_i^2 = 1 + (q - qbar) g_i,
    g_i g_j = g_j g_i               (|i - j| >= 2).

Elements are kept as free linear combinations of words; no normal form
is claimed at this level.  Generator inverses exist abstractly through
the quadratic relation, g^(-1) = g - (q - qbar).

Three representation flavors on V^(x)k:

* constant: g_i -> R_{i,i+1} for a constant Hecke braid matrix;
* dynamic:  g_i -> (X_1...X_{i-1}) R_{i,i+1}(p) (X_1...X_{i-1})^(-1),
  concretely the block-diagonal matrix whose block at the prefix
  multi-index (i_1..i_{i-1}) is R(p - v(i_1) - ... - v(i_{i-1}));
  nonlocal for i >= 2, localized for i = 1;
* localized-last: g_i -> (X_{i+2}...X_k)^(-1) R_{i,i+1}(p) (X_{i+2}...X_k),
  equivalent to the dynamic flavor by conjugation with X_1...X_k.

The q-antisymmetrizer of a window of sites i..j is built by the
two-sided recursion

    A(i,i) = 1,
    A(i,j) = (1/[m]) A(i,j-1) (q^(m-1) - [m-1] g_{j-1}) A(i,j-1),
    m = j - i + 1,

equivalently from the left end through g_i; both routes are computed
and compared.  The height of a representation is the n at which the
(n+1)-node antisymmetrizer vanishes while the n-node one keeps exactly
one dimension per window (matrix rank n^(k-n) on V^(x)k).
"""

import itertools

from .scalars import DegenerateParameterError, qnum
from .tensor import TensorOp
from .rmatrix import DynRMatrix, build_dj, dressed_block


class HeckeWord:
    """A linear combination of words in g_i^(+-1), free of relations.

    Words are tuples of nonzero signed integers: +i for g_i, -i for the
    inverse.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for w, c in terms.items():
                if c:
                    self.terms[tuple(w)] = self.terms.get(tuple(w), 0) + c

    @classmethod
    def one(cls):
        return cls({(): 1})

    @classmethod
    def gen(cls, i, power=1):
        assert i >= 1
        return cls({(i if power > 0 else -i,) * abs(power): 1})

    @classmethod
    def word(cls, letters):
        return cls({tuple(letters): 1})

    def __add__(self, other):
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, 0) + c
        return HeckeWord(t)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, s):
        return HeckeWord({w: s * c for w, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, HeckeWord):
            return NotImplemented
        t = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                t[w] = t.get(w, 0) + c1 * c2
        return HeckeWord(t)

    def __repr__(self):
        def show(w):
            return "*".join("g%d" % l if l > 0 else "g%d^-1" % -l
                            for l in w) or "1"
        return " + ".join("%s %s" % (c, show(w))
                          for w, c in sorted(self.terms.items())) or "0"


CONSTANT = "constant"
DYNAMIC = "dynamic"
LOCALIZED_LAST = "localized-last"


class HeckeRep:
    """A representation of H_k(q) on V^(x)k with cached generator images."""

    def __init__(self, k, ctx, images, flavor, params=None, base=None):
        self.k = k
        self.ctx = ctx
        self.n = images[0].n if images else ctx.n
        self.flavor = flavor
        self.params = params
        self.base = base
        self._images = images          # images of g_1 .. g_{k-1}
        self._inverses = [None] * len(images)

    @classmethod
    def constant(cls, n, ctx, k, rmat=None):
        R = rmat if rmat is not None else build_dj(n, ctx)
        return cls(k, ctx, [R.embed(i, k) for i in range(1, k)], CONSTANT)

    @classmethod
    def dynamic(cls, params, p, k, rmat=None):
        rmx = rmat if rmat is not None else DynRMatrix(params)
        n = params.n
        images = []
        for i in range(1, k):
            block = dressed_block(n, rmx.at, i - 1, p, sign=-1, side="prefix")
            images.append(block.embed(1, k) if block.rk < k else block)
        return cls(k, params.ctx, images, DYNAMIC, params, p)

    @classmethod
    def localized_last(cls, params, p, k, rmat=None):
        rmx = rmat if rmat is not None else DynRMatrix(params)
        n = params.n
        images = []
        for i in range(1, k):
            block = dressed_block(n, rmx.at, k - i - 1, p, sign=+1,
                                  side="suffix")
            images.append(block.embed(i, k) if block.rk < k else block)
        return cls(k, params.ctx, images, LOCALIZED_LAST, params, p)

    def image(self, i):
        assert 1 <= i <= self.k - 1, "generator index out of range"
        return self._images[i - 1]

    def image_inv(self, i):
        if self._inverses[i - 1] is None:
            lam = self.ctx.lam
            ident = TensorOp.identity(self.n, self.k, self.ctx.field.one)
            self._inverses[i - 1] = self.image(i) - lam * ident
        return self._inverses[i - 1]

    def apply(self, elt):
        """Image of a HeckeWord: multiplicative on words, linear overall."""
        out = TensorOp.zero(self.n, self.k, self.k)
        ident = TensorOp.identity(self.n, self.k, self.ctx.field.one)
        for w, c in elt.terms.items():
            op = ident
            for letter in w:
                op = op * (self.image(letter) if letter > 0
                           else self.image_inv(-letter))
            out = out + c * op
        return out

    def relations_hold(self):
        """Exact check of the braid, quadratic and locality relations."""
        lam = self.ctx.lam
        ident = TensorOp.identity(self.n, self.k, self.ctx.field.one)
        for i in range(1, self.k - 1):
            a, b = self.image(i), self.image(i + 1)
            if a * b * a != b * a * b:
                return False
        for i in range(1, self.k):
            a = self.image(i)
            if a * a != ident + lam * a:
                return False
        for i in range(1, self.k - 1):
            for j in range(i + 2, self.k):
                if self.image(i) * self.image(j) \
                        != self.image(j) * self.image(i):
                    return False
        return True


def antisym(rep, i, j, _memo=None):
    """Image of the window antisymmetrizer A(i, j) on sites i..j.

    Both end-recursions are computed; their agreement is asserted.
    """
    assert 1 <= i <= j <= rep.k
    memo = _memo if _memo is not None else {}
    return _antisym_right(rep, i, j, memo)


def _antisym_right(rep, i, j, memo):
    key = (i, j)
    if key in memo:
        return memo[key]
    ctx = rep.ctx
    if i == j:
        out = TensorOp.identity(rep.n, rep.k, ctx.field.one)
    else:
        m = j - i + 1
        den = qnum(m, ctx)
        if not den:
            raise DegenerateParameterError("[%d] = 0" % m)
        prev = _antisym_right(rep, i, j - 1, memo)
        mid = ctx.q ** (m - 1) * TensorOp.identity(rep.n, rep.k,
                                                   ctx.field.one) \
            - qnum(m - 1, ctx) * rep.image(j - 1)
        out = (1 / den) * (prev * mid * prev)
        # left-end recursion must agree
        prev_l = _antisym_right(rep, i + 1, j, memo) if m > 2 else \
            TensorOp.identity(rep.n, rep.k, ctx.field.one)
        mid_l = ctx.q ** (m - 1) * TensorOp.identity(rep.n, rep.k,
                                                     ctx.field.one) \
            - qnum(m - 1, ctx) * rep.image(i)
        alt = (1 / den) * (prev_l * mid_l * prev_l)
        if alt != out:
            raise DegenerateParameterError(
                "window recursion mismatch at A(%d,%d): the generator "
                "images do not satisfy the algebra relations" % (i, j))
    memo[key] = out
    return out


def antisym_tower(rep, up_to):
    """[A(1,1), A(1,2), ..., A(1,up_to)] as operator images."""
    memo = {}
    return [antisym(rep, 1, j, memo) for j in range(1, up_to + 1)]


def symmetrizer(rep, j):
    """The j-node symmetrizer: the antisymmetrizer recursion with q
    replaced by -qbar (a convention; the two towers are distinguished
    by which one terminates)."""
    ctx = rep.ctx
    qs = -ctx.qbar

    def qnum_s(m):
        if qs == 1 / qs:
            return ctx.field.of(m) * qs ** ((m - 1) % 2)
        return (qs**m - qs**-m) / (qs - 1 / qs)

    def build(m):
        if m == 1:
            return TensorOp.identity(rep.n, rep.k, ctx.field.one)
        prev = build(m - 1)
        den = qnum_s(m)
        if not den:
            raise DegenerateParameterError("symmetrizer [%d] = 0" % m)
        mid = qs ** (m - 1) * TensorOp.identity(rep.n, rep.k, ctx.field.one) \
            - qnum_s(m - 1) * rep.image(m - 1)
        return (1 / den) * (prev * mid * prev)

    return build(j)


def antisym_props_hold(rep, j):
    """(g_i + qbar) A = A (g_i + qbar) = 0 for i < j, and absorption
    A(1,j) A(i,l) = A(i,l) A(1,j) = A(1,j) for windows inside 1..j."""
    memo = {}
    A = antisym(rep, 1, j, memo)
    qbar = rep.ctx.qbar
    ident = TensorOp.identity(rep.n, rep.k, rep.ctx.field.one)
    for i in range(1, j):
        t = rep.image(i) + qbar * ident
        if not (t * A).is_zero() or not (A * t).is_zero():
            return False
    for i in range(1, j + 1):
        for l in range(i, j + 1):
            W = antisym(rep, i, l, memo)
            if A * W != A or W * A != A:
                return False
    return True


def height(rep):
    """The height of the representation, or None.

    On V^(x)k, the n-node window antisymmetrizers have matrix rank
    n^(k-n) (one dimension per window, identity on spectator sites);
    the (n+1)-node ones vanish.  Windowed variants are checked too.
    """
    memo = {}
    k = rep.k
    for n in range(1, k + 1):
        if n == k:
            if antisym(rep, 1, k, memo).exact_rank() == 1:
                return n
            return None
        top_zero = all(
            antisym(rep, i, n + i, memo).is_zero()
            for i in range(1, k - n + 1))
        if not top_zero:
            continue
        expected = rep.n ** (k - n)
        ranks_ok = all(
            antisym(rep, j, n + j - 1, memo).exact_rank() == expected
            for j in range(1, k - n + 2))
        return n if ranks_ok else None
    return None


def top_vanish_equivalents(rep, n, records=None):
    """The six operator identities equivalent to A(n+1) = 0 at k = n+1,
    plus the alternating expansion of A(n+1) itself.

    A := A(1,n), B := A(2,n+1), w+ := g_1 g_2 ... g_n, w- := g_n ... g_1:

        A w-  = s A B,   w+ A  = s B A,   w- B = s A B,   B w+ = s B A,
        A B A = [n]^(-2) A,   B A B = [n]^(-2) B,

    with s = (-1)^(n-1) q [n].
    """
    assert rep.k == n + 1
    records = records if records is not None else []
    ctx = rep.ctx
    memo = {}
    A = antisym(rep, 1, n, memo)
    B = antisym(rep, 2, n + 1, memo)
    down = rep.apply(HeckeWord.word(tuple(range(n, 0, -1))))
    up = rep.apply(HeckeWord.word(tuple(range(1, n + 1))))
    s = (-1) ** (n - 1) * ctx.q * qnum(n, ctx)

    def rec(rid, lhs, rhs):
        diff = lhs - rhs
        ok = diff.is_zero()
        records.append((rid, ok, None if ok else diff.first_nonzero()))

    rec("top-vanish.a-then-down", A * down, s * (A * B))
    rec("top-vanish.up-then-a", up * A, s * (B * A))
    rec("top-vanish.down-then-b", down * B, s * (A * B))
    rec("top-vanish.b-then-up", B * up, s * (B * A))
    inv2 = 1 / qnum(n, ctx) ** 2
    rec("top-vanish.aba", A * B * A, inv2 * A)
    rec("top-vanish.bab", B * A * B, inv2 * B)

    # alternating expansion of the top antisymmetrizer
    alt = HeckeWord({(): ctx.q ** n})
    for m in range(1, n + 1):
        word = tuple(range(n, n - m, -1))
        alt = alt + HeckeWord({word: (-1) ** m * ctx.q ** (n - m)})
    lhs = antisym(rep, 1, n + 1, memo)
    rhs = (1 / qnum(n + 1, ctx)) * (A * rep.apply(alt))
    rec("top-vanish.alternating-expansion", lhs, rhs)
    rec("top-vanish.top-is-zero", lhs, TensorOp.zero(rep.n, rep.k, rep.k))
    return records


def inner_automorphism_check(rep, i, r, records=None):
    """Conjugation by g_i g_{i+1} ... g_{r+i} maps the window subalgebra
    on sites i..r+i onto the one on sites i+1..r+i+1; checked on
    generators and on the window antisymmetrizers."""
    records = records if records is not None else []
    assert r + i + 1 <= rep.k
    W = rep.apply(HeckeWord.word(tuple(range(i, r + i + 1))))
    Winv = rep.apply(HeckeWord.word(tuple(-l for l in range(r + i, i - 1, -1))))
    ident = TensorOp.identity(rep.n, rep.k, rep.ctx.field.one)
    records.append(("inner-auto.invertible", W * Winv == ident, None))
    ok = True
    for m in range(i, r + i):
        if W * rep.image(m) * Winv != rep.image(m + 1):
            ok = False
    records.append(("inner-auto.generators", ok, None))
    memo = {}
    lhs = W * antisym(rep, i, r + i, memo) * Winv
    records.append(("inner-auto.antisymmetrizer",
                    lhs == antisym(rep, i + 1, r + i + 1, memo), None))
    return records


def locality_structure(rep):
    """(is_localized(i)) for each generator: whether the image equals a
    two-site operator embedded at (i, i+1)."""
    out = []
    n, k = rep.n, rep.k
    for i in range(1, k):
        img = rep.image(i)
        # extract the block where every spectator site carries index 1
        sub = {}
        for rm, cm, v in img.entries():
            spect_r = rm[:i - 1] + rm[i + 1:]
            spect_c = cm[:i - 1] + cm[i + 1:]
            if spect_r == spect_c and all(x == 1 for x in spect_r):
                sub[(rm[i - 1:i + 1], cm[i - 1:i + 1])] = v
        two = TensorOp.from_entries(n, 2, 2,
                                    [(rm, cm, v) for (rm, cm), v in sub.items()])
        out.append(img == two.embed(i, k))
    return out


def global_conjugation_equivalent(rep_dynamic, rep_local):
    """The localized-last flavor equals the dynamic one conjugated by the
    full product X_1...X_k (entrywise weight shift on multiset-conserving
    operators)."""
    from .rmatrix import multiset_dress
    assert rep_dynamic.flavor == DYNAMIC and rep_local.flavor == LOCALIZED_LAST
    assert rep_dynamic.base == rep_local.base
    p = rep_dynamic.base
    params = rep_dynamic.params
    k = rep_dynamic.k
    for i in range(1, k):
        img = rep_dynamic.image(i)

        def rebuilt(pp, i=i):
            return HeckeRep.dynamic(params, pp, k).image(i)

        if multiset_dress(img, p, rebuilt) != rep_local.image(i):
            return False
    return True


def classical_antisym_rank(n, j, k):
    """Oracle: the rank of the undeformed (q = 1) j-node antisymmetrizer
    on (C^n)^(x)k, i.e. C(n, j) * n^(k - j), via explicit alternation."""
    import math
    from fractions import Fraction
    perms = list(itertools.permutations(range(j)))

    def sign(perm):
        s = 1
        for a in range(len(perm)):
            for b in range(a + 1, len(perm)):
                if perm[a] > perm[b]:
                    s = -s
        return s

    rows = {}
    for col in itertools.product(range(1, n + 1), repeat=j):
        for perm in perms:
            row = tuple(col[perm[t]] for t in range(j))
            r = 0
            for x in row:
                r = r * n + (x - 1)
            c = 0
            for x in col:
                c = c * n + (x - 1)
            rows.setdefault(r, {})
            rows[r][c] = rows[r].get(c, Fraction(0)) \
                + Fraction(sign(perm), math.factorial(j))
    op = TensorOp(n, j, j, rows)
    return op.exact_rank() * n ** (k - j)


def antisym_word(m, ctx):
    """The m-node antisymmetrizer as an abstract element of H_m(q),
    built by the two-sided recursion (exponentially many words; only
    used for small m)."""
    if m == 1:
        return HeckeWord.one()
    prev = antisym_word(m - 1, ctx)
    mid = HeckeWord({(): ctx.q ** (m - 1)}) \
        - qnum(m - 1, ctx) * HeckeWord.gen(m - 1)
    den = qnum(m, ctx)
    return (1 / den) * (prev * mid * prev)
