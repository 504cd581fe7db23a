"""Weight-lattice points and the parameter family of SL(n)-type dynamical
R-matrices.

A weight point stores the integer differences p_ij = p_i - p_j (only the
chain p_12, p_23, ..., p_{n-1,n} is independent; additivity
p_ij + p_jk = p_ik fixes the rest).  The elementary shift v(m) acts by
p_jk -> p_jk + delta(m,j) - delta(m,k).

A parameter set consists of

* the deformation context (q, optionally an n-th root of q);
* a chain of n-1 free parameters beta_1 ... beta_{n-1}, from which the
  full antisymmetric family beta_ij is derived:

      beta_ij = lam * prod(beta_k) / (prod(beta_k) - prod(beta_k - lam))

  over k = i..j-1 for i < j, with beta_ji = lam - beta_ij and
  beta_ii = 0 (lam = q - qbar).  The chain may also be marked infinite,
  the beta -> oo regime, where xi degenerates to [p-1]/[p];
* a family of diagonal-twist parameters alpha_ij(p), either constants or
  geometric sequences c * w^p, constrained by alpha_ii = 1 and
  alpha_ij(p) * alpha_ji(-p) = 1.

Derived quantities: pi_ij = (beta_ij - lam)/beta_ij (multiplicative
along the chain), xi_ij(p) = f(p-1, beta_ij)/f(p, beta_ij), and the
R-matrix coefficients a_ij = alpha_ij * xi_ij, b_ij = q - xi_ij.

Everything is an immutable value object; instances can be shared freely.
"""

from fractions import Fraction

from .scalars import (
    RATIONAL, DegenerateParameterError, PoleError, PrimeField, QContext,
    f_poly, fmt_scalar, qnum, xi_of_f,
)

GENERIC = "generic"
BETA_INFINITY = "beta-infinity"
CONSTANT_MULTIPARAM = "constant-multiparam"
INTERMEDIATE = "intermediate"


class WeightPoint:
    """Integer weight differences p_ij, stored through the consecutive
    chain (p_12, ..., p_{n-1,n})."""

    __slots__ = ("n", "chain")

    def __init__(self, n, chain):
        chain = tuple(chain)
        assert len(chain) == n - 1, "chain length must be n-1"
        assert all(isinstance(c, int) for c in chain)
        self.n = n
        self.chain = chain

    @classmethod
    def from_pairs(cls, n, pairs):
        """Build from a {(i,j): value} mapping; additivity is checked."""
        chain = tuple(pairs[(i, i + 1)] for i in range(1, n))
        w = cls(n, chain)
        for (i, j), v in pairs.items():
            if w.p(i, j) != v:
                raise DegenerateParameterError(
                    "inconsistent p_%d%d: additivity violated" % (i, j))
        return w

    def p(self, i, j):
        if i == j:
            return 0
        if i < j:
            return sum(self.chain[i - 1:j - 1])
        return -self.p(j, i)

    def shift(self, m, sign=1):
        """The point p + sign * v(m)."""
        c = list(self.chain)
        if m >= 2:
            c[m - 2] -= sign
        if m <= self.n - 1:
            c[m - 1] += sign
        return WeightPoint(self.n, c)

    def shift_many(self, ms, sign=1):
        w = self
        for m in ms:
            w = w.shift(m, sign)
        return w

    def __eq__(self, other):
        return isinstance(other, WeightPoint) and self.chain == other.chain \
            and self.n == other.n

    def __hash__(self):
        return hash((self.n, self.chain))

    def __repr__(self):
        return "WeightPoint(%s)" % (", ".join(
            "p%d%d=%d" % (i, i + 1, c) for i, c in enumerate(self.chain, 1)))


class PairFamily:
    """A family of scalar functions x -> alpha_ij(x) on the index pairs,
    with alpha_ii = 1 and the pairing constraint

        alpha_ij(x) * alpha_ji(-x) = 1   for all integer x.

    Two kinds: ``constant`` (c_ij with c_ij c_ji = 1) and ``geometric``
    (c_ij * w^x with c_ij c_ji = 1 and a ratio w shared by (i,j) and
    (j,i); the constraint forces w_ij = w_ji, not w_ij w_ji = 1).

    The same structure serves for the alpha parameters and for diagonal
    twists psi.
    """

    __slots__ = ("n", "kind", "c", "w")

    def __init__(self, n, kind, c, w=None):
        assert kind in ("constant", "geometric")
        self.n = n
        self.kind = kind
        self.c = dict(c)
        self.w = dict(w) if w else {}
        self._validate()

    def _validate(self):
        one = None
        for i in range(1, self.n + 1):
            for j in range(1, self.n + 1):
                if i == j:
                    continue
                cij = self.c[(i, j)]
                if one is None:
                    one = cij / cij
                if cij * self.c[(j, i)] != one:
                    raise DegenerateParameterError(
                        "alpha constraint broken: c_%d%d * c_%d%d != 1"
                        % (i, j, j, i))
                if self.kind == "geometric":
                    if self.w[(i, j)] != self.w[(j, i)]:
                        raise DegenerateParameterError(
                            "geometric ratio must be shared within a pair")

    @classmethod
    def unit(cls, n, field=RATIONAL):
        c = {(i, j): field.one
             for i in range(1, n + 1) for j in range(1, n + 1) if i != j}
        return cls(n, "constant", c)

    @classmethod
    def standard(cls, n, ctx):
        """q above the diagonal, qbar below: the choice reproducing the
        Drinfeld-Jimbo matrix in the constant-multiparametric regime."""
        c = {}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i < j:
                    c[(i, j)] = ctx.q
                elif i > j:
                    c[(i, j)] = ctx.qbar
        return cls(n, "constant", c)

    @classmethod
    def constant(cls, n, upper, field=RATIONAL):
        """From values on the pairs i < j; the lower triangle is 1/c."""
        c = {}
        for (i, j), v in upper.items():
            assert i < j
            v = field.of(v)
            c[(i, j)] = v
            c[(j, i)] = field.one / v
        return cls(n, "constant", c)

    @classmethod
    def geometric(cls, n, upper_c, ratio_w, field=RATIONAL):
        c = {}
        w = {}
        for (i, j), v in upper_c.items():
            assert i < j
            v = field.of(v)
            c[(i, j)] = v
            c[(j, i)] = field.one / v
            r = field.of(ratio_w[(i, j)])
            w[(i, j)] = r
            w[(j, i)] = r
        return cls(n, "geometric", c, w)

    def __call__(self, i, j, arg):
        """alpha_ij evaluated at integer (or, for constant kind, any) arg."""
        if i == j:
            one = next(iter(self.c.values()), Fraction(1))
            return one / one if self.c else Fraction(1)
        cij = self.c[(i, j)]
        if self.kind == "constant":
            return cij
        if isinstance(arg, Fraction) and arg.denominator != 1:
            raise DegenerateParameterError(
                "geometric alpha needs an integer argument")
        return cij * self.w[(i, j)] ** int(arg)

    def twisted(self, psi):
        """The effect of the diagonal twist by psi:
        alpha_ij(x) -> alpha_ij(x) * psi_ji(-x)^2."""
        assert psi.n == self.n
        if self.kind == "constant" and psi.kind == "constant":
            c = {k: self.c[k] * psi.c[(k[1], k[0])] ** 2 for k in self.c}
            return PairFamily(self.n, "constant", c)
        # both promoted to geometric; missing ratios default to 1
        one = next(iter(self.c.values()))
        one = one / one
        c = {k: self.c[k] * psi.c[(k[1], k[0])] ** 2 for k in self.c}
        w = {}
        for (i, j) in self.c:
            wa = self.w.get((i, j), one)
            wp = psi.w.get((i, j), one)
            w[(i, j)] = wa * wp**-2
        return PairFamily(self.n, "geometric", c, w)

    def phi(self, i, j, arg):
        """The discrete antiderivative phi with
        phi_ij(x+1)/phi_ij(x) = alpha_ij(x): c^x * w^(x(x-1)/2)."""
        if i == j:
            return self(1, 1, 0)
        x = int(arg)
        val = self.c[(i, j)] ** x
        if self.kind == "geometric":
            val = val * self.w[(i, j)] ** (x * (x - 1) // 2)
        return val

    def to_json(self):
        d = {"kind": self.kind,
             "c": {"%d,%d" % k: fmt_scalar(v)
                   for k, v in self.c.items() if k[0] < k[1]}}
        if self.kind == "geometric":
            d["w"] = {"%d,%d" % k: fmt_scalar(v)
                      for k, v in self.w.items() if k[0] < k[1]}
        return d

    @classmethod
    def from_json(cls, n, d, field=RATIONAL):
        if "preset" in d:
            return d["preset"]  # resolved by the caller, needs ctx
        parse = lambda s: {tuple(int(t) for t in k.split(",")): field.of(v)
                           for k, v in s.items()}
        if d["kind"] == "constant":
            return cls.constant(n, parse(d["c"]), field)
        return cls.geometric(n, parse(d["c"]), parse(d["w"]), field)


def derive_beta(ctx, chain):
    """The full beta_ij table from the chain beta_i = beta_{i,i+1}."""
    n = len(chain) + 1
    lam = ctx.lam
    beta = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            top = ctx.field.one
            bot = ctx.field.one
            for k in range(i, j):
                top = top * chain[k - 1]
                bot = bot * (chain[k - 1] - lam)
            den = top - bot
            if not den:
                raise DegenerateParameterError("degenerate beta chain")
            beta[(i, j)] = lam * top / den
            beta[(j, i)] = lam - beta[(i, j)]
    return beta


class SLnParams:
    """One member of the SL(n)-type dynamical R-matrix family."""

    __slots__ = ("n", "ctx", "beta_chain", "alpha", "_beta", "_pi", "_regime")

    def __init__(self, ctx, beta_chain, alpha=None, _beta_override=None):
        n = ctx.n
        self.n = n
        self.ctx = ctx
        self.alpha = alpha if alpha is not None else PairFamily.unit(n, ctx.field)
        assert self.alpha.n == n
        if beta_chain is None:
            self.beta_chain = None
            self._beta = None
        else:
            self.beta_chain = tuple(ctx.field.of(b) for b in beta_chain)
            assert len(self.beta_chain) == n - 1
            if _beta_override is not None:
                self._beta = dict(_beta_override)  # negative-control hook
            else:
                self._beta = derive_beta(ctx, self.beta_chain)
        self._pi = None
        self._regime = None

    # -- derived parameter tables ------------------------------------

    @property
    def regime(self):
        if self._regime is None:
            if self.beta_chain is None:
                self._regime = BETA_INFINITY
            else:
                lam = self.ctx.lam
                zero = self.ctx.field.zero
                special = [b == zero or b == lam for b in self.beta_chain]
                if all(b == lam for b in self.beta_chain) or \
                        all(b == zero for b in self.beta_chain):
                    self._regime = CONSTANT_MULTIPARAM
                elif any(special):
                    self._regime = INTERMEDIATE
                else:
                    self._regime = GENERIC
        return self._regime

    def beta(self, i, j):
        if self.beta_chain is None:
            raise DegenerateParameterError("beta is infinite in this regime")
        if i == j:
            return self.ctx.field.zero
        return self._beta[(i, j)]

    def pi(self, i, j):
        """pi_ij = (beta_ij - lam)/beta_ij; 1 on the diagonal and in the
        beta -> oo regime."""
        if i == j or self.beta_chain is None:
            return self.ctx.field.one
        if self._pi is None:
            self._pi = {}
        if (i, j) not in self._pi:
            b = self.beta(i, j)
            if not b:
                raise DegenerateParameterError(
                    "pi undefined: beta_%d%d = 0" % (i, j))
            self._pi[(i, j)] = (b - self.ctx.lam) / b
        return self._pi[(i, j)]

    def f(self, i, j, pij):
        if self.beta_chain is None:
            raise DegenerateParameterError("f undefined at beta = oo")
        return f_poly(pij, self.beta(i, j), self.ctx)

    def xi(self, i, j, pij):
        """xi_ij(p_ij); xi_ii = q (matching a_ii = q)."""
        if i == j:
            return self.ctx.q
        if self.beta_chain is None:
            den = self._frac_qnum(pij)
            if not den:
                raise PoleError("dynamical pole: [p_%d%d] = 0" % (i, j))
            return self._frac_qnum(pij - 1) / den
        den = self.f(i, j, pij)
        if not den:
            raise PoleError(
                "dynamical pole: f(p_%d%d = %s, beta) = 0" % (i, j, pij))
        return self.f(i, j, pij - 1) / den

    def _frac_qnum(self, p):
        if isinstance(p, Fraction) and p.denominator != 1:
            qp = self.ctx.qpow(p)
            return (qp - 1 / qp) / self.ctx.lam
        return qnum(int(p), self.ctx)

    def a_entry(self, i, j, pij):
        if i == j:
            return self.ctx.q
        return self.alpha(i, j, pij) * self.xi(i, j, pij)

    def b_entry(self, i, j, pij):
        if i == j:
            return self.ctx.field.zero
        return self.ctx.q - self.xi(i, j, pij)

    def twisted(self, psi):
        """Parameters after the diagonal twist by psi (beta unchanged)."""
        return SLnParams(self.ctx, self.beta_chain, self.alpha.twisted(psi),
                         _beta_override=self._beta)

    def with_alpha(self, alpha):
        return SLnParams(self.ctx, self.beta_chain, alpha,
                         _beta_override=self._beta)

    # -- serialization -------------------------------------------------

    def to_json(self):
        d = {"n": self.n,
             "q": fmt_scalar(self.ctx.q),
             "beta": ("infinity" if self.beta_chain is None
                      else [fmt_scalar(b) for b in self.beta_chain]),
             "alpha": self.alpha.to_json(),
             "regime": self.regime}
        if self.ctx.root is not None:
            d["root"] = fmt_scalar(self.ctx.root)
        return d

    @classmethod
    def from_json(cls, d, field=RATIONAL):
        n = d["n"]
        ctx = QContext(field.of(str(d["q"])), n,
                       root=None if d.get("root") is None
                       else field.of(str(d["root"])),
                       field=field)
        beta = d.get("beta", "infinity")
        chain = None if beta == "infinity" else [field.of(str(b)) for b in beta]
        adata = d.get("alpha", {"preset": "unit"})
        if "preset" in adata:
            name = adata["preset"]
            if name == "unit":
                alpha = PairFamily.unit(n, field)
            elif name in ("standard", "dj"):
                alpha = PairFamily.standard(n, ctx)
            else:
                raise DegenerateParameterError("unknown alpha preset %r" % name)
        else:
            alpha = PairFamily.from_json(n, adata, field)
        params = cls(ctx, chain, alpha)
        if "regime" in d and d["regime"] != params.regime:
            raise DegenerateParameterError(
                "declared regime %r, derived %r" % (d["regime"], params.regime))
        return params

    def __repr__(self):
        return "SLnParams(n=%d, q=%s, beta=%s, regime=%s)" % (
            self.n, self.ctx.q,
            "oo" if self.beta_chain is None else list(self.beta_chain),
            self.regime)


def constant_multiparam(ctx, standard_alpha=True):
    """The degenerate regime beta_i = lam with the standard (or unit)
    alpha choice; p-independent, reproducing a constant R-matrix."""
    chain = [ctx.lam] * (ctx.n - 1)
    alpha = PairFamily.standard(ctx.n, ctx) if standard_alpha \
        else PairFamily.unit(ctx.n, ctx.field)
    return SLnParams(ctx, chain, alpha)


# -- deterministic sampling -------------------------------------------


def rand_fraction(rng, lo=-9, hi=9, maxden=4, exclude=()):
    while True:
        num = rng.randint(lo, hi)
        den = rng.randint(1, maxden)
        x = Fraction(num, den)
        if x != 0 and x not in exclude:
            return x


def sample_q(rng):
    return rand_fraction(rng, lo=-7, hi=7, maxden=3,
                         exclude=(Fraction(1), Fraction(-1)))


def sample_params(n, rng, ctx=None, regime=GENERIC, alpha="unit"):
    """Draw a generic parameter set; all invariants hold by construction.

    alpha: 'unit', 'standard', 'constant' (random), 'geometric' (random).
    """
    field = ctx.field if ctx is not None else RATIONAL
    if ctx is None:
        ctx = QContext(sample_q(rng), n, field=field)
    lam = ctx.lam
    if regime == BETA_INFINITY:
        chain = None
    elif regime == CONSTANT_MULTIPARAM:
        chain = [lam] * (n - 1)
    else:
        while True:
            chain = [field.of(rand_fraction(rng)) for _ in range(n - 1)]
            if any(b == lam or not b for b in chain):
                continue
            try:
                beta = derive_beta(ctx, chain)
            except DegenerateParameterError:
                continue
            if any(not v or v == lam for v in beta.values()):
                continue  # keep pi defined and nonzero everywhere
            break
    if alpha == "unit":
        fam = PairFamily.unit(n, field)
    elif alpha == "standard":
        fam = PairFamily.standard(n, ctx)
    elif alpha == "constant":
        fam = PairFamily.constant(
            n, {(i, j): field.of(rand_fraction(rng))
                for i in range(1, n + 1) for j in range(i + 1, n + 1)},
            field)
    elif alpha == "geometric":
        ij = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        fam = PairFamily.geometric(
            n, {k: field.of(rand_fraction(rng)) for k in ij},
            {k: field.of(rand_fraction(rng, lo=1, hi=5)) for k in ij},
            field)
    else:
        raise ValueError("unknown alpha sampler %r" % alpha)
    return SLnParams(ctx, chain, fam)


def sample_twist(n, rng, field=RATIONAL, geometric=False):
    ij = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    c = {k: field.of(rand_fraction(rng)) for k in ij}
    if not geometric:
        return PairFamily.constant(n, c, field)
    w = {k: field.of(rand_fraction(rng, lo=1, hi=4)) for k in ij}
    return PairFamily.geometric(n, c, w, field)


def pole_free(params, point, clearance):
    """True when no f-zero (or vanishing q-integer at beta = oo) occurs
    within `clearance` integer steps of any p_ij."""
    for i in range(1, params.n + 1):
        for j in range(i + 1, params.n + 1):
            pij = point.p(i, j)
            for t in range(-clearance, clearance + 1):
                try:
                    params.xi(i, j, pij + t)
                    params.xi(j, i, -pij + t)
                except PoleError:
                    return False
    return True


def sample_point(params, rng, clearance=4, lo=-5, hi=5):
    """A pole-free weight point; rejection-sampled, deterministic in rng."""
    n = params.n
    for _ in range(4000):
        if params.regime == BETA_INFINITY:
            # keep all p_ij > clearance so no [p+t] vanishes
            chain = [rng.randint(clearance + 1, clearance + 4)
                     for _ in range(n - 1)]
        else:
            chain = [rng.randint(lo, hi) for _ in range(n - 1)]
        w = WeightPoint(n, chain)
        if pole_free(params, w, clearance):
            return w
    raise DegenerateParameterError("could not find a pole-free point")
