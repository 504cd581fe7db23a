"""Exact sparse linear algebra on tensor powers of an n-dimensional space.

A :class:`TensorOp` is a map V^(x ck) -> V^(x rk) with exact entries,
stored sparsely as rows of {column: value}.  Multi-indices (i_1..i_k),
with every i_s in 1..n, are flattened lexicographically with site 1 most
significant:

    flat = (i_1 - 1) * n^(k-1) + ... + (i_k - 1).

This convention is normative for every serialized matrix.  The sparse
map never stores explicit zeros.  Operators are immutable after
construction, so products of independent pairs can run in parallel.

Ranks are computed over the exact field: fraction-free (Bareiss-style,
gcd-reduced) elimination after clearing denominators on the rational
backend, plain elimination on the prime field.  Pivots are taken at the
first nonzero in column order; no numerical tie-breaking exists because
arithmetic is exact.
"""

from fractions import Fraction
from math import gcd

from .scalars import ModInt


def flat_index(multi, n):
    """1-based multi-index tuple -> flat integer, site 1 most significant."""
    r = 0
    for i in multi:
        assert 1 <= i <= n
        r = r * n + (i - 1)
    return r


def multi_index(flat, n, k):
    out = []
    for _ in range(k):
        out.append(flat % n + 1)
        flat //= n
    return tuple(reversed(out))


class TensorOp:
    """Sparse exact matrix between tensor powers of V = C^n."""

    __slots__ = ("n", "rk", "ck", "rows")

    def __init__(self, n, rk, ck, rows=None):
        self.n = n
        self.rk = rk
        self.ck = ck
        self.rows = {}
        if rows:
            for r, row in rows.items():
                clean = {c: v for c, v in row.items() if v}
                if clean:
                    self.rows[r] = clean

    # -- constructors --------------------------------------------------

    @classmethod
    def from_entries(cls, n, rk, ck, entries):
        """entries: iterable of (row multi, col multi, value), 1-based."""
        rows = {}
        for rm, cm, v in entries:
            r = flat_index(rm, n)
            c = flat_index(cm, n)
            rows.setdefault(r, {})
            rows[r][c] = rows[r].get(c, 0) + v
        return cls(n, rk, ck, rows)

    @classmethod
    def identity(cls, n, k, one=Fraction(1)):
        return cls(n, k, k, {r: {r: one} for r in range(n**k)})

    @classmethod
    def zero(cls, n, rk, ck):
        return cls(n, rk, ck)

    @classmethod
    def site_permutation(cls, n, k, sigma, one=Fraction(1)):
        """The operator sending the column index J to the row index I with
        I_s = J_sigma(s); sigma is a 1-based tuple.  sigma = (2, 1) is the
        flip P with P(x (x) y) = y (x) x."""
        assert sorted(sigma) == list(range(1, k + 1))
        rows = {}
        for c in range(n**k):
            J = multi_index(c, n, k)
            I = tuple(J[sigma[s] - 1] for s in range(k))
            rows.setdefault(flat_index(I, n), {})[c] = one
        return cls(n, k, k, rows)

    # -- basic structure -----------------------------------------------

    @property
    def is_square(self):
        return self.rk == self.ck

    def nnz(self):
        return sum(len(r) for r in self.rows.values())

    def is_zero(self):
        return not self.rows

    def entry(self, rmulti, cmulti):
        row = self.rows.get(flat_index(rmulti, self.n), {})
        return row.get(flat_index(cmulti, self.n), 0)

    def entries(self):
        """Iterate (row multi, col multi, value), sorted, 1-based."""
        for r in sorted(self.rows):
            row = self.rows[r]
            for c in sorted(row):
                yield (multi_index(r, self.n, self.rk),
                       multi_index(c, self.n, self.ck), row[c])

    def __eq__(self, other):
        if not isinstance(other, TensorOp):
            return NotImplemented
        return (self.n, self.rk, self.ck) == (other.n, other.rk, other.ck) \
            and self.rows == other.rows

    def __repr__(self):
        return "TensorOp(n=%d, %d->%d sites, nnz=%d)" % (
            self.n, self.ck, self.rk, self.nnz())

    def first_nonzero(self):
        """A witness entry (row multi, col multi, value), or None."""
        for r in sorted(self.rows):
            for c in sorted(self.rows[r]):
                return (multi_index(r, self.n, self.rk),
                        multi_index(c, self.n, self.ck), self.rows[r][c])
        return None

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        assert (self.n, self.rk, self.ck) == (other.n, other.rk, other.ck)
        rows = {r: dict(row) for r, row in self.rows.items()}
        for r, row in other.rows.items():
            dst = rows.setdefault(r, {})
            for c, v in row.items():
                dst[c] = dst.get(c, 0) + v
        return TensorOp(self.n, self.rk, self.ck, rows)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, s):
        if isinstance(s, TensorOp):
            return NotImplemented
        if not s:
            return TensorOp.zero(self.n, self.rk, self.ck)
        rows = {r: {c: s * v for c, v in row.items()}
                for r, row in self.rows.items()}
        return TensorOp(self.n, self.rk, self.ck, rows)

    def __mul__(self, other):
        if not isinstance(other, TensorOp):
            return other.__rmul__(self) if hasattr(other, "__rmul__") else NotImplemented
        assert self.n == other.n and self.ck == other.rk, "shape mismatch"
        rows = {}
        for r, row in self.rows.items():
            acc = {}
            for k, a in row.items():
                brow = other.rows.get(k)
                if not brow:
                    continue
                for c, b in brow.items():
                    acc[c] = acc.get(c, 0) + a * b
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                rows[r] = acc
        return TensorOp(self.n, self.rk, other.ck, rows)

    def kron(self, other):
        assert self.n == other.n
        n = self.n
        rk = self.rk + other.rk
        ck = self.ck + other.ck
        rmul = n**other.rk
        cmul = n**other.ck
        rows = {}
        for r1, row1 in self.rows.items():
            for r2, row2 in other.rows.items():
                dst = {}
                for c1, v1 in row1.items():
                    for c2, v2 in row2.items():
                        dst[c1 * cmul + c2] = v1 * v2
                rows[r1 * rmul + r2] = dst
        return TensorOp(n, rk, ck, rows)

    def transpose(self):
        rows = {}
        for r, row in self.rows.items():
            for c, v in row.items():
                rows.setdefault(c, {})[r] = v
        return TensorOp(self.n, self.ck, self.rk, rows)

    # -- structured operations -------------------------------------------

    def embed(self, pos, k):
        """Place a square m-site operator at sites pos..pos+m-1 of k sites,
        acting as the identity elsewhere."""
        assert self.is_square, "embed needs a square operator"
        m = self.rk
        if not (1 <= pos <= k - m + 1):
            raise ValueError("embed position out of range")
        left = TensorOp.identity(self.n, pos - 1)
        right = TensorOp.identity(self.n, k - m - pos + 1)
        return left.kron(self).kron(right)

    def dress(self, diag):
        """Conjugate by an invertible diagonal: diag * self * diag^(-1)."""
        assert self.is_square and diag.k == self.rk and diag.n == self.n
        inv = diag.inverse()
        rows = {}
        for r, row in self.rows.items():
            dr = diag.vals[r]
            rows[r] = {c: dr * v * inv.vals[c] for c, v in row.items()}
        return TensorOp(self.n, self.rk, self.ck, rows)

    def exact_rank(self):
        return rank_of_rows(self.rows.values())

    # -- serialization -----------------------------------------------------

    def dump(self):
        from .scalars import fmt_scalar
        return {"n": self.n, "k": self.rk if self.is_square else [self.rk, self.ck],
                "entries": [[list(rm), list(cm), fmt_scalar(v)]
                            for rm, cm, v in self.entries()]}

    @classmethod
    def load(cls, doc, field=None):
        from .scalars import RATIONAL
        field = field or RATIONAL
        n = doc["n"]
        k = doc["k"]
        rk, ck = (k, k) if isinstance(k, int) else k
        return cls.from_entries(
            n, rk, ck,
            [(tuple(rm), tuple(cm), field.of(str(v)))
             for rm, cm, v in doc["entries"]])


class DiagOp:
    """A diagonal operator on V^(x k), stored as the dense value list."""

    __slots__ = ("n", "k", "vals")

    def __init__(self, n, k, vals):
        vals = list(vals)
        assert len(vals) == n**k
        self.n = n
        self.k = k
        self.vals = vals

    @classmethod
    def from_function(cls, n, k, fn):
        """fn maps a 1-based multi-index tuple to a scalar."""
        return cls(n, k, [fn(multi_index(f, n, k)) for f in range(n**k)])

    @classmethod
    def site_values(cls, n, k, site, values):
        """diag{values} acting at one site: entry = values[i_site - 1]."""
        return cls.from_function(n, k, lambda m: values[m[site - 1] - 1])

    def __mul__(self, other):
        if isinstance(other, DiagOp):
            assert (self.n, self.k) == (other.n, other.k)
            return DiagOp(self.n, self.k,
                          [a * b for a, b in zip(self.vals, other.vals)])
        if isinstance(other, TensorOp):
            assert other.rk == self.k and other.n == self.n
            rows = {r: {c: self.vals[r] * v for c, v in row.items()}
                    for r, row in other.rows.items()}
            return TensorOp(other.n, other.rk, other.ck, rows)
        return NotImplemented

    def inverse(self):
        if any(not v for v in self.vals):
            raise ZeroDivisionError("singular diagonal")
        one = None
        for v in self.vals:
            one = v / v
            break
        return DiagOp(self.n, self.k, [one / v for v in self.vals])

    def as_tensorop(self):
        return TensorOp(self.n, self.k, self.k,
                        {i: {i: v} for i, v in enumerate(self.vals) if v})

    def __eq__(self, other):
        return isinstance(other, DiagOp) and self.vals == other.vals \
            and (self.n, self.k) == (other.n, other.k)

    def __repr__(self):
        return "DiagOp(n=%d, k=%d)" % (self.n, self.k)


# -- exact rank ---------------------------------------------------------


def rank_of_rows(rows):
    """Rank of a sparse row collection over the exact field.

    Rational entries: rows are scaled to integers, then eliminated
    fraction-free with cross-multiplication and gcd reduction.  Prime
    field entries: plain elimination (the result is probabilistic only
    in the sense that the whole modular run is).
    """
    work = []
    modular = False
    for row in rows:
        row = {c: v for c, v in row.items() if v}
        if not row:
            continue
        sample = next(iter(row.values()))
        if isinstance(sample, ModInt):
            modular = True
            work.append(dict(row))
        else:
            mult = 1
            for v in row.values():
                f = Fraction(v)
                mult = mult * (f.denominator // gcd(mult, f.denominator))
            irow = {c: int(Fraction(v) * mult) for c, v in row.items()}
            g = 0
            for v in irow.values():
                g = gcd(g, v)
            work.append({c: v // g for c, v in irow.items()})
    rank = 0
    while work:
        pc = min(min(row) for row in work)
        pivot_i = next(i for i, row in enumerate(work) if pc in row)
        prow = work.pop(pivot_i)
        pv = prow[pc]
        rank += 1
        nxt = []
        for row in work:
            rv = row.get(pc)
            if rv:
                row = _combine(pv, row, -rv, prow, modular)
                row.pop(pc, None)
            if row:
                nxt.append(row)
        work = nxt
    return rank


def _combine(a, row1, b, row2, modular):
    out = {}
    for c in set(row1) | set(row2):
        v = a * row1.get(c, 0) + b * row2.get(c, 0)
        if v:
            out[c] = v
    if not modular and out:
        g = 0
        for v in out.values():
            g = gcd(g, v)
        if g > 1:
            out = {c: v // g for c, v in out.items()}
    return out
