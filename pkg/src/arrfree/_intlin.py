"""Fraction-free exact linear algebra over Z[zeta_n] on integer-cleared covectors.

Internal engine behind lattice enumeration and candidate sweeps.  A scalar is a
tuple of `degree` ints (a polynomial in zeta reduced mod Phi_n); a vector is a
tuple of scalars.  Row operations use cross-multiplication only, so everything
stays integral; Z[zeta] is a domain, hence a fraction-free reduction of a vector
ends in zero exactly when the vector lies in the row span over the field.

Vectors are canonicalized per projective direction (content 1, unit-adjusted via
a scaled field inverse, sign rule on the first nonzero integer), which makes
span bases and candidate covectors directly hashable.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .field import CyclotomicField, FieldElement


class IntRing:
    """Integer model of Z[zeta_n] tied to a CyclotomicField."""

    def __init__(self, field: CyclotomicField):
        self.field = field
        d = field.degree
        self.degree = d
        self.zero = (0,) * d
        self.one = (1,) + (0,) * (d - 1)
        # integer reduction rows: z^(d+j) = sum red[j][i] z^i  (Phi_n is monic)
        red = [tuple(-c for c in field.minimal_poly[:d])]
        for _ in range(d - 2):
            prev = red[-1]
            over = prev[d - 1]
            shifted = [0] + list(prev[: d - 1])
            if over:
                base = red[0]
                for i in range(d):
                    shifted[i] += over * base[i]
            red.append(tuple(shifted))
        self._red = red
        self.mul = self._make_mul()
        self._inv_cache = {}

    def _make_mul(self):
        d = self.degree
        if d == 1:
            def mul1(a, b):
                return (a[0] * b[0],)
            return mul1
        if d == 2:
            r0, r1 = self._red[0]
            if r1 == 0:
                def mul2a(a, b, _r0=r0):
                    a0, a1 = a
                    b0, b1 = b
                    return (a0 * b0 + _r0 * a1 * b1, a0 * b1 + a1 * b0)
                return mul2a
            def mul2(a, b, _r0=r0, _r1=r1):
                a0, a1 = a
                b0, b1 = b
                t = a1 * b1
                return (a0 * b0 + _r0 * t, a0 * b1 + a1 * b0 + _r1 * t)
            return mul2
        red = self._red
        def muln(a, b, _d=d, _red=red):
            conv = [0] * (2 * _d - 1)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        if bj:
                            conv[i + j] += ai * bj
            out = conv[:_d]
            for j in range(_d - 2, -1, -1):
                c = conv[_d + j]
                if c:
                    row = _red[j]
                    for i in range(_d):
                        if row[i]:
                            out[i] += c * row[i]
            return tuple(out)
        return muln

    # -- scalar helpers -------------------------------------------------------

    def scaled_inverse(self, e: tuple):
        """(q, m) with e*q = m, q integral, m a positive integer."""
        if e in self._inv_cache:
            return self._inv_cache[e]
        inv = self.field._inv(tuple(Fraction(c) for c in e))
        m = 1
        for c in inv:
            m = m * c.denominator // gcd(m, c.denominator)
        q = tuple(int(c * m) for c in inv)
        if m < 0:
            q, m = tuple(-c for c in q), -m
        self._inv_cache[e] = (q, m)
        return q, m

    # -- vector helpers -------------------------------------------------------

    def combine(self, p, u, q, v):
        """p*u - q*v elementwise (p, q scalars; u, v vectors)."""
        mul = self.mul
        return tuple(
            tuple(x - y for x, y in zip(mul(p, a), mul(q, b))) for a, b in zip(u, v)
        )

    @staticmethod
    def content_reduce(vec):
        g = 0
        for a in vec:
            for c in a:
                if c:
                    g = gcd(g, c)
                    if g == 1:
                        return vec
        if g <= 1:
            return vec
        return tuple(tuple(c // g for c in a) for a in vec)

    @staticmethod
    def sign_normalize(vec):
        for a in vec:
            for c in a:
                if c > 0:
                    return vec
                if c < 0:
                    return tuple(tuple(-x for x in a2) for a2 in vec)
        return vec

    def canon_dir(self, vec):
        """Canonical primitive integer representative of the projective direction."""
        lead = None
        for a in vec:
            if any(a):
                lead = a
                break
        if lead is None:
            return vec
        if not any(lead[1:]):
            # rational leading entry: content + sign suffice
            return self.sign_normalize(self.content_reduce(vec))
        q, _ = self.scaled_inverse(lead)
        mul = self.mul
        w = tuple(mul(q, a) for a in vec)
        return self.sign_normalize(self.content_reduce(w))

    def to_int_vec(self, covector):
        """Canonical integer vector for a tuple of FieldElements."""
        m = 1
        for e in covector:
            for c in e.coeffs:
                m = m * c.denominator // gcd(m, c.denominator)
        vec = tuple(tuple(int(c * m) for c in e.coeffs) for e in covector)
        return self.canon_dir(vec)

    def to_field_covector(self, vec):
        """FieldElements, normalized so the first nonzero coordinate is 1."""
        f = self.field
        elems = [f.element([Fraction(c) for c in a]) for a in vec]
        lead = next((e for e in elems if e), None)
        if lead is None:
            return tuple(elems)
        inv = lead.inverse()
        return tuple(e * inv for e in elems)

    # -- row reduction --------------------------------------------------------

    def row_reduce(self, rows):
        """Fraction-free full RREF.  Returns (rows, pivot_cols); rows are
        content-reduced and nonzero, one per pivot, sorted by pivot column."""
        work = [list(r) for r in rows]
        nrows = len(work)
        if nrows == 0:
            return (), ()
        ncols = len(work[0])
        mul = self.mul
        pivots = []
        r = 0
        for c in range(ncols):
            sel = None
            for k in range(r, nrows):
                if any(work[k][c]):
                    sel = k
                    break
            if sel is None:
                continue
            work[r], work[sel] = work[sel], work[r]
            piv = work[r][c]
            prow = work[r]
            for k in range(nrows):
                if k != r:
                    qk = work[k][c]
                    if any(qk):
                        wk = work[k]
                        work[k] = [
                            tuple(x - y for x, y in zip(mul(piv, a), mul(qk, b)))
                            for a, b in zip(wk, prow)
                        ]
                        work[k] = list(self.content_reduce(tuple(work[k])))
            pivots.append(c)
            r += 1
            if r == nrows:
                break
        out = tuple(self.content_reduce(tuple(work[i])) for i in range(r))
        return out, tuple(pivots)

    def reduce_vec(self, vec, rows, pivots):
        """Fraction-free reduction of vec against an RREF basis; zero iff member."""
        mul = self.mul
        for row, p in zip(rows, pivots):
            c = vec[p]
            if any(c):
                piv = row[p]
                vec = tuple(
                    tuple(x - y for x, y in zip(mul(piv, a), mul(c, b)))
                    for a, b in zip(vec, row)
                )
        return vec

    def in_span(self, vec, rows, pivots) -> bool:
        red = self.reduce_vec(vec, rows, pivots)
        return not any(any(a) for a in red)

    def extend_basis(self, rows, pivots, vec):
        """Add vec to an RREF basis.  Returns None if dependent, else the new
        (rows, pivots) in full RREF with rows content-reduced."""
        red = self.reduce_vec(vec, rows, pivots)
        lead = None
        for i, a in enumerate(red):
            if any(a):
                lead = i
                break
        if lead is None:
            return None
        red = self.content_reduce(red)
        mul = self.mul
        new_rows = []
        piv = red[lead]
        for row in rows:
            c = row[lead]
            if any(c):
                row = tuple(
                    tuple(x - y for x, y in zip(mul(piv, a), mul(c, b)))
                    for a, b in zip(row, red)
                )
                row = self.content_reduce(row)
            new_rows.append(row)
        new_rows.append(red)
        order = sorted(range(len(new_rows)), key=lambda i: (list(pivots) + [lead])[i])
        all_piv = list(pivots) + [lead]
        rows_sorted = tuple(new_rows[i] for i in order)
        piv_sorted = tuple(all_piv[i] for i in order)
        return rows_sorted, piv_sorted

    def span_key(self, rows):
        """Canonical hashable key of the row span (rows must be full RREF)."""
        return tuple(self.canon_dir(r) for r in rows)

    def left_kernel(self, rows):
        """Basis of {c : sum c_i rows_i = 0}, as integer coefficient vectors."""
        m = len(rows)
        if m == 0:
            return []
        aug = [list(r) + [self.one if i == j else self.zero for j in range(m)]
               for i, r in enumerate(rows)]
        ncols = len(rows[0])
        mul = self.mul
        r = 0
        for c in range(ncols):
            sel = None
            for k in range(r, m):
                if any(aug[k][c]):
                    sel = k
                    break
            if sel is None:
                continue
            aug[r], aug[sel] = aug[sel], aug[r]
            piv = aug[r][c]
            prow = aug[r]
            for k in range(m):
                if k != r and any(aug[k][c]):
                    qk = aug[k][c]
                    aug[k] = [
                        tuple(x - y for x, y in zip(mul(piv, a), mul(qk, b)))
                        for a, b in zip(aug[k], prow)
                    ]
                    aug[k] = list(self.content_reduce(tuple(aug[k])))
            r += 1
            if r == m:
                break
        out = []
        for k in range(r, m):
            out.append(tuple(aug[k][ncols:]))
        return out


_rings = {}


def ring_for(field: CyclotomicField) -> IntRing:
    r = _rings.get(field.order)
    if r is None:
        r = IntRing(field)
        _rings[field.order] = r
    return r
