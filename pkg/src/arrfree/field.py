"""Exact arithmetic in cyclotomic fields Q(zeta_n) and linear algebra over them.

Elements are polynomials in zeta_n with rational coefficients, reduced modulo
the n-th cyclotomic polynomial Phi_n.  All arithmetic is exact; there is no
floating point anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


class FieldMismatchError(ValueError):
    """Two operands live in different cyclotomic fields."""


class FieldDivisionError(ZeroDivisionError):
    """Division by the zero element of a field."""


class ScalarParseError(ValueError):
    """Malformed scalar text; carries the offending position."""

    def __init__(self, text: str, pos: int, why: str):
        super().__init__(f"cannot parse scalar {text!r} at position {pos}: {why}")
        self.text = text
        self.pos = pos
        self.why = why


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divexact(num, den):
    """Exact division of integer polynomials (ascending coefficients)."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for k in range(len(q) - 1, -1, -1):
        c = num[len(den) - 1 + k]
        if c % den[-1] != 0:
            raise ArithmeticError("non-exact polynomial division")
        c //= den[-1]
        q[k] = c
        for i, d in enumerate(den):
            num[i + k] -= c * d
    if any(num):
        raise ArithmeticError("non-exact polynomial division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple:
    """Integer coefficients of Phi_n, ascending, computed recursively."""
    if n < 1:
        raise ValueError("cyclotomic order must be positive")
    if n == 1:
        return (-1, 1)
    # x^n - 1 divided by the product of Phi_d over proper divisors d of n
    p = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            p = _poly_divexact(p, cyclotomic_polynomial(d))
    return tuple(p)


class FieldElement:
    """An element of Q(zeta_n): a coefficient vector of length phi(n)."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: "CyclotomicField", coeffs):
        self.field = field
        self.coeffs = tuple(coeffs)
        self._hash = None

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_one(self) -> bool:
        return self.coeffs == self.field.one.coeffs

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field is not self.field and other.field.order != self.field.order:
            raise FieldMismatchError(
                f"mixed fields Q(zeta_{self.field.order}) and Q(zeta_{other.field.order})"
            )

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field._mul(self.coeffs, other.coeffs))

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse via the extended Euclidean algorithm mod Phi_n."""
        if self.is_zero():
            raise FieldDivisionError("inverse of zero")
        return FieldElement(self.field, self.field._inv(self.coeffs))

    def __truediv__(self, other):
        self._check(other)
        return self * other.inverse()

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field.order == other.field.order and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.order, self.coeffs))
        return self._hash

    def __str__(self):
        return self.field.format(self)

    def __repr__(self):
        return f"FieldElement(Q(zeta_{self.field.order}), {self.field.format(self)!r})"


class CyclotomicField:
    """Q(zeta_n) with zeta_n a primitive n-th root of unity.

    Fixed per arrangement; see field_make.  minimal_poly is Phi_n (ascending
    integer coefficients), degree is phi(n).
    """

    def __init__(self, order: int):
        if order < 1:
            raise ValueError("field order must be a positive integer")
        self.order = order
        self.minimal_poly = cyclotomic_polynomial(order)
        self.degree = len(self.minimal_poly) - 1
        d = self.degree
        # z^(d+j) reduced mod Phi_n, as rational rows, for j = 0..d-2
        self._red = [tuple(Fraction(-c) for c in self.minimal_poly[:d])]
        for _ in range(d - 2):
            prev = self._red[-1]
            # z^(d+j+1) = z * z^(d+j): shift prev, fold the z^d overflow back in
            over = prev[d - 1]
            shifted = [Fraction(0)] + list(prev[: d - 1])
            if over:
                base = self._red[0]
                for i in range(d):
                    shifted[i] += over * base[i]
            self._red.append(tuple(shifted))
        self.zero = FieldElement(self, (Fraction(0),) * d)
        self.one = FieldElement(self, (Fraction(1),) + (Fraction(0),) * (d - 1))
        if d > 1:
            self.gen = FieldElement(self, (Fraction(0), Fraction(1)) + (Fraction(0),) * (d - 2))
        else:
            self.gen = self.one
        # zeta^k for arbitrary k, cached
        self._zeta_pows = {0: self.one.coeffs}

    def __repr__(self):
        return f"CyclotomicField({self.order})"

    def __eq__(self, other):
        return isinstance(other, CyclotomicField) and other.order == self.order

    def __hash__(self):
        return hash(("CyclotomicField", self.order))

    def element(self, coeffs) -> FieldElement:
        cs = [Fraction(c) for c in coeffs]
        if len(cs) != self.degree:
            raise ValueError(f"expected {self.degree} coefficients, got {len(cs)}")
        return FieldElement(self, cs)

    def rational(self, value) -> FieldElement:
        c = [Fraction(0)] * self.degree
        c[0] = Fraction(value)
        return FieldElement(self, c)

    def zeta_power(self, k: int) -> FieldElement:
        """zeta_n^k as a field element (k may be any integer)."""
        k %= self.order
        if k not in self._zeta_pows:
            prev = self.zeta_power(k - 1).coeffs
            self._zeta_pows[k] = self._mul(prev, self.gen.coeffs)
        return FieldElement(self, self._zeta_pows[k])

    def _mul(self, a, b):
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        conv = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        out = conv[:d]
        for j in range(d - 2, -1, -1):
            c = conv[d + j]
            if c:
                red = self._red[j]
                for i in range(d):
                    if red[i]:
                        out[i] += c * red[i]
        return tuple(out)

    def _inv(self, a):
        # extended Euclid in Q[z] on (a, Phi_n); Phi_n irreducible so gcd is a unit
        d = self.degree
        if d == 1:
            return (1 / a[0],)
        r0 = [Fraction(c) for c in self.minimal_poly]
        r1 = list(a)
        _poly_trim(r1)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while len(r1) > 1:
            q, rem = _qpoly_divmod(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _qpoly_sub(s0, _qpoly_mul(q, s1))
        c = r1[0]
        inv = [x / c for x in s1]
        inv += [Fraction(0)] * (d - len(inv))
        return tuple(inv[:d])

    # -- canonical scalar text ------------------------------------------------

    def format(self, a: FieldElement) -> str:
        """Canonical text: terms in strictly decreasing power of z, `0` if zero."""
        terms = []
        for k in range(self.degree - 1, -1, -1):
            c = a.coeffs[k]
            if not c:
                continue
            sign = "-" if c < 0 else ("+" if terms else "")
            mag = abs(c)
            if k == 0:
                body = str(mag)
            elif mag == 1:
                body = "z" if k == 1 else f"z^{k}"
            else:
                body = f"{mag}*z" if k == 1 else f"{mag}*z^{k}"
            terms.append(sign + body)
        return "".join(terms) if terms else "0"

    def parse(self, text: str) -> FieldElement:
        """Parse the scalar grammar: a sum of terms `[+-][rat][*]z[^k]`."""
        s = text.strip()
        if not s:
            raise ScalarParseError(text, 0, "empty scalar")
        coeffs = [Fraction(0)] * self.degree
        i = 0
        n = len(s)
        first = True
        while i < n:
            sign = 1
            if s[i] == "+":
                i += 1
            elif s[i] == "-":
                sign = -1
                i += 1
            elif not first:
                raise ScalarParseError(text, i, "expected '+' or '-' between terms")
            first = False
            if i >= n:
                raise ScalarParseError(text, i, "dangling sign")
            j = i
            while j < n and s[j].isdigit():
                j += 1
            rat = None
            if j > i:
                numtxt = s[i:j]
                i = j
                if i < n and s[i] == "/":
                    i += 1
                    j = i
                    while j < n and s[j].isdigit():
                        j += 1
                    if j == i:
                        raise ScalarParseError(text, i, "missing denominator")
                    if int(s[i:j]) == 0:
                        raise ScalarParseError(text, i, "zero denominator")
                    rat = Fraction(int(numtxt), int(s[i:j]))
                    i = j
                else:
                    rat = Fraction(int(numtxt))
            saw_star = False
            if i < n and s[i] == "*":
                if rat is None:
                    raise ScalarParseError(text, i, "'*' without coefficient")
                saw_star = True
                i += 1
            if i < n and s[i] == "z":
                i += 1
                k = 1
                if i < n and s[i] == "^":
                    i += 1
                    j = i
                    while j < n and s[j].isdigit():
                        j += 1
                    if j == i:
                        raise ScalarParseError(text, i, "missing exponent")
                    k = int(s[i:j])
                    i = j
                zk = self.zeta_power(k).coeffs
                c = rat if rat is not None else Fraction(1)
                for t in range(self.degree):
                    coeffs[t] += sign * c * zk[t]
            else:
                if saw_star:
                    raise ScalarParseError(text, i, "'*' not followed by z")
                if rat is None:
                    raise ScalarParseError(text, i, "expected a term")
                coeffs[0] += sign * rat
        return FieldElement(self, coeffs)


def _qpoly_divmod(a, b):
    a = list(a)
    db = len(b) - 1
    q = [Fraction(0)] * max(1, len(a) - db)
    while len(a) - 1 >= db and any(a):
        if not a[-1]:
            a.pop()
            continue
        k = len(a) - 1 - db
        c = a[-1] / b[-1]
        q[k] = c
        for i in range(db + 1):
            a[i + k] -= c * b[i]
        a.pop()
    _poly_trim(a)
    return q, (a if a else [Fraction(0)])


def _qpoly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out) or [Fraction(0)]


def _qpoly_sub(a, b):
    out = [Fraction(0)] * max(len(a), len(b))
    for i, ai in enumerate(a):
        out[i] += ai
    for i, bi in enumerate(b):
        out[i] -= bi
    return _poly_trim(out) or [Fraction(0)]


@lru_cache(maxsize=None)
def field_make(n: int) -> CyclotomicField:
    """The cyclotomic field Q(zeta_n); n = 1, 2 give Q itself."""
    return CyclotomicField(n)


# -- exact matrices ----------------------------------------------------------


class Matrix:
    """Immutable rectangular matrix of FieldElements over one field."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: CyclotomicField, entries):
        self.field = field
        self.entries = tuple(tuple(r) for r in entries)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        for r in self.entries:
            if len(r) != self.cols:
                raise ValueError("ragged matrix")

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def transpose(self) -> "Matrix":
        return Matrix(self.field, list(zip(*self.entries))) if self.rows else Matrix(self.field, [])

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.entries == other.entries

    def __repr__(self):
        body = "; ".join(" ".join(str(e) for e in row) for row in self.entries)
        return f"Matrix({self.rows}x{self.cols}: {body})"


def mat_rref(m: Matrix):
    """Reduced row-echelon form; returns (rref, rank, pivot_cols).

    Deterministic: leftmost pivot column, first nonzero row in index order.
    """
    work = [list(r) for r in m.entries]
    zero = m.field.zero
    nrows, ncols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(ncols):
        sel = None
        for k in range(r, nrows):
            if work[k][c]:
                sel = k
                break
        if sel is None:
            continue
        work[r], work[sel] = work[sel], work[r]
        inv = work[r][c].inverse()
        work[r] = [e * inv for e in work[r]]
        for k in range(nrows):
            if k != r and work[k][c]:
                f = work[k][c]
                work[k] = [a - f * b for a, b in zip(work[k], work[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return Matrix(m.field, work) if nrows else m, r, pivots


def mat_rank(m: Matrix) -> int:
    return mat_rref(m)[1]


def mat_kernel(m: Matrix) -> Matrix:
    """Rows form a basis of the right kernel {v : m v = 0}; deterministic."""
    field = m.field
    if m.rows == 0:
        # kernel of an empty map is everything
        basis = []
        for j in range(m.cols):
            row = [field.zero] * m.cols
            row[j] = field.one
            basis.append(row)
        return Matrix(field, basis)
    rref, rank, pivots = mat_rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for j in free:
        row = [field.zero] * m.cols
        row[j] = field.one
        for i, p in enumerate(pivots):
            row[p] = -rref[i, j]
        basis.append(row)
    return Matrix(field, basis)
