"""Intersection lattices, Mobius function, characteristic polynomials.

Flats are keyed by their member bitmask (bit i = hyperplane i).  The lattice is
built rank by rank: each frontier flat is extended by every hyperplane outside
it, new spans are deduplicated by their canonical row-reduced basis, and the
member set of each new span is computed once.  A configurable flat-count budget
guards the construction.
"""

from __future__ import annotations

from collections import Counter

from .core import Arrangement, arr_key, arr_rank


class BudgetExceededError(RuntimeError):
    """A lattice or search budget was exhausted; carries partial counts."""

    def __init__(self, what: str, limit: int):
        super().__init__(f"budget exceeded: {what} (limit {limit})")
        self.what = what
        self.limit = limit


DEFAULT_FLAT_BUDGET = 2_000_000


class Flat:
    """A lattice element: the hyperplane set A_X plus a covector-span basis."""

    __slots__ = ("mask", "members", "rank", "rows", "pivots")

    def __init__(self, mask, members, rank, rows, pivots):
        self.mask = mask
        self.members = members
        self.rank = rank
        self.rows = rows
        self.pivots = pivots

    def dim_in(self, ambient_dim: int) -> int:
        return ambient_dim - self.rank

    def __repr__(self):
        return f"Flat(rank {self.rank}, members {list(self.members)})"


class IntersectionLattice:
    def __init__(self, arrangement: Arrangement, max_rank: int, by_rank, by_mask):
        self.arrangement = arrangement
        self.max_rank = max_rank
        self.by_rank = by_rank  # list of lists of Flats, index = rank
        self.by_mask = by_mask
        self._mobius = None
        self._pair_flat = None

    @property
    def full(self) -> bool:
        return self.max_rank >= arr_rank(self.arrangement)

    def flats(self):
        for layer in self.by_rank:
            yield from layer

    def flat_count(self) -> int:
        return sum(len(layer) for layer in self.by_rank)

    def rank2(self):
        return self.by_rank[2] if len(self.by_rank) > 2 else []

    def pair_flat(self, i: int, j: int) -> Flat:
        """The rank-2 flat through hyperplanes i and j."""
        if self._pair_flat is None:
            table = {}
            for fl in self.rank2():
                mem = fl.members
                for a in range(len(mem)):
                    for b in range(a + 1, len(mem)):
                        table[(mem[a], mem[b])] = fl
            self._pair_flat = table
        return self._pair_flat[(i, j) if i < j else (j, i)]

    def mobius(self):
        if self._mobius is None:
            self._mobius = _compute_mobius(self)
        return self._mobius

    def to_json(self) -> dict:
        mob = self.mobius() if self.full else None
        out = {
            "schema": 1,
            "dim": self.arrangement.dim,
            "hyperplanes": [h.text() for h in self.arrangement],
            "max_rank": self.max_rank,
            "flats": {
                str(r): [list(f.members) for f in layer]
                for r, layer in enumerate(self.by_rank)
            },
        }
        if mob is not None:
            out["mobius"] = {
                str(r): [mob[f.mask] for f in layer]
                for r, layer in enumerate(self.by_rank)
            }
            out["charpoly"] = list(charpoly_from_lattice(self).coeffs)
        return out


_lattice_cache: dict = {}


def lattice_build(a: Arrangement, max_rank: int | None = None,
                  budget: int = DEFAULT_FLAT_BUDGET) -> IntersectionLattice:
    """All flats of rank <= max_rank (default: the full rank of A)."""
    total_rank = arr_rank(a)
    if max_rank is None or max_rank > total_rank:
        max_rank = total_rank
    key = (arr_key(a), max_rank)
    hit = _lattice_cache.get(key)
    if hit is not None:
        return hit
    # a deeper cached lattice answers shallower queries
    deep = _lattice_cache.get((arr_key(a), total_rank))
    if deep is not None:
        lat = IntersectionLattice(a, max_rank, deep.by_rank[: max_rank + 1],
                                  {m: f for m, f in deep.by_mask.items() if f.rank <= max_rank})
        _lattice_cache[key] = lat
        return lat

    ring = a.ring()
    vecs = a.int_vecs()
    n = len(vecs)
    count = 1
    top = Flat(0, (), 0, (), ())
    by_rank = [[top]]
    by_mask = {0: top}

    if max_rank >= 1 and n:
        layer1 = []
        for i in range(n):
            rows, piv = ring.row_reduce([vecs[i]])
            fl = Flat(1 << i, (i,), 1, rows, piv)
            layer1.append(fl)
            by_mask[fl.mask] = fl
        by_rank.append(layer1)
        count += n

    r = 1
    while r < max_rank and by_rank[r]:
        if r + 1 == total_rank:
            # every extension of a corank-1 flat closes to the center
            mask = (1 << n) - 1
            rows, piv = ring.row_reduce(list(vecs))
            fl = Flat(mask, tuple(range(n)), total_rank, rows, piv)
            by_rank.append([fl])
            by_mask[fl.mask] = fl
            count += 1
            break
        new_spans = {}
        for fl in by_rank[r]:
            for j in range(n):
                if (fl.mask >> j) & 1:
                    continue
                ext = ring.extend_basis(fl.rows, fl.pivots, vecs[j])
                if ext is None:
                    continue
                rows, piv = ext
                skey = ring.span_key(rows)
                if skey not in new_spans:
                    new_spans[skey] = (rows, piv, fl.mask | (1 << j))
        layer = []
        seen_masks = set()
        for skey in sorted(new_spans):
            rows, piv, seed_mask = new_spans[skey]
            mask = seed_mask
            members = []
            for k in range(n):
                if (seed_mask >> k) & 1:
                    members.append(k)
                elif ring.in_span(vecs[k], rows, piv):
                    members.append(k)
                    mask |= 1 << k
            if mask in seen_masks:
                continue
            seen_masks.add(mask)
            fl = Flat(mask, tuple(members), r + 1, rows, piv)
            layer.append(fl)
            by_mask[mask] = fl
            count += 1
            if count > budget:
                raise BudgetExceededError("lattice flat count", budget)
        layer.sort(key=lambda f: f.mask)
        by_rank.append(layer)
        r += 1

    lat = IntersectionLattice(a, max_rank, by_rank, by_mask)
    _lattice_cache[key] = lat
    return lat


def _compute_mobius(lat: IntersectionLattice) -> dict:
    """mu by descending-rank dynamic programming over member-mask containment."""
    mob = {0: 1}
    lower = [(0, 1)]  # (mask, mu) for all strictly higher (subspace) flats seen so far
    for r in range(1, len(lat.by_rank)):
        layer = lat.by_rank[r]
        new = []
        for fl in layer:
            m = fl.mask
            s = 0
            for mask_y, mu_y in lower:
                if mask_y & m == mask_y:
                    s += mu_y
            mu = -s
            mob[fl.mask] = mu
            new.append((m, mu))
        lower.extend(new)
    return mob


def mobius(lat: IntersectionLattice) -> dict:
    return lat.mobius()


class CharPoly:
    """chi(A; t): monic, integer coefficients, degree = ambient dimension."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other):
        return isinstance(other, CharPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, t: int) -> int:
        v = 0
        for c in reversed(self.coeffs):
            v = v * t + c
        return v

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        out = [0] * n
        for i, c in enumerate(self.coeffs):
            out[i] += c
        for i, c in enumerate(other.coeffs):
            out[i] += c
        return CharPoly(out)

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        out = [0] * n
        for i, c in enumerate(self.coeffs):
            out[i] += c
        for i, c in enumerate(other.coeffs):
            out[i] -= c
        return CharPoly(out)

    def __mul__(self, other):
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, c in enumerate(self.coeffs):
            if c:
                for j, d in enumerate(other.coeffs):
                    out[i + j] += c * d
        return CharPoly(out)

    def shift_degree(self, k: int) -> "CharPoly":
        """Multiply by t^k (ambient-dimension bookkeeping)."""
        return CharPoly((0,) * k + self.coeffs)

    def divides(self, other: "CharPoly") -> bool:
        """Exact divisibility in Q[t] (both polynomials integral here)."""
        q, rem = _poly_divmod_int(other.coeffs, self.coeffs)
        return rem is not None and not any(rem)

    def try_div(self, other: "CharPoly"):
        q, rem = _poly_divmod_int(self.coeffs, other.coeffs)
        if rem is None or any(rem) or any(not isinstance(c, int) for c in q):
            return None
        return CharPoly(q)

    def linear_roots(self, bound: int):
        """Multiset of integer roots in [0, bound] by trial division; None if
        the polynomial does not split completely over that range."""
        roots = []
        cur = list(self.coeffs)
        k = 0
        while k <= bound and len(cur) > 1:
            # synthetic division by (t - k)
            out = [0] * (len(cur) - 1)
            acc = cur[-1]
            for i in range(len(cur) - 2, -1, -1):
                out[i] = acc
                acc = cur[i] + k * acc
            if acc == 0:
                roots.append(k)
                cur = out
            else:
                k += 1
        if len(cur) == 1:
            return tuple(sorted(roots))
        return None

    @classmethod
    def from_roots(cls, roots):
        p = cls((1,))
        for r in roots:
            p = p * cls((-r, 1))
        return p

    def text(self) -> str:
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                tpow = "t" if k == 1 else f"t^{k}"
                body = tpow if mag == 1 else f"{mag}*{tpow}"
            parts.append(sign + body)
        return "".join(parts) if parts else "0"

    def factored_text(self) -> str:
        roots = self.linear_roots(max(0, sum(abs(c) for c in self.coeffs)))
        if roots is None:
            return self.text()
        groups = Counter(roots)
        parts = []
        for r in sorted(groups):
            base = "t" if r == 0 else f"(t-{r})"
            e = groups[r]
            parts.append(base if e == 1 else f"{base}^{e}")
        return "".join(parts)

    def __repr__(self):
        return f"CharPoly({self.text()})"


def _poly_divmod_int(num, den):
    from fractions import Fraction

    den = list(den)
    while len(den) > 1 and den[-1] == 0:
        den.pop()
    if not any(den):
        return None, None
    work = [Fraction(c) for c in num]
    lead = Fraction(den[-1])
    q = [Fraction(0)] * max(1, len(work) - len(den) + 1)
    for k in range(len(work) - len(den), -1, -1):
        c = work[len(den) - 1 + k] / lead
        q[k] = c
        if c:
            for i, d in enumerate(den):
                work[i + k] -= c * d
    rem = work[: len(den) - 1] or [Fraction(0)]
    qq = [int(c) if c.denominator == 1 else c for c in q]
    return qq, rem


def charpoly_from_lattice(lat: IntersectionLattice) -> CharPoly:
    if not lat.full:
        raise ValueError("characteristic polynomial needs the full lattice")
    mob = lat.mobius()
    ell = lat.arrangement.dim
    coeffs = [0] * (ell + 1)
    for fl in lat.flats():
        coeffs[ell - fl.rank] += mob[fl.mask]
    return CharPoly(coeffs)


def charpoly(a: Arrangement, budget: int = DEFAULT_FLAT_BUDGET) -> CharPoly:
    return charpoly_from_lattice(lattice_build(a, budget=budget))


def rank2_profile(a_or_lat) -> Counter:
    """Multiset {{|A_X| : X in L_2}} as a Counter size -> count."""
    lat = a_or_lat
    if isinstance(a_or_lat, Arrangement):
        lat = lattice_build(a_or_lat, max_rank=2)
    return Counter(len(f.members) for f in lat.rank2())


def profile_text(profile: Counter) -> str:
    return " ".join(
        f"{s}^{profile[s]}" if profile[s] != 1 else str(s) for s in sorted(profile)
    )


def flat_join(lat: IntersectionLattice, x: Flat, y: Flat):
    """X + Y as a lattice element, or None when the sum is not a flat."""
    ring = lat.arrangement.ring()
    vecs = lat.arrangement.int_vecs()
    mask = x.mask & y.mask
    members = [i for i in x.members if (mask >> i) & 1]
    rows, _ = ring.row_reduce([vecs[i] for i in members])
    # dim of span(ann X) cap span(ann Y) via rank of the union
    union_rows = list(x.rows) + list(y.rows)
    urows, _ = ring.row_reduce(union_rows)
    inter_dim = x.rank + y.rank - len(urows)
    if len(rows) != inter_dim:
        return None
    return lat.by_mask.get(mask)


def is_modular(lat: IntersectionLattice, x: Flat) -> bool:
    if not lat.full:
        raise ValueError("modularity needs the full lattice")
    for y in lat.flats():
        if flat_join(lat, x, y) is None:
            return False
    return True


def is_supersolvable(a_or_lat, node_budget: int = 100_000):
    """(flag, chain).  Searches depth-first for a maximal chain of modular
    flats descending rank by rank from V to the center."""
    lat = a_or_lat
    if isinstance(a_or_lat, Arrangement):
        lat = lattice_build(a_or_lat)
    if not lat.full:
        raise ValueError("supersolvability needs the full lattice")
    total = arr_rank(lat.arrangement)
    modular_cache: dict = {}
    nodes = 0

    def modular(fl):
        v = modular_cache.get(fl.mask)
        if v is None:
            v = is_modular(lat, fl)
            modular_cache[fl.mask] = v
        return v

    def descend(fl, chain):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceededError("supersolvable chain search nodes", node_budget)
        if fl.rank == total:
            return chain
        for nxt in lat.by_rank[fl.rank + 1]:
            if nxt.mask & fl.mask == fl.mask and modular(nxt):
                got = descend(nxt, chain + [nxt])
                if got is not None:
                    return got
        return None

    top = lat.by_rank[0][0]
    chain = descend(top, [top])
    return (chain is not None), chain
