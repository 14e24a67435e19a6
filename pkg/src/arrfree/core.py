"""Central hyperplane arrangements over a fixed cyclotomic field.

Hyperplanes are stored as projectively normalized covectors (first nonzero
coordinate 1).  Arrangements are immutable; deletion, addition, localization,
restriction and product all return new values.  The `.arr` text format and the
canonical arrangement key live here too.
"""

from __future__ import annotations

from .field import (
    CyclotomicField,
    FieldElement,
    Matrix,
    ScalarParseError,
    field_make,
    mat_kernel,
    mat_rref,
)
from ._intlin import ring_for


class ArrangementError(ValueError):
    """Violation of an arrangement precondition (duplicate, missing H, ...)."""


class ArrParseError(ValueError):
    """Malformed .arr input; message carries the line number."""

    def __init__(self, line_no: int, why: str):
        super().__init__(f"line {line_no}: {why}")
        self.line_no = line_no


class Hyperplane:
    """ker(alpha) for a nonzero linear form alpha, stored leading-one normalized."""

    __slots__ = ("covector", "_text")

    def __init__(self, covector):
        cov = tuple(covector)
        if not cov:
            raise ArrangementError("empty covector")
        lead = next((e for e in cov if e), None)
        if lead is None:
            raise ArrangementError("zero covector does not define a hyperplane")
        if not lead.is_one():
            inv = lead.inverse()
            cov = tuple(e * inv for e in cov)
        self.covector = cov
        self._text = None

    @property
    def dim(self) -> int:
        return len(self.covector)

    def text(self) -> str:
        if self._text is None:
            self._text = " ".join(str(e) for e in self.covector)
        return self._text

    def __eq__(self, other):
        return isinstance(other, Hyperplane) and self.covector == other.covector

    def __hash__(self):
        return hash(self.covector)

    def __repr__(self):
        return f"Hyperplane({self.text()})"


class Arrangement:
    """An ordered set of distinct hyperplanes in C^dim over one cyclotomic field."""

    __slots__ = ("field", "dim", "hyperplanes", "name", "_key", "_int_vecs", "_rank")

    def __init__(self, field: CyclotomicField, dim: int, hyperplanes, name: str = ""):
        self.field = field
        self.dim = dim
        hps = tuple(h if isinstance(h, Hyperplane) else Hyperplane(h) for h in hyperplanes)
        seen = set()
        for h in hps:
            if h.dim != dim:
                raise ArrangementError(
                    f"covector length {h.dim} does not match dimension {dim}"
                )
            for e in h.covector:
                if e.field.order != field.order:
                    raise ArrangementError("hyperplane scalars from a different field")
            if h.covector in seen:
                raise ArrangementError(f"duplicate hyperplane {h.text()}")
            seen.add(h.covector)
        self.hyperplanes = hps
        self.name = name
        self._key = None
        self._int_vecs = None
        self._rank = None

    def __len__(self):
        return len(self.hyperplanes)

    def __iter__(self):
        return iter(self.hyperplanes)

    def __getitem__(self, i):
        return self.hyperplanes[i]

    def __repr__(self):
        label = self.name or "arrangement"
        return f"<{label}: {len(self)} hyperplanes in dim {self.dim} over Q(zeta_{self.field.order})>"

    def index_of(self, h: Hyperplane) -> int:
        for i, k in enumerate(self.hyperplanes):
            if k == h:
                return i
        raise ArrangementError(f"hyperplane {h.text()} not in arrangement")

    def __contains__(self, h):
        if not isinstance(h, Hyperplane):
            h = Hyperplane(h)
        return any(k == h for k in self.hyperplanes)

    def int_vecs(self):
        """Canonical integer covectors (engine representation), cached."""
        if self._int_vecs is None:
            ring = ring_for(self.field)
            self._int_vecs = tuple(ring.to_int_vec(h.covector) for h in self.hyperplanes)
        return self._int_vecs

    def ring(self):
        return ring_for(self.field)

    def with_name(self, name: str) -> "Arrangement":
        a = Arrangement(self.field, self.dim, self.hyperplanes, name)
        a._key = self._key
        a._int_vecs = self._int_vecs
        a._rank = self._rank
        return a


def arr_key(a: Arrangement) -> str:
    """Canonical key: equal iff equal as sets of normalized covectors."""
    if a._key is None:
        covs = sorted(h.text() for h in a.hyperplanes)
        a._key = f"cyclotomic {a.field.order};dim {a.dim};" + ";".join(covs)
    return a._key


def arr_delete(a: Arrangement, h: Hyperplane) -> Arrangement:
    if not isinstance(h, Hyperplane):
        h = Hyperplane(h)
    if h not in a:
        raise ArrangementError(f"cannot delete {h.text()}: not in arrangement")
    return Arrangement(
        a.field, a.dim, [k for k in a.hyperplanes if k != h], a.name and a.name + "'"
    )


def arr_add(a: Arrangement, h: Hyperplane) -> Arrangement:
    if not isinstance(h, Hyperplane):
        h = Hyperplane(h)
    if h in a:
        raise ArrangementError(f"cannot add {h.text()}: already in arrangement")
    return Arrangement(a.field, a.dim, a.hyperplanes + (h,), a.name)


def arr_subset(a: Arrangement, indices) -> Arrangement:
    """Subarrangement on a subset of hyperplane indices, order preserved."""
    idx = sorted(set(indices))
    return Arrangement(a.field, a.dim, [a.hyperplanes[i] for i in idx])


def arr_localize(a: Arrangement, flat) -> Arrangement:
    """All hyperplanes containing the flat (a lattice Flat or an index iterable)."""
    members = getattr(flat, "members", flat)
    return arr_subset(a, members)


def arr_restrict(a: Arrangement, h: Hyperplane) -> Arrangement:
    """The (dim-1)-arrangement of traces K cap H on H, in deterministic
    kernel-basis coordinates of alpha_H."""
    if not isinstance(h, Hyperplane):
        h = Hyperplane(h)
    if h not in a:
        raise ArrangementError(f"cannot restrict to {h.text()}: not in arrangement")
    basis = mat_kernel(Matrix(a.field, [h.covector]))
    traces = []
    seen = set()
    for k in a.hyperplanes:
        if k == h:
            continue
        beta = []
        for row in basis.entries:
            s = a.field.zero
            for ci, bi in zip(k.covector, row):
                if ci and bi:
                    s = s + ci * bi
            beta.append(s)
        t = Hyperplane(beta)
        if t.covector not in seen:
            seen.add(t.covector)
            traces.append(t)
    return Arrangement(a.field, a.dim - 1, traces)


def restrict_to_span(a: Arrangement, name: str = "") -> Arrangement:
    """Re-express covectors in the pivot coordinates of their joint span.

    Same coordinate mechanism as restriction; used to make a localized or
    reducible-factor subarrangement essential without changing its lattice.
    """
    m = Matrix(a.field, [h.covector for h in a.hyperplanes])
    rref, rank, pivots = mat_rref(m)
    if rank == a.dim:
        return a if not name else a.with_name(name)
    hps = [Hyperplane([h.covector[p] for p in pivots]) for h in a.hyperplanes]
    return Arrangement(a.field, rank, hps, name)


def arr_product(a1: Arrangement, a2: Arrangement) -> Arrangement:
    if a1.field.order != a2.field.order:
        raise ArrangementError("product factors live over different fields")
    f = a1.field
    z1 = [f.zero] * a1.dim
    z2 = [f.zero] * a2.dim
    hps = [Hyperplane(tuple(h.covector) + tuple(z2)) for h in a1.hyperplanes]
    hps += [Hyperplane(tuple(z1) + tuple(h.covector)) for h in a2.hyperplanes]
    return Arrangement(f, a1.dim + a2.dim, hps)


def arr_rank(a: Arrangement) -> int:
    if a._rank is None:
        ring = a.ring()
        rows, _ = ring.row_reduce(a.int_vecs())
        a._rank = len(rows)
    return a._rank


def arr_is_essential(a: Arrangement) -> bool:
    return arr_rank(a) == a.dim


def irreducible_components(a: Arrangement):
    """Finest partition of hyperplane indices into jointly independent groups.

    Singleton spans are pairwise independent after normalization, so merging is
    driven by minimal jointly dependent sets: such a set must lie inside one
    factor of any direct-sum decomposition, hence merging it is sound.
    """
    n = len(a)
    if n == 0:
        return []
    ring = a.ring()
    vecs = a.int_vecs()
    comps = [{i} for i in range(n)]

    def span_rank(idx_set):
        rows, _ = ring.row_reduce([vecs[i] for i in sorted(idx_set)])
        return len(rows)

    ranks = [1] * len(comps)
    while True:
        # incremental joint-independence scan
        total = set()
        acc_rank = 0
        offender = None
        for ci, comp in enumerate(comps):
            merged = total | comp
            r = span_rank(merged)
            if r < acc_rank + ranks[ci]:
                offender = ci
                break
            total = merged
            acc_rank = r
        if offender is None:
            return [sorted(c) for c in comps]
        # minimize the deficient prefix set {0..offender}
        def_set = list(range(offender + 1))
        changed = True
        while changed:
            changed = False
            for drop in list(def_set):
                if drop == offender:
                    continue
                trial = [c for c in def_set if c != drop]
                u = set().union(*(comps[c] for c in trial))
                if span_rank(u) < sum(ranks[c] for c in trial):
                    def_set = trial
                    changed = True
                    break
        merged = set().union(*(comps[c] for c in def_set))
        keep = [comps[c] for c in range(len(comps)) if c not in def_set]
        comps = keep + [merged]
        ranks = [span_rank(c) for c in comps]


def arr_is_irreducible(a: Arrangement) -> bool:
    """True iff the arrangement admits no nontrivial product decomposition.

    Non-essential arrangements are reducible (they split off an empty factor),
    except for the empty arrangement in dimension 0.
    """
    if len(a) == 0:
        return a.dim == 0
    if arr_rank(a) < a.dim:
        return False
    return len(irreducible_components(a)) == 1


# -- .arr text format ---------------------------------------------------------


def arr_serialize(a: Arrangement) -> str:
    lines = []
    if a.name:
        lines.append(f"# name: {a.name}")
    lines.append(f"field cyclotomic {a.field.order}")
    lines.append(f"dim {a.dim}")
    for h in sorted(a.hyperplanes, key=lambda h: h.text()):
        lines.append("h " + h.text())
    return "\n".join(lines) + "\n"


def arr_parse(text: str) -> Arrangement:
    field = None
    dim = None
    name = ""
    hps = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("name:"):
                name = body[5:].strip()
            continue
        parts = line.split()
        if parts[0] == "field":
            if len(parts) != 3 or parts[1] != "cyclotomic":
                raise ArrParseError(line_no, "expected `field cyclotomic <n>`")
            try:
                order = int(parts[2])
            except ValueError:
                raise ArrParseError(line_no, f"unknown field order {parts[2]!r}") from None
            if order < 1:
                raise ArrParseError(line_no, f"unknown field order {order}")
            field = field_make(order)
        elif parts[0] == "dim":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ArrParseError(line_no, "expected `dim <l>`")
            dim = int(parts[1])
        elif parts[0] == "h":
            if field is None or dim is None:
                raise ArrParseError(line_no, "hyperplane before field/dim header")
            scalars = parts[1:]
            if len(scalars) != dim:
                raise ArrParseError(
                    line_no, f"expected {dim} scalars, got {len(scalars)}"
                )
            try:
                cov = tuple(field.parse(s) for s in scalars)
            except ScalarParseError as e:
                raise ArrParseError(line_no, str(e)) from None
            try:
                hps.append(Hyperplane(cov))
            except ArrangementError as e:
                raise ArrParseError(line_no, str(e)) from None
        else:
            raise ArrParseError(line_no, f"unknown directive {parts[0]!r}")
    if field is None or dim is None:
        raise ArrParseError(0, "missing field/dim header")
    try:
        return Arrangement(field, dim, hps, name)
    except ArrangementError as e:
        raise ArrParseError(0, str(e)) from None


def arr_load(path) -> Arrangement:
    with open(path, "r", encoding="utf-8") as fh:
        return arr_parse(fh.read())


def arr_save(a: Arrangement, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(arr_serialize(a))
