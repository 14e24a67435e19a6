"""Combinatorial freeness certification for central arrangements.

Verdicts are three-valued (free / nonfree / unknown) and always carry a
certificate tree that `cert_verify` can replay from scratch.  The implemented
criteria:

* base facts: empty arrangements and rank <= 2 arrangements are free;
* products: free exactly when every irreducible factor is free;
* factorization: a characteristic polynomial that does not split over the
  integers refutes freeness;
* addition-deletion: any two free members of a triple with the matching
  exponent pattern certify the third;
* division: a free restriction whose characteristic polynomial divides the
  ambient one certifies freeness;
* the localization obstruction for additions: if A' is free and A' + H is
  free then the rank-2 flats of A' inside H contribute a member of exp(A').

"No certificate found" is never conflated with non-freeness except where these
criteria are complete.
"""

from __future__ import annotations

import threading
from collections import Counter

from .core import (
    Arrangement,
    ArrangementError,
    Hyperplane,
    arr_add,
    arr_delete,
    arr_is_irreducible,
    arr_key,
    arr_parse,
    arr_rank,
    arr_restrict,
    arr_serialize,
    arr_subset,
    irreducible_components,
    restrict_to_span,
)
from .lattice import (
    BudgetExceededError,
    CharPoly,
    DEFAULT_FLAT_BUDGET,
    charpoly,
    flat_join,
    is_supersolvable,
    lattice_build,
)

DEFAULT_NODE_BUDGET = 1_000_000


class RegistryConsistencyError(RuntimeError):
    """Two contradictory definite verdicts were recorded for one arrangement."""


class Certificate:
    """A replayable rule application; leaves are base facts."""

    __slots__ = ("rule", "data", "children")

    def __init__(self, rule: str, data: dict | None = None, children=()):
        self.rule = rule
        self.data = data or {}
        self.children = tuple(children)

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "data": self.data,
            "children": [c.to_json() for c in self.children],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        return cls(obj["rule"], dict(obj.get("data", {})),
                   [cls.from_json(c) for c in obj.get("children", ())])

    def __repr__(self):
        return f"Certificate({self.rule}, children={len(self.children)})"


class Freeness:
    """A verdict: status in {free, nonfree, unknown} plus exponents when free."""

    __slots__ = ("status", "exponents", "certificate")

    def __init__(self, status: str, exponents, certificate: Certificate):
        if status not in ("free", "nonfree", "unknown"):
            raise ValueError(f"bad status {status!r}")
        self.status = status
        self.exponents = tuple(sorted(exponents)) if exponents is not None else None
        self.certificate = certificate

    @property
    def is_free(self):
        return self.status == "free"

    def __repr__(self):
        e = f" exp {list(self.exponents)}" if self.exponents else ""
        return f"<{self.status}{e} via {self.certificate.rule}>"


def _key_size(key: str) -> int:
    # arrangement keys are `cyclotomic n;dim l;cov;...`
    parts = key.split(";")
    return len(parts) - 2


class FactRegistry:
    """ArrKey -> definite verdict, plus named tabulated facts and search memos.

    Only grows; recording a verdict that contradicts an existing one raises.
    Inserts are atomic under a lock so parallel sweeps can share a registry.
    """

    def __init__(self):
        self.facts: dict = {}
        self.named: dict = {}
        self.if_memo: dict = {}
        self.df_memo: dict = {}
        self.rf_memo: dict = {}
        self._lock = threading.Lock()

    def lookup(self, key: str):
        return self.facts.get(key)

    def record(self, key: str, verdict: Freeness) -> Freeness:
        if verdict.status == "unknown":
            return verdict
        if verdict.status == "free":
            n = _key_size(key)
            if sum(verdict.exponents) != n:
                raise RegistryConsistencyError(
                    f"free verdict with exponent sum {sum(verdict.exponents)} != |A| = {n}"
                )
        with self._lock:
            old = self.facts.get(key)
            if old is None:
                self.facts[key] = verdict
                return verdict
            if old.status != verdict.status or (
                verdict.status == "free" and old.exponents != verdict.exponents
            ):
                raise RegistryConsistencyError(
                    f"contradictory verdicts for {key.split(';')[0]}...: "
                    f"{old!r} vs {verdict!r}"
                )
            return old


# -- multiset helpers ----------------------------------------------------------


def multiset_diff(a, b):
    """a minus b as a sorted tuple, or None when b is not contained in a."""
    ca = Counter(a)
    for k, v in Counter(b).items():
        if ca.get(k, 0) < v:
            return None
        ca[k] -= v
    out = []
    for k in sorted(ca):
        out.extend([k] * ca[k])
    return tuple(out)


def _bump(exps, old, new):
    c = Counter(exps)
    c[old] -= 1
    if c[old] == 0:
        del c[old]
    c[new] += 1
    out = []
    for k in sorted(c):
        out.extend([k] * c[k])
    return tuple(out)


# -- exponents from the characteristic polynomial --------------------------------


def exponents_from_charpoly(a: Arrangement, budget: int = DEFAULT_FLAT_BUDGET):
    """The multiset of integer roots of chi in [0, |A|], or None when chi does
    not split there (which refutes freeness by factorization)."""
    chi = charpoly(a, budget=budget)
    return chi.linear_roots(len(a))


def base_status(a: Arrangement):
    """Free base facts: the empty arrangement and every rank <= 2 arrangement."""
    if len(a) == 0:
        return Freeness("free", (0,) * a.dim, Certificate("base", {"kind": "empty"}))
    if arr_rank(a) <= 2:
        exps = (1, len(a) - 1) + (0,) * (a.dim - 2) if a.dim >= 2 else (1,)
        return Freeness("free", exps, Certificate("base", {"kind": "rank<=2"}))
    return None


def product_exponents(f1: Freeness, f2: Freeness) -> Freeness:
    """Combine factor verdicts across a product: free iff both free, with the
    multiset union of exponents."""
    if f1.status == "free" and f2.status == "free":
        return Freeness(
            "free",
            f1.exponents + f2.exponents,
            Certificate("product", {}, [f1.certificate, f2.certificate]),
        )
    if "nonfree" in (f1.status, f2.status):
        return Freeness("nonfree", None,
                        Certificate("product", {}, [f1.certificate, f2.certificate]))
    return Freeness("unknown", None,
                    Certificate("unknown", {"reason": "factor status unknown"}))


def _factor_arrangements(a: Arrangement):
    comps = irreducible_components(a)
    factors = []
    for comp in comps:
        sub = arr_subset(a, comp)
        factors.append((comp, restrict_to_span(sub)))
    return factors


def freeness_status(a: Arrangement, reg: FactRegistry,
                    flat_budget: int = DEFAULT_FLAT_BUDGET) -> Freeness:
    """Best verdict from the implemented criteria, memoized in the registry."""
    key = arr_key(a)
    hit = reg.lookup(key)
    if hit is not None:
        return hit
    base = base_status(a)
    if base is not None:
        return reg.record(key, base)
    if arr_rank(a) < a.dim or not arr_is_irreducible(a):
        verdict = _status_reducible(a, reg, flat_budget)
    else:
        verdict = _status_irreducible(a, reg, flat_budget)
    return reg.record(key, verdict) if verdict.status != "unknown" else verdict


def _status_reducible(a, reg, flat_budget):
    factors = _factor_arrangements(a)
    parts = []
    statuses = []
    for comp, fa in factors:
        st = freeness_status(fa, reg, flat_budget)
        statuses.append(st)
        parts.append([a.hyperplanes[i].text() for i in comp])
    if any(s.status == "nonfree" for s in statuses):
        verdict = "nonfree"
        exps = None
    elif all(s.status == "free" for s in statuses):
        verdict = "free"
        pos = []
        for s in statuses:
            pos.extend(e for e in s.exponents if e > 0)
        exps = tuple(sorted(pos)) + (0,) * (a.dim - arr_rank(a))
        if len(exps) != a.dim:
            # factor ranks must add up; anything else is a construction bug
            raise RegistryConsistencyError("product exponent bookkeeping mismatch")
    else:
        return Freeness("unknown", None,
                        Certificate("unknown", {"reason": "factor status unknown"}))
    cert = Certificate("product", {"partition": parts},
                       [s.certificate for s in statuses])
    return Freeness(verdict, exps, cert)


def _status_irreducible(a, reg, flat_budget):
    try:
        chi = charpoly(a, budget=flat_budget)
    except BudgetExceededError as e:
        return Freeness("unknown", None,
                        Certificate("unknown", {"reason": "budget", "detail": str(e)}))
    roots = chi.linear_roots(len(a))
    if roots is None:
        return Freeness(
            "nonfree", None,
            Certificate("nonfree_charpoly_not_splitting", {"charpoly": list(chi.coeffs)}),
        )
    df, cert = _df_search(a, reg, flat_budget)
    if df == "member":
        return Freeness("free", roots, cert)
    return Freeness(
        "unknown", None,
        Certificate("unknown", {
            "reason": "undecidable-by-implemented-criteria",
            "charpoly_roots": list(roots),
        }),
    )


# -- addition-deletion ------------------------------------------------------------


def check_addition_deletion(a: Arrangement, h: Hyperplane, reg: FactRegistry) -> dict:
    """Given definite free verdicts for two of (A, A', A''), infer the third
    with the forced exponents and record it.  Returns the inferred verdicts."""
    if not isinstance(h, Hyperplane):
        h = Hyperplane(h)
    if h not in a:
        raise ArrangementError(f"{h.text()} not in arrangement")
    a1 = arr_delete(a, h)
    a2 = arr_restrict(a, h)
    sa = reg.lookup(arr_key(a))
    s1 = reg.lookup(arr_key(a1))
    s2 = reg.lookup(arr_key(a2))
    inferred = {}

    def free(s):
        return s is not None and s.status == "free"

    if free(s1) and free(s2) and not free(sa):
        left = multiset_diff(s1.exponents, s2.exponents)
        if left is not None and len(left) == 1:
            exps = tuple(sorted(s2.exponents + (left[0] + 1,)))
            cert = Certificate(
                "addition_deletion",
                {"hyperplane": h.text(), "direction": "addition",
                 "exponents": list(exps)},
                [s1.certificate, s2.certificate],
            )
            inferred["A"] = reg.record(arr_key(a), Freeness("free", exps, cert))
    if free(sa) and free(s2) and not free(s1):
        left = multiset_diff(sa.exponents, s2.exponents)
        if left is not None and len(left) == 1 and left[0] >= 1:
            exps = tuple(sorted(s2.exponents + (left[0] - 1,)))
            cert = Certificate(
                "addition_deletion",
                {"hyperplane": h.text(), "direction": "deletion",
                 "exponents": list(exps)},
                [sa.certificate, s2.certificate],
            )
            inferred["A'"] = reg.record(arr_key(a1), Freeness("free", exps, cert))
    if free(sa) and free(s1) and not free(s2):
        gained = multiset_diff(sa.exponents, s1.exponents)
        lost = multiset_diff(s1.exponents, sa.exponents)
        if (gained is not None and lost is not None
                and len(gained) == 1 and len(lost) == 1
                and gained[0] == lost[0] + 1):
            exps = multiset_diff(sa.exponents, gained)
            cert = Certificate(
                "addition_deletion",
                {"hyperplane": h.text(), "direction": "restriction",
                 "exponents": list(exps), "parent_arr": arr_serialize(a)},
                [sa.certificate, s1.certificate],
            )
            inferred["A''"] = reg.record(arr_key(a2), Freeness("free", exps, cert))
    return inferred


# -- divisional freeness -----------------------------------------------------------


def _restriction_sizes(a: Arrangement):
    """|A^H| for every H, computed from the rank-2 layer."""
    lat = lattice_build(a, max_rank=2)
    through = [0] * len(a)
    for fl in lat.rank2():
        for i in fl.members:
            through[i] += 1
    # every other hyperplane meets H in exactly one rank-2 flat
    return through


def _df_search(a, reg, flat_budget, _seen=None):
    key = arr_key(a)
    memo = reg.df_memo.get(key)
    if memo is not None:
        return memo
    if _seen is None:
        _seen = set()
    base = base_status(a)
    if base is not None:
        out = ("member", base.certificate)
        reg.df_memo[key] = out
        return out
    if arr_rank(a) < a.dim or not arr_is_irreducible(a):
        factors = _factor_arrangements(a)
        certs = []
        status = "member"
        for _, fa in factors:
            sub, cert = _df_search(fa, reg, flat_budget, _seen)
            certs.append(cert)
            if sub == "nonmember":
                status = "nonmember"
                break
            if sub == "unknown":
                status = "unknown"
        out = (status, Certificate("product", {}, certs) if status == "member" else None)
        reg.df_memo[key] = out
        return out
    try:
        chi = charpoly(a, budget=flat_budget)
        sizes = _restriction_sizes(a)
        order = sorted(range(len(a)), key=lambda i: (-sizes[i], a.hyperplanes[i].text()))
        any_unknown = False
        for i in order:
            h = a.hyperplanes[i]
            r = arr_restrict(a, h)
            chir = charpoly(r, budget=flat_budget)
            if not chir.divides(chi):
                continue
            sub, subcert = _df_search(r, reg, flat_budget, _seen)
            if sub == "member":
                roots = chi.linear_roots(len(a))
                cert = Certificate(
                    "division",
                    {"hyperplane": h.text(),
                     "exponents": list(roots) if roots else None},
                    [subcert],
                )
                out = ("member", cert)
                reg.df_memo[key] = out
                return out
            if sub == "unknown":
                any_unknown = True
    except BudgetExceededError:
        out = ("unknown", None)
        reg.df_memo[key] = out
        return out
    out = ("unknown" if any_unknown else "nonmember", None)
    reg.df_memo[key] = out
    return out


def divisionally_free(a: Arrangement, reg: FactRegistry,
                      flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Membership in the division-closed class.  `nonmember` is only reported
    after exhausting every hyperplane; it carries no non-freeness claim."""
    status, cert = _df_search(a, reg, flat_budget)
    out = {"class": "divisional", "status": status}
    if status == "member":
        roots = exponents_from_charpoly(a, flat_budget) if len(a) else (0,) * a.dim
        if arr_rank(a) <= 2 and len(a):
            roots = base_status(a).exponents
        out["exponents"] = list(roots)
        out["certificate"] = cert
        reg.record(arr_key(a), Freeness("free", roots, cert))
    return out


# -- inductive freeness -------------------------------------------------------------


class _Nodes:
    __slots__ = ("used", "cap")

    def __init__(self, cap):
        self.used = 0
        self.cap = cap

    def spend(self):
        self.used += 1
        if self.used > self.cap:
            raise BudgetExceededError("search nodes", self.cap)


def inductively_free(a: Arrangement, reg: FactRegistry,
                     node_budget: int = DEFAULT_NODE_BUDGET,
                     flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Exhaustive memoized search for an inductive chain of free deletions.

    `nonmember` is definite: every hyperplane failed with definite sub-results.
    """
    nodes = _Nodes(node_budget)
    try:
        status, exps, cert = _if_search(a, reg, nodes, flat_budget)
    except BudgetExceededError as e:
        return {"class": "inductive", "status": "unknown", "reason": str(e),
                "nodes": nodes.used}
    out = {"class": "inductive", "status": status, "nodes": nodes.used}
    if status == "member":
        out["exponents"] = list(exps)
        out["certificate"] = cert
        reg.record(arr_key(a), Freeness("free", exps, cert))
    return out


def _if_search(a, reg, nodes, flat_budget):
    key = arr_key(a)
    memo = reg.if_memo.get(key)
    if memo is not None:
        return memo
    nodes.spend()
    base = base_status(a)
    if base is not None:
        out = ("member", base.exponents, base.certificate)
        reg.if_memo[key] = out
        return out
    if arr_rank(a) < a.dim or not arr_is_irreducible(a):
        out = _if_product(a, reg, nodes, flat_budget)
        reg.if_memo[key] = out
        return out
    chi = charpoly(a, budget=flat_budget)
    roots = chi.linear_roots(len(a))
    if roots is None:
        cert = Certificate("nonfree_charpoly_not_splitting",
                           {"charpoly": list(chi.coeffs)})
        out = ("nonmember", None, cert)
        reg.if_memo[key] = out
        return out
    sizes = _restriction_sizes(a)
    order = sorted(range(len(a)), key=lambda i: (-sizes[i], a.hyperplanes[i].text()))
    any_unknown = False
    for i in order:
        h = a.hyperplanes[i]
        r = arr_restrict(a, h)
        st_r, exps_r, cert_r = _if_search(r, reg, nodes, flat_budget)
        if st_r != "member":
            any_unknown |= st_r == "unknown"
            continue
        if multiset_diff(roots, exps_r) is None:
            # restriction exponents not below chi roots: this H cannot work
            continue
        a1 = arr_delete(a, h)
        st_1, exps_1, cert_1 = _if_search(a1, reg, nodes, flat_budget)
        if st_1 != "member":
            any_unknown |= st_1 == "unknown"
            continue
        left = multiset_diff(exps_1, exps_r)
        if left is None or len(left) != 1:
            continue
        exps = tuple(sorted(exps_r + (left[0] + 1,)))
        cert = Certificate(
            "addition_deletion",
            {"hyperplane": h.text(), "direction": "addition", "exponents": list(exps)},
            [cert_1, cert_r],
        )
        out = ("member", exps, cert)
        reg.if_memo[key] = out
        reg.record(key, Freeness("free", exps, cert))
        return out
    out = ("unknown" if any_unknown else "nonmember", None, None)
    if out[0] == "nonmember":
        reg.if_memo[key] = out
    return out


def _if_product(a, reg, nodes, flat_budget):
    statuses = []
    for _, fa in _factor_arrangements(a):
        statuses.append(_if_search(fa, reg, nodes, flat_budget))
    if any(s[0] == "nonmember" for s in statuses):
        return ("nonmember", None, None)
    if any(s[0] == "unknown" for s in statuses):
        return ("unknown", None, None)
    pos = []
    for s in statuses:
        pos.extend(e for e in s[1] if e > 0)
    exps = tuple(sorted(pos)) + (0,) * (a.dim - arr_rank(a))
    cert = Certificate("product", {}, [s[2] for s in statuses])
    return ("member", exps, cert)


# -- the addition obstruction and candidate sweeps -----------------------------------


def addition_obstruction(aprime: Arrangement, exps, h: Hyperplane,
                         lat=None) -> tuple:
    """Sum of (|A'_X| - 1) over the rank-2 flats of A' inside H, and whether
    the addition of H passes the necessary freeness condition."""
    if not isinstance(h, Hyperplane):
        h = Hyperplane(h)
    if h in aprime:
        raise ArrangementError("obstruction is for hyperplanes outside A'")
    if lat is None:
        lat = lattice_build(aprime, max_rank=2)
    ring = aprime.ring()
    vec = ring.to_int_vec(h.covector)
    total = 0
    flats = []
    for fl in lat.rank2():
        if ring.in_span(vec, fl.rows, fl.pivots):
            total += len(fl.members) - 1
            flats.append(fl)
    exps_set = Counter(exps)
    passes = exps_set[total] > 0
    if passes and total == 1 and arr_is_irreducible(aprime):
        passes = False
    return total, passes, flats


class CandidateTable:
    """All hyperplanes outside A spanned by two rank-2 flats, grouped with the
    full set of rank-2 flats they contain.

    Pairs of flats whose covector spans meet in a line produce the candidate;
    grouping pairs by the resulting direction recovers P_H exactly for every
    candidate containing at least two flats.
    """

    def __init__(self, a: Arrangement):
        self.arrangement = a
        lat = lattice_build(a, max_rank=2)
        self.flats = list(lat.rank2())
        self.flat_masks = [fl.mask for fl in self.flats]
        self.flat_sizes = [len(fl.members) for fl in self.flats]
        ring = a.ring()
        own = {v: i for i, v in enumerate(a.int_vecs())}
        cands: dict = {}
        flats = self.flats
        nf = len(flats)
        mul = ring.mul
        reduce_vec = ring.reduce_vec
        for i in range(nf):
            fi = flats[i]
            rows_i, piv_i = fi.rows, fi.pivots
            for j in range(i + 1, nf):
                fj = flats[j]
                y1, y2 = fj.rows
                r1 = reduce_vec(y1, rows_i, piv_i)
                r2 = reduce_vec(y2, rows_i, piv_i)
                l1 = next((t for t, e in enumerate(r1) if any(e)), None)
                l2 = next((t for t, e in enumerate(r2) if any(e)), None)
                if l1 is None:
                    alpha = y1  # y1 already lies in span(X)
                elif l2 is None:
                    alpha = y2
                else:
                    if l1 != l2:
                        continue
                    c, d = r2[l1], r1[l1]
                    dep = True
                    for t in range(len(r1)):
                        for x, y in zip(mul(d, r2[t]), mul(c, r1[t])):
                            if x != y:
                                dep = False
                                break
                        if not dep:
                            break
                    if not dep:
                        continue
                    alpha = tuple(
                        tuple(x - y for x, y in zip(mul(d, u), mul(c, v)))
                        for u, v in zip(y2, y1)
                    )
                key = ring.canon_dir(alpha)
                rec = cands.get(key)
                if rec is None:
                    cands[key] = {i, j}
                else:
                    rec.add(i)
                    rec.add(j)
        self.candidates = []
        for key in sorted(cands):
            self.candidates.append(
                {"vec": key, "flats": sorted(cands[key]), "own_index": own.get(key)}
            )


_tables: dict = {}


def candidate_table(a: Arrangement) -> CandidateTable:
    key = arr_key(a)
    t = _tables.get(key)
    if t is None:
        t = CandidateTable(a)
        _tables[key] = t
    return t


def enumerate_candidates(a: Arrangement) -> list:
    """Normalized covectors outside A that contain at least two rank-2 flats."""
    table = candidate_table(a)
    ring = a.ring()
    out = []
    for rec in table.candidates:
        if rec["own_index"] is None:
            out.append(Hyperplane(ring.to_field_covector(rec["vec"])))
    return out


def sweep_additions(a: Arrangement, exps, reg: FactRegistry,
                    live_mask: int | None = None,
                    table: CandidateTable | None = None,
                    flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Evaluate every candidate addition against the obstruction, then the
    splitting of chi, then the forced exponent pattern.  `live_mask` restricts
    to a subarrangement of `a` reusing the same candidate table.

    External survivors (outside the master arrangement) that pass every filter
    are reported; for the swept families none are expected."""
    if table is None:
        table = candidate_table(a)
    n = len(a)
    full = (1 << n) - 1
    mask = full if live_mask is None else live_mask
    sub = a if mask == full else arr_subset(a, [i for i in range(n) if (mask >> i) & 1])
    exps = tuple(sorted(exps))
    irreducible = arr_is_irreducible(sub)
    admissible = sorted({e for e in exps if e != 1 or not irreducible})
    # live flat sizes under the mask
    live_sizes = []
    for fmask, size in zip(table.flat_masks, table.flat_sizes):
        m = fmask & mask
        live_sizes.append(bin(m).count("1"))
    max_live = max((s for s in live_sizes if s >= 2), default=0)
    complete = bool(admissible) and (max_live - 1) < min(admissible)
    hist: Counter = Counter()
    obstruction_pass_external = []
    obstruction_pass_internal = []
    considered = 0
    for rec in table.candidates:
        live = [f for f in rec["flats"] if live_sizes[f] >= 2]
        if len(live) < 2:
            continue
        considered += 1
        total = sum(live_sizes[f] - 1 for f in live)
        hist[total] += 1
        own = rec["own_index"]
        if own is not None and (mask >> own) & 1:
            continue  # already a hyperplane of the subarrangement
        passes = total in admissible
        if not passes:
            continue
        if own is not None:
            obstruction_pass_internal.append(own)
        else:
            obstruction_pass_external.append(rec)
    ring = a.ring()
    survivors = []
    split_roots_seen = []
    killed = {"chi_not_splitting": 0, "exponent_pattern": 0}
    chi_sub = CharPoly.from_roots(exps)
    for rec in obstruction_pass_external:
        h = Hyperplane(ring.to_field_covector(rec["vec"]))
        added = arr_add(sub, h)
        restr = arr_restrict(added, h)
        chi = chi_sub - charpoly(restr, budget=flat_budget)
        roots = chi.linear_roots(len(added))
        if roots is None:
            killed["chi_not_splitting"] += 1
            continue
        split_roots_seen.append(list(roots))
        ok_pattern = any(roots == _bump(exps, e, e + 1) for e in set(exps))
        if ok_pattern:
            survivors.append(h.text())
        else:
            killed["exponent_pattern"] += 1
    return {
        "schema": 1,
        "arrangement": sub.name or arr_key(sub)[:40],
        "size": len(sub),
        "exponents": list(exps),
        "irreducible": irreducible,
        "candidates_with_two_flats": considered,
        "obstruction_histogram": {str(k): hist[k] for k in sorted(hist)},
        "obstruction_pass_external": len(obstruction_pass_external),
        "internal_readditions_passing": len(obstruction_pass_internal),
        "split_survivor_roots": split_roots_seen,
        "killed": killed,
        "external_survivors": survivors,
        "completeness": {
            "complete": complete,
            "max_single_flat_contribution": max(0, max_live - 1),
            "min_admissible_exponent": min(admissible) if admissible else None,
        },
    }


def no_free_addition(a: Arrangement, exps, reg: FactRegistry,
                     flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Sweep all candidate additions of a free arrangement; an empty external
    survivor list proves no external free addition exists, modulo the recorded
    single-flat bound."""
    if arr_rank(a) <= 2:
        return _sweep_rank2(a, exps, reg, flat_budget)
    return sweep_additions(a, exps, reg, flat_budget=flat_budget)


def _sweep_rank2(a, exps, reg, flat_budget):
    # in rank <= 2 there are infinitely many candidate lines; sample the
    # pairwise sums and differences as witnesses (completeness impossible)
    f = a.field
    exps = tuple(sorted(exps))
    seen = set()
    witnesses = []
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            for sgn in (1, -1):
                cov = [
                    x + (y if sgn == 1 else -y)
                    for x, y in zip(a.hyperplanes[i].covector, a.hyperplanes[j].covector)
                ]
                if not any(cov):
                    continue
                h = Hyperplane(cov)
                if h.covector in seen or h in a:
                    continue
                seen.add(h.covector)
                witnesses.append(h)
    survivors = []
    for h in witnesses:
        total, passes, _ = addition_obstruction(a, exps, h)
        if not passes:
            continue
        added = arr_add(a, h)
        roots = exponents_from_charpoly(added, flat_budget)
        if roots is not None and any(roots == _bump(exps, e, e + 1) for e in set(exps)):
            survivors.append(h.text())
    return {
        "schema": 1,
        "arrangement": a.name or arr_key(a)[:40],
        "size": len(a),
        "exponents": list(exps),
        "external_survivors": survivors,
        "completeness": {"complete": False,
                         "note": "rank <= 2: every addition is free; witnesses only"},
    }


# -- condition (*) and filtrations -----------------------------------------------


def condition_star(a: Arrangement, removed) -> bool:
    """True iff every rank-2 intersection within the removed set is covered by
    a remaining hyperplane."""
    idx = sorted(_as_indices(a, removed))
    if len(idx) < 2:
        return True
    lat = lattice_build(a, max_rank=2)
    nmask = 0
    for i in idx:
        nmask |= 1 << i
    for p in range(len(idx)):
        for q in range(p + 1, len(idx)):
            fl = lat.pair_flat(idx[p], idx[q])
            if fl.mask & ~nmask == 0:
                return False
    return True


def _as_indices(a: Arrangement, items):
    out = []
    for x in items:
        if isinstance(x, int):
            out.append(x)
        else:
            out.append(a.index_of(x if isinstance(x, Hyperplane) else Hyperplane(x)))
    return out


def verify_filtration(a: Arrangement, deletions, reg: FactRegistry,
                      flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Walk A = A_0 > A_1 > ... deleting one hyperplane per step, certifying
    each step by addition-deletion from the previous arrangement and its free
    restriction.  Reports the exponents at every step; a failure pinpoints the
    step index and the failed hypothesis."""
    steps = []
    cur = a
    st = freeness_status(a, reg, flat_budget)
    report = {"schema": 1, "start": a.name or "", "ok": False, "steps": steps}
    if st.status != "free":
        report["failure"] = {"step": 0, "why": f"start arrangement not certified free ({st.status})"}
        return report
    for i, h in enumerate(_as_hyperplanes(a, deletions), start=1):
        restr = arr_restrict(cur, h)
        st_r = freeness_status(restr, reg, flat_budget)
        if st_r.status != "free":
            report["failure"] = {"step": i, "why":
                                 f"restriction not certified free ({st_r.status})"}
            return report
        left = multiset_diff(st.exponents, st_r.exponents)
        if left is None or len(left) != 1 or left[0] < 1:
            report["failure"] = {"step": i, "why":
                                 "exponent pattern mismatch: "
                                 f"exp={list(st.exponents)} restriction={list(st_r.exponents)}"}
            return report
        exps = tuple(sorted(st_r.exponents + (left[0] - 1,)))
        cert = Certificate(
            "addition_deletion",
            {"hyperplane": h.text(), "direction": "deletion", "exponents": list(exps)},
            [st.certificate, st_r.certificate],
        )
        cur = arr_delete(cur, h)
        st = reg.record(arr_key(cur), Freeness("free", exps, cert))
        steps.append({
            "step": i,
            "hyperplane": h.text(),
            "restriction_size": len(restr),
            "restriction_exponents": list(st_r.exponents),
            "exponents": list(st.exponents),
        })
    report["ok"] = True
    report["final_size"] = len(cur)
    report["final_exponents"] = list(st.exponents)
    return report


def _as_hyperplanes(a, items):
    out = []
    for x in items:
        if isinstance(x, int):
            out.append(a.hyperplanes[x])
        elif isinstance(x, Hyperplane):
            out.append(x)
        else:
            out.append(Hyperplane(x))
    return out


def verify_resolution(a: Arrangement, additions, reg: FactRegistry,
                      flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Walk A_j = A + {H_1..H_j}, certifying each addition by addition-deletion
    from A_{j-1} and the free restriction A_j^{H_j}; emits the
    (exp A_j, exp A_j^{H_j}) table."""
    rows = []
    cur = a
    st = freeness_status(a, reg, flat_budget)
    report = {"schema": 1, "start": a.name or "", "ok": False, "rows": rows}
    if st.status != "free":
        report["failure"] = {"step": 0, "why": f"start arrangement not certified free ({st.status})"}
        return report
    for j, h in enumerate(_as_hyperplanes(a, additions), start=1):
        added = arr_add(cur, h)
        restr = arr_restrict(added, h)
        st_r = freeness_status(restr, reg, flat_budget)
        if st_r.status != "free":
            report["failure"] = {"step": j, "why":
                                 f"restriction not certified free ({st_r.status})"}
            return report
        left = multiset_diff(st.exponents, st_r.exponents)
        if left is None or len(left) != 1:
            report["failure"] = {"step": j, "why":
                                 "exponent pattern mismatch: "
                                 f"exp={list(st.exponents)} restriction={list(st_r.exponents)}"}
            return report
        exps = tuple(sorted(st_r.exponents + (left[0] + 1,)))
        cert = Certificate(
            "addition_deletion",
            {"hyperplane": h.text(), "direction": "addition", "exponents": list(exps)},
            [st.certificate, st_r.certificate],
        )
        cur = added
        st = reg.record(arr_key(cur), Freeness("free", exps, cert))
        rows.append({
            "step": j,
            "hyperplane": h.text(),
            "exponents": list(st.exponents),
            "restriction_exponents": list(st_r.exponents),
        })
    report["ok"] = True
    report["final_size"] = len(cur)
    report["final_exponents"] = list(st.exponents)
    return report


# -- recursive freeness (bounded bidirectional search) ------------------------------


def recursively_free_search(a: Arrangement, pool, depth: int, reg: FactRegistry,
                            node_budget: int = 100_000,
                            flat_budget: int = DEFAULT_FLAT_BUDGET) -> dict:
    """Bounded search for a recursive-freeness certificate: deletions are always
    allowed, additions only from the pool with at most `depth` net additions.

    Returns member or unknown; non-membership is never claimed by this search.
    Restrictions along the chain are only certified through classes contained
    in the recursively free one (rank <= 2, supersolvable, inductive chains),
    never through division.
    """
    pool = [h if isinstance(h, Hyperplane) else Hyperplane(h) for h in pool]
    master = list(a.hyperplanes)
    for h in pool:
        if all(h != k for k in master):
            master.append(h)
    marr = Arrangement(a.field, a.dim, master)
    start_mask = 0
    for i, h in enumerate(master):
        if h in a:
            start_mask |= 1 << i
    nodes = _Nodes(node_budget)
    memo_ns = (arr_key(marr), depth)
    try:
        st, exps, cert = _rf_search(marr, start_mask, depth, reg, nodes,
                                    flat_budget, memo_ns, frozenset())
    except BudgetExceededError as e:
        return {"class": "recursive", "status": "unknown", "reason": str(e),
                "nodes": nodes.used}
    out = {"class": "recursive", "status": "member" if st else "unknown",
           "nodes": nodes.used}
    if st:
        out["exponents"] = list(exps)
        out["certificate"] = cert
        reg.record(arr_key(a), Freeness("free", exps, cert))
    return out


def _rf_base(b, reg, nodes, flat_budget):
    """RF-sound free certificates: base, supersolvable chain, inductive search."""
    base = base_status(b)
    if base is not None:
        return base.exponents, base.certificate
    try:
        chi = charpoly(b, budget=flat_budget)
    except BudgetExceededError:
        return None
    roots = chi.linear_roots(len(b))
    if roots is None:
        return None
    if arr_rank(b) == b.dim:
        ok, chain = is_supersolvable(b)
        if ok:
            cert = Certificate(
                "supersolvable_chain",
                {"chain": [[b.hyperplanes[i].text() for i in fl.members] for fl in chain],
                 "exponents": list(roots)},
            )
            return roots, cert
    return None


def _rf_search(marr, bmask, adds_left, reg, nodes, flat_budget, ns, visiting):
    memo = reg.rf_memo.get((ns, bmask))
    if memo is not None:
        return memo
    nodes.spend()
    idx = [i for i in range(len(marr)) if (bmask >> i) & 1]
    b = arr_subset(marr, idx)
    got = _rf_base(b, reg, nodes, flat_budget)
    if got is not None:
        out = (True, got[0], got[1])
        reg.rf_memo[(ns, bmask)] = out
        return out
    visiting = visiting | {bmask}
    # additions from the pool (rule: B in RF when B+H and (B+H)^H are)
    for i in range(len(marr)):
        if (bmask >> i) & 1:
            continue
        if adds_left <= 0:
            break
        nmask = bmask | (1 << i)
        if nmask in visiting:
            continue
        h = marr.hyperplanes[i]
        st2, exps2, cert2 = _rf_search(marr, nmask, adds_left - 1, reg, nodes,
                                       flat_budget, ns, visiting)
        if not st2:
            continue
        b2 = arr_subset(marr, idx + [i])
        restr = arr_restrict(b2, h)
        rbase = _rf_base(restr, reg, nodes, flat_budget)
        if rbase is None:
            continue
        exps_r, cert_r = rbase
        left = multiset_diff(exps2, exps_r)
        if left is None or len(left) != 1 or left[0] < 1:
            continue
        exps = tuple(sorted(exps_r + (left[0] - 1,)))
        cert = Certificate(
            "addition_deletion",
            {"hyperplane": h.text(), "direction": "deletion", "exponents": list(exps)},
            [cert2, cert_r],
        )
        out = (True, exps, cert)
        reg.rf_memo[(ns, bmask)] = out
        return out
    # deletions (rule: B in RF when B-H and B^H are)
    for i in idx:
        nmask = bmask & ~(1 << i)
        if nmask in visiting:
            continue
        h = marr.hyperplanes[i]
        restr = arr_restrict(b, h)
        rbase = _rf_base(restr, reg, nodes, flat_budget)
        if rbase is None:
            continue
        st1, exps1, cert1 = _rf_search(marr, nmask, adds_left, reg, nodes,
                                       flat_budget, ns, visiting)
        if not st1:
            continue
        exps_r, cert_r = rbase
        left = multiset_diff(exps1, exps_r)
        if left is None or len(left) != 1:
            continue
        exps = tuple(sorted(exps_r + (left[0] + 1,)))
        cert = Certificate(
            "addition_deletion",
            {"hyperplane": h.text(), "direction": "addition", "exponents": list(exps)},
            [cert1, cert_r],
        )
        out = (True, exps, cert)
        reg.rf_memo[(ns, bmask)] = out
        return out
    return (False, None, None)


# -- certificate verification ---------------------------------------------------------


def cert_verify(a: Arrangement, cert: Certificate, reg: FactRegistry | None = None,
                flat_budget: int = DEFAULT_FLAT_BUDGET):
    """Re-derive every node's hypothesis from scratch.  Returns (ok, detail);
    detail names the first failing node."""
    try:
        _verify_node(a, cert, reg, flat_budget)
        return True, None
    except _VerifyFailure as e:
        return False, str(e)


class _VerifyFailure(Exception):
    pass


def _fail(rule, why):
    raise _VerifyFailure(f"{rule}: {why}")


def _claimed_exponents(cert):
    e = cert.data.get("exponents")
    return tuple(sorted(e)) if e is not None else None


def _verify_node(a, cert, reg, flat_budget):
    """Returns the verified exponents when the node certifies freeness."""
    rule = cert.rule
    if rule == "base":
        st = base_status(a)
        if st is None:
            _fail(rule, "arrangement is neither empty nor of rank <= 2")
        return st.exponents
    if rule == "catalog":
        if reg is None:
            _fail(rule, "no registry supplied for catalog fact")
        if cert.data.get("key") != arr_key(a):
            _fail(rule, "catalog fact attached to a different arrangement")
        fact = reg.lookup(arr_key(a))
        if fact is None or fact.status != "free":
            _fail(rule, "fact not present in registry")
        exps = _claimed_exponents(cert)
        if exps is not None and exps != fact.exponents:
            _fail(rule, "exponents disagree with registry")
        return fact.exponents
    if rule == "product":
        partition = cert.data.get("partition")
        if partition is None:
            _fail(rule, "product node without partition cannot be replayed")
        texts = [h.text() for h in a.hyperplanes]
        seen = []
        for part in partition:
            seen.extend(part)
        if sorted(seen) != sorted(texts):
            _fail(rule, "partition does not cover the arrangement exactly")
        total_rank = arr_rank(a)
        ranks = 0
        pos = []
        for part, ch in zip(partition, cert.children):
            idx = [texts.index(t) for t in part]
            sub = arr_subset(a, idx)
            fa = restrict_to_span(sub)
            ranks += arr_rank(fa)
            exps = _verify_node(fa, ch, reg, flat_budget)
            pos.extend(e for e in exps if e > 0)
        if ranks != total_rank:
            _fail(rule, "factors are not jointly independent")
        exps = tuple(sorted(pos)) + (0,) * (a.dim - total_rank)
        claimed = _claimed_exponents(cert)
        if claimed is not None and claimed != exps:
            _fail(rule, "combined exponents disagree with claim")
        return exps
    if rule == "addition_deletion":
        h = Hyperplane([a.field.parse(t) for t in cert.data["hyperplane"].split()])
        direction = cert.data["direction"]
        claimed = _claimed_exponents(cert)
        if direction == "addition":
            if h not in a:
                _fail(rule, "hyperplane not in arrangement")
            a1 = arr_delete(a, h)
            a2 = arr_restrict(a, h)
            e1 = _verify_node(a1, cert.children[0], reg, flat_budget)
            e2 = _verify_node(a2, cert.children[1], reg, flat_budget)
            left = multiset_diff(e1, e2)
            if left is None or len(left) != 1:
                _fail(rule, "deleted/restricted exponents do not match the pattern")
            exps = tuple(sorted(e2 + (left[0] + 1,)))
        elif direction == "deletion":
            if h in a:
                _fail(rule, "hyperplane unexpectedly inside arrangement")
            b = arr_add(a, h)
            b2 = arr_restrict(b, h)
            e0 = _verify_node(b, cert.children[0], reg, flat_budget)
            e2 = _verify_node(b2, cert.children[1], reg, flat_budget)
            left = multiset_diff(e0, e2)
            if left is None or len(left) != 1 or left[0] < 1:
                _fail(rule, "full/restricted exponents do not match the pattern")
            exps = tuple(sorted(e2 + (left[0] - 1,)))
        elif direction == "restriction":
            parent = arr_parse(cert.data["parent_arr"])
            if h not in parent:
                _fail(rule, "hyperplane not in parent arrangement")
            if arr_key(arr_restrict(parent, h)) != arr_key(a):
                _fail(rule, "restriction of parent does not match arrangement")
            e0 = _verify_node(parent, cert.children[0], reg, flat_budget)
            e1 = _verify_node(arr_delete(parent, h), cert.children[1], reg, flat_budget)
            gained = multiset_diff(e0, e1)
            lost = multiset_diff(e1, e0)
            if (gained is None or lost is None or len(gained) != 1
                    or len(lost) != 1 or gained[0] != lost[0] + 1):
                _fail(rule, "parent exponents do not differ by one in one slot")
            exps = multiset_diff(e0, gained)
        else:
            _fail(rule, f"unknown direction {direction!r}")
        if claimed is not None and claimed != exps:
            _fail(rule, f"claimed exponents {claimed} != derived {exps}")
        return exps
    if rule == "division":
        h = Hyperplane([a.field.parse(t) for t in cert.data["hyperplane"].split()])
        if h not in a:
            _fail(rule, "hyperplane not in arrangement")
        restr = arr_restrict(a, h)
        _verify_node(restr, cert.children[0], reg, flat_budget)
        chi = charpoly(a, budget=flat_budget)
        chir = charpoly(restr, budget=flat_budget)
        if not chir.divides(chi):
            _fail(rule, "restriction polynomial does not divide")
        roots = chi.linear_roots(len(a))
        if roots is None:
            _fail(rule, "characteristic polynomial of a free arrangement must split")
        claimed = _claimed_exponents(cert)
        if claimed is not None and claimed != roots:
            _fail(rule, "claimed exponents disagree with the roots")
        return roots
    if rule == "supersolvable_chain":
        lat = lattice_build(a, budget=flat_budget)
        if arr_rank(a) != a.dim:
            _fail(rule, "supersolvable certificates require an essential arrangement")
        texts = {h.text(): i for i, h in enumerate(a.hyperplanes)}
        prev_mask = 0
        prev_size = 0
        exps = []
        chain = cert.data["chain"]
        from .lattice import is_modular

        for step, member_texts in enumerate(chain):
            mask = 0
            for t in member_texts:
                if t not in texts:
                    _fail(rule, f"chain flat references unknown hyperplane {t}")
                mask |= 1 << texts[t]
            fl = lat.by_mask.get(mask)
            if fl is None or fl.rank != step:
                _fail(rule, f"chain element {step} is not a rank-{step} flat")
            if mask & prev_mask != prev_mask:
                _fail(rule, "chain is not nested")
            if not is_modular(lat, fl):
                _fail(rule, f"chain element {step} is not modular")
            if step > 0:
                exps.append(len(fl.members) - prev_size)
            prev_mask, prev_size = mask, len(fl.members)
        if len(chain) != arr_rank(a) + 1 or prev_size != len(a):
            _fail(rule, "chain does not reach the center")
        exps = tuple(sorted(exps))
        claimed = _claimed_exponents(cert)
        if claimed is not None and claimed != exps:
            _fail(rule, "claimed exponents disagree with the chain")
        return exps
    if rule == "nonfree_charpoly_not_splitting":
        chi = charpoly(a, budget=flat_budget)
        if chi.linear_roots(len(a)) is not None:
            _fail(rule, "characteristic polynomial splits after all")
        return None
    if rule == "nonfree_addition_obstruction":
        h = Hyperplane([a.field.parse(t) for t in cert.data["hyperplane"].split()])
        if h not in a:
            _fail(rule, "hyperplane not in arrangement")
        aprime = arr_delete(a, h)
        e1 = _verify_node(aprime, cert.children[0], reg, flat_budget)
        total, passes, _ = addition_obstruction(aprime, e1, h)
        if passes:
            _fail(rule, f"obstruction sum {total} is admissible")
        return None
    if rule == "nonfree_restriction_size_mismatch":
        h = Hyperplane([a.field.parse(t) for t in cert.data["hyperplane"].split()])
        if h not in a:
            _fail(rule, "hyperplane not in arrangement")
        aprime = arr_delete(a, h)
        e1 = _verify_node(aprime, cert.children[0], reg, flat_budget)
        roots = exponents_from_charpoly(a, flat_budget)
        if roots is None:
            return None  # not splitting refutes freeness outright
        if any(roots == _bump(e1, e, e + 1) for e in set(e1)):
            _fail(rule, "roots match a valid exponent pattern")
        return None
    if rule == "unknown":
        if cert.children:
            _fail(rule, "unknown node cannot support children")
        return None
    _fail(rule, "unrecognized rule")
