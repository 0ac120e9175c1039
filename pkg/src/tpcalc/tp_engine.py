"""The group invariant: the minimum of P over all subgroups, with witnesses,
plus machine checks of the structural theorems and value classifications.

The minimum is taken over conjugacy-class representatives (inner automorphisms
preserve P), with normal subgroups skipped after a Dedekind pre-check; the
scan order is deterministic, so results are reproducible bit for bit.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .arith_nt import factorial_ratio, is_prime
from .coset_graph import build_coset_graph, s_bounds_check
from .errors import VerificationError
from .group_core import (
    SUBGROUP_ORDER_CAP,
    GroupTable,
    Subgroup,
    all_subgroups,
    classify_structure,
    closure_of,
    dihedral,
    direct_product,
    has_section,
    is_isomorphic,
    is_normal_subgroup,
    quotient_group,
    semidirect_product,
    subgroup_as_group,
    subgroup_conjugacy_classes,
    subgroup_relations,
    trivial_subgroup,
)
from . import presets
from .transversal import p_g

SECTION_SAMPLE_LIMIT = 12

TP_2_POW_40 = Fraction(1, 2**40)
TP_2_POW_8 = Fraction(1, 2**8)
TP_4_OVER_81 = Fraction(4, 81)


@dataclass(frozen=True)
class SubgroupClassRecord:
    """P and context for one conjugacy class of subgroups (representative)."""

    order: int
    index: int
    p: Fraction
    t_vector: tuple[int, ...]
    class_size: int
    generators: tuple[int, ...]
    is_normal: bool


@dataclass(frozen=True)
class TpResult:
    group_id: str
    tp: Fraction
    witnesses: tuple[tuple[int, ...], ...]
    subgroup_count: int
    table: tuple[SubgroupClassRecord, ...] | None = None


@dataclass(frozen=True)
class TheoremVerdict:
    theorem: str
    group: str
    hypothesis_holds: bool
    conclusion_holds: bool
    consistent: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "consistent",
                           (not self.hypothesis_holds) or self.conclusion_holds)


def tp(G: GroupTable, group_id: str = "", keep_table: bool = False,
       cap: int = SUBGROUP_ORDER_CAP) -> TpResult:
    """Exact minimum of P over all subgroups, with the attaining conjugacy
    class representatives listed by canonical generators."""
    if G._tp_cache is None or (keep_table and G._tp_cache.table is None):
        fresh = _compute_tp(G, cap)
        if G._tp_cache is not None and G._tp_cache.tp != fresh.tp:
            # a planted (file-cached) value must agree with recomputation
            raise VerificationError(
                f"cached value {G._tp_cache.tp} disagrees with recomputed {fresh.tp}")
        G._tp_cache = fresh
    result = G._tp_cache
    if not keep_table:
        result = dataclasses.replace(result, table=None)
    if group_id:
        result = dataclasses.replace(result, group_id=group_id)
    return result


def _compute_tp(G: GroupTable, cap: int) -> TpResult:
    subs = all_subgroups(G, cap)
    classes = subgroup_conjugacy_classes(G, subs)
    records = []
    best: Fraction | None = None
    attaining: list[Subgroup] = []
    for cls in classes:
        rep = cls[0]
        normal = len(cls) == 1
        if normal:
            value = Fraction(1)
            tvec = (1,) * rep.index
        else:
            graph = build_coset_graph(G, rep)
            value = p_g(G, rep, graph=graph)
            tvec = tuple(graph.t_vector)
            if best is None or value < best:
                best = value
                attaining = [rep]
            elif value == best:
                attaining.append(rep)
        records.append(SubgroupClassRecord(
            order=rep.order, index=rep.index, p=value, t_vector=tvec,
            class_size=len(cls), generators=rep.generators(), is_normal=normal))
    if best is None:  # Dedekind: every subgroup normal, the minimum is 1
        best = Fraction(1)
        attaining = [trivial_subgroup(G)]
    witnesses = tuple(s.generators() for s in
                      sorted(attaining, key=lambda s: (s.order, s.elems)))
    return TpResult(group_id="", tp=best, witnesses=witnesses,
                    subgroup_count=len(subs), table=tuple(records))


def is_dedekind_by_tp(G: GroupTable) -> bool:
    return tp(G).tp == 1


# ---------------------------------------------------------------------------
# Monotonicity laws
# ---------------------------------------------------------------------------

def verify_monotonicity(G: GroupTable, group_id: str = "") -> list[TheoremVerdict]:
    """Subgroup, quotient, section, and p-group laws for the invariant."""
    tp_g = tp(G).tp
    subs = all_subgroups(G)
    classes = subgroup_conjugacy_classes(G, subs)
    verdicts = []

    sub_pairs = []
    ok_sub = True
    for cls in classes:
        rep = cls[0]
        if rep.order == G.order:
            continue
        tp_h = tp(subgroup_as_group(G, rep)).tp
        sub_pairs.append((rep.order, str(tp_h)))
        ok_sub = ok_sub and tp_g <= tp_h
    verdicts.append(TheoremVerdict(
        "monotone-subgroups", group_id, hypothesis_holds=G.order > 1,
        conclusion_holds=ok_sub, details={"tp": str(tp_g), "pairs": sub_pairs}))

    ok_quot = True
    quot_pairs = []
    for cls in classes:
        rep = cls[0]
        if len(cls) > 1:
            continue
        Q, _ = quotient_group(G, rep)
        tp_q = tp(Q).tp
        quot_pairs.append((rep.order, str(tp_q)))
        ok_quot = ok_quot and tp_g <= tp_q
    verdicts.append(TheoremVerdict(
        "monotone-quotients", group_id, hypothesis_holds=True,
        conclusion_holds=ok_quot, details={"tp": str(tp_g), "pairs": quot_pairs}))

    ok_sec = True
    sections = []
    for cls in classes:
        rep = cls[0]
        if rep.order in (1, G.order):
            continue
        H = subgroup_as_group(G, rep)
        for N in all_subgroups(H):
            if len(sections) >= SECTION_SAMPLE_LIMIT:
                break
            if N.order in (1, H.order) or not is_normal_subgroup(H, N):
                continue
            X, _ = quotient_group(H, N)
            tp_x = tp(X).tp
            sections.append((rep.order, N.order, str(tp_x)))
            ok_sec = ok_sec and tp_g <= tp_x
        if len(sections) >= SECTION_SAMPLE_LIMIT:
            break
    verdicts.append(TheoremVerdict(
        "monotone-sections", group_id, hypothesis_holds=True,
        conclusion_holds=ok_sec, details={"tp": str(tp_g), "sections": sections}))

    primes = _prime_support(G.order)
    is_p_group = len(primes) == 1 and G.order > 1
    dedekind = tp_g == 1
    hyp = is_p_group and not dedekind
    concl = True
    if hyp:
        concl = tp_g <= factorial_ratio(primes[0])
    verdicts.append(TheoremVerdict(
        "non-dedekind-p-group", group_id, hypothesis_holds=hyp,
        conclusion_holds=concl,
        details={"tp": str(tp_g), "p": primes[0] if is_p_group else None}))
    return verdicts


def _prime_support(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Structure theorems
# ---------------------------------------------------------------------------

def _bad_section_catalog() -> list[tuple[str, GroupTable]]:
    return [("a4", presets.alternating_4()), ("d3", dihedral(3)),
            ("d5", dihedral(5)), ("d7", dihedral(7))]


def verify_structure_theorems(G: GroupTable, group_id: str = "") -> list[TheoremVerdict]:
    """The five gates tying the invariant's size to solubility, supersolubility,
    nilpotency, derived length, and odd order."""
    tp_g = tp(G).tp
    report = classify_structure(G)
    verdicts = []

    hyp = tp_g > TP_2_POW_40
    if hyp and not report.is_soluble:
        found, _ = has_section(G, presets.alternating_5())
        concl = found
        detail = "a5-section" if found else "none"
    else:
        concl = True
        detail = "soluble" if report.is_soluble else "vacuous"
    verdicts.append(TheoremVerdict(
        "solubility-criterion", group_id, hyp, concl,
        details={"tp": str(tp_g), "resolution": detail}))

    hyp = tp_g > TP_2_POW_8
    if hyp and not report.is_supersoluble:
        found, _ = has_section(G, presets.alternating_4())
        concl = found
        detail = "a4-section" if found else "none"
    else:
        concl = True
        detail = "supersoluble" if report.is_supersoluble else "vacuous"
    verdicts.append(TheoremVerdict(
        "supersolubility", group_id, hyp, concl,
        details={"tp": str(tp_g), "resolution": detail}))

    hyp = tp_g > TP_4_OVER_81
    if hyp and not report.is_nilpotent:
        detail = "none"
        concl = False
        for name, X in _bad_section_catalog():
            found, _ = has_section(G, X)
            if found:
                concl = True
                detail = f"{name}-section"
                break
    else:
        concl = True
        detail = "nilpotent" if report.is_nilpotent else "vacuous"
    verdicts.append(TheoremVerdict(
        "nilpotency", group_id, hyp, concl,
        details={"tp": str(tp_g), "resolution": detail}))

    hyp = tp_g > TP_4_OVER_81 and not report.is_abelian
    concl = report.derived_length == 2 if hyp else True
    verdicts.append(TheoremVerdict(
        "derived-length", group_id, hyp, concl,
        details={"tp": str(tp_g), "derived_length": report.derived_length}))

    hyp = G.order % 2 == 1 and not report.is_abelian
    concl = tp_g <= TP_4_OVER_81 if hyp else True
    verdicts.append(TheoremVerdict(
        "non-abelian-odd", group_id, hyp, concl, details={"tp": str(tp_g)}))
    return verdicts


# ---------------------------------------------------------------------------
# Special-value classifications
# ---------------------------------------------------------------------------

def classify_special_values(G: GroupTable, group_id: str = "") -> list[TheoremVerdict]:
    """Exact-value gates: the 1/2 and 1/4 classifications, the excluded
    product-of-two-primes values, and the placement constraints on subgroups
    whose P is a prime ratio or a product of two."""
    result = tp(G, keep_table=True)
    tp_g = result.tp
    verdicts = []

    hyp = tp_g == Fraction(1, 2)
    family = None
    if hyp:
        for name, ref in presets.half_classification_references(G.order).items():
            if is_isomorphic(G, ref):
                family = name
                break
    verdicts.append(TheoremVerdict(
        "tp-half-classification", group_id, hyp, family is not None if hyp else True,
        details={"tp": str(tp_g), "family": family}))

    hyp = tp_g == Fraction(1, 4)
    family = None
    if hyp:
        family = _quarter_family_of(G)
    verdicts.append(TheoremVerdict(
        "tp-quarter-classification", group_id, hyp, family is not None if hyp else True,
        details={"tp": str(tp_g), "family": family}))

    excluded = _excluded_prime_pair_values(tp_g)
    concl = all(tp_g != v for _, v in excluded)
    verdicts.append(TheoremVerdict(
        "pq-exclusion", group_id, True, concl,
        details={"tp": str(tp_g), "pairs_checked": [p for p, _ in excluded]}))

    place_hits = []
    place_ok = True
    pair_hits = []
    pair_ok = True
    for rec in result.table or ():
        if rec.is_normal:
            continue
        p_single = _as_single_prime_ratio(rec.p)
        if p_single is not None:
            sub = Subgroup(G, _subgroup_from_gens(G, rec.generators))
            rel = subgroup_relations(G, sub)
            m = rel.normalizer.order // sub.order
            n = sub.index
            ok = (sub.order % p_single == 0
                  and ((m == 1 and n == p_single + 1)
                       or (m == p_single and n == 2 * p_single)))
            place_hits.append((rec.order, p_single, m, n, ok))
            place_ok = place_ok and ok
        pq = _as_prime_pair_ratio(rec.p)
        if pq is not None:
            p, q = pq
            want = (q, p) + (1,) * (rec.index - p - q)
            ok = rec.t_vector == want
            pair_hits.append((rec.order, p, q, ok))
            pair_ok = pair_ok and ok
    verdicts.append(TheoremVerdict(
        "prime-ratio-placement", group_id, bool(place_hits), place_ok,
        details={"hits": place_hits}))
    verdicts.append(TheoremVerdict(
        "prime-pair-tvector", group_id, bool(pair_hits), pair_ok,
        details={"hits": pair_hits}))
    return verdicts


def _subgroup_from_gens(G: GroupTable, gens: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(x) for x in closure_of(G, gens))


def _quarter_family_of(G: GroupTable) -> str | None:
    ref = presets.quarter_family_i_reference(G.order)
    if ref is not None and is_isomorphic(G, ref[1]):
        return ref[0]
    refs = presets.quarter_classification_references()
    for M in all_subgroups(G):
        if M.order & (M.order - 1):
            continue  # not a power of two
        if G.order // M.order not in (12, 16):
            continue
        if not _is_cyclic_subgroup(G, M):
            continue
        if not is_normal_subgroup(G, M):
            continue
        Q, _ = quotient_group(G, M)
        for name, ref_group in refs.items():
            if Q.order == ref_group.order and is_isomorphic(Q, ref_group):
                return f"{name} quotient (order-{M.order} core)"
    return None


def _is_cyclic_subgroup(G: GroupTable, M: Subgroup) -> bool:
    return any(int(G.element_orders[e]) == M.order for e in M.elems)


def _excluded_prime_pair_values(tp_value: Fraction) -> list[tuple[tuple[int, int], Fraction]]:
    """All products f(p) f(q) for primes p < q that are >= the given value."""
    out = []
    p = 2
    while True:
        q = _next_prime_after(p)
        if factorial_ratio(p) * factorial_ratio(q) < tp_value:
            break
        while True:
            v = factorial_ratio(p) * factorial_ratio(q)
            if v < tp_value:
                break
            out.append(((p, q), v))
            q = _next_prime_after(q)
        p = _next_prime_after(p)
    return out


def _next_prime_after(n: int) -> int:
    k = n + 1
    while not is_prime(k):
        k += 1
    return k


def _as_single_prime_ratio(value: Fraction) -> int | None:
    p = 2
    while factorial_ratio(p) >= value:
        if factorial_ratio(p) == value:
            return p
        p = _next_prime_after(p)
    return None


def _as_prime_pair_ratio(value: Fraction) -> tuple[int, int] | None:
    for (p, q), v in _excluded_prime_pair_values(value):
        if v == value:
            return p, q
    return None


# ---------------------------------------------------------------------------
# Extension bounds
# ---------------------------------------------------------------------------

def semidirect_extension_check(G: GroupTable, K: GroupTable,
                               action: Sequence[Sequence[int]],
                               group_id: str = "") -> TheoremVerdict:
    """tp of the split extension is at most the minimum over subgroups of G of
    the product over K of P(G; H, H-image-under-k)."""
    ghat = semidirect_product(G, K, action)
    acts = [np.asarray(a, dtype=np.int64) for a in action]
    bound = None
    for H in all_subgroups(G):
        prod = Fraction(1)
        for k in range(K.order):
            image = Subgroup(G, tuple(sorted(int(acts[k][e]) for e in H.elems)))
            prod *= p_g(G, H, image)
        if bound is None or prod < bound:
            bound = prod
    tp_hat = tp(ghat).tp
    assert bound is not None
    return TheoremVerdict(
        "semidirect-extension-bound", group_id, True, tp_hat <= bound,
        details={"tp": str(tp_hat), "bound": str(bound), "equality": tp_hat == bound})


def direct_extension_check(factors: Sequence[GroupTable],
                           group_id: str = "") -> TheoremVerdict:
    """tp of a direct product is at most min over factors of tp(F)^(|G|/|F|)."""
    ghat = reduce(direct_product, factors)
    m = ghat.order
    bound = min(tp(F).tp ** (m // F.order) for F in factors)
    tp_hat = tp(ghat).tp
    return TheoremVerdict(
        "direct-extension-bound", group_id, True, tp_hat <= bound,
        details={"tp": str(tp_hat), "bound": str(bound), "equality": tp_hat == bound})


def extension_bounds(mode: str, *args, group_id: str = "") -> TheoremVerdict:
    if mode == "semidirect":
        return semidirect_extension_check(*args, group_id=group_id)
    if mode == "direct":
        return direct_extension_check(*args, group_id=group_id)
    raise ValueError(f"unknown extension mode {mode!r}")


# ---------------------------------------------------------------------------
# Graph-layer invariants as a sweep
# ---------------------------------------------------------------------------

def verify_graph_invariants(G: GroupTable, group_id: str = "") -> TheoremVerdict:
    """Build the coset graph for one representative per subgroup class (all the
    component invariants are asserted inside the builder) and check the
    component-count bracket on each."""
    ok = True
    details = []
    for cls in subgroup_conjugacy_classes(G, all_subgroups(G)):
        rep = cls[0]
        sb = s_bounds_check(G, rep)
        details.append((rep.order, sb.s, str(sb.lower), str(sb.upper), sb.holds))
        ok = ok and sb.holds
    return TheoremVerdict("graph-invariants", group_id, True, ok,
                          details={"per_class": details})


# ---------------------------------------------------------------------------
# Exploratory scans (conjectures; informative, never build-failing)
# ---------------------------------------------------------------------------

def commuting_probability(G: GroupTable) -> Fraction:
    return Fraction(len(G.conjugacy_classes), G.order)


def explore_tp_vs_commuting(G: GroupTable, group_id: str = "") -> TheoremVerdict:
    """Conjecture scan: tp <= cp except for the stated exceptional shapes.
    Always reported as consistent; the finding lives in the details."""
    tp_g = tp(G).tp
    cp_g = commuting_probability(G)
    holds = tp_g <= cp_g
    return TheoremVerdict("tp-vs-cp", group_id, False, True,
                          details={"tp": str(tp_g), "cp": str(cp_g), "tp_le_cp": holds})


def explore_cyclic_witness(G: GroupTable, group_id: str = "") -> TheoremVerdict:
    """Conjecture scan: is the minimum attained by a cyclic prime-power
    subgroup H with (H : core) <= p? Informative only."""
    result = tp(G, keep_table=True)
    found = False
    for rec in result.table or ():
        if rec.p != result.tp:
            continue
        sub = Subgroup(G, _subgroup_from_gens(G, rec.generators))
        if not _is_cyclic_subgroup(G, sub):
            continue
        primes = _prime_support(sub.order) or [1]
        if len(primes) != 1:
            continue
        core = subgroup_relations(G, sub).core
        if sub.order <= core.order * primes[0]:
            found = True
            break
    return TheoremVerdict("cyclic-witness", group_id, False, True,
                          details={"tp": str(result.tp), "cyclic_witness_found": found})
