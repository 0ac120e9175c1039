import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpcalc import coset_graph as cg
from tpcalc import group_core as gc
from tpcalc import transversal as tv
from tpcalc.errors import (
    BudgetError,
    ParameterError,
    PreconditionError,
    SizeLimitError,
)


def permanent_oracle(M) -> int:
    """Independent oracle: the defining permutation expansion."""
    M = [list(map(int, row)) for row in M]
    n = len(M)
    return sum(math.prod(M[i][s[i]] for i in range(n))
               for s in itertools.permutations(range(n)))


def dt_count_oracle(G, H, K) -> int:
    """Independent oracle: try every way of picking one element per left coset
    and test the right-transversal property from raw cosets."""
    lefts = []
    seen = set()
    for g in range(G.order):
        coset = tuple(sorted(int(x) for x in G.mul[g, H.elem_array]))
        if coset not in seen:
            seen.add(coset)
            lefts.append(coset)
    right_of = {}
    seen = set()
    rid = 0
    for g in range(G.order):
        if g in right_of:
            continue
        coset = [int(x) for x in G.mul[K.elem_array, g]]
        for x in coset:
            right_of[x] = rid
        rid += 1
    count = 0
    for choice in itertools.product(*lefts):
        if len({right_of[x] for x in choice}) == len(lefts):
            count += 1
    return count


def subgroup_of_order(G, k):
    return next(s for s in gc.all_subgroups(G) if s.order == k)


class TestPFromTvector:
    def test_all_ones(self):
        assert tv.p_from_tvector([1] * 7) == 1

    def test_two_one(self):
        assert tv.p_from_tvector(cg.TVector((2, 1))) == Fraction(1, 2)

    def test_three_one(self):
        assert tv.p_from_tvector((3, 1)) == Fraction(2, 9)

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError):
            tv.p_from_tvector(())


class TestPG:
    def test_s3(self, zoo):
        assert tv.p_g(zoo["s3"], subgroup_of_order(zoo["s3"], 2)) == Fraction(1, 2)

    def test_normal_gives_one(self, zoo):
        for name in ("c6", "q8", "d4"):
            G = zoo[name]
            for H in gc.all_subgroups(G):
                if gc.is_normal_subgroup(G, H):
                    assert tv.p_g(G, H) == 1

    def test_frobenius_complement_value(self):
        for q in (4, 5, 7, 8, 9):
            G = gc.field_frobenius(q)
            comp = gc.subgroup_generated(G, [k * q for k in range(1, q - 1)])
            want = Fraction(math.factorial(q - 1), (q - 1) ** (q - 1))
            assert tv.p_g(G, comp) == want

    def test_one_iff_normal_equal_pair(self, zoo):
        for name in ("s3", "d4", "q8", "a4", "c3_c4"):
            G = zoo[name]
            subs = gc.all_subgroups(G)
            by_order = {}
            for s in subs:
                by_order.setdefault(s.order, []).append(s)
            for bucket in by_order.values():
                for H in bucket:
                    for K in bucket:
                        value = tv.p_g(G, H, K)
                        expect_one = H.elems == K.elems and gc.is_normal_subgroup(G, H)
                        assert (value == 1) == expect_one


class TestPPrime:
    def test_d5_reflection(self, zoo):
        H = subgroup_of_order(zoo["d5"], 2)
        assert tv.p_prime_subgroup(zoo["d5"], H) == Fraction(1, 4)

    def test_central_involution(self, zoo):
        q8 = zoo["q8"]
        H = subgroup_of_order(q8, 2)  # the unique involution, central
        assert tv.p_prime_subgroup(q8, H) == 1

    def test_a4_c3(self, zoo):
        H = subgroup_of_order(zoo["a4"], 3)
        assert tv.p_prime_subgroup(zoo["a4"], H) == Fraction(2, 9)

    def test_composite_rejected(self, zoo):
        with pytest.raises(ParameterError):
            tv.p_prime_subgroup(zoo["d4"], subgroup_of_order(zoo["d4"], 4))


class TestWeightMatrix:
    def test_whole_group(self, zoo):
        wm = tv.weight_matrix(zoo["s3"], gc.full_subgroup(zoo["s3"]))
        assert wm.entries.tolist() == [[6]]

    def test_s3_structure(self, zoo):
        s3 = zoo["s3"]
        wm = tv.weight_matrix(s3, subgroup_of_order(s3, 2))
        assert wm.entries.sum(axis=0).tolist() == [2, 2, 2]
        assert wm.entries.sum(axis=1).tolist() == [2, 2, 2]
        assert sorted(v for row in wm.entries.tolist() for v in row) \
            == [0, 0, 0, 0, 1, 1, 1, 1, 2]

    def test_normal_is_scaled_permutation(self, zoo):
        G = zoo["q8"]
        H = subgroup_of_order(G, 4)
        wm = tv.weight_matrix(G, H)
        ent = wm.entries
        assert ((ent == 0) | (ent == 4)).all()
        assert (np.count_nonzero(ent, axis=0) == 1).all()
        assert (np.count_nonzero(ent, axis=1) == 1).all()

    def test_matched_pairing_is_symmetric(self, zoo):
        for name in ("s3", "a4", "s4", "d6", "f20"):
            G = zoo[name]
            for cls in gc.subgroup_conjugacy_classes(G, gc.all_subgroups(G)):
                wm = tv.weight_matrix(G, cls[0])
                assert wm.matched
                assert np.array_equal(wm.entries, wm.entries.T), name


class TestPermanent:
    def test_all_ones(self):
        assert tv.permanent_ryser(np.ones((3, 3), dtype=int)) == 6

    def test_identity(self):
        assert tv.permanent_ryser(np.eye(6, dtype=int)) == 1

    def test_s3_weight_matrix(self, zoo):
        wm = tv.weight_matrix(zoo["s3"], subgroup_of_order(zoo["s3"], 2))
        assert tv.permanent_ryser(wm.entries) == 4

    def test_against_expansion_oracle(self):
        rng = np.random.default_rng(20240817)
        for n in range(1, 7):
            for _ in range(25):
                M = rng.integers(-4, 7, size=(n, n))
                assert tv.permanent_ryser(M) == permanent_oracle(M)

    def test_bigint_fallback_matches(self):
        rng = np.random.default_rng(7)
        M = rng.integers(0, 10**9, size=(5, 5)).astype(object)
        assert tv.permanent_ryser(M) == permanent_oracle(M)

    def test_size_cap(self):
        with pytest.raises(SizeLimitError):
            tv.permanent_ryser(np.eye(25, dtype=int))

    @settings(deadline=None, max_examples=40, derandomize=True)
    @given(st.integers(2, 6), st.integers(0, 10**6))
    def test_invariant_under_row_column_permutations(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rng.integers(0, 5, size=(n, n))
        want = tv.permanent_ryser(M)
        rp = rng.permutation(n)
        cp = rng.permutation(n)
        assert tv.permanent_ryser(M[rp][:, cp]) == want


class TestEnumeration:
    def test_s3_count_with_oracle(self, zoo):
        s3 = zoo["s3"]
        H = subgroup_of_order(s3, 2)
        assert tv.dt_enumerate(s3, H) == 4
        assert dt_count_oracle(s3, H, H) == 4

    def test_a4_c3(self, zoo):
        H = subgroup_of_order(zoo["a4"], 3)
        assert tv.dt_enumerate(zoo["a4"], H) == 18
        assert dt_count_oracle(zoo["a4"], H, H) == 18

    def test_normal_gives_full_count(self, zoo):
        G = zoo["d4"]
        H = subgroup_of_order(G, 4)
        assert tv.dt_enumerate(G, H) == H.order ** H.index

    def test_budget(self, zoo):
        with pytest.raises(BudgetError):
            tv.dt_enumerate(zoo["s4"], subgroup_of_order(zoo["s4"], 2), budget=10)

    def test_oracle_agreement_on_pairs(self, zoo):
        for name in ("s3", "c6", "d4", "c2sq"):
            G = zoo[name]
            subs = gc.all_subgroups(G)
            by_order = {}
            for s in subs:
                by_order.setdefault(s.order, []).append(s)
            for bucket in by_order.values():
                for H in bucket:
                    for K in bucket:
                        if H.order ** H.index > 3000:
                            continue
                        assert tv.dt_enumerate(G, H, K) == dt_count_oracle(G, H, K)


class TestTripleAgreement:
    def test_formula_equals_permanent_and_enumeration(self, zoo):
        # index at most 12 across the unit corpus; acceptance covers order <= 24
        for name, G in zoo.items():
            if G.order > 16:
                continue
            subs = gc.all_subgroups(G)
            by_order = {}
            for s in subs:
                by_order.setdefault(s.order, []).append(s)
            for bucket in by_order.values():
                if (G.order // bucket[0].order) > 12:
                    continue
                for H in bucket:
                    for K in bucket:
                        value = tv.p_g(G, H, K)
                        wm = tv.weight_matrix(G, H, K)
                        per = tv.permanent_ryser(wm.entries)
                        assert value == Fraction(per, H.order ** H.index), name
                        if H.order ** H.index <= 10**4:
                            count = tv.dt_enumerate(G, H, K)
                            assert value == Fraction(count, H.order ** H.index)


class TestStochasticForm:
    def test_normal_case_is_identity(self, zoo):
        G = zoo["c6"]
        H = subgroup_of_order(G, 2)
        rpt = tv.stochastic_form_checks(G, H)
        assert rpt.block_sizes == (1, 1, 1)
        assert rpt.trace == 3 and rpt.rank == 3 and rpt.idempotent
        assert rpt.symmetric and rpt.all_hold

    def test_s3(self, zoo):
        rpt = tv.stochastic_form_checks(zoo["s3"], subgroup_of_order(zoo["s3"], 2))
        assert rpt.trace == 2 and rpt.rank == 2
        assert rpt.idempotent and rpt.blocks_uniform and rpt.symmetric

    def test_a4_c3(self, zoo):
        rpt = tv.stochastic_form_checks(zoo["a4"], subgroup_of_order(zoo["a4"], 3))
        assert rpt.trace == 2 and rpt.rank == 2 and rpt.all_hold

    def test_unequal_pair_block_form(self, zoo):
        s3 = zoo["s3"]
        twos = [s for s in gc.all_subgroups(s3) if s.order == 2]
        rpt = tv.stochastic_form_checks(s3, twos[0], twos[1])
        assert rpt.symmetric is None
        assert rpt.blocks_uniform and rpt.idempotent and rpt.trace == rpt.s

    def test_across_corpus(self, zoo):
        for name in ("d4", "d6", "q16", "c3_c4", "a4", "m4_2"):
            G = zoo[name]
            for cls in gc.subgroup_conjugacy_classes(G, gc.all_subgroups(G)):
                assert tv.stochastic_form_checks(G, cls[0]).all_hold, name


class TestBounds:
    def test_s3_hits_upper(self, zoo):
        rpt = tv.bounds_report(zoo["s3"], subgroup_of_order(zoo["s3"], 2))
        assert rpt.p_exact == Fraction(1, 2)
        assert rpt.conjugate_non_normal and rpt.holds_sharp_window
        assert rpt.all_hold

    def test_frobenius_20_hits_lower(self):
        G = gc.field_frobenius(5)
        comp = gc.subgroup_generated(G, [k * 5 for k in range(1, 4)])
        rpt = tv.bounds_report(G, comp)
        assert rpt.p_exact == Fraction(3, 32)
        assert rpt.p_exact == Fraction(math.factorial(4), 4**4)  # (n-1)!/(n-1)^(n-1)
        assert rpt.all_hold

    def test_normal_collapses(self, zoo):
        G = zoo["q8"]
        rpt = tv.bounds_report(G, subgroup_of_order(G, 4))
        assert rpt.m == rpt.n == rpt.s
        assert rpt.lower_factorial == 1 and rpt.upper_half_power == 1
        assert rpt.upper_seven_eighths is None
        assert rpt.all_hold

    def test_all_hold_across_corpus(self, zoo):
        for name, G in zoo.items():
            if G.order > 24:
                continue
            for cls in gc.subgroup_conjugacy_classes(G, gc.all_subgroups(G)):
                if len(cls) == 1:
                    continue
                assert tv.bounds_report(G, cls[0]).all_hold, name


class TestSpecialFormulas:
    def test_malnormal_pairs_match_closed_form(self, zoo):
        # when H meets every conjugate of K trivially off the KH double coset
        # and the configuration is clean (H = K, or H and K intersect
        # trivially), P is a pure power of f(|H|)
        hits = 0
        for name, G in zoo.items():
            if G.order > 24:
                continue
            subs = gc.all_subgroups(G)
            by_order = {}
            for s in subs:
                by_order.setdefault(s.order, []).append(s)
            for bucket in by_order.values():
                for H in bucket:
                    if H.order == 1 or H.order == G.order:
                        continue
                    for K in bucket:
                        if not _malnormal_off_kh(G, H, K):
                            continue
                        meet = len(set(H.elems) & set(K.elems))
                        if H.elems != K.elems and meet != 1:
                            continue
                        graph = cg.build_coset_graph(G, H, K)
                        n, m = graph.n, graph.m
                        if (n - m) % H.order != 0:
                            continue
                        want = Fraction(math.factorial(H.order),
                                        H.order ** H.order) ** ((n - m) // H.order)
                        assert tv.p_g(G, H, K, graph=graph) == want, name
                        hits += 1
        assert hits >= 12

    def test_ratio_sequence_decreasing_to_fifty(self):
        from tpcalc.arith_nt import factorial_ratio
        vals = [factorial_ratio(t) for t in range(1, 51)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_index_three_conjugate_non_normal_forces_one_half(self, zoo):
        # at index 3 the sharp window pins the value completely
        hits = 0
        for name, G in zoo.items():
            for cls in gc.subgroup_conjugacy_classes(G, gc.all_subgroups(G)):
                if len(cls) == 1 or cls[0].index != 3:
                    continue
                assert tv.p_g(G, cls[0]) == Fraction(1, 2), name
                hits += 1
        assert hits >= 3


def _malnormal_off_kh(G, H, K):
    kh = set()
    for k in K.elems:
        for h in H.elems:
            kh.add(int(G.mul[k, h]))
    for g in range(G.order):
        if g in kh:
            continue
        conj = K.conjugate_by(g)
        if len(set(H.elems) & set(conj.elems)) > 1:
            return False
    return True
