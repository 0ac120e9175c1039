import itertools

import numpy as np
import pytest

from tpcalc import group_core as gc
from tpcalc import presets
from tpcalc.errors import (
    ActionError,
    FormatError,
    NormalityError,
    ParameterError,
    SizeLimitError,
)


def brute_force_subgroups(G: gc.GroupTable) -> set[tuple[int, ...]]:
    """Independent oracle for small G: test every subset containing 0."""
    n = G.order
    assert n <= 8
    out = set()
    rest = [x for x in range(n) if x != 0]
    for r in range(n):
        for combo in itertools.combinations(rest, r):
            elems = (0,) + combo
            ok = all(G.mul[a, b] in elems for a in elems for b in elems)
            if ok:
                out.add(tuple(sorted(elems)))
    return out


class TestTableValidation:
    def test_rejects_non_square(self):
        with pytest.raises(ParameterError):
            gc.GroupTable([[0, 1]])

    def test_rejects_wrong_identity(self):
        # C2 with the elements relabelled so the identity sits at index 1
        with pytest.raises(ParameterError):
            gc.GroupTable([[1, 0], [0, 1]])

    def test_rejects_non_latin(self):
        with pytest.raises(ParameterError):
            gc.GroupTable([[0, 1], [1, 1]])

    def test_rejects_nonassociative_loop(self):
        # search the smallest loop (Latin square with identity) that fails
        # associativity; it has order 5, and the constructor must reject it
        base = list(range(5))
        found = None
        for p2 in itertools.permutations(base):
            if p2[0] != 2:
                continue
            for p3 in itertools.permutations(base):
                if p3[0] != 3:
                    continue
                for p4 in itertools.permutations(base):
                    if p4[0] != 4:
                        continue
                    rows = [base, [1, 0, 3, 4, 2][:], list(p2), list(p3), list(p4)]
                    cols_ok = all(sorted(col) == base for col in zip(*rows))
                    if not cols_ok:
                        continue
                    assoc = all(
                        rows[rows[a][b]][c] == rows[a][rows[b][c]]
                        for a in range(5) for b in range(5) for c in range(5))
                    if not assoc:
                        found = rows
                        break
                if found:
                    break
            if found:
                break
        assert found is not None
        with pytest.raises(ParameterError):
            gc.GroupTable(found)

    def test_every_zoo_table_revalidates(self, zoo):
        for G in zoo.values():
            gc.GroupTable(G.mul)  # full checks run again without complaint


class TestNamedFamilies:
    def test_dihedral_3(self):
        G = gc.dihedral(3)
        assert G.order == 6 and not G.is_abelian

    def test_cp_rtimes_matches_dihedral(self):
        assert gc.is_isomorphic(gc.cp_rtimes_c2n(3, 1), gc.dihedral(3))

    def test_field_frobenius_5(self):
        G = gc.field_frobenius(5)
        assert G.order == 20
        comp = gc.subgroup_generated(G, [G.order // 4])  # first K-copy generator
        from tpcalc.coset_graph import frobenius_s2_check
        assert comp.order == 4
        assert frobenius_s2_check(G, comp).frobenius

    def test_quaternion_presentation(self):
        q8 = gc.generalized_quaternion(8)
        orders = sorted(int(o) for o in q8.element_orders)
        assert orders == [1, 2, 4, 4, 4, 4, 4, 4]

    def test_elementary_abelian(self):
        G = gc.elementary_abelian(3, 2)
        assert G.order == 9 and G.is_abelian
        assert all(int(G.element_orders[x]) in (1, 3) for x in range(9))

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            gc.cp_rtimes_c2n(4, 1)  # even p
        with pytest.raises(ParameterError):
            gc.field_frobenius(6)  # not a prime power
        with pytest.raises(ParameterError):
            gc.generalized_quaternion(4)  # m < 3
        with pytest.raises(ParameterError):
            gc.make_named_family("nope", 3)

    def test_dispatcher(self):
        assert gc.make_named_family("dihedral", 4).order == 8


class TestPermutationClosure:
    def test_a4_from_generators(self):
        G = gc.from_permutation_generators(4, [(1, 2, 0, 3), (1, 0, 3, 2)])
        assert G.order == 12

    def test_psl_order(self):
        assert presets.psl3_2().order == 168

    def test_empty_generators(self):
        assert gc.from_permutation_generators(3, []).order == 1

    def test_cap(self):
        with pytest.raises(SizeLimitError):
            gc.from_permutation_generators(5, [(1, 2, 0, 3, 4), (1, 2, 3, 4, 0)], cap=10)

    def test_invalid_permutation(self):
        with pytest.raises(ParameterError):
            gc.from_permutation_generators(3, [(0, 0, 1)])


class TestProducts:
    def test_c2_squared(self):
        got = gc.direct_product(gc.cyclic(2), gc.cyclic(2))
        assert np.array_equal(got.mul, gc.elementary_abelian(2, 2).mul)

    def test_s3_times_c5(self):
        assert gc.direct_product(gc.dihedral(3), gc.cyclic(5)).order == 30

    def test_product_with_trivial(self):
        A = gc.dihedral(4)
        got = gc.direct_product(A, gc.cyclic(1))
        assert np.array_equal(got.mul, A.mul)

    def test_trivial_action_is_direct_product(self):
        G, K = gc.cyclic(6), gc.cyclic(4)
        ident = np.arange(G.order)
        sdp = gc.semidirect_product(G, K, [ident] * K.order)
        assert np.array_equal(sdp.mul, gc.direct_product(K, G).mul)

    def test_inversion_action_gives_cpc2(self):
        G = gc.semidirect_product(gc.cyclic(3), gc.cyclic(4),
                                  gc.action_by_inversion(gc.cyclic(3), gc.cyclic(4)))
        assert gc.is_isomorphic(G, gc.cp_rtimes_c2n(3, 2))

    def test_c3sq_c4_order(self):
        assert presets.c3sq_rtimes_c4().order == 36

    def test_canonical_copies_embed(self):
        base, top = gc.cyclic(5), gc.cyclic(4)
        G = gc.semidirect_product(base, top, gc.action_by_inversion(base, top))
        base_copy = gc.subgroup_generated(G, list(range(base.order)))
        assert base_copy.order == base.order
        top_copy = gc.subgroup_generated(G, [base.order * k for k in range(top.order)])
        assert top_copy.order == top.order

    def test_bad_action_rejected(self):
        base, top = gc.cyclic(3), gc.cyclic(3)
        inv = base.inv.astype(np.int64)
        ident = np.arange(3, dtype=np.int64)
        with pytest.raises(ActionError):
            gc.semidirect_product(base, top, [ident, inv, inv])  # not a homomorphism
        with pytest.raises(ActionError):
            gc.semidirect_product(base, top, [ident, ident])  # wrong length
        with pytest.raises(ActionError):
            gc.semidirect_product(base, top, [ident, np.array([0, 0, 1]), ident])


class TestSubgroupEnumeration:
    def test_s3_has_six(self, zoo):
        subs = gc.all_subgroups(zoo["s3"])
        assert [s.order for s in subs] == [1, 2, 2, 2, 3, 6]

    def test_c6_has_four(self, zoo):
        assert len(gc.all_subgroups(zoo["c6"])) == 4

    def test_q8_all_normal(self, zoo):
        subs = gc.all_subgroups(zoo["q8"])
        assert len(subs) == 6
        assert all(gc.is_normal_subgroup(zoo["q8"], s) for s in subs)

    def test_brute_force_oracle_small_groups(self, zoo):
        for name in ("s3", "c6", "q8", "c2cube", "c8"):
            G = zoo[name]
            got = {s.elems for s in gc.all_subgroups(G)}
            assert got == brute_force_subgroups(G), name

    def test_closure_fixed_point(self, zoo):
        for name in ("s3", "d4", "a4", "c3_c4"):
            G = zoo[name]
            keys = {s.elems for s in gc.all_subgroups(G)}
            for s in gc.all_subgroups(G):
                for x in range(G.order):
                    grown = gc.subgroup_generated(G, list(s.elems) + [x])
                    assert grown.elems in keys

    def test_sorted_deterministically(self, zoo):
        subs = gc.all_subgroups(zoo["d4"])
        assert subs == sorted(subs, key=lambda s: (s.order, s.elems))

    def test_cap(self):
        with pytest.raises(SizeLimitError):
            gc.all_subgroups(gc.cyclic(10), cap=5)


class TestSubgroupBasics:
    def test_generated_empty_is_trivial(self, zoo):
        assert gc.subgroup_generated(zoo["s3"], []).elems == (0,)

    def test_generated_reflection(self, zoo):
        s3 = zoo["s3"]
        refl = next(x for x in range(6) if s3.element_orders[x] == 2)
        assert gc.subgroup_generated(s3, [refl]).order == 2

    def test_generated_everything(self, zoo):
        assert gc.subgroup_generated(zoo["s3"], list(range(6))).order == 6

    def test_idempotent(self, zoo):
        s3 = zoo["s3"]
        h = gc.subgroup_generated(s3, [1])
        assert gc.subgroup_generated(s3, h.elems).elems == h.elems

    def test_invalid_subgroup_rejected(self, zoo):
        with pytest.raises(ParameterError):
            gc.Subgroup(zoo["s3"], (0, 1))  # not closed unless 1 is an involution


class TestRelations:
    def test_s3_reflection(self, zoo):
        s3 = zoo["s3"]
        refl = next(x for x in range(6) if s3.element_orders[x] == 2)
        H = gc.subgroup_generated(s3, [refl])
        rel = gc.subgroup_relations(s3, H)
        assert rel.normalizer.elems == H.elems
        assert rel.core.order == 1
        assert not rel.is_normal

    def test_normal_subgroup(self, zoo):
        s3 = zoo["s3"]
        rot = next(x for x in range(6) if s3.element_orders[x] == 3)
        H = gc.subgroup_generated(s3, [rot])
        rel = gc.subgroup_relations(s3, H)
        assert rel.normalizer.order == 6
        assert rel.core.elems == H.elems
        assert rel.is_normal

    def test_top_generator_in_c3_c4(self, zoo):
        G = zoo["c3_c4"]  # base C3 at indices 0..2, top generator at index 3
        b = gc.subgroup_generated(G, [3])
        assert b.order == 4
        rel = gc.subgroup_relations(G, b)
        assert rel.normalizer.elems == b.elems
        b_squared = gc.subgroup_generated(G, [G.mul[3, 3]])
        assert rel.core.elems == b_squared.elems

    def test_conjugacy(self, zoo):
        s3 = zoo["s3"]
        refls = [x for x in range(6) if s3.element_orders[x] == 2]
        H = gc.subgroup_generated(s3, [refls[0]])
        K = gc.subgroup_generated(s3, [refls[1]])
        ok, g = gc.are_conjugate(s3, H, K)
        assert ok and H.conjugate_by(g).elems == K.elems
        same, g0 = gc.are_conjugate(s3, H, H)
        assert same and g0 == 0
        rot = gc.subgroup_generated(s3, [next(x for x in range(6) if s3.element_orders[x] == 3)])
        assert gc.are_conjugate(s3, H, rot) == (False, None)


class TestQuotients:
    def test_quotient_by_whole_group(self, zoo):
        s3 = zoo["s3"]
        Q, _ = gc.quotient_group(s3, gc.full_subgroup(s3))
        assert Q.order == 1

    def test_quotient_by_trivial(self, zoo):
        s3 = zoo["s3"]
        Q, proj = gc.quotient_group(s3, gc.trivial_subgroup(s3))
        assert gc.is_isomorphic(Q, s3)
        assert sorted(proj.tolist()) == sorted(range(6))

    def test_s3_mod_c3(self, zoo):
        s3 = zoo["s3"]
        rot = gc.subgroup_generated(s3, [next(x for x in range(6) if s3.element_orders[x] == 3)])
        Q, proj = gc.quotient_group(s3, rot)
        assert gc.is_isomorphic(Q, gc.cyclic(2))
        # surjective homomorphism with kernel exactly N
        assert set(proj.tolist()) == {0, 1}
        kernel = tuple(sorted(int(g) for g in range(6) if proj[g] == 0))
        assert kernel == rot.elems
        for a in range(6):
            for b in range(6):
                assert proj[s3.mul[a, b]] == Q.mul[proj[a], proj[b]]

    def test_non_normal_rejected(self, zoo):
        s3 = zoo["s3"]
        refl = gc.subgroup_generated(s3, [next(x for x in range(6) if s3.element_orders[x] == 2)])
        with pytest.raises(NormalityError):
            gc.quotient_group(s3, refl)


class TestIsomorphism:
    def test_c4_vs_klein(self):
        assert not gc.is_isomorphic(gc.cyclic(4), gc.elementary_abelian(2, 2))

    def test_q8_vs_d4(self, zoo):
        assert not gc.is_isomorphic(zoo["q8"], zoo["d4"])

    def test_frobenius_4_is_a4(self, zoo):
        assert gc.is_isomorphic(gc.field_frobenius(4), zoo["a4"])

    def test_d6_is_c2_times_d3(self):
        assert gc.is_isomorphic(gc.dihedral(6),
                                gc.direct_product(gc.cyclic(2), gc.dihedral(3)))

    def test_cap(self):
        with pytest.raises(SizeLimitError):
            gc.is_isomorphic(gc.cyclic(2), gc.cyclic(2), cap=1)

    def test_equivalence_relation_on_pool(self, zoo):
        pool = [G for name, G in sorted(zoo.items()) if G.order <= 24]
        assert len(pool) >= 20
        n = len(pool)
        matrix = [[gc.is_isomorphic(a, b) for b in pool] for a in pool]
        for i in range(n):
            assert matrix[i][i]
            for j in range(n):
                assert matrix[i][j] == matrix[j][i]
                for k in range(n):
                    if matrix[i][j] and matrix[j][k]:
                        assert matrix[i][k]


class TestStructure:
    def test_a4(self, zoo):
        rep = gc.classify_structure(zoo["a4"])
        assert rep.is_soluble and not rep.is_supersoluble and not rep.is_nilpotent
        assert rep.derived_length == 2

    def test_q8_dedekind(self, zoo):
        rep = gc.classify_structure(zoo["q8"])
        assert rep.is_dedekind and rep.is_nilpotent and not rep.is_abelian

    def test_a5_not_soluble(self):
        rep = gc.classify_structure(presets.alternating_5())
        assert not rep.is_soluble and rep.derived_length is None

    def test_implication_chain_everywhere(self, zoo):
        for name, G in zoo.items():
            if G.order > 64:
                continue
            rep = gc.classify_structure(G)  # __post_init__ asserts the chain
            assert (rep.derived_length is not None and rep.derived_length <= 1) \
                == rep.is_abelian, name

    def test_supersoluble_examples(self, zoo):
        assert gc.classify_structure(zoo["s3"]).is_supersoluble
        assert gc.classify_structure(zoo["c3_c4"]).is_supersoluble
        assert not gc.classify_structure(zoo["s4"]).is_supersoluble


class TestSections:
    def test_s4_has_a4_section(self, zoo):
        found, witness = gc.has_section(zoo["s4"], zoo["a4"])
        assert found
        H, N = witness
        assert H.order == 12 and N.order == 1

    def test_c2cube_c7_has_no_a4_section(self, zoo):
        G = presets.c2cube_rtimes_c7()
        found, _ = gc.has_section(G, zoo["a4"])
        assert not found

    def test_a5_has_d5_section(self):
        found, witness = gc.has_section(presets.alternating_5(), gc.dihedral(5))
        assert found
        H, N = witness
        assert H.order % 10 == 0

    def test_quotient_section(self, zoo):
        # C3:C4 maps onto D3 by killing the central involution
        found, witness = gc.has_section(zoo["c3_c4"], zoo["s3"])
        assert found


class TestTextFormats:
    def test_cayley_roundtrip(self, zoo):
        for name in ("s3", "q8"):
            text = gc.write_cayley_table(zoo[name])
            again = gc.read_cayley_table(text)
            assert np.array_equal(again.mul, zoo[name].mul)
            assert gc.write_cayley_table(again) == text

    def test_cayley_errors(self):
        with pytest.raises(FormatError):
            gc.read_cayley_table("")
        with pytest.raises(FormatError):
            gc.read_cayley_table("2\n0 1\n")
        with pytest.raises(FormatError):
            gc.read_cayley_table("2\n0 1\n1 x\n")

    def test_generator_roundtrip(self):
        text = gc.write_permutation_generators(4, [(1, 2, 0, 3), (1, 0, 3, 2)])
        degree, gens = gc.read_permutation_generators(text)
        assert degree == 4 and gens == [(1, 2, 0, 3), (1, 0, 3, 2)]
        assert gc.write_permutation_generators(degree, gens) == text

    def test_generator_errors(self):
        with pytest.raises(FormatError):
            gc.read_permutation_generators("3\n0 0 1\n")
