import pytest
from hypothesis import given, strategies as st

from markovtoric import (
    Binomial,
    ModelSpec,
    RelationError,
    build_design_matrix,
    canonicalize,
    enumerate_paths,
    generators_for,
    homogeneous_family,
    kernel_membership,
    nonhomogeneous_generators,
    permutation_linear_relations,
    slice_linear_generators,
)
from conftest import make_binary_chain, make_illness_death
from oracles import brute_force_degree2, degree2_diffs
from reference_data import ILLNESS_DEATH_RELATIONS


def as_binomial(table, fixture):
    plus, minus = fixture
    to_side = lambda side: {table.index(tuple(p)): e for p, e in side}
    return canonicalize(to_side(plus), to_side(minus))


class TestCanonicalize:
    def test_common_factor_removed(self):
        b = canonicalize({0: 2, 1: 1}, {0: 1, 2: 1})
        assert b.plus == ((0, 1), (1, 1))
        assert b.minus == ((2, 1),)

    def test_degenerate_rejected(self):
        with pytest.raises(RelationError):
            canonicalize({0: 1, 1: 1}, {1: 1, 0: 1})

    def test_plus_side_is_lex_larger(self):
        b = canonicalize({5: 1}, {0: 1})
        assert b.plus == ((0, 1),)
        assert b.minus == ((5, 1),)

    def test_orientation_ignores_input_order(self):
        assert canonicalize({0: 1}, {1: 1}) == canonicalize({1: 1}, {0: 1})

    def test_accepts_item_iterables(self):
        assert canonicalize([(0, 1), (0, 1)], {1: 2}) == \
            canonicalize({0: 2}, {1: 2})

    def test_negative_exponent_rejected(self):
        with pytest.raises(RelationError):
            canonicalize({0: -1}, {1: 1})

    @given(st.dictionaries(st.integers(0, 5), st.integers(1, 3), min_size=1),
           st.dictionaries(st.integers(0, 5), st.integers(1, 3), min_size=1))
    def test_canonical_form_is_stable(self, u, v):
        try:
            b1 = canonicalize(dict(u), dict(v))
        except RelationError:
            return
        b2 = canonicalize(dict(b1.plus), dict(b1.minus))
        assert b1 == b2


class TestBinomial:
    def test_text_rendering(self, illness_death):
        table = enumerate_paths(illness_death)
        b = canonicalize({table.index(("0", "0", "1", "1")): 1,
                          table.index(("0", "1", "1", "2")): 1},
                         {table.index(("0", "0", "1", "2")): 1,
                          table.index(("0", "1", "1", "1")): 1})
        text = b.text(table)
        assert " - " in text
        assert text.count("p_") == 4
        assert "p_0011" in text

    def test_text_exponents(self):
        table = enumerate_paths(make_binary_chain(1, 3))
        b = canonicalize({0: 2}, {1: 1, 2: 1})
        assert "^2" in b.text(table)

    def test_degree_and_support(self):
        b = canonicalize({0: 1, 3: 1}, {1: 1, 2: 1})
        assert b.degree() == 2
        assert b.support() == (0, 1, 2, 3)


class TestNonhomogeneousGenerators:
    def test_illness_death_matches_frozen_relations(self, illness_death):
        table = enumerate_paths(illness_death)
        emitted = set(nonhomogeneous_generators(illness_death, table).binomials)
        frozen = {as_binomial(table, fx) for fx in ILLNESS_DEATH_RELATIONS}
        assert emitted == frozen

    def test_rejects_homogeneous_spec(self, illness_death_hom):
        with pytest.raises(RelationError):
            nonhomogeneous_generators(illness_death_hom)

    def test_all_emitted_pass_kernel(self, reversible_illness_death):
        table = enumerate_paths(reversible_illness_death)
        design = build_design_matrix(reversible_illness_death, table)
        rs = nonhomogeneous_generators(reversible_illness_death, table)
        assert len(rs) > 0
        for b in rs.binomials:
            assert kernel_membership(b, design).ok

    def test_degree2_complete_for_unrestricted_binary_n3(self):
        spec = make_binary_chain(1, 3)
        table = enumerate_paths(spec)
        design = build_design_matrix(spec, table)
        emitted = set(nonhomogeneous_generators(spec, table).binomials)
        assert degree2_diffs(emitted) == degree2_diffs(brute_force_degree2(design))

    def test_unrestricted_spec_has_no_slice(self):
        spec = make_binary_chain(1, 3)
        assert nonhomogeneous_generators(spec).slice_paths == ()

    def test_restricted_spec_lists_missing_paths(self, illness_death):
        rs = nonhomogeneous_generators(illness_death)
        assert len(rs.slice_paths) == 3 ** 4 - 14
        assert ("1", "0", "0", "0") in rs.slice_paths

    def test_no_duplicate_relations(self, illness_death):
        rs = nonhomogeneous_generators(illness_death)
        assert len(set(rs.binomials)) == len(rs.binomials)


class TestSliceLinearGenerators:
    def test_complement_of_path_table(self, illness_death):
        sliced = set(slice_linear_generators(illness_death))
        admissible = set(enumerate_paths(illness_death))
        assert not (sliced & admissible)
        assert len(sliced) + len(admissible) == 3 ** 4


class TestHomogeneousFamily:
    def test_rejects_nonhomogeneous_spec(self, illness_death):
        with pytest.raises(RelationError):
            homogeneous_family(illness_death)

    def test_all_emitted_pass_kernel(self, illness_death_hom):
        table = enumerate_paths(illness_death_hom)
        design = build_design_matrix(illness_death_hom, table)
        rs = homogeneous_family(illness_death_hom, table)
        assert len(rs) > 0
        for b in rs.binomials:
            assert kernel_membership(b, design).ok

    def test_mismatched_boundary_swap_not_emitted(self):
        # exchanging different positions with clipped context is unsound:
        # p_001 p_110 - p_101 p_100 is NOT in the pooled kernel
        spec = make_binary_chain(1, 3, homogeneous=True)
        table = enumerate_paths(spec)
        design = build_design_matrix(spec, table)
        bad = canonicalize(
            {table.index(("0", "0", "1")): 1, table.index(("1", "1", "0")): 1},
            {table.index(("1", "0", "1")): 1, table.index(("1", "0", "0")): 1})
        assert not kernel_membership(bad, design).ok
        assert bad not in set(homogeneous_family(spec, table).binomials)

    def test_same_position_boundary_swap_emitted(self):
        # swapping the last symbol of two paths with a shared final window
        # is sound even though the right context is clipped to nothing
        spec = make_binary_chain(1, 3, homogeneous=True)
        table = enumerate_paths(spec)
        b = canonicalize(
            {table.index(("0", "0", "1")): 1, table.index(("1", "0", "0")): 1},
            {table.index(("0", "0", "0")): 1, table.index(("1", "0", "1")): 1})
        assert b in set(homogeneous_family(spec, table).binomials)

    def test_squares_can_appear(self):
        # p_010^2 - p_011 p_110-type relations use one path twice
        spec = make_binary_chain(1, 4, homogeneous=True)
        rs = homogeneous_family(spec)
        assert any(e == 2 for b in rs.binomials for _, e in b.plus + b.minus)


class TestPermutationLinearRelations:
    def test_equal_statistics_paths_are_linked(self):
        spec = make_binary_chain(1, 5, homogeneous=True)
        table = enumerate_paths(spec)
        rs = permutation_linear_relations(spec, table)
        expected = canonicalize(
            {table.index(("0", "0", "1", "1", "0")): 1},
            {table.index(("0", "1", "1", "0", "0")): 1})
        assert expected in set(rs.binomials)
        assert all(b.degree() == 1 for b in rs.binomials)

    def test_no_relations_at_short_horizon(self):
        # with n = 3 all paths have distinct pooled statistics
        spec = make_binary_chain(1, 3, homogeneous=True)
        assert len(permutation_linear_relations(spec)) == 0

    def test_all_emitted_pass_kernel(self):
        spec = make_binary_chain(1, 5, homogeneous=True)
        table = enumerate_paths(spec)
        design = build_design_matrix(spec, table)
        for b in permutation_linear_relations(spec, table).binomials:
            assert kernel_membership(b, design).ok


class TestGeneratorsFor:
    def test_nonhomogeneous_dispatch(self, illness_death):
        rs = generators_for(illness_death)
        assert set(rs.provenance) == {"nonhom-exchange"}

    def test_homogeneous_dispatch_merges_families(self):
        spec = make_binary_chain(1, 5, homogeneous=True)
        rs = generators_for(spec)
        assert "hom-exchange" in rs.provenance
        assert "hom-linear" in rs.provenance

    def test_restricted_homogeneous_gets_slice(self, illness_death_hom):
        rs = generators_for(illness_death_hom)
        assert len(rs.slice_paths) == 3 ** 4 - 14


class TestRelationSet:
    def test_text_lines_cover_relations_and_slice(self, illness_death):
        rs = generators_for(illness_death)
        lines = rs.text_lines()
        assert len(lines) == len(rs) + len(rs.slice_paths)
        assert any("[slice]" in line for line in lines)

    def test_tagged_filters_by_provenance(self):
        spec = make_binary_chain(1, 5, homogeneous=True)
        rs = generators_for(spec)
        linear = rs.tagged("hom-linear")
        assert linear
        assert all(b.degree() == 1 for b in linear)
