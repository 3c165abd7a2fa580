from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from markovtoric import (
    InadmissiblePathError,
    ModelSpec,
    ParameterError,
    ParameterPoint,
    SpecificationError,
    as_fraction,
    enumerate_paths,
    format_symbol,
    path_probability,
    path_probability_extended,
    symbolic_path_monomial,
    uniform_parameters,
    validate_model,
    validate_parameters,
)
from conftest import make_binary_chain, make_illness_death, make_survival


class TestAsFraction:
    def test_int_and_fraction_pass_through(self):
        assert as_fraction(3) == Fraction(3)
        assert as_fraction(Fraction(2, 7)) == Fraction(2, 7)

    def test_strings_parse_exactly(self):
        assert as_fraction("3/7") == Fraction(3, 7)
        assert as_fraction("0.55") == Fraction(11, 20)

    def test_float_rejected(self):
        with pytest.raises(ParameterError):
            as_fraction(0.1)

    def test_garbage_rejected(self):
        with pytest.raises(ParameterError):
            as_fraction("3/7/2")


class TestModelSpec:
    def test_duplicate_states_rejected(self):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "0", "1"], 1, 3)

    def test_order_must_leave_room_for_a_transition(self):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "1"], 3, 3)

    def test_unknown_state_in_forbidden_rejected(self):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "1"], 1, 3, forbidden=[("0", "9")])

    def test_absorbing_self_loop_cannot_be_forbidden(self):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "1"], 1, 3, absorbing=["1"],
                      forbidden=[("1", "1")])

    def test_allowed_and_forbidden_are_mutually_exclusive(self):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "1"], 1, 3, forbidden=[("1", "0")],
                      allowed={("0",): ["0", "1"], ("1",): ["1"]})

    def test_initial_must_be_known_history(self, illness_death):
        with pytest.raises(SpecificationError):
            ModelSpec(["0", "1"], 1, 3, initial=["7"])

    def test_successors_follow_declaration_order(self, illness_death):
        assert illness_death.successors(("0",)) == ("0", "1", "2")
        assert illness_death.successors(("1",)) == ("1", "2")
        assert illness_death.successors(("2",)) == ("2",)

    def test_absorbing_state_only_self_loops(self, illness_death):
        assert illness_death.successors(("2",)) == ("2",)

    def test_histories_exclude_internally_forbidden_blocks(self):
        spec = make_survival()
        # order 1: every state is a history
        assert spec.histories == (("0",), ("1",))
        spec2 = ModelSpec(["0", "1"], 2, 4, forbidden=[("1", "0")])
        assert ("1", "0") not in spec2.histories

    def test_check_sequence_pinpoints_offending_position(self, illness_death):
        with pytest.raises(InadmissiblePathError) as err:
            illness_death.check_sequence(("0", "1", "0", "0"))
        assert "position 3" in str(err.value)

    def test_check_sequence_rejects_wrong_horizon(self, illness_death):
        with pytest.raises(InadmissiblePathError):
            illness_death.check_sequence(("0", "1"))
        illness_death.check_sequence(("0", "1"), require_horizon=False)

    def test_check_sequence_rejects_disallowed_initial_block(self, illness_death):
        with pytest.raises(InadmissiblePathError):
            illness_death.check_sequence(("2", "2", "2", "2"))

    def test_with_horizon_preserves_structure(self, illness_death):
        shorter = illness_death.with_horizon(3)
        assert shorter.horizon == 3
        assert shorter.transition_pairs == illness_death.transition_pairs
        assert shorter.initial_blocks == illness_death.initial_blocks

    def test_unrestricted_companion_allows_everything(self, illness_death):
        full = illness_death.unrestricted()
        assert len(enumerate_paths(full)) == 3 ** 4

    def test_levels(self, illness_death, illness_death_hom):
        assert illness_death.levels() == (2, 3, 4)
        assert illness_death_hom.levels() == (None,)

    def test_symbol_enumeration_covers_allowed_support(self, illness_death):
        syms = illness_death.symbols()
        assert ("pi", ("0",)) in syms
        assert ("a", 2, ("0",), "1") in syms
        assert ("a", 2, ("1",), "0") not in syms


def test_format_symbol_compact_and_comma_forms():
    assert format_symbol(("pi", ("0",))) == "pi_0"
    assert format_symbol(("a", None, ("0",), "1")) == "a_01"
    assert format_symbol(("a", 3, ("0", "1"), "2")) == "a3_012"
    assert format_symbol(("a", None, ("VV",), "C")) == "a_VV,C"


class TestValidateModel:
    def test_clean_spec_has_no_findings(self, illness_death):
        assert validate_model(illness_death) == []

    def test_dead_end_before_horizon_is_an_error(self):
        # 1 has no successors at all: paths through 1 stall
        spec = ModelSpec(["0", "1"], 1, 3,
                         forbidden=[("1", "0"), ("1", "1")], initial=["0"])
        findings = validate_model(spec)
        assert any(sev == "error" for sev, _ in findings)

    def test_unreachable_state_is_a_warning(self):
        spec = ModelSpec(["0", "1", "2"], 1, 3,
                         forbidden=[("0", "2"), ("1", "2"), ("2", "0"),
                                    ("2", "1")],
                         absorbing=["2"], initial=["0", "1"])
        findings = validate_model(spec)
        assert any(sev == "warning" and "2" in msg for sev, msg in findings)


class TestParameters:
    def test_uniform_rows_sum_to_one(self, illness_death):
        params = uniform_parameters(illness_death)
        assert validate_parameters(illness_death, params) == []

    def test_row_sum_violation_reported(self, illness_death):
        params = uniform_parameters(illness_death)
        params.trans[(2, ("0",), "0")] = Fraction(1, 2)
        assert validate_parameters(illness_death, params)

    def test_entry_off_allowed_support_reported(self, illness_death):
        params = uniform_parameters(illness_death)
        # an explicit zero on a forbidden transition is consistent
        params.trans[(2, ("1",), "0")] = Fraction(0)
        assert validate_parameters(illness_death, params) == []
        params.trans[(2, ("1",), "0")] = Fraction(1, 100)
        problems = validate_parameters(illness_death, params)
        assert any("forbidden" in p for p in problems)

    def test_missing_entries_read_as_zero(self, illness_death):
        params = ParameterPoint({}, {})
        assert params.initial(("0",)) == 0
        assert params.transition(None, ("0",), "1") == 0


class TestPathProbability:
    def test_factorizes_over_levels(self, illness_death):
        params = uniform_parameters(illness_death)
        # pi has 2 allowed blocks, row 0 has 3 successors, row 1 has 2
        p = path_probability(illness_death, params, ("0", "1", "1", "2"))
        assert p == Fraction(1, 2) * Fraction(1, 3) * Fraction(1, 2) * Fraction(1, 2)

    def test_inadmissible_path_raises(self, illness_death):
        params = uniform_parameters(illness_death)
        with pytest.raises(InadmissiblePathError):
            path_probability(illness_death, params, ("1", "0", "0", "0"))

    def test_extended_gives_zero_off_model(self, illness_death):
        params = uniform_parameters(illness_death)
        assert path_probability_extended(
            illness_death, params, ("1", "0", "0", "0")) == 0

    def test_uniform_probabilities_sum_to_one(self, illness_death):
        params = uniform_parameters(illness_death)
        total = sum(path_probability(illness_death, params, p)
                    for p in enumerate_paths(illness_death))
        assert total == 1

    def test_homogeneous_pools_levels(self, illness_death_hom):
        params = uniform_parameters(illness_death_hom)
        p = path_probability(illness_death_hom, params, ("0", "0", "0", "0"))
        assert p == Fraction(1, 2) * Fraction(1, 3) ** 3

    def test_symbolic_monomial_matches_numeric(self, illness_death):
        params = uniform_parameters(illness_death)
        path = ("0", "0", "1", "2")
        mono = symbolic_path_monomial(illness_death, path)
        value = Fraction(1)
        for sym, e in mono.items():
            if sym[0] == "pi":
                value *= params.initial(sym[1]) ** e
            else:
                value *= params.transition(sym[1], sym[2], sym[3]) ** e
        assert value == path_probability(illness_death, params, path)


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=2, max_value=5))
def test_uniform_parameters_always_valid(k, extra):
    n = k + extra
    spec = make_binary_chain(k, n)
    assert validate_parameters(spec, uniform_parameters(spec)) == []


@given(st.data())
def test_probabilities_sum_to_one_on_random_small_specs(data):
    k = data.draw(st.integers(min_value=1, max_value=2))
    n = k + data.draw(st.integers(min_value=1, max_value=3))
    hom = data.draw(st.booleans())
    spec = make_binary_chain(k, n, homogeneous=hom)
    params = uniform_parameters(spec)
    total = sum(path_probability(spec, params, p)
                for p in enumerate_paths(spec))
    assert total == 1
