"""Level-table parsing and the near-degeneracy search."""

import io
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import orthopara as op
from orthopara.exceptions import (
    MalformedJ,
    MalformedRow,
    MalformedTerm,
    NegativeEnergy,
    NonPositiveLifetime,
    UnknownUnit,
)
from orthopara.spectra import (
    DegeneratePair,
    EnergyLevel,
    ParserConfig,
    broadening_from_lifetime,
    find_degenerate_pairs,
    parse_level_table,
    serialize_level_table,
)

HBAR = op.constants.HBAR_EV_S


@pytest.fixture(scope="module")
def bundled_levels():
    return op.load_level_table(op.bundled_levels_path())


# -- parsing ------------------------------------------------------------------


def test_parse_row_converts_wavenumbers():
    (level,) = parse_level_table("1s4f | 3F* | 2 | 191492.711 cm-1")
    assert level.configuration == "1s4f"
    assert level.term == "3F*"
    assert level.multiplicity == 3
    assert level.orbital_l == 3
    assert level.j == Fraction(2)
    # hand conversion: 191492.711 * 1.239841984e-4 eV
    assert level.energy == pytest.approx(23.742070272777866, abs=1e-12)


def test_parse_empty_table_is_empty_list():
    assert parse_level_table("") == []
    assert parse_level_table("# only comments\n\n   \n") == []


def test_parse_rejects_doublet_term():
    with pytest.raises(MalformedTerm):
        parse_level_table("2s | 2F* | 2 | 1.0 eV")


@pytest.mark.parametrize("term", ["F*", "3f*", "3", "33", "3A*", "3F**"])
def test_parse_rejects_malformed_terms(term):
    with pytest.raises(MalformedTerm):
        parse_level_table(f"1s2p | {term} | 1 | 1.0 eV")


@pytest.mark.parametrize("j_text", ["1/3", "-1", "-1/2", "0.4", "x", "1/0"])
def test_parse_rejects_bad_j(j_text):
    with pytest.raises(MalformedJ):
        parse_level_table(f"1s2p | 3P* | {j_text} | 1.0 eV")


def test_parse_accepts_half_integer_j():
    (level,) = parse_level_table("1s2p | 3P* | 5/2 | 1.0 eV")
    assert level.j == Fraction(5, 2)


def test_parse_rejects_negative_energy():
    with pytest.raises(NegativeEnergy):
        parse_level_table("1s2s | 3S | 1 | -0.5 eV")


def test_parse_rejects_unknown_unit():
    with pytest.raises(UnknownUnit):
        parse_level_table("1s2s | 3S | 1 | 1.0 Ry")


def test_parse_requires_unit_without_default():
    with pytest.raises(UnknownUnit):
        parse_level_table("1s2s | 3S | 1 | 1.0")


def test_parse_default_unit_applies_to_bare_fields():
    (level,) = parse_level_table(
        "1s2s | 3S | 1 | 10000.0", ParserConfig(default_unit="cm-1")
    )
    assert level.energy == pytest.approx(10000.0 * 1.239841984e-4)
    # an explicit token still wins
    (level_ev,) = parse_level_table(
        "1s2s | 3S | 1 | 1.0 eV", ParserConfig(default_unit="cm-1")
    )
    assert level_ev.energy == 1.0


def test_parse_rejects_wrong_field_count():
    with pytest.raises(MalformedRow):
        parse_level_table("1s2s | 3S | 1")


def test_parse_errors_carry_line_numbers():
    table = "# header\n1s2s | 3S | 1 | 1.0 eV\n1s2p | 2P* | 1 | 2.0 eV\n"
    with pytest.raises(MalformedTerm) as excinfo:
        parse_level_table(table)
    assert excinfo.value.line_number == 3
    assert "line 3" in str(excinfo.value)


def test_parse_accepts_bytes_and_file_objects():
    text = "1s2s | 3S | 1 | 1.0 eV\n"
    assert parse_level_table(text.encode()) == parse_level_table(text)
    assert parse_level_table(io.StringIO(text)) == parse_level_table(text)
    assert parse_level_table(io.BytesIO(text.encode())) == parse_level_table(text)


def test_parse_preserves_row_order():
    table = (
        "1s3s | 3S | 1 | 3.0 eV\n"
        "1s2s | 3S | 1 | 1.0 eV\n"
        "1s4s | 1S | 0 | 2.0 eV\n"
    )
    parsed = parse_level_table(table)
    assert [lv.energy for lv in parsed] == [3.0, 1.0, 2.0]


def test_roundtrip_parse_serialize_parse(bundled_levels):
    assert parse_level_table(serialize_level_table(bundled_levels)) == bundled_levels


# -- broadening ---------------------------------------------------------------


def test_broadening_nanosecond_lifetime_matches_micro_ev_scale():
    value = broadening_from_lifetime(1e-9)
    assert value == pytest.approx(6.582119569e-7, rel=1e-12)
    # same order as the 1e-6 eV scale used for the level search
    assert 1e-7 < value < 1e-6


def test_broadening_hbar_lifetime_is_unity():
    assert broadening_from_lifetime(HBAR) == 1.0


def test_broadening_is_linear_in_inverse_lifetime():
    assert broadening_from_lifetime(2e-9) == pytest.approx(
        broadening_from_lifetime(1e-9) / 2.0, rel=1e-12
    )
    assert broadening_from_lifetime(2e-9) == pytest.approx(3.2910597845e-7, rel=1e-12)


@pytest.mark.parametrize("tau", [0.0, -1e-9, float("nan"), float("inf")])
def test_broadening_rejects_nonpositive_lifetimes(tau):
    with pytest.raises(NonPositiveLifetime):
        broadening_from_lifetime(tau)


# -- pair finding ---------------------------------------------------------------


def test_bundled_table_contains_the_4f_pair(bundled_levels):
    pairs = find_degenerate_pairs(bundled_levels, 1e-6)
    flagship = [
        p for p in pairs
        if p.ortho.configuration == "1s4f" and p.ortho.j == 2 and p.para.j == 3
    ]
    assert len(flagship) == 1
    assert flagship[0].delta_e == pytest.approx(9e-7, rel=1e-4)


def test_bundled_table_contains_a_5f_pair(bundled_levels):
    pairs = find_degenerate_pairs(bundled_levels, 1e-6)
    assert any(p.ortho.configuration == "1s5f" for p in pairs)


def test_pairs_sorted_by_gap(bundled_levels):
    pairs = find_degenerate_pairs(bundled_levels, 1e-6)
    deltas = [p.delta_e for p in pairs]
    assert deltas == sorted(deltas)


def test_equal_multiplicity_levels_never_pair():
    twin = "1s2s | 3S | 1 | 1.0 eV\n1s3s | 3S | 1 | 1.0 eV\n"
    assert find_degenerate_pairs(parse_level_table(twin), 1e-3) == []


def test_same_configuration_filter():
    table = "1sXa | 3S | 1 | 1.0 eV\n1sXb | 1S | 0 | 1.0 eV\n"
    levels = parse_level_table(table)
    assert len(find_degenerate_pairs(levels, 1e-6)) == 1
    assert find_degenerate_pairs(levels, 1e-6, same_configuration_only=True) == []


def test_pair_construction_enforces_invariants():
    o = EnergyLevel("1s2s", "3S", Fraction(1), 1.0, 3, 0)
    p = EnergyLevel("1s2s", "1S", Fraction(0), 1.5, 1, 0)
    with pytest.raises(ValueError):
        DegeneratePair(ortho=o, para=p, delta_e=0.5, broadening=0.1)
    with pytest.raises(ValueError):
        DegeneratePair(ortho=o, para=o, delta_e=0.0, broadening=0.1)


def test_broadening_must_be_positive(bundled_levels):
    with pytest.raises(ValueError):
        find_degenerate_pairs(bundled_levels, 0.0)


# -- properties -----------------------------------------------------------------


def _level(multiplicity: int, energy: float, tag: int) -> EnergyLevel:
    term = "3S" if multiplicity == 3 else "1S"
    return EnergyLevel(
        configuration=f"1s{tag}s",
        term=term,
        j=Fraction(multiplicity - 1, 2),
        energy=energy,
        multiplicity=multiplicity,
        orbital_l=0,
    )


levels_strategy = st.lists(
    st.builds(
        _level,
        st.sampled_from([1, 3]),
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        st.integers(min_value=2, max_value=9),
    ),
    max_size=14,
)


@settings(max_examples=60, deadline=None)
@given(levels=levels_strategy, broadening=st.floats(min_value=1e-6, max_value=1.0))
def test_pairs_invariant_under_input_permutation(levels, broadening):
    forward = find_degenerate_pairs(levels, broadening)
    backward = find_degenerate_pairs(list(reversed(levels)), broadening)
    assert set(forward) == set(backward)


@settings(max_examples=60, deadline=None)
@given(
    levels=levels_strategy,
    b1=st.floats(min_value=1e-6, max_value=1.0),
    b2=st.floats(min_value=1e-6, max_value=1.0),
)
def test_shrinking_broadening_never_adds_pairs(levels, b1, b2):
    lo, hi = sorted((b1, b2))
    narrow = {(p.ortho, p.para) for p in find_degenerate_pairs(levels, lo)}
    wide = {(p.ortho, p.para) for p in find_degenerate_pairs(levels, hi)}
    assert narrow <= wide


@settings(max_examples=60, deadline=None)
@given(levels=levels_strategy, broadening=st.floats(min_value=1e-6, max_value=1.0))
def test_every_pair_within_broadening(levels, broadening):
    for pair in find_degenerate_pairs(levels, broadening):
        assert pair.delta_e <= pair.broadening
        assert pair.broadening == broadening
        assert pair.delta_e == abs(pair.ortho.energy - pair.para.energy)
