import numpy as np
import pytest

from speciation.scheme import (
    SchemeError,
    SchemeSyntaxError,
    exact_rank,
    parse_document,
    parse_scheme,
    render,
    stoichiometric_matrix,
)


def test_single_dissociation():
    s = parse_scheme("HB{0} = B{-1} + H{+1} ; pK=9.29")
    assert s.names == ["H", "HB", "B"]
    assert s.r == 1 and s.n == 2
    assert s.reactions[0].pK == 9.29
    np.testing.assert_array_equal(stoichiometric_matrix(s), [[1, -1, 1]])


def test_hydrogen_forced_to_index_zero():
    s = parse_scheme("HB{0} = B{-1} + H{+1} ; pK=9.29")
    assert s.species[0].name == "H" and s.species[0].index == 0
    assert s.hydrogen_index == 0


def test_tris_borate_dimensions(tris_borate):
    # eight buffer species besides H+; OH- is stored as an ordinary species
    non_h = [sp for sp in tris_borate.species if sp.name not in ("H", "OH")]
    assert len(non_h) == 8
    assert tris_borate.n == 9
    assert tris_borate.n - tris_borate.r == 2
    nu = stoichiometric_matrix(tris_borate)
    assert nu.shape == (7, 10)
    assert exact_rank(nu[:6]) == 6
    assert nu.dtype.kind == "i"


def test_trimerisation_row(tris_borate):
    nu = stoichiometric_matrix(tris_borate)
    row = nu[1]
    assert row[tris_borate.index("HB")] == -3
    assert row[tris_borate.index("H3B3")] == 1
    assert np.count_nonzero(row) == 2


def test_rows_conserve_charge(tris_borate):
    nu = stoichiometric_matrix(tris_borate)
    assert not np.any(nu @ tris_borate.charges)


def test_empty_document():
    with pytest.raises(SchemeError, match="scheme has no reactions"):
        parse_scheme("# nothing here\n")


def test_syntax_error_has_position():
    with pytest.raises(SchemeSyntaxError) as err:
        parse_scheme("HB{0} = B{-1} + H{+1} ; pK=abc")
    assert err.value.line == 1
    assert err.value.column is not None


def test_conflicting_charge():
    with pytest.raises(SchemeError, match="charge"):
        parse_scheme("HB{0} = B{-1} + H{+1} ; pK=9\nB{+1} = C{+1} ; pK=1")


def test_charge_imbalance():
    with pytest.raises(SchemeError, match="charge"):
        parse_scheme("HB{0} = B{-1} ; pK=9")


def test_dependent_reactions():
    text = "A{0} = B{0} ; pK=1\nB = C{0} ; pK=2\nA = C ; pK=3"
    with pytest.raises(SchemeError, match="dependent"):
        parse_scheme(text)


def test_negative_pk_accepted():
    s = parse_scheme("3*HB{0} = H3B3{0} ; pK=-1.77")
    assert s.reactions[0].pK == -1.77
    assert s.reactions[0].log10_K == pytest.approx(1.77)


def test_coefficient_cap():
    with pytest.raises(SchemeError):
        parse_scheme("100*A{0} = B{0} ; pK=1")


def test_water_line_registers_hydroxyl():
    s = parse_scheme("water pKw=14.0")
    assert s.names == ["H", "OH"]
    assert s.includes_water_autoprotolysis
    assert s.pKw == 14.0


def test_totals_block():
    scheme, totals = parse_document(
        "HB{0} = B{-1} + H{+1} ; pK=9.29\nwater pKw=14\ntotal B = 0.1\n"
    )
    assert totals == {"B": 0.1}
    assert scheme.r == 2


def test_charge_omitted_after_declaration():
    s = parse_scheme("HT{+1} = T{0} + H{+1} ; pK=7.98\nHB{0} + T = HTB{0} ; pK=-2.53")
    assert s.species[s.index("T")].charge == 0


def test_render_round_trip(tris_borate, acid_base):
    for s in (tris_borate, acid_base):
        again = parse_scheme(render(s))
        assert again == s
        assert render(again) == render(s)


def test_with_pk_returns_new_scheme(tris_borate):
    changed = tris_borate.with_pK({5: 8.08})
    assert changed.reactions[5].pK == 8.08
    assert tris_borate.reactions[5].pK == 7.98
