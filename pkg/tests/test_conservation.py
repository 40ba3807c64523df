import numpy as np
import pytest

from speciation.conservation import (
    DegenerateMixtureError,
    Moiety,
    assign_totals,
    canonical_moieties,
    custom_moiety,
    dissociation_degrees,
    null_space,
    subsystem,
    symbol_counts,
)
from speciation.scheme import exact_rank, parse_scheme, stoichiometric_matrix


def by_name(scheme, lam):
    return {n: c for n, c in zip(scheme.names, lam) if c}


def test_single_reaction_null_space():
    s = parse_scheme("HB{0} = B{-1} + H{+1} ; pK=9.29")
    basis = null_space(stoichiometric_matrix(s))
    assert len(basis) == 2
    assert exact_rank(basis + [(0, 1, 1)]) == 2
    assert canonical_moieties(s)[0].lam == (0, 1, 1)


def test_zero_reaction_null_space():
    assert null_space(np.zeros((0, 1), dtype=int), 1) == [(1,)]


def test_basis_is_exact_and_primitive(tris_borate):
    nu = stoichiometric_matrix(tris_borate)
    basis = null_space(nu)
    assert len(basis) == nu.shape[1] - 7
    for v in basis:
        assert not np.any(nu @ np.array(v))
        first = next(c for c in v if c)
        assert first > 0
        assert np.gcd.reduce(np.abs(v)) == 1


def test_tris_borate_moieties(tris_borate):
    ms = {m.name: m for m in canonical_moieties(tris_borate)}
    assert set(ms) == {"B", "T"}
    assert by_name(tris_borate, ms["T"].lam) == {"T": 1, "HT": 1, "TB": 1, "HTB": 1}
    assert by_name(tris_borate, ms["B"].lam) == {
        "HB": 1, "B": 1, "H3B3": 3, "H2B3": 3, "TB": 1, "HTB": 1,
    }


def test_acid_base_moieties(acid_base):
    ms = {m.name: m for m in canonical_moieties(acid_base)}
    assert by_name(acid_base, ms["A"].lam) == {"HA": 1, "A": 1}
    assert by_name(acid_base, ms["B"].lam) == {"HB": 1, "B": 1}


def test_fallback_names():
    notes = []
    s = parse_scheme("Xx{0} = Yy{0} ; pK=1")
    ms = canonical_moieties(s, notes)
    assert [m.name for m in ms] == ["M1"]
    assert any("not identified" in n for n in notes)


def test_symbol_counts():
    assert symbol_counts("H2B3") == {"H": 2, "B": 3}
    assert symbol_counts("HTB") == {"H": 1, "T": 1, "B": 1}
    assert symbol_counts("h2o") is None


def test_subsystem_members(tris_borate):
    m = next(m for m in canonical_moieties(tris_borate) if m.name == "T")
    assert set(subsystem(m, tris_borate).members) == {"T", "HT", "TB", "HTB"}


def test_custom_moiety_checked(tris_borate):
    with pytest.raises(ValueError, match="not conserved"):
        custom_moiety(tris_borate, "bad", {"HB": 1})
    ok = custom_moiety(tris_borate, "T2", {"T": 2, "HT": 2, "TB": 2, "HTB": 2})
    assert ok.name == "T2"


def test_zero_total_rejected(tris_borate):
    with pytest.raises(DegenerateMixtureError, match="degenerate"):
        assign_totals(canonical_moieties(tris_borate), {"B": 0.0, "T": 0.2})


def test_missing_and_unknown_totals(tris_borate):
    ms = canonical_moieties(tris_borate)
    with pytest.raises(DegenerateMixtureError):
        assign_totals(ms, {"B": 0.1})
    with pytest.raises(KeyError):
        assign_totals(ms, {"B": 0.1, "T": 0.1, "Q": 1})


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        Moiety("z", (0, 0))


def test_dissociation_degrees_absent():
    with pytest.raises(DegenerateMixtureError, match="absent from mixture"):
        dissociation_degrees([1.0, 1.0], Moiety("a", (1, 1), 0.0))
