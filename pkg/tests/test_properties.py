"""Property-based checks of the solver invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from speciation import preset_scheme
from speciation.activity import LOG10_GAMMA_FLOOR, corrected_log10_constants, log10_gamma
from speciation.closed_forms import (
    AcidBasePair,
    TrisBorateInputs,
    acid_base_solve,
    henderson_pH,
    tris_borate_solve,
)
from speciation.conservation import canonical_moieties, dissociation_degrees, null_space
from speciation.equilibrium import check_state, solve
from speciation.scheme import parse_scheme, render, stoichiometric_matrix

TB = preset_scheme("tris-borate")
AB = preset_scheme("acid-base")
TB_LINES = render(TB).splitlines()

conc = st.floats(0.1, 0.3)
pk = st.floats(-3, 12, allow_nan=False)


@st.composite
def chain_schemes(draw):
    n = draw(st.integers(2, 6))
    lines = []
    for i in range(n - 1):
        c1, c2 = draw(st.integers(1, 4)), draw(st.integers(1, 4))
        lines.append(f"{c1}*S{i}{{0}} = {c2}*S{i + 1}{{0}} ; pK={draw(pk)!r}")
    return parse_scheme("\n".join(lines))


@given(chain_schemes())
def test_render_round_trip(scheme):
    assert parse_scheme(render(scheme)) == scheme


@given(chain_schemes())
def test_null_space_exact(scheme):
    nu = stoichiometric_matrix(scheme)
    for lam in null_space(nu):
        assert not np.any(nu @ np.array(lam, dtype=np.int64))


@given(st.permutations(range(6)), st.permutations(range(1, 10)), conc, conc)
@settings(max_examples=30, deadline=None)
def test_permutation_invariance(rx_order, sp_order, c_b, c_t):
    species = TB_LINES[0].split()[1:]
    head = "species " + " ".join([species[0]] + [species[k] for k in sp_order])
    body = [TB_LINES[1 + k] for k in rx_order]
    shuffled = parse_scheme("\n".join([head, *body, TB_LINES[-1]]))
    a = solve(TB, {"B": c_b, "T": c_t})
    b = solve(shuffled, {"B": c_b, "T": c_t})
    assert abs(a.pH - b.pH) < 1e-10
    for name in TB.names:
        assert math.isclose(a.concentration(name), b.concentration(name), rel_tol=1e-8)


@given(st.integers(-3, 3).filter(bool), st.floats(0, 2), st.floats(1e-6, 2))
def test_gamma_decreases(z, I, dI):
    hi, lo = log10_gamma(z, I), log10_gamma(z, I + dI)
    if lo > LOG10_GAMMA_FLOOR:
        assert lo < hi
    else:
        assert lo <= hi
    assert log10_gamma(0, I) == 0.0


@given(st.lists(pk, min_size=7, max_size=7))
def test_identity_at_zero_ionic_strength(pks):
    scheme = TB.with_pK(dict(enumerate(pks[:6])))
    assert np.array_equal(corrected_log10_constants(scheme, 0.0), scheme.log10_K())


@given(st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(3, 11), st.floats(3, 11),
       st.floats(1e-3, 1e3))
def test_henderson_scale_invariance(a, b, pka, pkb, c):
    one = henderson_pH(AcidBasePair(a, b, pka, pkb))
    two = henderson_pH(AcidBasePair(c * a, c * b, pka, pkb))
    assert abs(one - two) < 1e-9


@given(st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(3, 11), st.floats(3, 11))
def test_henderson_matches_scalar_solve(a, b, pka, pkb):
    pair = AcidBasePair(a, b, pka, pkb, mode="simplified")
    assert abs(acid_base_solve(pair).pH - henderson_pH(pair)) < 1e-9


@given(conc, conc)
@settings(max_examples=40, deadline=None)
def test_converged_states_satisfy_constraints(c_b, c_t):
    state = solve(TB, {"B": c_b, "T": c_t})
    assert state.converged
    assert max(check_state(state, TB).values()) < 1e-8
    assert abs((state.pH_a - state.pH) + math.log10(state.gamma)) < 1e-12
    for m in state.moieties:
        assert abs(dissociation_degrees(state.xi, m).sum() - 1) < 1e-10


@given(st.floats(0.01, 1), st.floats(0.01, 1))
@settings(max_examples=30, deadline=None)
def test_acid_base_generic_matches_closed_form(a, b):
    generic = solve(AB, {"A": a, "B": b}, ionic=False)
    closed = acid_base_solve(AcidBasePair(a, b))
    assert abs(generic.pH - closed.pH) < 1e-9


@given(conc, conc)
@settings(max_examples=30, deadline=None)
def test_reduced_equals_generic(c_b, c_t):
    fast = tris_borate_solve(TrisBorateInputs(c_b, c_t))
    slow = solve(TB, {"B": c_b, "T": c_t})
    assert abs(fast.pH - slow.pH) < 1e-6


@given(conc, st.floats(0.005, 0.05))
@settings(max_examples=30, deadline=None)
def test_pH_decreasing_in_boric_acid(c_t, dc):
    lo = solve(TB, {"B": 0.1, "T": c_t}).pH
    hi = solve(TB, {"B": 0.1 + dc, "T": c_t}).pH
    assert hi < lo


def test_moiety_names_stable():
    assert [m.name for m in canonical_moieties(TB)] == ["B", "T"]
