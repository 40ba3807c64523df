"""Acceptance criteria, one test and one PASS/FAIL summary line each.

The summary lines are printed at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from speciation import golden, preset_scheme
from speciation.activity import corrected_log10_constants
from speciation.checks import TOY_SCHEMES, jacobian_checks, oracle_case
from speciation.closed_forms import (
    AcidBasePair,
    TrisBorateInputs,
    acid_base_solve,
    henderson_pH,
    tris_borate_solve,
)
from speciation.conservation import DegenerateMixtureError
from speciation.equilibrium import check_state, solve
from speciation.fitting import polyfit
from speciation.scheme import parse_scheme, render
from speciation.sweep import SweepSpec, run_sweep

TB = preset_scheme("tris-borate")


def report(number, title, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"[{status}] criterion {number}: {title}"
    if detail:
        line += f" | {detail}"
    if failures:
        line += " | failed: " + "; ".join(failures[:6])
        if len(failures) > 6:
            line += f"; ... ({len(failures)} in all)"
    ACCEPTANCE_LINES.append(line)
    assert not failures, line


def within(failures, label, got, want, tol):
    if not abs(got - want) <= tol:
        failures.append(f"{label} {got:.6g} vs {want:.6g} (tol {tol:g})")


def test_criterion_1_tris_borate_table():
    tol = golden.TRIS_BORATE_TOL
    solve(TB, {"B": 0.2, "T": 0.2})  # JIT warm-up, not timed
    t0 = time.perf_counter()
    states = [solve(TB, {"B": row[0], "T": golden.TRIS_BORATE_C_T})
              for row in golden.TRIS_BORATE_ROWS]
    elapsed = time.perf_counter() - t0
    failures = []
    for row, st in zip(golden.TRIS_BORATE_ROWS, states):
        c_b, pH, pH_a, pH_I0, I, gamma = row
        tag = f"C_B={c_b:.2f}"
        within(failures, f"{tag} pH", st.pH, pH, tol["pH"])
        within(failures, f"{tag} pH_a", st.pH_a, pH_a, tol["pH_a"])
        within(failures, f"{tag} I", st.I, I, tol["I"])
        within(failures, f"{tag} gamma", st.gamma, gamma, tol["gamma"])
        if c_b not in golden.TRIS_BORATE_SUSPECT_PH_I0:
            within(failures, f"{tag} pH_I0", st.pH_I0, pH_I0, tol["pH_I0"])
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.3f} s")
    report(1, "Tris-borate golden table (11 rows)", failures, f"runtime {elapsed:.3f} s")


def test_criterion_2_acid_base_table():
    tol = golden.ACID_BASE_TOL
    failures = []
    for (a, b), want in golden.ACID_BASE_CORRECTED.items():
        pair = AcidBasePair(a, b)
        st = acid_base_solve(pair, with_ionic=True)
        tag = f"a={a} b={b}"
        within(failures, f"{tag} pH", st.pH, want["pH"], tol["pH"])
        within(failures, f"{tag} I", st.I, want["I"], tol["I"])
        within(failures, f"{tag} gamma", st.gamma, want["gamma"], tol["gamma"])
        within(failures, f"{tag} pK'a", st.corrected_pK[0], want["pKa"], tol["pKa"])
        ideal = acid_base_solve(pair, with_ionic=False)
        within(failures, f"{tag} pH(I=0)", ideal.pH, golden.ACID_BASE_IDEAL[(a, b)],
               tol["ideal_pH"])
    report(2, "acid/base ionic-strength table", failures)


@pytest.fixture(scope="module")
def fit_sweep():
    spec = SweepSpec("B", *golden.GRID_RANGE, points=golden.FIT_POINTS,
                     fixed={"T": golden.FIT_C_T})
    rows = run_sweep(TB, spec)
    assert all(r.status == "ok" for r in rows)
    return np.array([r.totals["B"] for r in rows]), np.array([r.pH_a for r in rows])


def test_criterion_3_fit(fit_sweep):
    x, y = fit_sweep
    lin, quad = polyfit(x, y, 1), polyfit(x, y, 2)
    failures = []
    for got, want in zip(lin.coefficients, golden.FIT_LINEAR["coefficients"]):
        within(failures, "linear coef", got, want, 0.02)
    if not 0.006 <= lin.sigma <= 0.011:
        failures.append(f"sigma {lin.sigma:.5f}")
    if not 0.011 <= lin.max0 <= 0.019:
        failures.append(f"linear max0 {lin.max0:.5f}")
    for got, want in zip(quad.coefficients, golden.FIT_QUADRATIC["coefficients"]):
        within(failures, "quadratic coef", got, want, 0.05)
    if not 0.007 <= quad.max0 <= 0.013:
        failures.append(f"quadratic max0 {quad.max0:.5f}")
    detail = (f"linear ({lin.coefficients[0]:.4f}, {lin.coefficients[1]:.4f}) "
              f"sigma {lin.sigma:.4f} max0 {lin.max0:.4f}; quadratic "
              f"({', '.join(f'{c:.4f}' for c in quad.coefficients)}) max0 {quad.max0:.4f}")
    report(3, "pH_a fits at C_T=0.3", failures, detail)


def test_criterion_4_range():
    grid = np.round(np.linspace(*golden.GRID_RANGE, 11), 12)
    values = [solve(TB, {"B": float(b), "T": float(t)}).pH_a for b in grid for t in grid]
    lo, hi = min(values), max(values)
    low, high = golden.PH_A_RANGE
    failures = []
    if not lo > low:
        failures.append(f"min pH_a {lo:.4f} <= {low}")
    if not hi < high:
        failures.append(f"max pH_a {hi:.4f} >= {high}")
    report(4, "pH_a range over the 11x11 grid", failures, f"min {lo:.4f}, max {hi:.4f}")


def test_criterion_5_closed_form_equivalence():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    out_of_bracket = 0
    for _ in range(1000):
        a, b = rng.uniform(1e-3, 1, 2)
        pka, pkb = rng.uniform(3, 11, 2)
        pair = AcidBasePair(a, b, pka, pkb, mode="simplified")
        closed = henderson_pH(pair)
        numeric = acid_base_solve(pair).pH
        out_of_bracket += not 0 <= numeric <= 14
        worst = max(worst, abs(closed - numeric))
    failures = [] if worst < 1e-9 else [f"max |dpH| {worst:.2e}"]
    if out_of_bracket:
        failures.append(f"{out_of_bracket} roots outside [0, 14]")
    report(5, "Henderson root vs scalar solve, 1000 samples", failures,
           f"max |dpH| {worst:.2e}")


def test_criterion_6_reduced_vs_generic():
    grid = np.linspace(*golden.GRID_RANGE, 5)
    worst = 0.0
    for c_b in grid:
        for c_t in grid:
            fast = tris_borate_solve(TrisBorateInputs(float(c_b), float(c_t)))
            slow = solve(TB, {"B": float(c_b), "T": float(c_t)})
            worst = max(worst, abs(fast.pH - slow.pH))
    failures = [] if worst < 1e-6 else [f"max |dpH| {worst:.2e}"]
    report(6, "reduced vs generic Tris-borate, 5x5 grid", failures, f"max |dpH| {worst:.2e}")


def test_criterion_7_property_suites():
    failures = []
    notes = []

    # (a) Jacobian vs central differences at 100 random points
    jac = jacobian_checks(points=100, seed=7)[0]
    notes.append(f"(a) {jac.detail}")
    if not jac.passed:
        failures.append(f"(a) {jac.detail}")

    # (b) constraint residuals of converged states
    rng = np.random.default_rng(11)
    worst_b = 0.0
    for c_b, c_t in rng.uniform(0.1, 0.3, size=(25, 2)):
        st = solve(TB, {"B": c_b, "T": c_t})
        if not st.converged:
            failures.append(f"(b) no convergence at {c_b:.3f}, {c_t:.3f}")
        worst_b = max(worst_b, *check_state(st, TB).values())
    notes.append(f"(b) {worst_b:.1e}")
    if worst_b >= 1e-8:
        failures.append(f"(b) residual {worst_b:.2e}")

    # (c), (d) kinetics oracle on five toy schemes
    worst_c = worst_d = 0.0
    for name, text, amounts in TOY_SCHEMES:
        m = oracle_case(text, amounts)
        worst_c, worst_d = max(worst_c, m["match"]), max(worst_d, m["drift"])
    notes.append(f"(c) {worst_c:.1e} (d) {worst_d:.1e}")
    if worst_c >= 1e-6:
        failures.append(f"(c) oracle mismatch {worst_c:.2e}")
    if worst_d >= 1e-8:
        failures.append(f"(d) moiety drift {worst_d:.2e}")

    # (e) corrected constants at I = 0
    if not np.array_equal(corrected_log10_constants(TB, 0.0), TB.log10_K()):
        failures.append("(e) K' != K at I = 0")

    # (f) permutation invariance
    lines = render(TB).splitlines()
    species = lines[0].split()[1:]
    order = [0, 9, 3, 7, 1, 5, 8, 2, 6, 4]
    head = "species " + " ".join(species[k] for k in order)
    shuffled = parse_scheme("\n".join([head, *reversed(lines[1:-1]), lines[-1]]))
    worst_f = 0.0
    for c_b, c_t in [(0.1, 0.3), (0.2, 0.2), (0.3, 0.1)]:
        a = solve(TB, {"B": c_b, "T": c_t}).pH
        b = solve(shuffled, {"B": c_b, "T": c_t}).pH
        worst_f = max(worst_f, abs(a - b))
    notes.append(f"(f) {worst_f:.1e}")
    if worst_f >= 1e-10:
        failures.append(f"(f) permutation changes pH by {worst_f:.2e}")
    report(7, "property suites (a)-(f)", failures, ", ".join(notes))


def test_criterion_8_degenerate_inputs():
    failures = []
    water = solve(parse_scheme("water pKw=14.0"), {})
    if not abs(water.pH - 7.0) < 1e-6:
        failures.append(f"pure water pH {water.pH}")
    try:
        solve(TB, {"B": 0.0, "T": 0.2})
        failures.append("zero total accepted")
    except DegenerateMixtureError as exc:
        if "degenerate" not in str(exc):
            failures.append(f"unexpected message: {exc}")
    s = parse_scheme("3*HB{0} = H3B3{0} ; pK=-1.77")
    if s.reactions[0].pK != -1.77:
        failures.append("negative pK altered")
    if not math.isclose(TB.reactions[3].pK, -2.53):
        failures.append("negative pK4 lost")
    report(8, "degenerate handling", failures, f"pure water pH {water.pH:.6f}")
