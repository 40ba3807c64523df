"""Verification suites behind ``speciation check``.

Each suite returns :class:`CheckResult` records.  Informational records
are reported but never fail the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import golden
from .closed_forms import (
    AcidBasePair,
    TrisBorateInputs,
    acid_base_solve,
    tris_borate_solve,
)
from .conservation import assign_totals, canonical_moieties
from .equilibrium import jacobian, newton_solve, residuals, solve
from .kinetics import RateAssignment, integrate_to_steady_state
from .presets import ACID_BASE_DEFAULTS, TRIS_BORATE_DEFAULTS, tris_borate_scheme
from .scheme import parse_scheme

SUITES = ("tables", "crosscheck", "jacobian", "oracle")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    case: str
    passed: bool
    detail: str
    informational: bool = False

    @property
    def label(self) -> str:
        if self.informational:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


def _cmp(suite, case, got, want, tol, informational=False) -> CheckResult:
    err = abs(got - want)
    return CheckResult(suite, case, bool(err <= tol),
                       f"got {got:.6g}, expected {want:.6g} (|diff| {err:.2e} <= {tol:.0e})",
                       informational)


def _split_params(params: dict[str, float] | None):
    params = dict(params or {})
    tb = {k: v for k, v in params.items() if k in TRIS_BORATE_DEFAULTS}
    ab = {k: v for k, v in params.items() if k in ACID_BASE_DEFAULTS}
    unknown = set(params) - set(tb) - set(ab)
    if unknown:
        raise KeyError(f"unknown parameter(s) {sorted(unknown)}")
    return tb, ab


def tris_borate_table_checks(params: dict[str, float] | None = None) -> list[CheckResult]:
    """Compare the generic solver with the C_T = 0.2 Tris-borate table.

    pH_I0 is reported but informational: the reference column tracks the
    corrected pH rather than an I = 0 solve (see README).
    """
    tb, _ = _split_params(params)
    scheme = tris_borate_scheme(**tb)
    tol = golden.TRIS_BORATE_TOL
    out = []
    for c_b, pH, pH_a, pH_I0, I, gamma in golden.TRIS_BORATE_ROWS:
        st = solve(scheme, {"B": c_b, "T": golden.TRIS_BORATE_C_T})
        tag = f"tris-borate C_B={c_b:.2f}"
        out.append(_cmp("tables", f"{tag} pH", st.pH, pH, tol["pH"]))
        out.append(_cmp("tables", f"{tag} pH_a", st.pH_a, pH_a, tol["pH_a"]))
        out.append(_cmp("tables", f"{tag} I", st.I, I, tol["I"]))
        out.append(_cmp("tables", f"{tag} gamma", st.gamma, gamma, tol["gamma"]))
        out.append(_cmp("tables", f"{tag} pH_I0", st.pH_I0, pH_I0, tol["pH_I0"],
                        informational=True))
    return out


def acid_base_table_checks(params: dict[str, float] | None = None) -> list[CheckResult]:
    _, ab = _split_params(params)
    consts = {**ACID_BASE_DEFAULTS, **ab}
    tol = golden.ACID_BASE_TOL
    out = []
    for (a, b), want in golden.ACID_BASE_CORRECTED.items():
        pair = AcidBasePair(a, b, consts["pKa"], consts["pKb"], pKw=consts["pKw"])
        st = acid_base_solve(pair, with_ionic=True)
        tag = f"acid-base a={a} b={b}"
        out.append(_cmp("tables", f"{tag} pH", st.pH, want["pH"], tol["pH"]))
        out.append(_cmp("tables", f"{tag} I", st.I, want["I"], tol["I"]))
        out.append(_cmp("tables", f"{tag} gamma", st.gamma, want["gamma"], tol["gamma"]))
        out.append(_cmp("tables", f"{tag} pK'a", float(st.corrected_pK[0]), want["pKa"],
                        tol["pKa"]))
        ideal = acid_base_solve(pair, with_ionic=False)
        out.append(_cmp("tables", f"{tag} pH (I=0)", ideal.pH, golden.ACID_BASE_IDEAL[(a, b)],
                        tol["ideal_pH"]))
    return out


def crosscheck(n: int = 5, tol: float = 1e-6,
               params: dict[str, float] | None = None) -> list[CheckResult]:
    """Reduced three-unknown Tris-borate solve against the generic solver."""
    tb, _ = _split_params(params)
    scheme = tris_borate_scheme(**tb)
    lo, hi = golden.GRID_RANGE
    out = []
    for c_b in np.linspace(lo, hi, n):
        for c_t in np.linspace(lo, hi, n):
            inputs = TrisBorateInputs(float(c_b), float(c_t), **tb)
            fast = tris_borate_solve(inputs)
            slow = solve(scheme, {"B": float(c_b), "T": float(c_t)})
            err = abs(fast.pH - slow.pH)
            out.append(CheckResult("crosscheck", f"C_B={c_b:.2f} C_T={c_t:.2f}",
                                   bool(err < tol), f"|dpH| {err:.2e}"))
    return out


def fd_jacobian(u, scheme, moieties, log10_K, h: float = 1e-6) -> np.ndarray:
    """Central differences of :func:`residuals`."""
    u = np.asarray(u, dtype=float)
    J = np.empty((u.size, u.size))
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        J[:, k] = (residuals(u + e, scheme, moieties, log10_K)
                   - residuals(u - e, scheme, moieties, log10_K)) / (2 * h)
    return J


def jacobian_error(u, scheme, moieties, log10_K, h: float = 1e-6) -> float:
    """Largest row-relative deviation ``max_j |J - J_fd|_ij / max_j |J_ij|``."""
    J = jacobian(u, scheme, moieties)
    D = fd_jacobian(u, scheme, moieties, log10_K, h)
    scale = np.maximum(np.max(np.abs(J), axis=1), 1e-300)
    return float(np.max(np.max(np.abs(J - D), axis=1) / scale))


def jacobian_checks(points: int = 100, seed: int = 0, tol: float = 1e-5) -> list[CheckResult]:
    """Finite-difference check at random interior points of the Tris-borate system.

    A point is a converged state at random totals on the working grid,
    with every ``u_k`` shifted by up to +-2.  Far outside that region the
    budget rows are ``~ -1`` while their derivatives are tiny, and the
    difference quotient is pure rounding noise.
    """
    scheme = tris_borate_scheme()
    base = canonical_moieties(scheme)
    lo, hi = golden.GRID_RANGE
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        c_b, c_t = rng.uniform(lo, hi, size=2)
        moieties = assign_totals(base, {"B": c_b, "T": c_t})
        state = newton_solve(scheme, moieties)
        u = state.u + rng.uniform(-2.0, 2.0, size=state.u.size)
        worst = max(worst, jacobian_error(u, scheme, moieties, scheme.log10_K()))
    return [CheckResult("jacobian", f"tris-borate, {points} random points",
                        worst < tol, f"max relative deviation {worst:.2e}")]


# Small schemes with moderate constants; start vectors in species order.
TOY_SCHEMES = (
    ("isomerisation", "A{0} = B{0} ; pK=0", {"A": 1.0}),
    ("dissociation", "A{0} = B{0} + C{0} ; pK=2", {"A": 0.1}),
    ("dimerisation", "2*A{0} = D{0} ; pK=-1", {"A": 0.5}),
    ("weak acid", "HA{0} = A{-1} + H{+1} ; pK=2", {"HA": 0.1}),
    ("acid + base", "HA{0} = A{-1} + H{+1} ; pK=3\nHB{+1} = B{0} + H ; pK=2",
     {"HA": 0.05, "B": 0.05}),
)


def _toy_start(scheme, amounts):
    xi0 = np.zeros(len(scheme.species))
    for name, value in amounts.items():
        xi0[scheme.index(name)] = value
    return xi0


def oracle_case(text: str, amounts: dict[str, float]) -> dict[str, float]:
    """Run one toy scheme through both paths and return the comparison metrics."""
    scheme = parse_scheme(text)
    xi0 = _toy_start(scheme, amounts)
    base = canonical_moieties(scheme)
    moieties = [m.with_total(float(m.vector @ xi0)) for m in base]
    eq = newton_solve(scheme, moieties)
    traj = integrate_to_steady_state(scheme, RateAssignment.from_scheme(scheme), xi0,
                                     moieties=moieties)
    slow = integrate_to_steady_state(scheme, RateAssignment.from_scheme(scheme, 10.0), xi0,
                                     moieties=moieties)
    totals = np.array([m.total for m in moieties])
    term = traj.terminal
    return {
        "match": float(np.max(np.abs(term - eq.xi) / eq.xi)),
        "drift": float(np.max(np.abs(traj.drift) / totals)),
        "rescaled": float(np.max(np.abs(slow.terminal - term) / eq.xi)),
        "residual": float(np.max(np.abs(residuals(np.log(np.maximum(term, 1e-300)), scheme,
                                                  moieties, scheme.log10_K())))),
        "converged": float(eq.converged),
    }


def oracle_checks() -> list[CheckResult]:
    out = []
    for name, text, amounts in TOY_SCHEMES:
        m = oracle_case(text, amounts)
        ok = (m["converged"] and m["match"] < 1e-6 and m["drift"] < 1e-8
              and m["rescaled"] < 1e-8 and m["residual"] < 1e-8)
        out.append(CheckResult(
            "oracle", name, bool(ok),
            f"match {m['match']:.1e}, drift {m['drift']:.1e}, "
            f"k- x10 {m['rescaled']:.1e}, residual {m['residual']:.1e}",
        ))
    return out


def run_suites(selected=None, params: dict[str, float] | None = None) -> list[CheckResult]:
    selected = list(SUITES if not selected else selected)
    bad = set(selected) - set(SUITES)
    if bad:
        raise KeyError(f"unknown suite(s) {sorted(bad)}; choose from {list(SUITES)}")
    out: list[CheckResult] = []
    if "tables" in selected:
        out += tris_borate_table_checks(params)
        out += acid_base_table_checks(params)
    if "crosscheck" in selected:
        out += crosscheck(params=params)
    if "jacobian" in selected:
        out += jacobian_checks()
    if "oracle" in selected:
        out += oracle_checks()
    return out
