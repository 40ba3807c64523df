"""Analytic and reduced solution paths.

* The monobasic acid/base pair: Henderson-Hasselbalch quadratic and a
  bracketed scalar solve of the charge balance in three variants.
* Tris-borate: Newton on three unknowns ``X = lg[HB]``, ``Y = lg[T]`` and
  pH, then back-substitution to all species.  It runs independently of
  the generic solver and is used to cross-check it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .activity import ActivityModel, activity_pH, log10_gamma
from .conservation import Moiety
from .equilibrium import EquilibriumState, SolverConfig, solve
from .presets import (
    ACID_BASE_DEFAULTS,
    TRIS_BORATE_DEFAULTS,
    TRIS_BORATE_GAMMA_EXPONENTS,
    tris_borate_scheme,
)

log = logging.getLogger(__name__)

LN10 = math.log(10.0)


class NoPhysicalRootError(ValueError):
    pass


class ElectroneutralityMode(str, Enum):
    FULL = "full"
    NO_HYDROXYL = "no-hydroxyl"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class AcidBasePair:
    a: float
    b: float
    pKa: float = ACID_BASE_DEFAULTS["pKa"]
    pKb: float = ACID_BASE_DEFAULTS["pKb"]
    mode: ElectroneutralityMode = ElectroneutralityMode.FULL
    pKw: float = ACID_BASE_DEFAULTS["pKw"]

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("acid and base concentrations must be positive")
        object.__setattr__(self, "mode", ElectroneutralityMode(self.mode))


def henderson_h_plus(pair: AcidBasePair) -> float:
    """Positive root of ``Ka a / (Ka + H) = H b / (Kb + H)``.

    Rearranged as ``H^2 + Ka (1 - a/b) H - Ka Kb a/b = 0``; the root is
    taken in whichever algebraic form avoids cancellation.
    """
    Ka = 10.0 ** -pair.pKa
    Kb = 10.0 ** -pair.pKb
    p = pair.a / pair.b - 1.0
    q = (Kb / Ka) * (pair.a / pair.b)
    disc = math.sqrt(p * p + 4.0 * q)
    if p >= 0:
        return 0.5 * Ka * (p + disc)
    return 2.0 * Ka * q / (disc - p)


def henderson_pH(pair: AcidBasePair) -> float:
    return -math.log10(henderson_h_plus(pair))


def _balance(pH, a, b, Ka, Kb, Kw, mode):
    """Scaled charge balance and its pH derivative."""
    H = 10.0 ** -pH
    alpha = Ka / (Ka + H)
    beta = H / (Kb + H)
    dH = -LN10 * H
    dalpha = -Ka / (Ka + H) ** 2 * dH
    dbeta = Kb / (Kb + H) ** 2 * dH
    f = beta * b - alpha * a
    df = dbeta * b - dalpha * a
    scale = beta * b + alpha * a
    if mode != ElectroneutralityMode.SIMPLIFIED:
        f += H
        df += dH
        scale += H
    if mode == ElectroneutralityMode.FULL:
        f -= Kw / H
        df += Kw / H ** 2 * dH
        scale += Kw / H
    return f / scale, df / scale


def scalar_pH(a, b, Ka, Kb, Kw, mode, bracket=(0.0, 14.0), tol=1e-13) -> float:
    """Root of the acid/base charge balance in ``bracket``.

    Bisection narrows the bracket, then safeguarded Newton polishes.
    """
    lo, hi = bracket
    f_lo = _balance(lo, a, b, Ka, Kb, Kw, mode)[0]
    f_hi = _balance(hi, a, b, Ka, Kb, Kw, mode)[0]
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise NoPhysicalRootError(
            f"no physical root: charge balance does not change sign for pH in "
            f"[{lo:g}, {hi:g}]"
        )
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        f_mid = _balance(mid, a, b, Ka, Kb, Kw, mode)[0]
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(60):
        f, df = _balance(x, a, b, Ka, Kb, Kw, mode)
        if f == 0:
            return x
        if (f > 0) == (f_lo > 0):
            lo, f_lo = x, f
        else:
            hi = x
        step = -f / df if df != 0 else math.inf
        nxt = x + step
        if not lo <= nxt <= hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    return x


def _pair_state(pair, pH, lgKa, lgKb, I, lg_gamma, pH_I0, passes):
    Ka, Kb, Kw = 10.0 ** lgKa, 10.0 ** lgKb, 10.0 ** -pair.pKw
    H = 10.0 ** -pH
    alpha = Ka / (Ka + H)
    beta = H / (Kb + H)
    xi = np.array([
        H,
        (1 - alpha) * pair.a,
        alpha * pair.a,
        beta * pair.b,
        (1 - beta) * pair.b,
        Kw / H,
    ])
    names = ["H", "HA", "A", "HB", "B", "OH"]
    return EquilibriumState(
        names=names,
        xi=xi,
        u=np.log(xi),
        pH=pH,
        pH_a=activity_pH(H, 10.0 ** lg_gamma),
        I=I,
        gamma=10.0 ** lg_gamma,
        corrected_pK=np.array([-lgKa, -lgKb, pair.pKw]),
        residual_norm=0.0,
        newton_iters=0,
        correction_iters=passes,
        converged=True,
        pH_I0=pH_I0,
        moieties=[Moiety("A", (0, 1, 1, 0, 0, 0), pair.a),
                  Moiety("B", (0, 0, 0, 1, 1, 0), pair.b)],
    )


def _pair_ionic_strength(pair, pH, Ka, Kb, Kw):
    H = 10.0 ** -pH
    ions = Ka / (Ka + H) * pair.a + H / (Kb + H) * pair.b
    if pair.mode != ElectroneutralityMode.SIMPLIFIED:
        ions += H
    if pair.mode == ElectroneutralityMode.FULL:
        ions += Kw / H
    return 0.5 * ions


def acid_base_solve(pair: AcidBasePair, mode=None, with_ionic: bool = False,
                    model: ActivityModel | None = None,
                    config: SolverConfig | None = None) -> EquilibriumState:
    """pH of the acid/base pair from the chosen charge balance.

    With ``with_ionic`` the constants are corrected in a fixed-point loop
    on the ionic strength (``K'_a = K_a / gamma^2``, ``K'_b = K_b``).
    Degrees of dissociation are ``alpha = [A-]/a`` and ``beta = [HB+]/b``.
    """
    if mode is not None:
        pair = AcidBasePair(pair.a, pair.b, pair.pKa, pair.pKb, mode, pair.pKw)
    model = model or ActivityModel()
    config = config or SolverConfig()
    Kw = 10.0 ** -pair.pKw
    lgKa0, lgKb0 = -pair.pKa, -pair.pKb
    lgKa, lgKb = lgKa0, lgKb0
    pH = scalar_pH(pair.a, pair.b, 10.0 ** lgKa, 10.0 ** lgKb, Kw, pair.mode)
    pH_I0 = pH
    I = _pair_ionic_strength(pair, pH, 10.0 ** lgKa, 10.0 ** lgKb, Kw)
    passes = 1
    if with_ionic:
        while True:
            lg_g = log10_gamma(1, I, model)
            lgKa = lgKa0 - 2.0 * lg_g
            new = scalar_pH(pair.a, pair.b, 10.0 ** lgKa, 10.0 ** lgKb, Kw, pair.mode)
            I = _pair_ionic_strength(pair, new, 10.0 ** lgKa, 10.0 ** lgKb, Kw)
            passes += 1
            done = abs(new - pH) < config.correction_tol
            pH = new
            if done or passes >= config.max_correction_iters:
                break
        lg_gamma = log10_gamma(1, I, model)
    else:
        lg_gamma = log10_gamma(1, I, model)
    state = _pair_state(pair, pH, lgKa, lgKb, I, lg_gamma, pH_I0, passes)
    if with_ionic and passes >= config.max_correction_iters:
        state.converged = False
        state.diagnostics.append("ionic-strength correction did not settle")
    return state


def degrees(state: EquilibriumState) -> tuple[float, float]:
    """``(alpha, beta)`` of an acid/base state."""
    a = state.moieties[0].total
    b = state.moieties[1].total
    return state.concentration("A") / a, state.concentration("HB") / b


# -- Tris-borate reduced system ----------------------------------------------


@dataclass(frozen=True)
class TrisBorateInputs:
    C_B: float
    C_T: float
    pK1: float = TRIS_BORATE_DEFAULTS["pK1"]
    pK2: float = TRIS_BORATE_DEFAULTS["pK2"]
    pK3: float = TRIS_BORATE_DEFAULTS["pK3"]
    pK4: float = TRIS_BORATE_DEFAULTS["pK4"]
    pK5: float = TRIS_BORATE_DEFAULTS["pK5"]
    pK6: float = TRIS_BORATE_DEFAULTS["pK6"]
    pKw: float = TRIS_BORATE_DEFAULTS["pKw"]

    def __post_init__(self):
        for name in ("C_B", "C_T"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1] mol/L, got {v}")

    @property
    def pK(self) -> np.ndarray:
        return np.array([self.pK1, self.pK2, self.pK3, self.pK4, self.pK5, self.pK6])

    def params(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in TRIS_BORATE_DEFAULTS}


@dataclass
class ReducedState:
    X: float
    Y: float
    pH: float
    concentrations: dict[str, float]
    pH_a: float = math.nan
    pH_I0: float = math.nan
    I: float = 0.0
    gamma: float = 1.0
    corrected_pK: np.ndarray | None = None
    newton_iters: int = 0
    correction_iters: int = 1
    converged: bool = True
    used_fallback: bool = False
    diagnostics: list[str] = field(default_factory=list)


# Species in back-substitution order, as monomials K * [HB]^a [T]^b [H+]^h:
# (name, charge, (a, b, h), constants whose lg enters the prefactor, sign).
_TB_TERMS = (
    ("T", 0, (0, 1, 0), ()),
    ("HT", +1, (0, 1, 1), (("K6", -1),)),
    ("TB", -1, (1, 1, -1), (("K4", 1), ("K5", 1))),
    ("HTB", 0, (1, 1, 0), (("K4", 1),)),
    ("HB", 0, (1, 0, 0), ()),
    ("B", -1, (1, 0, -1), (("K1", 1),)),
    ("H3B3", 0, (3, 0, 0), (("K2", 1),)),
    ("H2B3", -1, (3, 0, -1), (("K2", 1), ("K3", 1))),
    ("H", +1, (0, 0, 1), ()),
    ("OH", -1, (0, 0, -1), (("Kw", 1),)),
)
_TB_T_WEIGHTS = np.array([1, 1, 1, 1, 0, 0, 0, 0, 0, 0], dtype=float)
_TB_B_WEIGHTS = np.array([0, 0, 1, 1, 1, 1, 3, 3, 0, 0], dtype=float)
_TB_CHARGE = np.array([t[1] for t in _TB_TERMS], dtype=float)
_TB_EXPONENTS = np.array([t[2] for t in _TB_TERMS], dtype=float)


def _tb_prefactors(lgK: np.ndarray, lgKw: float) -> np.ndarray:
    lookup = {f"K{i + 1}": lgK[i] for i in range(6)}
    lookup["Kw"] = lgKw
    return np.array([sum(sign * lookup[k] for k, sign in t[3]) for t in _TB_TERMS])


def tris_borate_reduced_solve(inputs: TrisBorateInputs, log10_K=None,
                              config: SolverConfig | None = None, w0=None) -> ReducedState:
    """Solve the three budget/charge equations at fixed constants.

    ``log10_K`` holds ``lg K_1 .. lg K_6`` (possibly ionic-strength
    corrected); the default is the uncorrected set from ``inputs``.
    """
    config = config or SolverConfig()
    lgK = -inputs.pK if log10_K is None else np.asarray(log10_K, dtype=float)
    lgc = _tb_prefactors(lgK, -inputs.pKw)
    W = np.vstack([_TB_T_WEIGHTS, _TB_B_WEIGHTS, _TB_CHARGE])
    scale = np.array([inputs.C_T, inputs.C_B, 1.0])
    if w0 is None:
        w0 = np.array([math.log10(inputs.C_B / 2), math.log10(inputs.C_T / 2), -8.0])
    try:
        w, iters, fnorm, status = _kernels.monomial_newton(
            np.asarray(w0, dtype=float), lgc, _TB_EXPONENTS, W, scale, 2,
            config.newton_tol, config.max_newton_iters, config.max_halvings,
        )
    except np.linalg.LinAlgError:
        status, iters, w = _kernels.SINGULAR, 0, np.asarray(w0, dtype=float)
    if status != _kernels.CONVERGED:
        return _tb_fallback(inputs, lgK, config, int(iters))
    terms = 10.0 ** (lgc + _TB_EXPONENTS @ w)
    conc = {t[0]: float(v) for t, v in zip(_TB_TERMS, terms)}
    return ReducedState(X=float(w[0]), Y=float(w[1]), pH=float(-w[2]),
                        concentrations=conc, corrected_pK=-lgK, newton_iters=int(iters))


def _tb_fallback(inputs, lgK, config, iters) -> ReducedState:
    log.warning("reduced Tris-borate Newton diverged; falling back to the generic solver")
    from .equilibrium import newton_solve
    from .conservation import assign_totals, canonical_moieties

    scheme = tris_borate_scheme(**inputs.params())
    moieties = assign_totals(canonical_moieties(scheme), {"B": inputs.C_B, "T": inputs.C_T})
    full = np.append(lgK, -inputs.pKw)
    state = newton_solve(scheme, moieties, full, config)
    conc = dict(zip(state.names, map(float, state.xi)))
    return ReducedState(
        X=math.log10(conc["HB"]), Y=math.log10(conc["T"]), pH=state.pH,
        concentrations=conc, corrected_pK=-lgK, newton_iters=iters + state.newton_iters,
        converged=state.converged, used_fallback=True,
        diagnostics=["reduced Newton diverged; generic solver used"],
    )


def tris_borate_solve(inputs: TrisBorateInputs, with_ionic: bool = True,
                      model: ActivityModel | None = None,
                      config: SolverConfig | None = None) -> ReducedState:
    """Reduced solve wrapped in the ionic-strength correction loop."""
    model = model or ActivityModel()
    config = config or SolverConfig()
    expo = np.array(TRIS_BORATE_GAMMA_EXPONENTS, dtype=float)
    lgK0 = -inputs.pK
    state = tris_borate_reduced_solve(inputs, lgK0, config)
    pH_I0 = state.pH
    passes = 1
    iters = state.newton_iters
    settled = True
    while with_ionic:
        I = _tb_ionic_strength(state.concentrations)
        lgK = lgK0 + expo * log10_gamma(1, I, model)
        nxt = tris_borate_reduced_solve(
            inputs, lgK, config, w0=[state.X, state.Y, -state.pH]
        )
        passes += 1
        iters += nxt.newton_iters
        delta = abs(nxt.pH - state.pH)
        state = nxt
        if delta < config.correction_tol:
            break
        if passes >= config.max_correction_iters:
            settled = False
            state.diagnostics.append("ionic-strength correction did not settle")
            break
    I = _tb_ionic_strength(state.concentrations)
    lg_gamma = log10_gamma(1, I, model)
    state.I = I
    state.gamma = 10.0 ** lg_gamma
    state.pH_a = state.pH - lg_gamma
    state.pH_I0 = pH_I0
    state.correction_iters = passes
    state.newton_iters = iters
    state.converged = state.converged and settled
    return state


def _tb_ionic_strength(conc: dict[str, float]) -> float:
    return 0.5 * sum(conc[t[0]] * t[1] ** 2 for t in _TB_TERMS)


def tris_borate_generic(inputs: TrisBorateInputs, with_ionic: bool = True,
                        model: ActivityModel | None = None,
                        config: SolverConfig | None = None) -> EquilibriumState:
    """Same mixture through the generic equilibrium solver."""
    scheme = tris_borate_scheme(**inputs.params())
    return solve(scheme, {"B": inputs.C_B, "T": inputs.C_T}, config, model, ionic=with_ionic)
