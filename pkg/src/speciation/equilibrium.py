"""Equilibrium speciation in log-concentration variables.

The unknowns are ``u_k = ln xi_k`` for every species, so concentrations
stay positive by construction.  The square system consists of

* one linear row per reaction, ``sum_k nu_ik u_k = ln K'_i``;
* one row per conserved moiety, ``(lam . xi) / a_s - 1``;
* the charge balance ``(z . xi) / (|z| . xi)`` when any species is charged.

Activity effects enter through a fixed-point loop on the ionic strength:
solve with constant K', recompute I and K', repeat until pH settles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from . import _kernels
from .activity import (
    ActivityModel,
    corrected_log10_constants,
    gamma_exponents,
    ionic_strength,
    log10_gamma,
)
from .conservation import Moiety, assign_totals, canonical_moieties
from .scheme import Scheme, stoichiometric_matrix

log = logging.getLogger(__name__)

LN10 = math.log(10.0)


class InitialGuess(str, Enum):
    NEUTRAL_PH = "neutral-pH"
    USER = "user-supplied"
    CONTINUATION = "continuation"


class ConvergenceError(RuntimeError):
    """The solver did not reach the requested tolerance."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class SingularJacobianError(ConvergenceError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton_iters: int = 100
    correction_tol: float = 1e-6
    max_correction_iters: int = 50
    initial_guess: InitialGuess = InitialGuess.NEUTRAL_PH
    max_halvings: int = 30
    continuation_steps: int = 4
    direct_ionic: bool = False

    def __post_init__(self):
        if not (self.newton_tol > 0 and self.correction_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_newton_iters < 1 or self.max_correction_iters < 1:
            raise ValueError("iteration caps must be at least 1")
        object.__setattr__(self, "initial_guess", InitialGuess(self.initial_guess))


@dataclass
class EquilibriumState:
    names: list[str]
    xi: np.ndarray
    u: np.ndarray
    pH: float
    pH_a: float
    I: float
    gamma: float
    corrected_pK: np.ndarray
    residual_norm: float
    newton_iters: int
    correction_iters: int
    converged: bool
    pH_I0: float = math.nan
    moieties: list[Moiety] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def concentration(self, name: str) -> float:
        return float(self.xi[self.names.index(name)])

    def as_dict(self) -> dict:
        return {
            "species": dict(zip(self.names, map(float, self.xi))),
            "pH": self.pH,
            "pH_a": self.pH_a,
            "pH_I0": self.pH_I0,
            "I": self.I,
            "gamma": self.gamma,
            "corrected_pK": [float(v) for v in self.corrected_pK],
            "totals": {m.name: m.total for m in self.moieties},
            "residual_norm": self.residual_norm,
            "newton_iters": self.newton_iters,
            "correction_iters": self.correction_iters,
            "converged": self.converged,
            "diagnostics": list(self.diagnostics),
        }


class System:
    """Numeric arrays of one scheme + moieties, shared by the kernels."""

    def __init__(self, scheme: Scheme, moieties: list[Moiety]):
        self.scheme = scheme
        self.moieties = list(moieties)
        self.nu = stoichiometric_matrix(scheme).astype(float)
        self.z = scheme.charges.astype(float)
        self.charged = bool(np.any(self.z != 0))
        n_species = len(scheme.species)
        if self.moieties:
            self.lam = np.array([m.lam for m in self.moieties], dtype=float)
        else:
            self.lam = np.zeros((0, n_species))
        size = self.nu.shape[0] + self.lam.shape[0] + int(self.charged)
        if size != n_species:
            raise ValueError(
                f"{self.nu.shape[0]} reactions, {self.lam.shape[0]} moieties and "
                f"{int(self.charged)} charge row do not match {n_species} species"
            )
        if self.charged and not (np.any(self.z > 0) and np.any(self.z < 0)):
            raise ValueError("charge balance impossible: ions of only one sign")
        if any(m.total is None for m in self.moieties):
            raise ValueError("every moiety needs a total before solving")
        self.totals = np.array([m.total for m in self.moieties], dtype=float)

    @property
    def size(self) -> int:
        return len(self.scheme.species)


def residuals(u, scheme, moieties, log10_K) -> np.ndarray:
    """Residual vector at ``u = ln xi`` for the corrected constants ``K'``."""
    system = System(scheme, moieties)
    u = np.asarray(u, dtype=float)
    if u.shape != (system.size,):
        raise ValueError(f"u has shape {u.shape}, expected ({system.size},)")
    if np.any(np.abs(u) > _kernels.U_CLIP):
        log.warning("log-concentration outside +-%g clamped", _kernels.U_CLIP)
    lnK = np.asarray(log10_K, dtype=float) * LN10
    return _kernels.residuals(u, system.nu, lnK, system.lam, system.totals,
                              system.z, system.charged)


def jacobian(u, scheme, moieties) -> np.ndarray:
    system = System(scheme, moieties)
    u = np.asarray(u, dtype=float)
    lnK = np.zeros(system.nu.shape[0])
    return _kernels.jacobian(u, system.nu, lnK, system.lam, system.totals,
                             system.z, system.charged)


def initial_guess(system: System) -> np.ndarray:
    """pH 7; each moiety total spread evenly over its member species."""
    scheme = system.scheme
    xi = np.full(system.size, math.nan)
    for m in system.moieties:
        members = np.nonzero(m.lam)[0]
        share = m.total / float(np.sum(np.abs(np.array(m.lam)[members])))
        for k in members:
            xi[k] = share if math.isnan(xi[k]) else min(xi[k], share)
    h = scheme.hydrogen_index
    if h is not None:
        xi[h] = 1e-7
    xi[np.isnan(xi)] = 1e-7
    return np.log(xi)


def _run_newton(system: System, lgK, u0, config: SolverConfig):
    lnK = np.asarray(lgK, dtype=float) * LN10
    try:
        u, iters, fnorm, status = _kernels.newton(
            np.asarray(u0, dtype=float), system.nu, lnK, system.lam, system.totals,
            system.z, system.charged, config.newton_tol, config.max_newton_iters,
            config.max_halvings,
        )
    except np.linalg.LinAlgError:
        J = _kernels.log_jacobian(np.asarray(u0, dtype=float), system.nu, system.lam,
                                  system.z, system.charged)
        return np.asarray(u0, dtype=float), 0, math.inf, _kernels.SINGULAR, J
    return u, int(iters), float(fnorm), int(status), None


def _continuation(system: System, lgK, u0, config: SolverConfig):
    """Walk lg K' from 0 to its target in ``continuation_steps`` stages."""
    u = u0
    total = 0
    result = None
    for step in range(1, config.continuation_steps + 1):
        frac = step / config.continuation_steps
        result = _run_newton(system, frac * np.asarray(lgK), u, config)
        total += result[1]
        if result[3] != _kernels.CONVERGED:
            return result[0], total, result[2], result[3], result[4]
        u = result[0]
    return result[0], total, result[2], result[3], result[4]


def _finish(system, u, lgK, iters, fnorm, status, model, diagnostics) -> EquilibriumState:
    scheme = system.scheme
    xi = np.exp(u)
    I = ionic_strength(xi, scheme.charges)
    lg_gamma = log10_gamma(1, I, model)
    h = scheme.hydrogen_index
    if h is not None:
        pH = -u[h] / LN10
        pH_a = pH - lg_gamma
    else:
        pH = pH_a = math.nan
    return EquilibriumState(
        names=scheme.names,
        xi=xi,
        u=u,
        pH=float(pH),
        pH_a=float(pH_a),
        I=I,
        gamma=10.0 ** lg_gamma,
        corrected_pK=-np.asarray(lgK, dtype=float),
        residual_norm=fnorm,
        newton_iters=iters,
        correction_iters=0,
        converged=status == _kernels.CONVERGED,
        moieties=list(system.moieties),
        diagnostics=diagnostics,
    )


_STATUS = {
    _kernels.MAX_ITER: "maximum Newton iterations exceeded",
    _kernels.LINE_SEARCH_FAILED: "line search could not reduce the residual",
    _kernels.SINGULAR: "singular Jacobian",
}


def newton_solve(scheme: Scheme, moieties, log10_K=None, config: SolverConfig | None = None,
                 model: ActivityModel | None = None, u0=None) -> EquilibriumState:
    """Solve the equilibrium for fixed constants ``log10_K`` (default: I = 0).

    A non-converged solve returns a state with ``converged=False`` and a
    diagnostic; a singular Jacobian raises :class:`SingularJacobianError`.
    """
    return _newton_system(System(scheme, moieties), log10_K, config or SolverConfig(),
                          model or ActivityModel(), u0)


def _newton_system(system: System, log10_K, config, model, u0=None) -> EquilibriumState:
    scheme = system.scheme
    lgK = scheme.log10_K() if log10_K is None else np.asarray(log10_K, dtype=float)
    diagnostics: list[str] = []

    if config.initial_guess == InitialGuess.USER and u0 is None:
        raise ValueError("initial_guess='user-supplied' needs u0")
    start = initial_guess(system) if u0 is None else np.asarray(u0, dtype=float)

    if config.initial_guess == InitialGuess.CONTINUATION:
        u, iters, fnorm, status, J = _continuation(system, lgK, start, config)
    else:
        u, iters, fnorm, status, J = _run_newton(system, lgK, start, config)
        if status != _kernels.CONVERGED:
            log.debug("direct Newton failed (%s); trying continuation", _STATUS[status])
            diagnostics.append(f"direct Newton failed: {_STATUS[status]}; used continuation")
            u2, it2, f2, s2, J2 = _continuation(system, lgK, initial_guess(system), config)
            iters += it2
            if s2 == _kernels.CONVERGED or f2 < fnorm:
                u, fnorm, status, J = u2, f2, s2, J2

    if status == _kernels.SINGULAR and J is not None:
        cond = np.linalg.cond(J)
        raise SingularJacobianError(f"singular Jacobian (condition number {cond:.3g})")
    if status != _kernels.CONVERGED:
        diagnostics.append(f"not converged: {_STATUS[status]} (max|F| = {fnorm:.3g})")
        log.warning("Newton solve did not converge: %s", _STATUS[status])
    log.debug("Newton: %d iterations, max|F| = %.3g", iters, fnorm)
    return _finish(system, u, lgK, iters, fnorm, status, model, diagnostics)


def solve_with_ionic_correction(scheme: Scheme, moieties, config: SolverConfig | None = None,
                                model: ActivityModel | None = None) -> EquilibriumState:
    """Fixed-point loop: solve at constant K', update I and K', repeat.

    The first pass uses the uncorrected constants (I = 0); its pH is kept
    as ``pH_I0``.  The loop stops when pH changes by less than
    ``config.correction_tol``.
    """
    config = config or SolverConfig()
    model = model or ActivityModel()
    system = System(scheme, moieties)
    lgK = scheme.log10_K()
    state = _newton_system(system, lgK, config, model)
    pH_I0 = state.pH
    history = [state.pH]
    total_newton = state.newton_iters
    passes = 1
    converged = state.converged
    # Without ions the corrected constants equal the plain ones: one pass.
    while state.converged and state.I > 0:
        lgK = corrected_log10_constants(scheme, state.I, model)
        nxt = _newton_system(system, lgK, config, model, u0=state.u)
        total_newton += nxt.newton_iters
        passes += 1
        history.append(nxt.pH)
        log.debug("correction pass %d: pH %.8f, I %.6g", passes, nxt.pH, nxt.I)
        delta = abs(nxt.pH - state.pH) if not math.isnan(nxt.pH) else abs(nxt.I - state.I)
        state = nxt
        if not state.converged:
            converged = False
            break
        if delta < config.correction_tol:
            converged = True
            break
        if passes >= config.max_correction_iters:
            converged = False
            state.diagnostics.append(
                "ionic-strength correction did not settle; last pH values "
                + ", ".join(f"{v:.6f}" for v in history[-4:])
            )
            break
    state.pH_I0 = pH_I0
    state.newton_iters = total_newton
    state.correction_iters = passes
    state.converged = converged and state.converged

    if config.direct_ionic and state.converged:
        state = direct_ionic_solve(scheme, moieties, config, model, state)
    return state


def solve_without_correction(scheme, moieties, config=None, model=None) -> EquilibriumState:
    state = newton_solve(scheme, moieties, None, config, model)
    state.pH_I0 = state.pH
    state.correction_iters = 1
    return state


def direct_ionic_solve(scheme, moieties, config, model, start: EquilibriumState):
    """Newton on the fully coupled system with K'(I(xi)), started from ``start``.

    Experimental; the correction loop is the default route.
    """
    system = System(scheme, moieties)
    lgK0 = scheme.log10_K()
    expo = gamma_exponents(scheme, model)
    z2 = system.z ** 2
    u = start.u.copy()

    def F_and_J(u):
        xi = np.exp(u)
        I = 0.5 * float(np.dot(xi, z2))
        sqrtI = math.sqrt(I)
        lgK = lgK0 - expo * model.A * sqrtI
        lnK = lgK * LN10
        F = _kernels.residuals(u, system.nu, lnK, system.lam, system.totals,
                               system.z, system.charged)
        J = _kernels.jacobian(u, system.nu, lnK, system.lam, system.totals,
                              system.z, system.charged)
        if sqrtI > 0:
            dI = 0.5 * z2 * xi
            dlnK = -expo[:, None] * model.A * LN10 * dI[None, :] / (2 * sqrtI)
            J[:system.nu.shape[0], :] -= dlnK
        return F, J, lgK

    F, J, lgK = F_and_J(u)
    iters = 0
    for iters in range(1, config.max_newton_iters + 1):
        step = np.linalg.solve(J, -F)
        t, fnorm = 1.0, np.linalg.norm(F)
        for _ in range(config.max_halvings + 1):
            Ft, Jt, lgKt = F_and_J(u + t * step)
            if np.linalg.norm(Ft) < fnorm:
                break
            t *= 0.5
        else:
            break
        u = u + t * step
        F, J, lgK = Ft, Jt, lgKt
        if np.max(np.abs(F)) < config.newton_tol:
            break
    fnorm = float(np.max(np.abs(F)))
    status = _kernels.CONVERGED if fnorm < config.newton_tol else _kernels.MAX_ITER
    out = _finish(system, u, lgK, start.newton_iters + iters, fnorm, status, model,
                  list(start.diagnostics) + ["direct coupled Newton"])
    out.pH_I0 = start.pH_I0
    out.correction_iters = start.correction_iters
    return out


@lru_cache(maxsize=64)
def _cached_moieties(scheme: Scheme):
    notes: list[str] = []
    moieties = canonical_moieties(scheme, notes)
    return tuple(moieties), tuple(notes)


def solve(scheme: Scheme, totals: dict[str, float], config: SolverConfig | None = None,
          model: ActivityModel | None = None, ionic: bool = True,
          moieties: list[Moiety] | None = None) -> EquilibriumState:
    """Speciation of ``scheme`` at the given analytical concentrations.

    ``totals`` maps moiety names (see :func:`canonical_moieties`) to mol/L.
    """
    diagnostics: list[str] = []
    if moieties is None:
        moieties, notes = _cached_moieties(scheme)
        diagnostics.extend(notes)
    moieties = assign_totals(moieties, totals)
    if ionic:
        state = solve_with_ionic_correction(scheme, moieties, config, model)
    else:
        state = solve_without_correction(scheme, moieties, config, model)
    state.diagnostics[:0] = diagnostics
    return state


def check_state(state: EquilibriumState, scheme: Scheme, tol: float = 1e-8) -> dict[str, float]:
    """Relative violations of charge balance, moiety budgets and mass action."""
    xi = state.xi
    z = scheme.charges.astype(float)
    out = {}
    denom = float(np.dot(np.abs(z), xi))
    out["electroneutrality"] = abs(float(np.dot(z, xi))) / denom if denom > 0 else 0.0
    for m in state.moieties:
        out[f"moiety:{m.name}"] = abs(float(np.dot(m.vector, xi)) - m.total) / m.total
    nu = stoichiometric_matrix(scheme).astype(float)
    lgK = -state.corrected_pK
    out["mass_action"] = float(np.max(np.abs(nu @ np.log10(xi) - lgK))) * LN10
    return out
