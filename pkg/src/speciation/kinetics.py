"""Mass-action kinetics, integrated to steady state.

This is an independent check on the algebraic solver: the stationary
point of the rate equations must be the equilibrium, and the moiety
totals must stay constant along the way.  Only small schemes with
moderate constants are practical; a buffer such as Tris-borate, whose
constants span more than ten decades, is far too stiff.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .conservation import Moiety, canonical_moieties
from .scheme import Scheme, stoichiometric_matrix

log = logging.getLogger(__name__)


class StiffnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class RateAssignment:
    k_plus: np.ndarray
    k_minus: np.ndarray

    @classmethod
    def from_scheme(cls, scheme: Scheme, k_minus_scale: float = 1.0) -> "RateAssignment":
        """``k- = scale``, ``k+ = K scale`` so that ``k+/k- = K``."""
        K = 10.0 ** scheme.log10_K()
        k_minus = np.full(scheme.r, float(k_minus_scale))
        return cls(K * k_minus, k_minus)

    @property
    def K(self) -> np.ndarray:
        return self.k_plus / self.k_minus


@dataclass
class Trajectory:
    t: np.ndarray
    xi: np.ndarray  # shape (len(t), n_species)
    drift: np.ndarray  # shape (len(t), n_moieties): a_s(t) - a_s(0)
    moieties: list[Moiety]

    @property
    def terminal(self) -> np.ndarray:
        return self.xi[-1]


def _orders(scheme: Scheme):
    n = len(scheme.species)
    fwd = np.zeros((scheme.r, n))
    bwd = np.zeros((scheme.r, n))
    for i, rx in enumerate(scheme.reactions):
        for k, c in rx.forward:
            fwd[i, k] = c
        for k, c in rx.backward:
            bwd[i, k] = c
    return fwd, bwd


def reaction_rate(i: int, xi, scheme: Scheme, rates: RateAssignment) -> float:
    """``sigma_i = -k+_i prod xi^nu+ + k-_i prod xi^nu-``.

    Negative while the reaction runs forward (left to right).
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("concentrations must be non-negative")
    rx = scheme.reactions[i]
    forward = np.prod([xi[k] ** c for k, c in rx.forward]) if rx.forward else 1.0
    backward = np.prod([xi[k] ** c for k, c in rx.backward]) if rx.backward else 1.0
    return float(-rates.k_plus[i] * forward + rates.k_minus[i] * backward)


def _rhs_factory(scheme: Scheme, rates: RateAssignment):
    nu = stoichiometric_matrix(scheme).astype(float)
    fwd, bwd = _orders(scheme)
    kp, km = rates.k_plus, rates.k_minus

    def rhs(t, xi):
        x = np.maximum(xi, 0.0)
        logs = np.log(np.where(x > 0, x, 1.0))
        zero = x <= 0
        pf = np.exp(fwd @ logs) * ~np.any(zero[None, :] & (fwd > 0), axis=1)
        pb = np.exp(bwd @ logs) * ~np.any(zero[None, :] & (bwd > 0), axis=1)
        # Net forward flux is -sigma; it produces the right-hand side.
        return nu.T @ (kp * pf - km * pb)

    def jac(t, xi):
        x = np.maximum(xi, 1e-300)
        pf = np.prod(x[None, :] ** fwd, axis=1)
        pb = np.prod(x[None, :] ** bwd, axis=1)
        dflux = (kp * pf)[:, None] * fwd / x[None, :] - (km * pb)[:, None] * bwd / x[None, :]
        return nu.T @ dflux

    return rhs, jac


def integrate_to_steady_state(scheme: Scheme, rates: RateAssignment, xi0, *,
                              rtol: float = 1e-8, atol: float | None = None,
                              stationary_tol: float = 1e-10, t_first: float = 1.0,
                              t_max: float = 1e12, moieties: list[Moiety] | None = None
                              ) -> Trajectory:
    """Integrate the rate equations with BDF until ``|dxi/dt| / |xi| < stationary_tol``.

    The horizon doubles until the stationarity test passes or ``t_max``
    is reached.  Step-size collapse raises :class:`StiffnessError`.
    """
    xi0 = np.asarray(xi0, dtype=float)
    if np.any(xi0 < 0):
        raise ValueError("initial concentrations must be non-negative")
    if moieties is None:
        moieties = canonical_moieties(scheme)
    lam = np.array([m.lam for m in moieties], dtype=float).reshape(len(moieties), -1)
    a0 = lam @ xi0
    rhs, jac = _rhs_factory(scheme, rates)
    if atol is None:
        atol = 1e-14 * max(float(np.max(xi0)), 1.0)

    times = [np.array([0.0])]
    states = [xi0[None, :]]
    t0, y0, horizon = 0.0, xi0, t_first
    while True:
        sol = solve_ivp(rhs, (t0, horizon), y0, method="BDF", rtol=rtol, atol=atol,
                        jac=jac, dense_output=False)
        if sol.status != 0:
            raise StiffnessError(
                f"integration failed at t={sol.t[-1]:.3g}: {sol.message}; "
                "rescale the rate constants (|pK| <= 4 works well)"
            )
        times.append(sol.t[1:])
        states.append(sol.y.T[1:])
        t0, y0 = sol.t[-1], sol.y[:, -1]
        speed = np.linalg.norm(rhs(t0, y0)) / np.linalg.norm(y0)
        log.debug("t=%.3g  |dxi/dt|/|xi|=%.3g", t0, speed)
        if speed < stationary_tol:
            break
        if horizon >= t_max:
            raise StiffnessError(f"no steady state before t={t_max:g} (rate {speed:.3g})")
        horizon = min(2.0 * horizon if horizon > 0 else t_first, t_max)
    t = np.concatenate(times)
    xi = np.vstack(states)
    drift = xi @ lam.T - a0[None, :]
    return Trajectory(t=t, xi=xi, drift=drift, moieties=list(moieties))
