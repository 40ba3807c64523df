"""Ionic strength and Debye-Hueckel limiting-law activity corrections.

All logarithms here are base 10, matching the pK/pH convention.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .scheme import Scheme, stoichiometric_matrix

log = logging.getLogger(__name__)

DEBYE_A = 0.5093
GAMMA_FLOOR = 1e-6
LOG10_GAMMA_FLOOR = math.log10(GAMMA_FLOOR)


@dataclass(frozen=True)
class ActivityModel:
    A: float = DEBYE_A
    correct_water: bool = False

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"Debye-Hueckel constant A must be positive, got {self.A}")

    def log10_gamma(self, z, I):
        return log10_gamma(z, I, self)


@dataclass(frozen=True)
class IonicState:
    I: float
    gamma_by_charge: dict[int, float] = field(default_factory=dict)
    corrected_pK: tuple[float, ...] = ()


def ionic_strength(xi, charges) -> float:
    """``I = 1/2 sum xi_k z_k^2``."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("negative concentration in ionic strength")
    z = np.asarray(charges, dtype=float)
    return 0.5 * float(np.dot(xi, z * z))


def log10_gamma(z, I, model: ActivityModel | None = None):
    """``lg gamma = -A z^2 sqrt(I)``, floored at ``lg 1e-6``."""
    if I < 0:
        raise ValueError(f"ionic strength must be non-negative, got {I}")
    A = DEBYE_A if model is None else model.A
    z = np.asarray(z, dtype=float)
    value = np.maximum(-A * z * z * math.sqrt(I), LOG10_GAMMA_FLOOR)
    return float(value) if value.ndim == 0 else value


def gamma_exponents(scheme: Scheme, model: ActivityModel | None = None) -> np.ndarray:
    """Power of the single-charge coefficient in each corrected constant.

    With ``lg gamma_k = z_k^2 lg gamma_1`` the mechanical exponent of
    reaction i is ``-sum_k nu_ik z_k^2``.  A reaction may override it, and
    the water reaction gets 0 unless the model corrects water.
    """
    correct_water = model.correct_water if model is not None else False
    z2 = scheme.charges.astype(np.int64) ** 2
    nu = stoichiometric_matrix(scheme)
    out = -(nu @ z2)
    for i, rx in enumerate(scheme.reactions):
        if rx.gamma_exponent is not None:
            out[i] = rx.gamma_exponent
        elif rx.water and not correct_water:
            out[i] = 0
    return out.astype(float)


def corrected_log10_constants(scheme: Scheme, I: float,
                              model: ActivityModel | None = None) -> np.ndarray:
    """``lg K'_i = lg K_i - sum_k nu_ik lg gamma_k`` (with any overrides)."""
    model = model or ActivityModel()
    lgK = scheme.log10_K()
    if I == 0:
        return lgK
    if I > 1:
        log.warning("ionic strength %.3g mol/L is beyond the limiting law's range", I)
    return lgK + gamma_exponents(scheme, model) * log10_gamma(1, I, model)


def corrected_constants(scheme: Scheme, I: float,
                        model: ActivityModel | None = None) -> np.ndarray:
    return 10.0 ** corrected_log10_constants(scheme, I, model)


def ionic_state(scheme: Scheme, xi, model: ActivityModel | None = None) -> IonicState:
    model = model or ActivityModel()
    I = ionic_strength(xi, scheme.charges)
    charges = sorted({abs(int(z)) for z in scheme.charges})
    gammas = {z: 10.0 ** log10_gamma(z, I, model) for z in charges}
    pK = tuple(-corrected_log10_constants(scheme, I, model))
    return IonicState(I, gammas, pK)


def plain_pH(h_plus: float) -> float:
    if not h_plus > 0:
        raise ValueError(f"[H+] must be positive, got {h_plus}")
    return -math.log10(h_plus)


def activity_pH(h_plus: float, gamma_h: float) -> float:
    """``pH_a = -lg(gamma_H [H+])``."""
    if not h_plus > 0:
        raise ValueError(f"[H+] must be positive, got {h_plus}")
    if not 0 < gamma_h <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma_h}")
    return -math.log10(gamma_h * h_plus)
