"""Least-squares polynomial fits of a pH profile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RankDeficientFitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    """Polynomial ``sum_j c_j x**j`` fitted by ordinary least squares.

    Attributes
    ----------
    degree : int
    coefficients : tuple of float
        Constant term first.
    sigma : float
        Root-mean-square residual over the samples.
    max0 : float
        Largest absolute residual.
    n : int
        Number of samples.
    """

    degree: int
    coefficients: tuple[float, ...]
    sigma: float
    max0: float
    n: int

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefficients)


def polyfit(x, y, degree: int) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if x.size < degree + 2:
        raise ValueError(f"a degree-{degree} fit needs at least {degree + 2} points, got {x.size}")
    V = np.vander(x, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(V, y, rcond=None)
    if rank < degree + 1:
        raise RankDeficientFitError(
            f"design matrix has rank {rank} < {degree + 1}; need more distinct x values"
        )
    resid = y - V @ coef
    return FitResult(
        degree=degree,
        coefficients=tuple(float(c) for c in coef),
        sigma=float(np.sqrt(np.mean(resid ** 2))),
        max0=float(np.max(np.abs(resid))),
        n=int(x.size),
    )
