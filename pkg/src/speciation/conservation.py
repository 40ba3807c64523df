"""Conserved moieties: exact null space of the stoichiometric matrix.

The null space is computed over the rationals and cleared to primitive
integer vectors, so the resulting totals keep their chemical reading
(``C_B = [HB] + [B-] + 3[H3B3] + ...``) instead of being arbitrary
floating-point mixtures.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import reduce

import numpy as np

from .scheme import HYDROGEN, Scheme, exact_rank, stoichiometric_matrix


class DegenerateMixtureError(ValueError):
    """A moiety total is zero (or missing), so the mixture is degenerate."""


@dataclass(frozen=True)
class Moiety:
    name: str
    lam: tuple[int, ...]
    total: float | None = None

    def __post_init__(self):
        if not any(self.lam):
            raise ValueError(f"moiety {self.name!r} has a zero coefficient vector")

    def with_total(self, total: float) -> "Moiety":
        return replace(self, total=float(total))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.lam, dtype=float)


@dataclass(frozen=True)
class ChemicalSubsystem:
    moiety: Moiety
    members: tuple[str, ...]


def subsystem(moiety: Moiety, scheme: Scheme) -> ChemicalSubsystem:
    members = tuple(s.name for s, c in zip(scheme.species, moiety.lam) if c != 0)
    return ChemicalSubsystem(moiety, members)


def _rref(matrix):
    rows = [[Fraction(int(v)) for v in row] for row in matrix]
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for col in range(n_cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][col]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def primitive(vec) -> tuple[int, ...]:
    """Smallest integer multiple of a rational vector, leading entry positive."""
    vec = [Fraction(v) for v in vec]
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in vec), 1)
    ints = [int(v * den) for v in vec]
    g = reduce(math.gcd, (abs(v) for v in ints), 0)
    if g == 0:
        return tuple(ints)
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def null_space(matrix, n_cols: int | None = None) -> list[tuple[int, ...]]:
    """Integer basis of ``{x : matrix @ x = 0}``.

    ``n_cols`` is only needed when ``matrix`` has no rows.
    """
    matrix = np.asarray(matrix, dtype=np.int64)
    if n_cols is None:
        n_cols = matrix.shape[1]
    if matrix.size == 0:
        return [tuple(1 if j == i else 0 for j in range(n_cols)) for i in range(n_cols)]
    rows, pivots = _rref(matrix)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            vec[p] = -row[f]
        basis.append(primitive(vec))
    for v in basis:
        assert not np.any(matrix @ np.array(v, dtype=np.int64))
    return basis


_SYMBOL_RE = re.compile(r"([A-Z][a-z]*)(\d*)")


def symbol_counts(name: str) -> dict[str, int] | None:
    """``'H2B3'`` -> ``{'H': 2, 'B': 3}``; ``None`` if the name is not formula-like."""
    counts: dict[str, int] = {}
    pos = 0
    for m in _SYMBOL_RE.finditer(name):
        if m.start() != pos:
            return None
        counts[m.group(1)] = counts.get(m.group(1), 0) + int(m.group(2) or 1)
        pos = m.end()
    if pos != len(name) or not counts:
        return None
    return counts


def _in_span(vectors, candidate) -> bool:
    if not vectors:
        return not any(candidate)
    return exact_rank(list(vectors) + [candidate]) == exact_rank(list(vectors))


def canonical_moieties(scheme: Scheme, diagnostics: list | None = None) -> list[Moiety]:
    """Named conserved moieties of a scheme, without the charge vector.

    Each chemical symbol appearing in the species names is tried as a
    moiety: a species contributes its subscript count of that symbol.
    Candidates that are conserved by every reaction and independent of the
    ones already chosen (and of the charge vector) are kept; the hydrogen
    and oxygen symbols are tried last.  Whatever the symbols do not cover
    is filled from the raw null space under the names ``M1``, ``M2``, ...
    """
    nu = stoichiometric_matrix(scheme)
    n_species = len(scheme.species)
    basis = null_space(nu, n_species)
    z = tuple(int(c) for c in scheme.charges)
    chosen: list[tuple[int, ...]] = []
    if any(z):
        chosen.append(z)
    target = len(basis)
    expected = scheme.n - scheme.r
    n_moieties = target - len(chosen)
    if diagnostics is not None and scheme.hydrogen_index is not None \
            and n_moieties != expected:
        diagnostics.append(
            f"null space gives {n_moieties} moieties but n - r = {expected}"
        )

    moieties: list[Moiety] = []
    parsed = [symbol_counts(s.name) for s in scheme.species]
    if all(p is not None for p in parsed):
        symbols: list[str] = []
        for p in parsed:
            for sym in p:
                if sym not in symbols:
                    symbols.append(sym)
        symbols.sort(key=lambda s: s in (HYDROGEN, "O"))
        for sym in symbols:
            if len(chosen) == target:
                break
            lam = tuple(p.get(sym, 0) for p in parsed)
            if not any(lam) or np.any(nu @ np.array(lam, dtype=np.int64)):
                continue
            if _in_span(chosen, lam):
                continue
            chosen.append(lam)
            moieties.append(Moiety(sym, lam))

    auto = 0
    for vec in basis:
        if len(chosen) == target:
            break
        if _in_span(chosen, vec):
            continue
        auto += 1
        name = f"M{auto}"
        while any(m.name == name for m in moieties):
            auto += 1
            name = f"M{auto}"
        chosen.append(vec)
        moieties.append(Moiety(name, vec))
    if auto and diagnostics is not None:
        diagnostics.append(f"{auto} moiety vector(s) not identified by chemical symbol")
    return moieties


def custom_moiety(scheme: Scheme, name: str, coefficients: dict[str, int]) -> Moiety:
    """Moiety from user coefficients, checked against every reaction."""
    lam = tuple(int(coefficients.get(s.name, 0)) for s in scheme.species)
    unknown = set(coefficients) - set(scheme.names)
    if unknown:
        raise KeyError(f"unknown species {sorted(unknown)}")
    if np.any(stoichiometric_matrix(scheme) @ np.array(lam, dtype=np.int64)):
        raise ValueError(f"moiety {name!r} is not conserved by the reactions")
    return Moiety(name, lam)


def assign_totals(moieties, totals: dict[str, float]) -> list[Moiety]:
    """Attach analytical concentrations; every moiety needs a positive total."""
    names = [m.name for m in moieties]
    unknown = set(totals) - set(names)
    if unknown:
        raise KeyError(f"unknown moiety {sorted(unknown)}; scheme has {names}")
    out = []
    for m in moieties:
        if m.name not in totals:
            raise DegenerateMixtureError(f"missing total for moiety {m.name!r}")
        value = float(totals[m.name])
        if not value > 0:
            raise DegenerateMixtureError(
                f"moiety {m.name!r} has total {value:g}; zero or negative analytical "
                "concentrations are degenerate and not solved"
            )
        out.append(m.with_total(value))
    return out


def dissociation_degrees(xi, moiety: Moiety) -> np.ndarray:
    """Fraction ``lam_k * xi_k / a`` of the moiety carried by each species."""
    if moiety.total is None or moiety.total == 0:
        raise DegenerateMixtureError(f"moiety {moiety.name!r} absent from mixture")
    return moiety.vector * np.asarray(xi, dtype=float) / moiety.total
