"""Reaction schemes: species, reversible reactions and the text format.

A scheme document has one statement per line; ``#`` starts a comment::

    species H{+1} HB{0} B{-1}        # optional, fixes species order
    HB{0} = B{-1} + H{+1} ; pK=9.29
    3*HB = H3B3{0} ; pK=-1.77 ; gamma_exp=3
    water pKw=14.0
    total B = 0.2

Charges may be omitted after a species has been declared once.  The
hydrogen ion ``H{+1}`` always gets index 0.  ``total`` lines are not part
of the scheme; :func:`parse_document` returns them separately.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

HYDROGEN = "H"
HYDROXYL = "OH"
MAX_COEFFICIENT = 99
DEFAULT_PKW = 14.0


class SchemeError(ValueError):
    """Invalid reaction scheme."""


class SchemeSyntaxError(SchemeError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class Species:
    name: str
    charge: int
    index: int


@dataclass(frozen=True)
class Reaction:
    """A reversible reaction ``sum(forward) = sum(backward)``.

    ``forward`` and ``backward`` map species index to a positive integer
    coefficient.  ``gamma_exponent`` optionally fixes the power of the
    single-charge activity coefficient in the corrected constant; when
    ``None`` it follows from the charges.
    """

    forward: tuple[tuple[int, int], ...]
    backward: tuple[tuple[int, int], ...]
    pK: float
    gamma_exponent: int | None = None
    water: bool = False

    @property
    def log10_K(self) -> float:
        return -self.pK

    def net(self, n_species: int) -> np.ndarray:
        row = np.zeros(n_species, dtype=np.int64)
        for k, c in self.backward:
            row[k] += c
        for k, c in self.forward:
            row[k] -= c
        return row


@dataclass(frozen=True)
class Scheme:
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    pKw: float | None = None

    def __post_init__(self):
        validate(self)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.species]

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.charge for s in self.species], dtype=np.int64)

    @property
    def n(self) -> int:
        """Number of species other than the hydrogen ion."""
        return len(self.species) - (1 if self.hydrogen_index is not None else 0)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def includes_water_autoprotolysis(self) -> bool:
        return self.pKw is not None

    @property
    def hydrogen_index(self) -> int | None:
        if self.species and self.species[0].name == HYDROGEN:
            return 0
        return None

    @property
    def is_charged(self) -> bool:
        return any(s.charge != 0 for s in self.species)

    def index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(name)

    def log10_K(self) -> np.ndarray:
        return np.array([rx.log10_K for rx in self.reactions], dtype=float)

    def with_pK(self, values: dict[int, float]) -> "Scheme":
        """Copy of the scheme with some reaction constants replaced."""
        reactions = list(self.reactions)
        pKw = self.pKw
        for i, pK in values.items():
            reactions[i] = Reaction(
                reactions[i].forward, reactions[i].backward, float(pK),
                reactions[i].gamma_exponent, reactions[i].water,
            )
            if reactions[i].water:
                pKw = float(pK)
        return Scheme(self.species, tuple(reactions), pKw)


def stoichiometric_matrix(scheme: Scheme) -> np.ndarray:
    """Signed integer matrix ``nu[i, k] = backward - forward``."""
    n_species = len(scheme.species)
    if not scheme.reactions:
        return np.zeros((0, n_species), dtype=np.int64)
    return np.vstack([rx.net(n_species) for rx in scheme.reactions])


def exact_rank(matrix) -> int:
    """Rank of an integer matrix by elimination over the rationals."""
    rows = [[Fraction(int(v)) for v in row] for row in np.asarray(matrix)]
    rank = 0
    n_cols = len(rows[0]) if rows else 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def validate(scheme: Scheme) -> None:
    names = [s.name for s in scheme.species]
    if len(set(names)) != len(names):
        raise SchemeError("duplicate species names")
    if any(not s.name for s in scheme.species):
        raise SchemeError("empty species name")
    for i, s in enumerate(scheme.species):
        if s.index != i:
            raise SchemeError(f"species {s.name!r} has index {s.index}, expected {i}")
        if s.name == HYDROGEN and i != 0:
            raise SchemeError("the hydrogen ion must have index 0")
    if not scheme.reactions:
        raise SchemeError("scheme has no reactions")
    z = scheme.charges
    for i, rx in enumerate(scheme.reactions):
        if not rx.water and (not rx.forward or not rx.backward):
            raise SchemeError(f"reaction {i + 1} has an empty side")
        for k, c in rx.forward + rx.backward:
            if not 0 <= k < len(scheme.species):
                raise SchemeError(f"reaction {i + 1} refers to unknown species {k}")
            if not 1 <= c <= MAX_COEFFICIENT:
                raise SchemeError(
                    f"reaction {i + 1}: coefficient {c} outside 1..{MAX_COEFFICIENT}"
                )
        if not math.isfinite(rx.pK):
            raise SchemeError(f"reaction {i + 1}: pK must be finite")
        if int(rx.net(len(z)) @ z) != 0:
            raise SchemeError(f"reaction {i + 1} does not conserve charge")
    nu = stoichiometric_matrix(scheme)
    if exact_rank(nu) < scheme.r:
        raise SchemeError("reactions are linearly dependent")


# -- parsing ---------------------------------------------------------------

_NAME = r"[A-Za-z][A-Za-z0-9_]*"
_TERM_RE = re.compile(
    rf"^\s*(?:(?P<coef>\d+)\s*\*\s*)?(?P<name>{_NAME})\s*"
    r"(?:\{\s*(?P<charge>[+-]?\d+)\s*\})?\s*$"
)
_REF_RE = re.compile(rf"(?P<name>{_NAME})\s*(?:\{{\s*(?P<charge>[+-]?\d+)\s*\}})?")
_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_WATER_RE = re.compile(rf"^water\s+pKw\s*=\s*(?P<pkw>{_NUMBER})\s*$")
_TOTAL_RE = re.compile(rf"^total\s+(?P<name>{_NAME})\s*=\s*(?P<value>{_NUMBER})\s*$")
_OPTION_RE = re.compile(rf"^(?P<key>pK|gamma_exp)\s*=\s*(?P<value>{_NUMBER})$")


class _Builder:
    def __init__(self):
        self.charges: dict[str, int] = {}
        self.order: list[str] = []

    def register(self, name, charge, lineno, col):
        if charge is None:
            if name not in self.charges:
                if name == HYDROGEN:
                    charge = 1
                else:
                    raise SchemeSyntaxError(
                        f"charge of {name!r} must be given on first mention", lineno, col
                    )
            else:
                return
        if name in self.charges and self.charges[name] != charge:
            raise SchemeSyntaxError(
                f"species {name!r} redeclared with charge {charge:+d} "
                f"(was {self.charges[name]:+d})",
                lineno,
                col,
            )
        if name == HYDROGEN and charge != 1:
            raise SchemeSyntaxError("the hydrogen ion H must have charge +1", lineno, col)
        if name not in self.charges:
            self.charges[name] = charge
            self.order.append(name)


def _split_terms(text):
    """Split a reaction side on '+' signs that are not inside braces."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_document(text: str) -> tuple[Scheme, dict[str, float]]:
    """Parse a scheme document, returning the scheme and its ``total`` lines."""
    builder = _Builder()
    raw_reactions = []
    totals: dict[str, float] = {}
    pKw = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())

        if stripped.startswith("species ") or stripped == "species":
            rest = stripped[len("species"):]
            pos = 0
            for m in _REF_RE.finditer(rest):
                if rest[pos:m.start()].strip():
                    raise SchemeSyntaxError(
                        "malformed species list", lineno, indent + len("species") + pos + 1
                    )
                charge = int(m.group("charge")) if m.group("charge") is not None else None
                builder.register(
                    m.group("name"), charge, lineno, indent + len("species") + m.start() + 1
                )
                pos = m.end()
            if rest[pos:].strip():
                raise SchemeSyntaxError("malformed species list", lineno, indent + pos + 1)
            continue

        m = _WATER_RE.match(stripped)
        if m:
            if pKw is not None:
                raise SchemeSyntaxError("water declared twice", lineno, indent + 1)
            pKw = float(m.group("pkw"))
            builder.register(HYDROGEN, 1, lineno, indent + 1)
            builder.register(HYDROXYL, -1, lineno, indent + 1)
            raw_reactions.append(("water", pKw, None, lineno))
            continue

        m = _TOTAL_RE.match(stripped)
        if m:
            name = m.group("name")
            if name in totals:
                raise SchemeSyntaxError(f"total {name!r} given twice", lineno, indent + 1)
            totals[name] = float(m.group("value"))
            continue
        if stripped.split()[0] == "total":
            raise SchemeSyntaxError("malformed total line", lineno, indent + 1)

        if stripped.split()[0] == "water":
            raise SchemeSyntaxError("malformed water line, expected 'water pKw=<x>'",
                                    lineno, indent + 1)

        if "=" not in stripped or ";" not in stripped:
            raise SchemeSyntaxError(
                "expected '<lhs> = <rhs> ; pK=<value>'", lineno, indent + 1
            )
        body, _, opts = line.partition(";")
        lhs, eq, rhs = body.partition("=")
        pK = None
        gamma_exp = None
        opt_col = len(body) + 2
        for opt in opts.split(";"):
            o = opt.strip().replace(" ", "")
            om = _OPTION_RE.match(o)
            if om is None:
                raise SchemeSyntaxError(f"cannot parse option {opt.strip()!r}", lineno, opt_col)
            if om.group("key") == "pK":
                pK = float(om.group("value"))
            else:
                value = float(om.group("value"))
                if value != int(value):
                    raise SchemeSyntaxError("gamma_exp must be an integer", lineno, opt_col)
                gamma_exp = int(value)
            opt_col += len(opt) + 1
        if pK is None:
            raise SchemeSyntaxError("reaction needs 'pK=<value>'", lineno, opt_col)
        left = _parse_terms(lhs, builder, lineno, 0)
        right = _parse_terms(rhs, builder, lineno, len(lhs) + 1)
        raw_reactions.append(((left, right), pK, gamma_exp, lineno))

    if not raw_reactions:
        raise SchemeError("scheme has no reactions")

    order = list(builder.order)
    if HYDROGEN in order:
        order.remove(HYDROGEN)
        order.insert(0, HYDROGEN)
    index = {name: i for i, name in enumerate(order)}
    species = tuple(Species(name, builder.charges[name], index[name]) for name in order)

    reactions = []
    for sides, pK, gamma_exp, lineno in raw_reactions:
        if sides == "water":
            reactions.append(
                Reaction((), ((index[HYDROGEN], 1), (index[HYDROXYL], 1)), pK, None, True)
            )
            continue
        left, right = sides
        try:
            reactions.append(
                Reaction(_collect(left, index, lineno), _collect(right, index, lineno),
                         pK, gamma_exp)
            )
        except SchemeError as exc:
            if isinstance(exc, SchemeSyntaxError):
                raise
            raise SchemeSyntaxError(str(exc), lineno) from None

    for i, rx in enumerate(reactions):
        z = np.array([s.charge for s in species])
        if int(rx.net(len(species)) @ z) != 0:
            raise SchemeSyntaxError("reaction does not conserve charge", raw_reactions[i][3])
    return Scheme(species, tuple(reactions), pKw), totals


def _parse_terms(text, builder, lineno, offset):
    terms = []
    pos = 0
    for piece in _split_terms(text):
        col = offset + pos + 1
        pos += len(piece) + 1
        if not piece.strip():
            raise SchemeSyntaxError("empty term", lineno, col)
        m = _TERM_RE.match(piece)
        if m is None:
            raise SchemeSyntaxError(f"cannot parse term {piece.strip()!r}", lineno, col)
        coef = int(m.group("coef")) if m.group("coef") else 1
        if not 1 <= coef <= MAX_COEFFICIENT:
            raise SchemeSyntaxError(
                f"coefficient {coef} outside 1..{MAX_COEFFICIENT}", lineno, col
            )
        charge = int(m.group("charge")) if m.group("charge") is not None else None
        builder.register(m.group("name"), charge, lineno, col)
        terms.append((m.group("name"), coef))
    return terms


def _collect(terms, index, lineno):
    acc: dict[int, int] = {}
    for name, coef in terms:
        acc[index[name]] = acc.get(index[name], 0) + coef
    for k, c in acc.items():
        if c > MAX_COEFFICIENT:
            raise SchemeSyntaxError(
                f"coefficient {c} outside 1..{MAX_COEFFICIENT}", lineno
            )
    return tuple(sorted(acc.items()))


def parse_scheme(text: str) -> Scheme:
    return parse_document(text)[0]


def _format_float(x: float) -> str:
    return repr(float(x))


def _ref(s: Species) -> str:
    return f"{s.name}{{{s.charge:+d}}}" if s.charge else f"{s.name}{{0}}"


def render(scheme: Scheme) -> str:
    """Scheme document text; ``parse_scheme(render(s)) == s``."""
    lines = ["species " + " ".join(_ref(s) for s in scheme.species)]
    for rx in scheme.reactions:
        if rx.water:
            lines.append(f"water pKw={_format_float(rx.pK)}")
            continue

        def side(terms):
            out = []
            for k, c in terms:
                ref = _ref(scheme.species[k])
                out.append(ref if c == 1 else f"{c}*{ref}")
            return " + ".join(out)

        line = f"{side(rx.forward)} = {side(rx.backward)} ; pK={_format_float(rx.pK)}"
        if rx.gamma_exponent is not None:
            line += f" ; gamma_exp={rx.gamma_exponent}"
        lines.append(line)
    return "\n".join(lines) + "\n"
