"""Built-in schemes: a monobasic acid/base pair and the Tris-borate buffer."""

from __future__ import annotations

from .scheme import Scheme, parse_scheme

ACID_BASE_DEFAULTS = {"pKa": 9.29, "pKb": 7.98, "pKw": 14.0}

# Boric acid (HB) + tris (HT+): borate, triborate and tris-borate complexes.
TRIS_BORATE_DEFAULTS = {
    "pK1": 9.29,
    "pK2": -1.77,
    "pK3": 9.02,
    "pK4": -2.53,
    "pK5": 9.50,
    "pK6": 7.98,
    "pKw": 14.0,
}

# K'_2 = K_2 gamma^3 reproduces the reference values; the charge-derived exponent is 0.
TRIS_BORATE_GAMMA_EXPONENTS = (-2, 3, -2, 0, -2, 0)

_ACID_BASE = """\
# monobasic acid HA and base B (protonated form HB+)
HA{{0}} = A{{-1}} + H{{+1}} ; pK={pKa!r}
HB{{+1}} = B{{0}} + H ; pK={pKb!r}
water pKw={pKw!r}
"""

_TRIS_BORATE = """\
# boric acid + tris
HB{{0}} = B{{-1}} + H{{+1}} ; pK={pK1!r}
3*HB = H3B3{{0}} ; pK={pK2!r} ; gamma_exp=3
H3B3 = H2B3{{-1}} + H ; pK={pK3!r}
HB + T{{0}} = HTB{{0}} ; pK={pK4!r}
HTB = TB{{-1}} + H ; pK={pK5!r}
HT{{+1}} = T + H ; pK={pK6!r}
water pKw={pKw!r}
"""

PRESETS = {
    "acid-base": (_ACID_BASE, ACID_BASE_DEFAULTS),
    "tris-borate": (_TRIS_BORATE, TRIS_BORATE_DEFAULTS),
}


def preset_text(name: str, **overrides) -> str:
    try:
        template, defaults = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise KeyError(f"preset {name!r} has no parameter(s) {sorted(unknown)}; "
                       f"known: {sorted(defaults)}")
    params = {k: float(v) for k, v in {**defaults, **overrides}.items()}
    return template.format(**params)


def preset_scheme(name: str, **overrides) -> Scheme:
    return parse_scheme(preset_text(name, **overrides))


def acid_base_scheme(**overrides) -> Scheme:
    return preset_scheme("acid-base", **overrides)


def tris_borate_scheme(**overrides) -> Scheme:
    return preset_scheme("tris-borate", **overrides)
