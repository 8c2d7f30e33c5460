"""Small helpers that turn condition strings into ConditionSet fields."""
from __future__ import annotations

import re
from typing import Iterable, Optional

from .docmodel import ConditionSet

SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹₀₁₂₃₄₅₆₇₈₉′’", "01234567890123456789''")
MINUS = str.maketrans({"−": "-", "–": "-", "—": "-"})

_TEMP = re.compile(r"(?P<value>[-+]?\d+(?:\.\d+)?)\s*(?P<unit>°\s*C|℃|K)(?!\w)|(?P<word>\brt\b|\br\.t\.|room temperature|reflux)", re.I)
_TIME = re.compile(r"(?P<value>\d+(?:\.\d+)?)\s*(?P<unit>h|hr|hrs|hours?|min|mins|minutes?|d|days?|s)\b", re.I)
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")
_YIELD = re.compile(r"(?P<value>\d+(?:\.\d+)?)\s*%")

NO_VALUE = frozenset({"", "-", "--", "none", "n/a", "na", "—", "–"})
NON_NUMERIC_YIELDS = frozenset({"trace", "traces", "nr", "n.r.", "nd", "n.d.", "-", "--", "—", "–", "no reaction"})

SOLVENTS = frozenset(s.lower() for s in (
    "DMF", "DMA", "DMAc", "DMSO", "THF", "2-MeTHF", "MeCN", "CH3CN", "acetonitrile", "DCM", "CH2Cl2",
    "DCE", "CHCl3", "toluene", "PhMe", "benzene", "xylene", "dioxane", "1,4-dioxane", "MeOH", "EtOH",
    "iPrOH", "i-PrOH", "tBuOH", "t-BuOH", "H2O", "water", "Et2O", "ether", "hexane", "hexanes",
    "EtOAc", "acetone", "NMP", "HFIP", "TFE", "pyridine", "PhCl", "chlorobenzene", "DME", "MTBE",
))
_METALS = re.compile(r"(Pd|Pt|Ni|Cu|Rh|Ir|Ru|Fe|Co|Ag|Au|Mn|Zn|Sc|In|Bi)(?![a-z])")


def normalize_text(text: str) -> str:
    return text.translate(SUPERSCRIPTS).translate(MINUS).strip()


def parse_temperature(text: str, unit: Optional[str] = None) -> tuple[Optional[str], Optional[str]]:
    """Split a temperature cell into (value, unit); bare numbers keep ``unit``."""
    s = normalize_text(text)
    if s.lower() in NO_VALUE:
        return None, None
    m = _TEMP.search(s)
    if m and m.group("word"):
        return m.group("word").lower().replace(".", ""), None
    if m:
        u = m.group("unit").replace(" ", "")
        return m.group("value"), "°C" if u in ("°C", "℃") else u
    return s, unit


def parse_time(text: str, unit: Optional[str] = None) -> tuple[Optional[str], Optional[str]]:
    s = normalize_text(text)
    if s.lower() in NO_VALUE:
        return None, None
    m = _TIME.search(s)
    if m:
        return m.group("value"), _unit_name(m.group("unit"))
    return s, unit


def _unit_name(unit: str) -> str:
    u = unit.lower()
    if u.startswith("h"):
        return "h"
    if u.startswith("min"):
        return "min"
    if u.startswith("d"):
        return "d"
    return u


class YieldFormatError(ValueError):
    pass


def parse_yield(text: str) -> Optional[float]:
    """Percentage in a yield cell; None for trace/n.r.-style entries.

    The first number is taken, so "91 (85)" reads as 91 and ">99" as 99.
    """
    s = normalize_text(text).lower()
    if s in NON_NUMERIC_YIELDS or s in NO_VALUE:
        return None
    m = _YIELD.search(s) or _NUMBER.search(s)
    if not m:
        raise YieldFormatError(f"cannot read a yield from {text!r}")
    value = float(m.group("value") if "value" in m.groupdict() else m.group(0))
    if not 0 <= value <= 200:
        raise YieldFormatError(f"yield {value} outside [0, 200]")
    return value


def looks_like_catalyst(token: str) -> bool:
    return bool(_METALS.search(token)) or "cat" in token.lower()


def split_condition_text(texts: Iterable[str]) -> list[str]:
    out = []
    for text in texts:
        for part in re.split(r"[,;]\s*(?![^()]*\))", text):
            part = part.strip()
            if part:
                out.append(part)
    return out


def conditions_from_text(texts: Iterable[str]) -> ConditionSet:
    """Best-effort reading of free condition strings such as
    ``"Pd(OAc)2 (5 mol%), K2CO3, DMF, 80 °C, 12 h"``.
    """
    texts = [t for t in texts if t.strip()]
    fields: dict = {"reagents": [], "text": tuple(texts)}
    for token in split_condition_text(texts):
        norm = normalize_text(token)
        if _TEMP.fullmatch(norm) and "temperature" not in fields:
            fields["temperature"], fields["temperature_unit"] = parse_temperature(norm)
            continue
        if _TIME.fullmatch(norm) and "time" not in fields:
            fields["time"], fields["time_unit"] = parse_time(norm)
            continue
        if norm.lower() in SOLVENTS and "solvent" not in fields:
            fields["solvent"] = norm
            continue
        ym = _YIELD.fullmatch(norm)
        if ym and "yield_percent" not in fields:
            fields["yield_percent"] = float(ym.group("value"))
            fields["yield_text"] = norm
            continue
        if looks_like_catalyst(norm) and "catalyst" not in fields:
            fields["catalyst"] = norm
            continue
        fields["reagents"].append(norm)
    fields["reagents"] = tuple(fields["reagents"])
    return ConditionSet(**fields)
