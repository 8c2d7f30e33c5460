"""Compound labels and textual R-group definitions ("R1 = 4-MeC6H4, R2 = H")."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from ..conditions import normalize_text
from ..docmodel import PipelineWarning, normalize_identifier
from ..molgraph import (
    HYDROGEN,
    Fragment,
    HydrogenMarker,
    MoleculeError,
    attach_fragment,
    fragment_from_smiles,
    induced_subgraph,
    parse_smiles,
)

Substituent = Union[Fragment, HydrogenMarker]

_LABEL = re.compile(r"(?P<prefix>\d+)(?P<suffix>[a-z]{1,2})?")
_PLACEHOLDER_LABEL = re.compile(r"(?:R\d*|X\d*|Ar\d*|Y\d*|Z\d*)'*")


class LabelError(ValueError):
    pass


class UnknownAbbreviationError(ValueError):
    def __init__(self, clause: str):
        super().__init__(f"cannot resolve R-group definition {clause!r}")
        self.clause = clause


@dataclass(frozen=True)
class LabelParts:
    prefix: str
    suffix: Optional[str] = None

    def __str__(self) -> str:
        return self.prefix + (self.suffix or "")


def parse_label(text: str) -> LabelParts:
    """Split a compound label such as "3a" into numeric prefix and letters."""
    m = _LABEL.fullmatch(normalize_identifier(text))
    if not m:
        raise LabelError(f"not a compound label: {text!r}")
    return LabelParts(m.group("prefix"), m.group("suffix"))


def try_parse_label(text: Optional[str]) -> Optional[LabelParts]:
    if not text:
        return None
    try:
        return parse_label(text)
    except LabelError:
        return None


def normalize_placeholder_label(text: str) -> str:
    return re.sub(r"\s+", "", normalize_text(text))


def is_placeholder_label(text: str) -> bool:
    return bool(_PLACEHOLDER_LABEL.fullmatch(normalize_placeholder_label(text)))


@dataclass(frozen=True)
class RGroupDefinition:
    label: str
    fragment: Substituent
    source: str = ""

    @property
    def is_hydrogen(self) -> bool:
        return isinstance(self.fragment, HydrogenMarker)


# -- abbreviation dictionary -------------------------------------------------

@dataclass(frozen=True)
class Abbreviation:
    name: str
    smiles: Optional[str]
    warning: Optional[str] = None

    def substituent(self) -> Substituent:
        if self.smiles is None:
            return HYDROGEN
        return fragment_from_smiles(self.smiles)


def _entries(data: Mapping) -> dict[str, Abbreviation]:
    out: dict[str, Abbreviation] = {}
    for name, fields in data.items():
        if isinstance(fields, str):
            fields = {"smiles": fields}
        smiles = None if fields.get("hydrogen") else fields["smiles"]
        entry = Abbreviation(name, smiles, fields.get("warning"))
        out[name] = entry
        for alias in fields.get("aliases", ()):
            out.setdefault(alias, Abbreviation(alias, smiles, fields.get("warning")))
    return out


@lru_cache(maxsize=1)
def _builtin() -> dict[str, Abbreviation]:
    text = resources.files(__package__).joinpath("abbreviations.json").read_text(encoding="utf-8")
    return _entries(json.loads(text))


class AbbreviationDictionary:
    """Name to substituent lookup; exact match first, then case-insensitive."""

    def __init__(self, overrides: Optional[Mapping] = None):
        self._entries = dict(_builtin())
        if overrides:
            self._entries.update(_entries(overrides))
        self._folded = {}
        for name in sorted(self._entries):
            self._folded.setdefault(name.lower(), self._entries[name])

    @classmethod
    def from_file(cls, path: Union[str, Path, None]) -> "AbbreviationDictionary":
        if path is None:
            return cls()
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def get(self, name: str) -> Optional[Abbreviation]:
        name = name.strip()
        return self._entries.get(name) or self._folded.get(name.lower())

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None


DEFAULT_DICTIONARY = AbbreviationDictionary()


# -- condensed formulae ------------------------------------------------------

_ARYL = re.compile(r"(?P<pos>[2-6](?:\s*,\s*[2-6])*)-(?P<body>.+)C6H(?P<h>[2-5])")
_ALKYL = re.compile(r"C(?P<n>\d*)H(?P<h>\d+)")
_LINKERS = (
    ("CO2", "[R98]C(=O)O[R99]"),
    ("OC(O)", "[R98]OC(=O)[R99]"),
    ("CO", "[R98]C(=O)[R99]"),
    ("CH2", "[R98]C[R99]"),
    ("SO2", "[R98]S(=O)(=O)[R99]"),
    ("NH", "[R98]N[R99]"),
    ("O", "[R98]O[R99]"),
    ("S", "[R98]S[R99]"),
)
_MAX_DEPTH = 3


def _join(linker: str, rest: Substituent) -> Fragment:
    graph = attach_fragment(parse_smiles(linker), "R99", rest)
    (anchor_mark,) = graph.placeholder_indices("R98")
    return _fragment_at_mark(graph, anchor_mark)


def _fragment_at_mark(graph, mark: int) -> Fragment:
    anchor = graph.neighbor_indices(mark)[0]
    keep = [i for i in range(len(graph)) if i != mark]
    return Fragment(induced_subgraph(graph, keep), keep.index(anchor))


def _aryl(positions: list[int], sub: Substituent) -> Fragment:
    parts = ["[R98]c1"]
    for k in range(2, 7):
        atom = "c1" if k == 6 else "c"
        parts.append(f"{atom}([R{90 + k}])" if k in positions else atom)
    graph = parse_smiles("".join(parts))
    for k in positions:
        graph = attach_fragment(graph, f"R{90 + k}", sub)
    (mark,) = graph.placeholder_indices("R98")
    return _fragment_at_mark(graph, mark)


def parse_condensed(text: str, dictionary: AbbreviationDictionary = DEFAULT_DICTIONARY, depth: int = 0) -> Optional[Substituent]:
    """Linear condensed formulae: "4-MeC6H4", "3,5-Cl2C6H3", "CO2Et", "CH2OMe", "C2H5"."""
    if depth > _MAX_DEPTH or not text:
        return None
    entry = dictionary.get(text)
    if entry is not None:
        return entry.substituent()

    m = _ALKYL.fullmatch(text)
    if m:
        n = int(m.group("n") or 1)
        if int(m.group("h")) == 2 * n + 1:
            return fragment_from_smiles("*" + "C" * n)

    m = _ARYL.fullmatch(text)
    if m:
        positions = [int(p) for p in re.split(r"\s*,\s*", m.group("pos"))]
        count = 5 - int(m.group("h"))
        body = m.group("body")
        if count > 1:
            if not body.endswith(str(count)):
                return None
            body = body[:-1]
        if len(positions) == count and len(set(positions)) == count:
            sub = parse_condensed(body.strip("()"), dictionary, depth + 1)
            if isinstance(sub, Fragment):
                return _aryl(positions, sub)
        return None

    for prefix, linker in _LINKERS:
        if text.startswith(prefix) and len(text) > len(prefix):
            rest = parse_condensed(text[len(prefix):], dictionary, depth + 1)
            if rest is not None and not isinstance(rest, HydrogenMarker):
                return _join(linker, rest)
    return None


def resolve_substituent(text: str, dictionary: AbbreviationDictionary = DEFAULT_DICTIONARY) -> tuple[Substituent, Optional[str]]:
    """Dictionary, then condensed formula, then SMILES.

    Returns the substituent and an optional advisory note (e.g. the default
    reading of "Ar"). Raises UnknownAbbreviationError if nothing fits.
    """
    text = normalize_text(text).strip()
    entry = dictionary.get(text)
    if entry is not None:
        return entry.substituent(), entry.warning
    sub = parse_condensed(text, dictionary)
    if sub is not None:
        return sub, None
    try:
        return fragment_from_smiles(text), None
    except (MoleculeError, ValueError):
        raise UnknownAbbreviationError(text) from None


# commas inside locants ("2,4-Cl2C6H3") carry no space and are kept
_CLAUSE_SPLIT = re.compile(r"\s*;\s*|\s*,(?:\s+|(?=[^,=]*=))")


def split_clauses(text: str) -> list[str]:
    return [c for c in _CLAUSE_SPLIT.split(normalize_text(text)) if c.strip()]


def parse_rgroup_text(
    text: str,
    dictionary: AbbreviationDictionary = DEFAULT_DICTIONARY,
    warnings: Optional[list] = None,
) -> list[RGroupDefinition]:
    """Parse "R1 = OMe; R2 = Ph"-style definitions.

    Without a ``warnings`` list an unknown right-hand side raises
    UnknownAbbreviationError. With one, the clause is reported there and
    skipped. "R1 = R2 = Me" defines both labels. Clauses without "=" (yields,
    remarks) are ignored.
    """
    defs = []
    for clause in split_clauses(text):
        if "=" not in clause:
            continue
        pieces = [p.strip() for p in clause.split("=")]
        labels = [normalize_placeholder_label(p) for p in pieces[:-1]]
        if not all(is_placeholder_label(lb) for lb in labels):
            _report(UnknownAbbreviationError(clause), warnings, None)
            continue
        try:
            sub, note = resolve_substituent(pieces[-1], dictionary)
        except UnknownAbbreviationError:
            _report(UnknownAbbreviationError(clause), warnings, labels[0])
            continue
        for label in labels:
            if note and warnings is not None:
                warnings.append(PipelineWarning("unknown-abbreviation", f"{note} in {clause!r}", label))
            defs.append(RGroupDefinition(label, sub, clause))
    return defs


def _report(exc: UnknownAbbreviationError, warnings: Optional[list], label: Optional[str]) -> None:
    if warnings is None:
        raise exc
    warnings.append(PipelineWarning("unknown-abbreviation", str(exc), label))


def looks_like_definition(text: str) -> bool:
    """True when the text holds at least one "R… = …" clause."""
    for clause in split_clauses(text):
        left = clause.split("=")[0]
        if "=" in clause and is_placeholder_label(left):
            return True
    return False
