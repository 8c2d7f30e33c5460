"""Reaction condition alignment.

Condition tables are read column by column: each header is put into a
category by a keyword dictionary, then every row becomes one reaction that
shares the structures of the table's scheme. Text reactions refer to
compounds by identifier and are resolved through the registry.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .conditions import (
    NO_VALUE,
    YieldFormatError,
    normalize_text,
    parse_temperature,
    parse_time,
    parse_yield,
)
from .docmodel import (
    ConditionSet,
    PipelineWarning,
    Reaction,
    ReactionScheme,
    TableRecord,
    TextReaction,
    normalize_identifier,
    split_identifier,
)
from .molgraph import MoleculeError, MoleculeGraph, ValenceError, parse_smiles, substitute_all, write_smiles
from .rgroup import (
    DEFAULT_DICTIONARY,
    AbbreviationDictionary,
    NoMappingError,
    infer_rgroups_from_product,
    parse_rgroup_text,
)
from .rgroup.text import normalize_placeholder_label, try_parse_label


class ColumnCategory(str, Enum):
    ENTRY = "entry"
    YIELD = "yield"
    TEMPERATURE = "temperature"
    TIME = "time"
    SOLVENT = "solvent"
    CATALYST = "catalyst"
    REAGENT = "reagent"
    SUBSTRATE = "substrate"
    RGROUP = "rgroup"
    OTHER = "other"


PRIORITY = list(ColumnCategory)

# Lowercase words are matched case-insensitively; the single letters "T" and
# "t" are matched as written since they mean temperature and time.
KEYWORDS: dict[ColumnCategory, tuple[str, ...]] = {
    ColumnCategory.ENTRY: ("entry", "entries", "no.", "no", "#", "run"),
    ColumnCategory.YIELD: ("yield", "yields", "yld", "yld.", "%"),
    ColumnCategory.TEMPERATURE: ("temp", "temp.", "temperature", "T", "°c", "℃"),
    ColumnCategory.TIME: ("time", "t", "h", "min", "hours"),
    ColumnCategory.SOLVENT: ("solvent", "solvents", "solv.", "solv", "medium"),
    ColumnCategory.CATALYST: ("catalyst", "catalysts", "cat.", "cat", "ligand", "precatalyst", "photocatalyst"),
    ColumnCategory.REAGENT: ("reagent", "reagents", "base", "additive", "additives", "oxidant", "acid", "reductant", "promoter"),
    ColumnCategory.SUBSTRATE: ("substrate", "substrates", "product", "products", "reactant", "sm"),
}
OTHER_WORDS = ("ee", "dr", "er", "rr", "conv", "conv.", "conversion", "selectivity", "ratio", "e/z", "z/e", "b/l", "l/b")
CASE_SENSITIVE = frozenset({"T", "t", "h"})

_RGROUP = re.compile(r"^R\d*'?$|^Ar$|^X$", re.I)
_IDENTIFIER = re.compile(r"^\(?\d+[a-z]{0,2}\)?$")
_BRACKETED = re.compile(r"\(([^()]*)\)|\[([^\[\]]*)\]")
_SUPERSCRIPT_LETTERS = str.maketrans("ᵃᵇᶜᵈᵉᶠᵍʰⁱʲ", "abcdefghij")
_MARKER_TAIL = re.compile(r"^(?P<body>.*?[^a-z\s])\s*(?P<marks>[a-j](?:\s*,\s*[a-j])*)$")
_CARET_MARKS = re.compile(r"\s*(?:\^|\[)(?P<marks>[a-j](?:\s*,\s*[a-j])*)\]?$")


def split_markers(text: str, allowed: Optional[set[str]] = None) -> tuple[str, list[str]]:
    """Strip trailing footnote markers ("80a", "yield (%)b", "DMF^c").

    With ``allowed`` given, markers are only stripped when every one of them
    is a known footnote. Numeric cells and headers pass ``None`` and lose
    letters written directly after a digit or closing bracket.
    """
    s = text.translate(_SUPERSCRIPT_LETTERS).strip()
    m = _CARET_MARKS.search(s)
    if m:
        return s[: m.start()].strip(), _marks(m.group("marks"))
    m = _MARKER_TAIL.match(s)
    if m:
        marks = _marks(m.group("marks"))
        body = m.group("body")
        # without a footnote list only "80a" / "(%)b" shapes count as marked
        bare = not s[len(body)].isspace() and not body[-1].isalpha()
        if all(k in allowed for k in marks) if allowed is not None else bare:
            return m.group("body").strip(), marks
    return s, []


def _marks(text: str) -> list[str]:
    return [k.strip() for k in text.split(",") if k.strip()]


def _header_words(header: str) -> tuple[list[str], str]:
    """Words of the header plus the text of its bracketed unit parts."""
    units = " ".join(a or b for a, b in _BRACKETED.findall(header))
    bare = _BRACKETED.sub(" ", header)
    words = re.findall(r"[^\s/,:;]+", bare)
    return words, units


def _word_hits(word: str, category: ColumnCategory) -> bool:
    for kw in KEYWORDS.get(category, ()):
        if kw in CASE_SENSITIVE:
            if word == kw:
                return True
        elif word.lower() == kw or (len(kw) > 3 and word.lower().startswith(kw)):
            return True
    return False


def classify_column(header: str) -> ColumnCategory:
    """Category of a table column from its header text; total."""
    text, _ = split_markers(normalize_text(header))
    text = " ".join(text.split())
    if not text:
        return ColumnCategory.OTHER
    words, units = _header_words(text)

    unit_words = re.findall(r"[^\s/,]+", units)
    unit_hit = next(
        (c for c in (ColumnCategory.TEMPERATURE, ColumnCategory.TIME, ColumnCategory.YIELD)
         if any(_word_hits(w, c) for w in unit_words)),
        None,
    )
    hits = [c for c in PRIORITY if any(_word_hits(w, c) for w in words)]
    if hits:
        # a bare "T"/"t" defers to a unit such as "(°C)" or "(h)"
        if unit_hit and all(w in CASE_SENSITIVE for w in words if any(_word_hits(w, c) for c in hits)):
            return unit_hit
        return hits[0]
    if any(w.lower() in OTHER_WORDS for w in words):
        return ColumnCategory.OTHER
    if unit_hit:
        return unit_hit

    compact = normalize_placeholder_label(text)
    if _IDENTIFIER.match(compact):
        return ColumnCategory.SUBSTRATE
    if _RGROUP.match(compact):
        return ColumnCategory.RGROUP
    return ColumnCategory.OTHER


def _header_unit(header: str, category: ColumnCategory) -> Optional[str]:
    _, units = _header_words(normalize_text(header))
    if category is ColumnCategory.TEMPERATURE:
        if "°" in units or "℃" in units:
            return "°C"
        if re.search(r"\bK\b", units):
            return "K"
    if category is ColumnCategory.TIME:
        m = re.search(r"\b(h|min|d|s)\b", units)
        if m:
            return m.group(1)
    return None


# -- tables ------------------------------------------------------------------

@dataclass
class AlignResult:
    reactions: list[Reaction] = field(default_factory=list)
    warnings: list[PipelineWarning] = field(default_factory=list)
    row_status: list[str] = field(default_factory=list)


class _RowSkip(Exception):
    pass


def _graph(smiles: Optional[str]) -> Optional[MoleculeGraph]:
    if not smiles:
        return None
    try:
        return parse_smiles(smiles)
    except MoleculeError:
        return None


@dataclass
class _Scheme:
    reactants: list[Optional[MoleculeGraph]]
    products: list[Optional[MoleculeGraph]]
    reactant_labels: list[Optional[str]]
    product_labels: list[Optional[str]]
    text: tuple[str, ...]

    @classmethod
    def build(cls, scheme: Optional[ReactionScheme], registry: Mapping[str, str]) -> "_Scheme":
        if scheme is None:
            return cls([], [], [], [], ())

        def load(entities):
            graphs, labels = [], []
            for ent in entities:
                label = normalize_identifier(ent.label) if ent.label else None
                g = _graph(ent.smiles) or _graph(registry.get(label) if label else None)
                graphs.append(g)
                labels.append(label)
            return graphs, labels

        r, rl = load(scheme.reactants)
        p, pl = load(scheme.products)
        return cls(r, p, rl, pl, tuple(scheme.conditions_text))


def _replace_slot(graphs, labels, ident: str, concrete: MoleculeGraph) -> Optional[int]:
    """Index of the scheme molecule an identifier column stands for."""
    parts = try_parse_label(ident)
    if parts is not None:
        for i, lb in enumerate(labels):
            lp = try_parse_label(lb)
            if lp is not None and lp.prefix == parts.prefix:
                return i
    for i, g in enumerate(graphs):
        if g is not None and g.has_placeholders:
            try:
                infer_rgroups_from_product(g, concrete)
                return i
            except NoMappingError:
                continue
    return 0 if graphs else None


def expand_condition_table(
    table: TableRecord,
    scheme: Optional[ReactionScheme],
    registry: Mapping[str, str],
    dictionary: AbbreviationDictionary = DEFAULT_DICTIONARY,
) -> AlignResult:
    """One reaction per table row, or one row-skipped warning per failed row."""
    result = AlignResult()
    categories = [classify_column(h) for h in table.headers]
    header_marks = [split_markers(normalize_text(h))[1] for h in table.headers]
    footnotes = {f.marker.strip(): f.text for f in table.footnotes}
    base = _Scheme.build(scheme, registry)
    for ri, row in enumerate(table.rows):
        try:
            reaction = _expand_row(table, categories, header_marks, footnotes, base, row, registry, dictionary, result)
        except _RowSkip as exc:
            result.warnings.append(PipelineWarning("row-skipped", str(exc), _entry_label(categories, row, ri), f"row {ri}"))
            result.row_status.append("skipped")
            continue
        result.reactions.append(reaction)
        result.row_status.append("emitted")
    return result


def _entry_label(categories, row, ri) -> str:
    for cat, cell in zip(categories, row):
        if cat is ColumnCategory.ENTRY and cell.strip():
            return split_markers(cell)[0]
    return str(ri + 1)


def _expand_row(table, categories, header_marks, footnotes, base, row, registry, dictionary, result) -> Reaction:
    allowed = set(footnotes)
    fields: dict = {"reagents": []}
    notes: list[str] = []
    rgroup_clauses: list[str] = []
    substrates: list[tuple[str, str]] = []

    def note(marks):
        for k in marks:
            text = footnotes.get(k, k)
            if text not in notes:
                notes.append(text)

    for marks in header_marks:
        note(marks)

    for header, category, cell in zip(table.headers, categories, row):
        raw = normalize_text(cell)
        if category in (ColumnCategory.TEMPERATURE, ColumnCategory.YIELD):
            value, marks = split_markers(raw)
        elif category in (ColumnCategory.SUBSTRATE, ColumnCategory.RGROUP):
            value, marks = raw, []
            m = re.match(r"^(.*?)\s*(?:\^|\[)([a-j])\]?$", raw)
            if m and m.group(2) in allowed:
                value, marks = m.group(1), [m.group(2)]
        else:
            value, marks = split_markers(raw, allowed)
        note(marks)
        if value.lower() in NO_VALUE and category is not ColumnCategory.YIELD:
            continue

        if category is ColumnCategory.TEMPERATURE:
            fields["temperature"], fields["temperature_unit"] = parse_temperature(value, _header_unit(header, category))
        elif category is ColumnCategory.TIME:
            fields["time"], fields["time_unit"] = parse_time(value, _header_unit(header, category))
        elif category is ColumnCategory.YIELD:
            if "yield_text" in fields:
                continue
            try:
                fields["yield_percent"] = parse_yield(value)
            except YieldFormatError as exc:
                raise _RowSkip(f"malformed yield: {exc}") from None
            fields["yield_text"] = value
        elif category is ColumnCategory.SOLVENT:
            fields["solvent"] = value if "solvent" not in fields else f"{fields['solvent']}, {value}"
        elif category is ColumnCategory.CATALYST:
            fields["catalyst"] = value if "catalyst" not in fields else f"{fields['catalyst']}, {value}"
        elif category is ColumnCategory.REAGENT:
            fields["reagents"].append(value)
        elif category is ColumnCategory.SUBSTRATE:
            substrates.append((header, value))
        elif category is ColumnCategory.RGROUP:
            rgroup_clauses.append(f"{normalize_placeholder_label(split_markers(header)[0])} = {value}")

    reactants = list(base.reactants)
    products = list(base.products)

    for header, value in substrates:
        ident, _ = split_identifier(value)
        smiles = registry.get(ident)
        concrete = _graph(smiles)
        if concrete is None or concrete.has_placeholders:
            raise _RowSkip(f"identifier {ident!r} is not in the registry")
        on_products = "product" in header.lower()
        graphs = products if on_products else reactants
        labels = base.product_labels if on_products else base.reactant_labels
        slot = _replace_slot(graphs, labels, ident, concrete)
        if slot is None:
            graphs.append(concrete)
            continue
        template = graphs[slot]
        graphs[slot] = concrete
        if template is not None and template.has_placeholders:
            # carry the substituents of the substrate over to the other side
            try:
                inference = infer_rgroups_from_product(template, concrete)
            except NoMappingError:
                raise _RowSkip(f"{ident!r} does not fit the scheme template") from None
            _apply(reactants, products, inference.assignments)

    if rgroup_clauses:
        text_warnings: list[PipelineWarning] = []
        defs = parse_rgroup_text("; ".join(rgroup_clauses), dictionary, text_warnings)
        bad = [w for w in text_warnings if "cannot resolve" in w.message]
        if bad:
            raise _RowSkip(bad[0].message)
        result.warnings.extend(text_warnings)
        assignments = {}
        for d in defs:
            assignments.setdefault(d.label, d.fragment)
        _apply(reactants, products, assignments)

    if any(g is None for g in reactants + products) or not reactants or not products:
        raise _RowSkip("scheme molecules lack structures")
    leftover = sorted({lb for g in reactants + products for lb in g.placeholder_labels()})
    if leftover:
        raise _RowSkip(f"no substituent for {', '.join(leftover)}")

    fields["reagents"] = tuple(fields["reagents"])
    conditions = ConditionSet(
        notes=tuple(notes),
        raw=tuple(zip(table.headers, row)),
        text=base.text,
        **fields,
    )
    return Reaction(
        frozenset(write_smiles(g) for g in reactants),
        frozenset(write_smiles(g) for g in products),
        (conditions,),
    )


def _apply(reactants: list, products: list, assignments: Mapping) -> None:
    """Substitute whichever of ``assignments`` each graph has placeholders for."""
    for graphs in (reactants, products):
        for i, g in enumerate(graphs):
            if g is None:
                continue
            labels = g.placeholder_labels() & set(assignments)
            if not labels:
                continue
            try:
                graphs[i] = substitute_all(g, {lb: assignments[lb] for lb in labels})
            except ValenceError as exc:
                raise _RowSkip(str(exc)) from None


# -- text reactions ----------------------------------------------------------

def resolve_text_reaction(tr: TextReaction, registry: Mapping[str, str]) -> tuple[Optional[Reaction], list[PipelineWarning]]:
    """Replace identifiers by structures; drop the reaction if a product is unknown."""
    warnings: list[PipelineWarning] = []

    def lookup(ident: str) -> Optional[str]:
        key, _ = split_identifier(ident)
        g = _graph(registry.get(key))
        if g is None or g.has_placeholders:
            return None
        return write_smiles(g)

    products = set()
    for ident in tr.product_ids:
        smiles = lookup(ident)
        if smiles is None:
            warnings.append(PipelineWarning("unresolved-product", f"product {ident!r} is not in the registry", ident))
            return None, warnings
        products.add(smiles)
    reactants = set()
    for ident in tr.reactant_ids:
        smiles = lookup(ident)
        if smiles is None:
            warnings.append(PipelineWarning("unresolved-reactant", f"reactant {ident!r} is not in the registry", ident))
            continue
        reactants.add(smiles)
    if not reactants:
        warnings.append(PipelineWarning(
            "no-reactants", "no reactant of the text reaction could be resolved", tr.product_ids[0]))
        return None, warnings
    return Reaction(frozenset(reactants), frozenset(products), _text_conditions(tr)), warnings


def _text_conditions(tr: TextReaction) -> tuple[ConditionSet, ...]:
    if not tr.condition_tokens:
        return ()
    fields: dict = {"reagents": [], "text": []}
    for tok in tr.condition_tokens:
        text = normalize_text(tok.text)
        fields["text"].append(f"{tok.role}: {tok.text}")
        if tok.role == "temperature" and "temperature" not in fields:
            fields["temperature"], fields["temperature_unit"] = parse_temperature(text)
        elif tok.role == "time" and "time" not in fields:
            fields["time"], fields["time_unit"] = parse_time(text)
        elif tok.role == "yield" and "yield_text" not in fields:
            try:
                fields["yield_percent"] = parse_yield(text)
            except YieldFormatError:
                fields["yield_percent"] = None
            fields["yield_text"] = text
        elif tok.role in ("solvent", "catalyst"):
            fields[tok.role] = text if tok.role not in fields else f"{fields[tok.role]}, {text}"
        else:
            fields["reagents"].append(text)
    fields["reagents"] = tuple(fields["reagents"])
    fields["text"] = tuple(fields["text"])
    return (ConditionSet(**fields),)


__all__ = [
    "AlignResult",
    "ColumnCategory",
    "classify_column",
    "expand_condition_table",
    "resolve_text_reaction",
    "split_markers",
]
