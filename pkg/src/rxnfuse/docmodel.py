"""Document model, model-output token grammars and the identifier registry.

Detection and coreference models emit flat token sequences. A molecule or
identifier is five tokens ``x1 y1 x2 y2 TYPE`` where the coordinates are
integer bins and TYPE is ``[Mol]`` or ``[Idt]``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

MOL = "[Mol]"
IDT = "[Idt]"
COORD_BINS = 1000

Token = Union[int, str]


class GrammarError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (token {offset})")
        self.offset = offset


class SchemaError(ValueError):
    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class BoundingBox:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < COORD_BINS:
                raise ValueError(f"coordinate {v!r} outside 0..{COORD_BINS - 1}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError("box corners out of order")

    def as_list(self) -> list[int]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class MoleculeEntity:
    bbox: Optional[BoundingBox] = None
    smiles: Optional[str] = None
    label: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Identifier:
    """Identifier region; ``text`` is None until OCR has read it."""
    bbox: Optional[BoundingBox]
    text: Optional[str] = None

    def __post_init__(self):
        if self.text is not None and not normalize_identifier(self.text):
            raise ValueError("identifier text is empty")


@dataclass(frozen=True)
class CorefPair:
    molecule: MoleculeEntity
    identifier: Optional[Identifier] = None

    @property
    def label(self) -> Optional[str]:
        if self.identifier is not None:
            return self.identifier.text
        return self.molecule.label


@dataclass(frozen=True)
class ReactionScheme:
    reactants: tuple[MoleculeEntity, ...]
    conditions_text: tuple[str, ...]
    products: tuple[MoleculeEntity, ...]
    extra: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Figure:
    coref_pairs: tuple[CorefPair, ...] = ()
    schemes: tuple[ReactionScheme, ...] = ()
    extra: dict = field(default_factory=dict, compare=False, hash=False)


CONDITION_ROLES = ("catalyst", "solvent", "temperature", "time", "yield", "other")


@dataclass(frozen=True)
class ConditionToken:
    role: str
    text: str


@dataclass(frozen=True)
class TextReaction:
    product_ids: tuple[str, ...]
    reactant_ids: tuple[str, ...] = ()
    condition_tokens: tuple[ConditionToken, ...] = ()
    extra: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Footnote:
    marker: str
    text: str


@dataclass(frozen=True)
class TableRecord:
    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    footnotes: tuple[Footnote, ...] = ()
    figure: Optional[int] = None
    extra: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Document:
    figures: tuple[Figure, ...] = ()
    texts: tuple[TextReaction, ...] = ()
    tables: tuple[TableRecord, ...] = ()
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def table_figure(self, index: int) -> Optional[int]:
        """Figure whose scheme a table belongs to.

        An explicit ``figure`` index wins; otherwise table i goes with figure i,
        or the last figure when there are fewer figures than tables.
        """
        table = self.tables[index]
        if table.figure is not None:
            return table.figure if 0 <= table.figure < len(self.figures) else None
        if not self.figures:
            return None
        return min(index, len(self.figures) - 1)


@dataclass(frozen=True)
class ConditionSet:
    temperature: Optional[str] = None
    temperature_unit: Optional[str] = None
    time: Optional[str] = None
    time_unit: Optional[str] = None
    solvent: Optional[str] = None
    catalyst: Optional[str] = None
    reagents: tuple[str, ...] = ()
    yield_percent: Optional[float] = None
    yield_text: Optional[str] = None
    notes: tuple[str, ...] = ()
    raw: tuple[tuple[str, str], ...] = ()
    text: tuple[str, ...] = ()

    def __post_init__(self):
        if self.yield_percent is not None and not 0 <= self.yield_percent <= 200:
            raise ValueError(f"yield {self.yield_percent} outside [0, 200]")

    def to_json(self) -> dict:
        out: dict[str, Any] = {}
        for name in ("temperature", "temperature_unit", "time", "time_unit", "solvent", "catalyst"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.reagents:
            out["reagents"] = list(self.reagents)
        if self.yield_percent is not None:
            y = self.yield_percent
            out["yield_percent"] = int(y) if float(y).is_integer() else y
        if self.yield_text is not None:
            out["yield"] = self.yield_text
        if self.notes:
            out["notes"] = list(self.notes)
        if self.raw:
            out["raw"] = [[h, c] for h, c in self.raw]
        if self.text:
            out["text"] = list(self.text)
        return out

    @classmethod
    def from_json(cls, data: dict, pointer: str = "") -> "ConditionSet":
        if not isinstance(data, dict):
            raise SchemaError("condition set must be an object", pointer)
        try:
            raw = data.get("raw", [])
            if isinstance(raw, dict):
                raw = list(raw.items())
            return cls(
                temperature=data.get("temperature"),
                temperature_unit=data.get("temperature_unit"),
                time=data.get("time"),
                time_unit=data.get("time_unit"),
                solvent=data.get("solvent"),
                catalyst=data.get("catalyst"),
                reagents=tuple(data.get("reagents", ())),
                yield_percent=data.get("yield_percent"),
                yield_text=data.get("yield"),
                notes=tuple(data.get("notes", ())),
                raw=tuple((str(h), str(c)) for h, c in raw),
                text=tuple(data.get("text", ())),
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), pointer) from exc


@dataclass(frozen=True)
class Reaction:
    reactants: frozenset[str]
    products: frozenset[str]
    conditions: tuple[ConditionSet, ...] = ()

    def to_json(self) -> dict:
        return {
            "reactants": sorted(self.reactants),
            "products": sorted(self.products),
            "conditions": [c.to_json() for c in self.conditions],
        }

    @classmethod
    def from_json(cls, data: Any, pointer: str = "") -> "Reaction":
        if not isinstance(data, dict):
            raise SchemaError("reaction must be an object", pointer)
        sides = {}
        for side in ("reactants", "products"):
            value = data.get(side, [])
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                raise SchemaError(f"{side} must be a list of SMILES strings", f"{pointer}/{side}")
            sides[side] = frozenset(value)
        conds = data.get("conditions", [])
        if not isinstance(conds, list):
            raise SchemaError("conditions must be a list", f"{pointer}/conditions")
        return cls(
            sides["reactants"],
            sides["products"],
            tuple(ConditionSet.from_json(c, f"{pointer}/conditions/{i}") for i, c in enumerate(conds)),
        )


# -- token grammars ----------------------------------------------------------

def _read_group(tokens: Sequence[Token], start: int) -> tuple[BoundingBox, str]:
    if start + 5 > len(tokens):
        raise GrammarError("truncated group", len(tokens))
    coords = []
    for k in range(4):
        tok = tokens[start + k]
        if not isinstance(tok, int) or isinstance(tok, bool) or not 0 <= tok < COORD_BINS:
            raise GrammarError(f"expected coordinate, got {tok!r}", start + k)
        coords.append(tok)
    kind = tokens[start + 4]
    if kind not in (MOL, IDT):
        raise GrammarError(f"group not terminated by a type token: {kind!r}", start + 4)
    if coords[0] > coords[2]:
        raise GrammarError("x1 > x2", start)
    if coords[1] > coords[3]:
        raise GrammarError("y1 > y2", start + 1)
    return BoundingBox(*coords), kind


def _normalize_tokens(tokens: Iterable[Token]) -> list[Token]:
    out: list[Token] = []
    for tok in tokens:
        if tok in ("Mol", "Idt"):
            tok = f"[{tok}]"
        out.append(tok)
    return out


def parse_detection_sequence(tokens: Iterable[Token]) -> list[MoleculeEntity]:
    tokens = _normalize_tokens(tokens)
    out = []
    i = 0
    while i < len(tokens):
        box, kind = _read_group(tokens, i)
        if kind != MOL:
            raise GrammarError("detection output only contains molecules", i + 4)
        out.append(MoleculeEntity(box))
        i += 5
    return out


def parse_coref_sequence(tokens: Iterable[Token]) -> list[CorefPair]:
    tokens = _normalize_tokens(tokens)
    pairs: list[CorefPair] = []
    i = 0
    while i < len(tokens):
        box, kind = _read_group(tokens, i)
        if kind != MOL:
            raise GrammarError("identifier without a preceding molecule", i + 4)
        i += 5
        ident = None
        if i < len(tokens) and i + 4 < len(tokens) and tokens[i + 4] == IDT:
            ibox, _ = _read_group(tokens, i)
            ident = Identifier(ibox)
            i += 5
        pairs.append(CorefPair(MoleculeEntity(box), ident))
    return pairs


def serialize_detection_sequence(entities: Iterable[MoleculeEntity]) -> list[Token]:
    out: list[Token] = []
    for ent in entities:
        out += ent.bbox.as_list() + [MOL]
    return out


def serialize_coref_sequence(pairs: Iterable[CorefPair]) -> list[Token]:
    out: list[Token] = []
    for pair in pairs:
        out += pair.molecule.bbox.as_list() + [MOL]
        if pair.identifier is not None:
            out += pair.identifier.bbox.as_list() + [IDT]
    return out


# -- identifiers and registry ------------------------------------------------

_WRAPPERS = (("**", "**"), ("__", "__"), ("(", ")"), ("[", "]"))


def normalize_identifier(text: str) -> str:
    """Strip bold markers, enclosing brackets and trailing punctuation."""
    s = text.strip()
    while True:
        before = s
        s = s.rstrip(".,;:").strip()
        for left, right in _WRAPPERS:
            if len(s) > len(left) + len(right) and s.startswith(left) and s.endswith(right):
                s = s[len(left):-len(right)].strip()
        if s == before:
            return s


_LABEL_HEAD = re.compile(r"^\s*(?P<label>\(?\**[\w'-]+\**\)?)(?P<rest>.*)$", re.S)


def split_identifier(text: str) -> tuple[str, str]:
    """Separate "3a, R = Me, 85%" into ("3a", "R = Me, 85%")."""
    m = _LABEL_HEAD.match(text)
    if not m:
        return normalize_identifier(text), ""
    return normalize_identifier(m.group("label")), m.group("rest").strip(" ,;:")


@dataclass(frozen=True)
class PipelineWarning:
    code: str
    message: str
    label: Optional[str] = None
    where: Optional[str] = None

    def to_json(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.label is not None:
            out["label"] = self.label
        if self.where is not None:
            out["where"] = self.where
        return out


def build_registry(document: Document) -> tuple[dict[str, str], list[PipelineWarning]]:
    """Identifier to SMILES map over all coref pairs; first binding wins."""
    registry: dict[str, str] = {}
    warnings: list[PipelineWarning] = []
    for fi, fig in enumerate(document.figures):
        for pi, pair in enumerate(fig.coref_pairs):
            if pair.label is None or not pair.molecule.smiles:
                continue
            key, _ = split_identifier(pair.label)
            if not key:
                continue
            smiles = pair.molecule.smiles
            if key not in registry:
                registry[key] = smiles
            elif registry[key] != smiles:
                warnings.append(PipelineWarning(
                    "registry-conflict",
                    f"identifier {key!r} already bound to {registry[key]}; ignoring {smiles}",
                    key,
                    f"/figures/{fi}/coref_pairs/{pi}",
                ))
    return registry, warnings


# -- JSON --------------------------------------------------------------------

def _expect(value: Any, kind: type, pointer: str, what: str):
    if not isinstance(value, kind):
        raise SchemaError(f"{what} must be a {kind.__name__}", pointer)
    return value


def _extra(data: dict, known: Iterable[str]) -> dict:
    known = set(known)
    return {k: v for k, v in data.items() if k not in known}


def _opt_str(data: dict, key: str, pointer: str) -> Optional[str]:
    value = data.get(key)
    if value is not None and not isinstance(value, str):
        raise SchemaError(f"{key} must be a string", f"{pointer}/{key}")
    return value


def _bbox(value: Any, pointer: str) -> Optional[BoundingBox]:
    if value is None:
        return None
    _expect(value, list, pointer, "bbox")
    if len(value) != 4:
        raise SchemaError("bbox needs four coordinates", pointer)
    try:
        return BoundingBox(*value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), pointer) from exc


def _molecule(data: Any, pointer: str) -> MoleculeEntity:
    _expect(data, dict, pointer, "molecule")
    return MoleculeEntity(
        _bbox(data.get("bbox"), f"{pointer}/bbox"),
        _opt_str(data, "smiles", pointer),
        _opt_str(data, "label", pointer),
        _extra(data, ("bbox", "smiles", "label", "identifier")),
    )


def _coref_pair(data: Any, pointer: str) -> CorefPair:
    mol = _molecule(data, pointer)
    ident = data.get("identifier")
    if ident is None:
        return CorefPair(mol)
    _expect(ident, dict, f"{pointer}/identifier", "identifier")
    text = _opt_str(ident, "text", f"{pointer}/identifier")
    if not text or not normalize_identifier(text):
        raise SchemaError("identifier text is empty", f"{pointer}/identifier/text")
    return CorefPair(mol, Identifier(_bbox(ident.get("bbox"), f"{pointer}/identifier/bbox"), text))


def _str_list(value: Any, pointer: str, what: str) -> tuple[str, ...]:
    _expect(value, list, pointer, what)
    for i, v in enumerate(value):
        _expect(v, str, f"{pointer}/{i}", f"{what} item")
    return tuple(value)


def _list(data: dict, key: str, pointer: str) -> list:
    return _expect(data.get(key, []), list, f"{pointer}/{key}", key)


def _scheme(data: Any, pointer: str) -> ReactionScheme:
    _expect(data, dict, pointer, "scheme")
    reactants = tuple(_molecule(m, f"{pointer}/reactants/{i}") for i, m in enumerate(_list(data, "reactants", pointer)))
    products = tuple(_molecule(m, f"{pointer}/products/{i}") for i, m in enumerate(_list(data, "products", pointer)))
    if not products:
        raise SchemaError("scheme needs at least one product", f"{pointer}/products")
    conds = _str_list(data.get("conditions_text", []), f"{pointer}/conditions_text", "conditions_text")
    return ReactionScheme(reactants, conds, products, _extra(data, ("reactants", "products", "conditions_text")))


def _figure(data: Any, pointer: str) -> Figure:
    _expect(data, dict, pointer, "figure")
    pairs = tuple(_coref_pair(p, f"{pointer}/coref_pairs/{i}") for i, p in enumerate(_list(data, "coref_pairs", pointer)))
    schemes = tuple(_scheme(s, f"{pointer}/schemes/{i}") for i, s in enumerate(_list(data, "schemes", pointer)))
    return Figure(pairs, schemes, _extra(data, ("coref_pairs", "schemes")))


def _text(data: Any, pointer: str) -> TextReaction:
    _expect(data, dict, pointer, "text reaction")
    products = _str_list(data.get("product_ids", []), f"{pointer}/product_ids", "product_ids")
    if not products:
        raise SchemaError("product_ids must be nonempty", f"{pointer}/product_ids")
    reactants = _str_list(data.get("reactant_ids", []), f"{pointer}/reactant_ids", "reactant_ids")
    tokens = []
    for i, tok in enumerate(_list(data, "conditions", pointer)):
        p = f"{pointer}/conditions/{i}"
        _expect(tok, dict, p, "condition token")
        role, text = tok.get("role"), tok.get("text")
        if role not in CONDITION_ROLES:
            raise SchemaError(f"role must be one of {', '.join(CONDITION_ROLES)}", f"{p}/role")
        _expect(text, str, f"{p}/text", "text")
        tokens.append(ConditionToken(role, text))
    return TextReaction(products, reactants, tuple(tokens), _extra(data, ("product_ids", "reactant_ids", "conditions")))


def _table(data: Any, pointer: str) -> TableRecord:
    _expect(data, dict, pointer, "table")
    headers = _str_list(data.get("headers", []), f"{pointer}/headers", "headers")
    rows = []
    for i, row in enumerate(_list(data, "rows", pointer)):
        cells = _str_list(row, f"{pointer}/rows/{i}", "row")
        if len(cells) != len(headers):
            raise SchemaError(f"row has {len(cells)} cells but there are {len(headers)} headers", f"{pointer}/rows/{i}")
        rows.append(cells)
    notes = []
    for i, fn in enumerate(_list(data, "footnotes", pointer)):
        p = f"{pointer}/footnotes/{i}"
        _expect(fn, dict, p, "footnote")
        notes.append(Footnote(_expect(fn.get("marker"), str, f"{p}/marker", "marker"),
                              _expect(fn.get("text"), str, f"{p}/text", "text")))
    figure = data.get("figure")
    if figure is not None and (not isinstance(figure, int) or isinstance(figure, bool)):
        raise SchemaError("figure must be an integer index", f"{pointer}/figure")
    return TableRecord(headers, tuple(rows), tuple(notes), figure,
                       _extra(data, ("headers", "rows", "footnotes", "figure")))


def document_from_json(data: Any) -> Document:
    _expect(data, dict, "", "document")
    return Document(
        tuple(_figure(f, f"/figures/{i}") for i, f in enumerate(_list(data, "figures", ""))),
        tuple(_text(t, f"/texts/{i}") for i, t in enumerate(_list(data, "texts", ""))),
        tuple(_table(t, f"/tables/{i}") for i, t in enumerate(_list(data, "tables", ""))),
        _extra(data, ("figures", "texts", "tables")),
    )


def load_document(path: Union[str, Path]) -> Document:
    """Read a document JSON file; raises SchemaError (pointer "" for bad JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON at line {exc.lineno} column {exc.colno}", "") from exc
    return document_from_json(data)


def reactions_to_json(reactions: Iterable[Reaction], warnings: Iterable[PipelineWarning] = ()) -> dict:
    return {
        "reactions": [r.to_json() for r in reactions],
        "warnings": [w.to_json() for w in warnings],
    }


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_reactions(path: Union[str, Path], reactions: Iterable[Reaction], warnings: Iterable[PipelineWarning] = ()) -> None:
    Path(path).write_text(dump_json(reactions_to_json(reactions, warnings)), encoding="utf-8")


def load_reactions(path: Union[str, Path]) -> list[Reaction]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON at line {exc.lineno} column {exc.colno}", "") from exc
    if isinstance(data, dict):
        items = _expect(data.get("reactions", []), list, "/reactions", "reactions")
        base = "/reactions"
    else:
        items = _expect(data, list, "", "reaction list")
        base = ""
    return [Reaction.from_json(r, f"{base}/{i}") for i, r in enumerate(items)]
