"""Whole-document extraction: figures, tables and text fused into one list."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .align import expand_condition_table, resolve_text_reaction
from .docmodel import Document, PipelineWarning, Reaction, build_registry, reactions_to_json
from .molgraph import MoleculeError, canonical_key, parse_smiles, write_smiles
from .rgroup import DEFAULT_DICTIONARY, EMITTED, AbbreviationDictionary, resolve_substrate_scope


@dataclass(frozen=True)
class PipelineOptions:
    ignore_stereo: bool = False
    dictionary: AbbreviationDictionary = field(default=DEFAULT_DICTIONARY, compare=False)


@dataclass
class PipelineResult:
    reactions: list[Reaction] = field(default_factory=list)
    warnings: list[PipelineWarning] = field(default_factory=list)

    def to_json(self) -> dict:
        return reactions_to_json(self.reactions, self.warnings)


def _registry(document: Document, warnings: list) -> dict[str, str]:
    registry, conflicts = build_registry(document)
    warnings.extend(conflicts)
    return registry


def _scope(document: Document, registry: dict[str, str], options: PipelineOptions, warnings: list) -> list[Reaction]:
    """Resolve every figure; resolved products are added to the registry so
    tables and text can refer to them by label."""
    reactions = []
    for fi, figure in enumerate(document.figures):
        result = resolve_substrate_scope(figure, registry, options.dictionary)
        reactions += result.reactions
        warnings.extend(replace(w, where=w.where or f"/figures/{fi}") for w in result.warnings)
        for entry in result.entries:
            if entry.status != EMITTED or entry.product is None:
                continue
            current = registry.get(entry.label)
            if current is None or "[R" in current or "*" in current:
                registry[entry.label] = entry.product
    return reactions


def _tables(document: Document, registry, options: PipelineOptions, warnings: list) -> list[Reaction]:
    reactions = []
    for ti, table in enumerate(document.tables):
        fi = document.table_figure(ti)
        scheme = None
        if fi is not None and document.figures[fi].schemes:
            scheme = document.figures[fi].schemes[0]
        result = expand_condition_table(table, scheme, registry, options.dictionary)
        reactions += result.reactions
        warnings.extend(replace(w, where=f"/tables/{ti} {w.where or ''}".strip()) for w in result.warnings)
    return reactions


def _texts(document: Document, registry, warnings: list) -> list[Reaction]:
    reactions = []
    for i, tr in enumerate(document.texts):
        reaction, ws = resolve_text_reaction(tr, registry)
        warnings.extend(replace(w, where=f"/texts/{i}") for w in ws)
        if reaction is not None:
            reactions.append(reaction)
    return reactions


def _normalize(smiles: str, ignore_stereo: bool) -> str:
    try:
        graph = parse_smiles(smiles)
    except MoleculeError:
        return smiles
    return write_smiles(graph.without_stereo() if ignore_stereo else graph)


def deduplicate(reactions: Iterable[Reaction], ignore_stereo: bool = False) -> list[Reaction]:
    """Merge reactions with the same reactant and product structures.

    Condition lists are concatenated without repeats. Output is sorted by
    (products, reactants) so that it does not depend on input order.
    """
    merged: dict[tuple, list] = {}
    for r in reactions:
        reactants = frozenset(_normalize(s, ignore_stereo) for s in r.reactants)
        products = frozenset(_normalize(s, ignore_stereo) for s in r.products)
        key = (reactants, products)
        slot = merged.setdefault(key, [])
        for c in r.conditions:
            if c not in slot:
                slot.append(c)
    out = []
    for (reactants, products), conds in merged.items():
        conds = sorted(conds, key=lambda c: repr(c.to_json()))
        out.append(Reaction(reactants, products, tuple(conds)))
    out.sort(key=lambda r: (sorted(r.products), sorted(r.reactants)))
    return out


def _finish(reactions, warnings, options) -> PipelineResult:
    warnings = sorted(set(warnings), key=lambda w: (w.where or "", w.code, w.label or "", w.message))
    return PipelineResult(deduplicate(reactions, options.ignore_stereo), warnings)


def run_resolve(document: Document, options: PipelineOptions = PipelineOptions()) -> PipelineResult:
    """Figures only."""
    warnings: list = []
    registry = _registry(document, warnings)
    return _finish(_scope(document, registry, options, warnings), warnings, options)


def run_align(document: Document, options: PipelineOptions = PipelineOptions()) -> PipelineResult:
    """Tables and text only, with identifiers looked up in the figure registry."""
    warnings: list = []
    registry = _registry(document, warnings)
    reactions = _tables(document, registry, options, warnings) + _texts(document, registry, warnings)
    return _finish(reactions, warnings, options)


def run_extract(document: Document, options: PipelineOptions = PipelineOptions()) -> PipelineResult:
    """All modalities: registry, figures, tables, then text."""
    warnings: list = []
    registry = _registry(document, warnings)
    reactions = _scope(document, registry, options, warnings)
    reactions += _tables(document, registry, options, warnings)
    reactions += _texts(document, registry, warnings)
    return _finish(reactions, warnings, options)


def reaction_keys(reactions: Iterable[Reaction], ignore_stereo: bool = False) -> set[tuple]:
    out = set()
    for r in reactions:
        out.add((
            frozenset(canonical_key(parse_smiles(s), ignore_stereo) for s in r.reactants),
            frozenset(canonical_key(parse_smiles(s), ignore_stereo) for s in r.products),
        ))
    return out


def count_pre_dedup(document: Document, options: PipelineOptions = PipelineOptions()) -> Mapping[str, int]:
    """Reactions per modality before merging; handy for checking fixtures."""
    warnings: list = []
    registry = _registry(document, warnings)
    return {
        "figures": len(_scope(document, registry, options, warnings)),
        "tables": len(_tables(document, registry, options, warnings)),
        "texts": len(_texts(document, registry, warnings)),
    }


__all__ = [
    "PipelineOptions",
    "PipelineResult",
    "count_pre_dedup",
    "deduplicate",
    "reaction_keys",
    "run_align",
    "run_extract",
    "run_resolve",
]
