"""Substrate-scope resolution for one figure.

A figure holds a template scheme whose molecules carry placeholders and a set
of labelled concrete products (coreference pairs). Each product whose label
prefix equals the template label becomes one reaction: its R-groups come
from "R = …" text next to the label, from the scheme text, or from the graph
difference against the template product.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from ..conditions import YieldFormatError, conditions_from_text, parse_yield
from ..docmodel import (
    ConditionSet,
    Figure,
    MoleculeEntity,
    PipelineWarning,
    Reaction,
    ReactionScheme,
    normalize_identifier,
    split_identifier,
)
from ..molgraph import (
    MoleculeError,
    MoleculeGraph,
    ValenceError,
    canonical_key,
    fragment_key,
    parse_smiles,
    write_smiles,
)
from .infer import (
    MissingDefinitionError,
    NoMappingError,
    ReactionTemplate,
    infer_rgroups_from_product,
    substitute_template,
)
from .text import (
    DEFAULT_DICTIONARY,
    AbbreviationDictionary,
    LabelParts,
    looks_like_definition,
    parse_rgroup_text,
    try_parse_label,
)

EMITTED = "emitted"
DROPPED = "dropped"


@dataclass(frozen=True)
class EntryOutcome:
    label: str
    status: str
    assignments: tuple[tuple[str, str], ...] = ()
    ambiguous: bool = False
    cause: Optional[str] = None
    product: Optional[str] = None


@dataclass
class ScopeResult:
    reactions: list[Reaction] = field(default_factory=list)
    warnings: list[PipelineWarning] = field(default_factory=list)
    entries: list[EntryOutcome] = field(default_factory=list)


_YIELD_NOTE = re.compile(r"(\d+(?:\.\d+)?)\s*%")


def _parse(smiles: Optional[str]) -> Optional[MoleculeGraph]:
    if not smiles:
        return None
    try:
        return parse_smiles(smiles)
    except MoleculeError:
        return None


def _entity_graph(entity: MoleculeEntity, registry: Mapping[str, str]) -> Optional[MoleculeGraph]:
    graph = _parse(entity.smiles)
    if graph is None and entity.label:
        graph = _parse(registry.get(normalize_identifier(entity.label)))
    return graph


def _scheme_has_placeholders(scheme: ReactionScheme, registry: Mapping[str, str]) -> bool:
    for ent in scheme.reactants + scheme.products:
        g = _entity_graph(ent, registry)
        if g is not None and g.has_placeholders:
            return True
    return False


def _scheme_text(scheme: ReactionScheme) -> tuple[list[str], list[str]]:
    """Split scheme text into R-group definitions and condition strings."""
    defs, conds = [], []
    for text in scheme.conditions_text:
        (defs if looks_like_definition(text) else conds).append(text)
    return defs, conds


def _template_label(scheme: ReactionScheme, figure: Figure, product: MoleculeGraph) -> Optional[str]:
    for ent in scheme.products:
        if ent.label and try_parse_label(ent.label):
            return normalize_identifier(ent.label)
    key = canonical_key(product, ignore_stereo=True)
    for pair in figure.coref_pairs:
        g = _parse(pair.molecule.smiles)
        if pair.label and g is not None and canonical_key(g, ignore_stereo=True) == key:
            label, _ = split_identifier(pair.label)
            if try_parse_label(label):
                return label
    return None


def scheme_reaction(scheme: ReactionScheme, registry: Mapping[str, str]) -> Optional[Reaction]:
    """A placeholder-free scheme as a reaction, or None if a molecule is unknown."""
    sides = []
    for entities in (scheme.reactants, scheme.products):
        smiles = set()
        for ent in entities:
            g = _entity_graph(ent, registry)
            if g is None or g.has_placeholders:
                return None
            smiles.add(write_smiles(g))
        sides.append(frozenset(smiles))
    if not sides[0] or not sides[1]:
        return None
    _, conds = _scheme_text(scheme)
    conditions = (conditions_from_text(conds),) if conds else ()
    return Reaction(sides[0], sides[1], conditions)


def resolve_substrate_scope(
    figure: Figure,
    registry: Mapping[str, str],
    dictionary: AbbreviationDictionary = DEFAULT_DICTIONARY,
) -> ScopeResult:
    """Resolve every template scheme of ``figure`` against its labelled products.

    Matching and verification ignore stereo, since drawn products often flip
    a centre relative to the template.
    """
    result = ScopeResult()
    templates = []
    for si, scheme in enumerate(figure.schemes):
        if not _scheme_has_placeholders(scheme, registry):
            reaction = scheme_reaction(scheme, registry)
            if reaction is not None:
                result.reactions.append(reaction)
            else:
                result.warnings.append(PipelineWarning(
                    "no-mapping", "scheme has molecules without a usable structure", None, f"scheme {si}"))
            continue
        templates.append(_Template.build(scheme, figure, registry, dictionary, result.warnings))

    templates = [t for t in templates if t is not None]
    if not templates:
        return result

    own_labels = set()
    for t in templates:
        own_labels |= t.own_labels
        if t.label:
            own_labels.add(t.label)

    own_prefixes = {p.prefix for p in map(try_parse_label, own_labels) if p is not None}
    pairs = []
    for pair in figure.coref_pairs:
        if not pair.label:
            continue
        label, rest = split_identifier(pair.label)
        pairs.append((label, rest, pair.molecule.smiles or ""))
    for label, rest, smiles in sorted(set(pairs)):
        if label in own_labels:
            continue
        parts = try_parse_label(label)
        if parts is None:
            continue
        owner = next((t for t in templates if t.accepts(parts)), None)
        if owner is None and parts.prefix in own_prefixes:
            # a concrete reactant such as "1a" for template reactant "1"
            continue
        if owner is None:
            result.warnings.append(PipelineWarning(
                "unmatched-label",
                f"label {label!r} does not share a prefix with any template",
                label,
            ))
            continue
        owner.resolve_entry(label, rest, smiles, result, dictionary)
    return result


@dataclass
class _Template:
    scheme: ReactionScheme
    template: ReactionTemplate
    label: Optional[str]
    prefix: Optional[str]
    own_labels: set
    defaults: dict
    conditions: tuple[ConditionSet, ...]

    @classmethod
    def build(cls, scheme, figure, registry, dictionary, warnings) -> Optional["_Template"]:
        reactants, products = [], []
        for entities, out in ((scheme.reactants, reactants), (scheme.products, products)):
            for ent in entities:
                g = _entity_graph(ent, registry)
                if g is None:
                    warnings.append(PipelineWarning(
                        "no-mapping", "template molecule has no usable structure", ent.label))
                    return None
                out.append(g)
        # the product with placeholders is the one concrete products are compared to
        products.sort(key=lambda g: not g.has_placeholders)
        label = _template_label(scheme, figure, products[0])
        def_texts, cond_texts = _scheme_text(scheme)
        defaults = {}
        for text in def_texts:
            for d in parse_rgroup_text(text, dictionary, warnings):
                defaults.setdefault(d.label, d.fragment)
        own = {normalize_identifier(e.label) for e in scheme.reactants + scheme.products if e.label}
        parts = try_parse_label(label) if label else None
        return cls(
            scheme,
            ReactionTemplate(tuple(reactants), tuple(products), label),
            label,
            parts.prefix if parts else None,
            own,
            defaults,
            (conditions_from_text(cond_texts),) if cond_texts else (),
        )

    def accepts(self, parts: LabelParts) -> bool:
        if self.prefix is None:
            # an unlabelled template takes every suffixed label
            return parts.suffix is not None
        return parts.prefix == self.prefix

    def resolve_entry(self, label, rest, smiles, result, dictionary) -> None:
        def drop(code: str, cause: str) -> None:
            result.warnings.append(PipelineWarning(code, cause, label))
            result.entries.append(EntryOutcome(label, DROPPED, cause=code))

        entry_warnings: list[PipelineWarning] = []
        entry_defs = {}
        for d in parse_rgroup_text(rest, dictionary, entry_warnings) if looks_like_definition(rest) else ():
            entry_defs.setdefault(d.label, d.fragment)
        result.warnings.extend(entry_warnings)

        concrete = _parse(smiles)
        if smiles and concrete is None:
            drop("no-mapping", f"cannot parse product structure {smiles!r}")
            return
        if concrete is not None and concrete.has_placeholders:
            # the drawing repeats the template; only text can define it
            concrete = None

        assignments = dict(self.defaults)
        assignments.update(entry_defs)
        ambiguous = False
        main = self.template.products[0]
        if concrete is not None and main.has_placeholders:
            try:
                inference = infer_rgroups_from_product(main, concrete, ignore_stereo=True)
            except NoMappingError:
                drop("no-mapping", "template product is not a substructure of the product")
                return
            ambiguous = inference.ambiguous
            # the drawn product overrides text for the labels it shows
            assignments.update(inference.assignments)

        try:
            sub = substitute_template(self.template, assignments)
        except MissingDefinitionError as exc:
            drop("no-mapping", f"no substituent for {', '.join(exc.labels)}")
            return
        except ValenceError as exc:
            drop("verify-failed", f"substitution breaks valence: {exc}")
            return

        if concrete is not None:
            got = canonical_key(sub.products[0], ignore_stereo=True)
            if got != canonical_key(concrete, ignore_stereo=True):
                drop("verify-failed", "substituted template does not reproduce the product")
                return
            products = [concrete] + list(sub.products[1:])
        else:
            products = list(sub.products)

        conditions = self.conditions
        m = _YIELD_NOTE.search(rest)
        if m:
            try:
                y = parse_yield(m.group(0))
            except YieldFormatError:
                y = None
            base = conditions[0] if conditions else ConditionSet()
            conditions = (replace(base, yield_percent=y, yield_text=m.group(0)),)

        reaction = Reaction(
            frozenset(write_smiles(g) for g in sub.reactants),
            frozenset(write_smiles(g) for g in products),
            conditions,
        )
        if ambiguous:
            result.warnings.append(PipelineWarning(
                "ambiguous-assignment",
                "symmetric template: R-groups cannot be told apart, kept the first assignment",
                label,
            ))
        result.reactions.append(reaction)
        result.entries.append(EntryOutcome(
            label,
            EMITTED,
            tuple(sorted((k, fragment_key(v)) for k, v in assignments.items())),
            ambiguous,
            product=write_smiles(products[0]),
        ))
