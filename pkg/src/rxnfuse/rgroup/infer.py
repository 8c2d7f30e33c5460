"""R-group inference by graph difference between a template and a product,
and direct substitution of text definitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ..molgraph import (
    HYDROGEN,
    AtomMapping,
    Fragment,
    HydrogenMarker,
    HydrogenMatch,
    MatchOptions,
    MoleculeGraph,
    canonical_key,
    fragment_key,
    induced_subgraph,
    match_substructure,
    substitute_all,
    write_smiles,
)
from .text import RGroupDefinition, Substituent


class NoMappingError(ValueError):
    pass


class MissingDefinitionError(ValueError):
    def __init__(self, labels: Iterable[str]):
        self.labels = tuple(sorted(labels))
        super().__init__(f"no definition for {', '.join(self.labels)}")


@dataclass(frozen=True)
class ReactionTemplate:
    reactants: tuple[MoleculeGraph, ...]
    products: tuple[MoleculeGraph, ...]
    template_label: Optional[str] = None

    def labels(self) -> set[str]:
        out: set[str] = set()
        for g in self.reactants + self.products:
            out |= g.placeholder_labels()
        return out


@dataclass(frozen=True)
class Substitution:
    """Template with every placeholder replaced."""
    reactants: tuple[MoleculeGraph, ...]
    products: tuple[MoleculeGraph, ...]

    def smiles(self) -> tuple[frozenset[str], frozenset[str]]:
        return (
            frozenset(write_smiles(g) for g in self.reactants),
            frozenset(write_smiles(g) for g in self.products),
        )


def substitute_template(template: ReactionTemplate, assignments: Mapping[str, Substituent]) -> Substitution:
    missing = template.labels() - set(assignments)
    if missing:
        raise MissingDefinitionError(missing)
    return Substitution(
        tuple(substitute_all(g, assignments) for g in template.reactants),
        tuple(substitute_all(g, assignments) for g in template.products),
    )


def resolve_by_text(template: ReactionTemplate, defs: Sequence[RGroupDefinition]):
    """Substitute text definitions into every template molecule.

    The first definition of a label wins. Returns a docmodel Reaction without
    conditions.
    """
    from ..docmodel import Reaction

    assignments: dict[str, Substituent] = {}
    for d in defs:
        assignments.setdefault(d.label, d.fragment)
    reactants, products = substitute_template(template, assignments).smiles()
    return Reaction(reactants, products)


@dataclass(frozen=True)
class Inference:
    assignments: dict = field(hash=False)
    ambiguous: bool = False
    mapping: Optional[AtomMapping] = None
    alternatives: tuple = ()

    def keys(self) -> tuple[tuple[str, str], ...]:
        return _assignment_key(self.assignments)


def _assignment_key(assignments: Mapping[str, Substituent]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((label, fragment_key(sub)) for label, sub in assignments.items()))


def _fragments_for(
    template: MoleculeGraph, product: MoleculeGraph, mapping: AtomMapping
) -> Optional[dict[str, Substituent]]:
    """Read substituents off one embedding, or None if the leftover atoms do
    not split cleanly into one fragment per placeholder."""
    core = {
        t for p, t in enumerate(mapping.targets)
        if not template.atoms[p].is_placeholder
    }
    claimed = set(core)
    out: dict[str, Substituent] = {}
    for p, atom in enumerate(template.atoms):
        if not atom.is_placeholder:
            continue
        t = mapping.targets[p]
        if isinstance(t, HydrogenMatch):
            sub: Substituent = HYDROGEN
        else:
            seen = [t]
            claimed.add(t)
            k = 0
            while k < len(seen):
                for j in product.neighbor_indices(seen[k]):
                    if j not in claimed:
                        claimed.add(j)
                        seen.append(j)
                k += 1
            # the fragment may touch the core only through its junction bond
            junction = {mapping.targets[q] for q in template.neighbor_indices(p)}
            for i in seen:
                for j in product.neighbor_indices(i):
                    if j in core and not (i == t and j in junction):
                        return None
            sub = Fragment(induced_subgraph(product, seen), 0)
        label = atom.placeholder
        if label in out and _assignment_key({label: out[label]}) != _assignment_key({label: sub}):
            return None
        out[label] = sub
    if len(claimed) != len(product):
        return None
    return out


def infer_rgroups_from_product(
    template_product: MoleculeGraph,
    concrete_product: MoleculeGraph,
    ignore_stereo: bool = True,
) -> Inference:
    """Substituents that turn ``template_product`` into ``concrete_product``.

    Every embedding of the template is turned into a candidate assignment and
    kept only if substituting it back reproduces the product. Candidates with
    fewer hydrogen assignments win (largest template coverage); among the rest
    the lexicographically smallest (label, fragment key) tuple is chosen and
    ``ambiguous`` is set when several distinct assignments survive.
    """
    if not template_product.has_placeholders:
        raise ValueError("template has no placeholders")
    if concrete_product.has_placeholders:
        raise ValueError("concrete product still has placeholders")
    options = MatchOptions(placeholder_wildcard=True, ignore_stereo=True)
    mappings = match_substructure(template_product, concrete_product, options)
    target_key = canonical_key(concrete_product, ignore_stereo=ignore_stereo)

    candidates: dict[tuple, tuple[dict, AtomMapping]] = {}
    for mapping in mappings:
        assignments = _fragments_for(template_product, concrete_product, mapping)
        if assignments is None:
            continue
        key = _assignment_key(assignments)
        if key in candidates:
            continue
        rebuilt = substitute_all(template_product, assignments)
        if canonical_key(rebuilt, ignore_stereo=ignore_stereo) != target_key:
            continue
        candidates[key] = (assignments, mapping)
    if not candidates:
        raise NoMappingError("template is not a substructure of the product")

    def n_hydrogen(key):
        return sum(1 for _, k in key if k == "[H]")

    fewest = min(n_hydrogen(k) for k in candidates)
    tier = sorted(k for k in candidates if n_hydrogen(k) == fewest)
    best = tier[0]
    assignments, mapping = candidates[best]
    return Inference(dict(sorted(assignments.items())), len(tier) > 1, mapping, tuple(tier))


def is_hydrogen(sub: Substituent) -> bool:
    return isinstance(sub, HydrogenMarker)
