"""Graph edits: placeholder substitution and fragment extraction."""
from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Union

from .core import (
    HYDROGEN,
    Atom,
    Bond,
    BondOrder,
    Fragment,
    HydrogenMarker,
    LabelNotFoundError,
    MoleculeGraph,
    ValenceError,
    remap_stereo,
)
from .smiles import parse_smiles

Substituent = Union[Fragment, HydrogenMarker]


def fragment_from_smiles(text: str) -> Fragment:
    """Build a fragment from SMILES.

    A single placeholder (``*`` or ``[R]``) marks the attachment: it is removed
    and its neighbour becomes the attachment atom with an open valence.
    Without a placeholder the first atom is the attachment and gives up a
    hydrogen when attached.
    """
    graph = parse_smiles(text)
    holders = graph.placeholder_indices()
    if not holders:
        return Fragment(graph, 0)
    if len(holders) != 1 or graph.degree(holders[0]) != 1:
        raise ValueError(f"fragment SMILES {text!r} needs exactly one singly bonded attachment mark")
    mark = holders[0]
    anchor = graph.neighbor_indices(mark)[0]
    keep = [i for i in range(len(graph)) if i != mark]
    sub = induced_subgraph(graph, keep)
    return Fragment(sub, keep.index(anchor))


def induced_subgraph(graph: MoleculeGraph, keep: Iterable[int]) -> MoleculeGraph:
    """Subgraph on ``keep`` (in the given order) with hydrogen counts pinned."""
    keep = list(keep)
    graph = graph.with_pinned_hydrogens()
    old_to_new = {old: new for new, old in enumerate(keep)}
    atoms = [graph.atoms[i] for i in keep]
    bonds = [
        Bond(old_to_new[b.a], old_to_new[b.b], b.order, b.cis_trans)
        for b in graph.bonds
        if b.a in old_to_new and b.b in old_to_new
    ]
    return remap_stereo(graph, atoms, bonds, old_to_new)


def attach_fragment(template: MoleculeGraph, label: str, frag: Substituent) -> MoleculeGraph:
    """Replace every placeholder carrying ``label`` by a copy of ``frag``.

    With the hydrogen marker the placeholder is deleted and its neighbour
    gains one implicit hydrogen.
    """
    sites = template.placeholder_indices(label)
    if not sites:
        raise LabelNotFoundError(f"no placeholder labelled {label!r}")
    template = template.with_pinned_hydrogens()
    site_set = set(sites)
    keep = [i for i in range(len(template)) if i not in site_set]
    old_to_new = {old: new for new, old in enumerate(keep)}
    atoms: list[Atom] = [template.atoms[i] for i in keep]
    bonds: list[Bond] = [
        Bond(old_to_new[b.a], old_to_new[b.b], b.order, b.cis_trans)
        for b in template.bonds
        if b.a in old_to_new and b.b in old_to_new
    ]

    if isinstance(frag, HydrogenMarker):
        for site in sites:
            for j, bond in template.neighbors(site):
                if j in site_set:
                    continue
                nj = old_to_new[j]
                atoms[nj] = replace(atoms[nj], explicit_h=atoms[nj].explicit_h + bond.order.valence)
                old_to_new[site] = -1
        return remap_stereo(template, atoms, bonds, old_to_new)

    fgraph = frag.graph.with_pinned_hydrogens()
    for site in sites:
        offset = len(atoms)
        f_atoms = list(fgraph.atoms)
        order_sum = sum(b.order.valence for j, b in template.neighbors(site) if j not in site_set)
        free = fgraph.free_valence(frag.attachment)
        if free is None or free >= order_sum:
            pass
        elif fgraph.hydrogen_count(frag.attachment) + free >= order_sum:
            anchor = f_atoms[frag.attachment]
            f_atoms[frag.attachment] = replace(anchor, explicit_h=anchor.explicit_h - (order_sum - free))
        else:
            raise ValenceError(f"fragment cannot bond to placeholder {label!r}")
        atoms.extend(f_atoms)
        bonds.extend(Bond(b.a + offset, b.b + offset, b.order, b.cis_trans) for b in fgraph.bonds)
        for j, bond in template.neighbors(site):
            if j in site_set:
                continue
            order = BondOrder.SINGLE if bond.order == BondOrder.AROMATIC else bond.order
            bonds.append(Bond(old_to_new[j], frag.attachment + offset, order))
        old_to_new[site] = frag.attachment + offset

    result = remap_stereo(template, atoms, bonds, old_to_new)
    return _restore_fragment_stereo(result, fgraph, frag.attachment, len(keep), len(sites))


def _restore_fragment_stereo(
    result: MoleculeGraph, fgraph: MoleculeGraph, anchor: int, base: int, copies: int
) -> MoleculeGraph:
    """Carry stereo tags of the fragment into each attached copy.

    Copies keep the fragment's atom order and the new junction neighbour has a
    lower index than any fragment atom, so it takes the slot of the hydrogen
    that the junction consumed.
    """
    if not fgraph.has_stereo:
        return result
    atoms = list(result.atoms)
    bonds = list(result.bonds)
    index = {(b.a, b.b): k for k, b in enumerate(bonds)}
    size = len(fgraph)
    for c in range(copies):
        offset = base + c * size
        for i, atom in enumerate(fgraph.atoms):
            if not atom.stereo:
                continue
            if i == anchor and result.hydrogen_count(offset + i) >= fgraph.hydrogen_count(i):
                continue
            atoms[offset + i] = replace(atoms[offset + i], stereo=atom.stereo)
        for b in fgraph.bonds:
            if not b.cis_trans:
                continue
            tag = b.cis_trans
            if anchor in (b.a, b.b):
                partner = b.b if b.a == anchor else b.a
                if not [j for j in fgraph.neighbor_indices(anchor) if j != partner]:
                    continue
                tag = "trans" if tag == "cis" else "cis"
            k = index[(b.a + offset, b.b + offset)]
            bonds[k] = replace(bonds[k], cis_trans=tag)
    return MoleculeGraph(atoms, bonds)


def substitute_all(template: MoleculeGraph, assignments: dict) -> MoleculeGraph:
    """Apply every ``label -> substituent`` assignment present in ``template``."""
    for label in sorted(template.placeholder_labels()):
        if label in assignments:
            template = attach_fragment(template, label, assignments[label])
    return template


__all__ = [
    "HYDROGEN",
    "Substituent",
    "attach_fragment",
    "fragment_from_smiles",
    "induced_subgraph",
    "substitute_all",
]
