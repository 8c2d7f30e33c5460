"""Substructure search (VF2-style state-space backtracking)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    AtomMapping,
    BondOrder,
    HydrogenMatch,
    MoleculeGraph,
    double_bond_substituent,
    flip_double,
    flip_tetrahedral,
    permutation_parity,
    stereo_reference,
)


@dataclass(frozen=True)
class MatchOptions:
    placeholder_wildcard: bool = False
    ignore_stereo: bool = True


def _match_order(pattern: MoleculeGraph) -> list[int]:
    """Pattern atoms in BFS order, placeholders after the atoms they hang off."""
    n = len(pattern)
    regular = [i for i in range(n) if not pattern.atoms[i].is_placeholder]
    order: list[int] = []
    seen = set()
    for root in sorted(regular, key=lambda i: -pattern.degree(i)):
        if root in seen:
            continue
        queue = [root]
        seen.add(root)
        while queue:
            u = queue.pop(0)
            order.append(u)
            for v in pattern.neighbor_indices(u):
                if v not in seen and not pattern.atoms[v].is_placeholder:
                    seen.add(v)
                    queue.append(v)
    order += [i for i in range(n) if pattern.atoms[i].is_placeholder]
    return order


def atoms_compatible(pattern: MoleculeGraph, p: int, target: MoleculeGraph, t: int, wildcard: bool) -> bool:
    pa, ta = pattern.atoms[p], target.atoms[t]
    if pa.is_placeholder:
        return wildcard or ta.placeholder == pa.placeholder
    if ta.is_placeholder:
        return False
    return pa.element == ta.element and pa.charge == ta.charge


def bonds_compatible(po: BondOrder, to: BondOrder) -> bool:
    return po == to


def match_substructure(
    pattern: MoleculeGraph,
    target: MoleculeGraph,
    options: Optional[MatchOptions] = None,
) -> list[AtomMapping]:
    """All embeddings of ``pattern`` into ``target``.

    Non-placeholder atoms map to atoms with equal element and charge over
    bonds of identical order (aromatic only to aromatic). With
    ``placeholder_wildcard`` a placeholder maps to any unused atom, or to an
    implicit hydrogen of the atom its single, non-placeholder neighbour
    mapped to. Results are
    deduplicated and sorted by their mapped index tuples.
    """
    if len(pattern) == 0:
        raise ValueError("pattern must be nonempty")
    options = options or MatchOptions()
    wildcard = options.placeholder_wildcard
    order = _match_order(pattern)
    np_ = len(pattern)
    targets: list = [None] * np_
    used = [False] * len(target)
    h_used = [0] * len(target)
    results: set[tuple] = set()
    heavy_deg = [
        sum(1 for j in pattern.neighbor_indices(i) if not (wildcard and pattern.atoms[j].is_placeholder))
        for i in range(np_)
    ]

    def feasible(p: int, t: int) -> bool:
        if used[t] or not atoms_compatible(pattern, p, target, t, wildcard):
            return False
        if target.degree(t) < heavy_deg[p]:
            return False
        for q, pb in pattern.neighbors(p):
            tq = targets[q]
            if tq is None:
                continue
            if isinstance(tq, HydrogenMatch):
                return False
            tb = target.bond_between(t, tq)
            if tb is None or not bonds_compatible(pb.order, tb.order):
                return False
        return True

    def candidates(p: int) -> list:
        mapped_nbrs = [targets[q] for q in pattern.neighbor_indices(p) if targets[q] is not None]
        if mapped_nbrs and not isinstance(mapped_nbrs[0], HydrogenMatch):
            pool = target.neighbor_indices(mapped_nbrs[0])
        else:
            pool = range(len(target))
        out = [t for t in pool if feasible(p, t)]
        atom = pattern.atoms[p]
        if wildcard and atom.is_placeholder and pattern.degree(p) == 1:
            (q, pb), = pattern.neighbors(p)
            tq = targets[q]
            if (
                isinstance(tq, int)
                and not pattern.atoms[q].is_placeholder
                and pb.order == BondOrder.SINGLE
                and target.hydrogen_count(tq) > h_used[tq]
            ):
                out.append(HydrogenMatch(tq))
        return out

    def extend(k: int) -> None:
        if k == np_:
            mapping = tuple(targets)
            if options.ignore_stereo or _stereo_consistent(pattern, target, mapping):
                results.add(mapping)
            return
        p = order[k]
        for t in candidates(p):
            targets[p] = t
            if isinstance(t, HydrogenMatch):
                h_used[t.neighbor] += 1
            else:
                used[t] = True
            extend(k + 1)
            if isinstance(t, HydrogenMatch):
                h_used[t.neighbor] -= 1
            else:
                used[t] = False
            targets[p] = None

    extend(0)
    mappings = [AtomMapping(m) for m in results]
    return sorted(mappings, key=AtomMapping.sort_key)


def _image(mapping: tuple, x: int) -> Optional[int]:
    if x == -1:
        return -1
    t = mapping[x]
    if isinstance(t, HydrogenMatch):
        return -1
    return t


def _stereo_consistent(pattern: MoleculeGraph, target: MoleculeGraph, mapping: tuple) -> bool:
    for p, atom in enumerate(pattern.atoms):
        if not atom.stereo:
            continue
        t = mapping[p]
        if isinstance(t, HydrogenMatch) or not target.atoms[t].stereo:
            return False
        image = [_image(mapping, x) for x in stereo_reference(pattern, p)]
        ref = stereo_reference(target, t)
        if sorted(image) != sorted(ref):
            continue  # partially mapped centre: require only the tag
        tag = atom.stereo
        if permutation_parity(image, ref):
            tag = flip_tetrahedral(tag)
        if tag != target.atoms[t].stereo:
            return False
    for bond in pattern.bonds:
        if not bond.cis_trans:
            continue
        ta, tb = mapping[bond.a], mapping[bond.b]
        if isinstance(ta, HydrogenMatch) or isinstance(tb, HydrogenMatch):
            return False
        tbond = target.bond_between(ta, tb)
        if tbond is None or not tbond.cis_trans:
            return False
        tag = bond.cis_trans
        for pe, pp, te, tp in ((bond.a, bond.b, ta, tb), (bond.b, bond.a, tb, ta)):
            psub = double_bond_substituent(pattern, pe, pp)
            ref = double_bond_substituent(target, te, tp)
            if psub is None or ref is None:
                return False
            if _image(mapping, psub) != ref:
                tag = flip_double(tag)
        if tag != tbond.cis_trans:
            return False
    return True
