"""Rule-based tautomer enumeration and the tautomer-equivalence predicate.

Two proton-shift rules are applied to kekulized structures:

* 1,3 shift  H-X-Y=Z  ->  X=Y-Z-H
* 1,5 shift  H-X-Y=Z-W=V  ->  X=Y-Z=W-V-H

where the donor X and acceptor (Z or V) are C, N, O or S and at least one of
them is a heteroatom. Enumeration is breadth-first and bounded in depth and
in the number of distinct tautomers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterator

from .aromatic import kekulize, perceive_aromaticity
from .canon import canonical_smiles
from .core import Bond, BondOrder, MoleculeError, MoleculeGraph

SHIFT_ELEMENTS = frozenset("CNOS")
HETERO = frozenset("NOS")
DEFAULT_MAX_DEPTH = 4
DEFAULT_MAX_TAUTOMERS = 1000


@dataclass(frozen=True)
class TautomerSet:
    tautomers: tuple[MoleculeGraph, ...]
    keys: frozenset[str]
    budget_exceeded: bool


@dataclass(frozen=True)
class TautomerComparison:
    equivalent: bool
    budget_limited: bool = False

    def __bool__(self) -> bool:
        return self.equivalent


def _shift_paths(graph: MoleculeGraph) -> Iterator[list[int]]:
    """Yield atom paths [X, Y, Z] or [X, Y, Z, W, V] along which H can move."""
    for x, atom in enumerate(graph.atoms):
        if atom.element not in SHIFT_ELEMENTS or atom.is_placeholder or atom.charge:
            continue
        if graph.hydrogen_count(x) == 0:
            continue
        for y, bxy in graph.neighbors(x):
            if bxy.order != BondOrder.SINGLE:
                continue
            for z, byz in graph.neighbors(y):
                if z == x or byz.order != BondOrder.DOUBLE:
                    continue
                yield [x, y, z]
                for w, bzw in graph.neighbors(z):
                    if w in (x, y) or bzw.order != BondOrder.SINGLE:
                        continue
                    for v, bwv in graph.neighbors(w):
                        if v in (x, y, z) or bwv.order != BondOrder.DOUBLE:
                            continue
                        yield [x, y, z, w, v]


def _apply_shift(graph: MoleculeGraph, path: list[int]) -> MoleculeGraph | None:
    donor, acceptor = path[0], path[-1]
    d_el = graph.atoms[donor].element
    a_atom = graph.atoms[acceptor]
    if a_atom.element not in SHIFT_ELEMENTS or a_atom.is_placeholder or a_atom.charge:
        return None
    if d_el not in HETERO and a_atom.element not in HETERO:
        return None
    flips = {}
    for k in range(len(path) - 1):
        key = (min(path[k], path[k + 1]), max(path[k], path[k + 1]))
        flips[key] = BondOrder.DOUBLE if k % 2 == 0 else BondOrder.SINGLE
    touched = set(path)
    bonds = []
    for b in graph.bonds:
        if (b.a, b.b) in flips:
            bonds.append(Bond(b.a, b.b, flips[(b.a, b.b)]))
        elif b.cis_trans and (b.a in touched or b.b in touched):
            bonds.append(replace(b, cis_trans=None))
        else:
            bonds.append(b)
    atoms = list(graph.atoms)
    atoms[donor] = replace(atoms[donor], explicit_h=graph.hydrogen_count(donor) - 1, stereo=None)
    atoms[acceptor] = replace(atoms[acceptor], explicit_h=graph.hydrogen_count(acceptor) + 1, stereo=None)
    for i in path[1:-1]:
        if atoms[i].stereo:
            atoms[i] = replace(atoms[i], stereo=None)
    return MoleculeGraph(atoms, bonds)


def _key(kekule: MoleculeGraph, ignore_stereo: bool) -> str:
    return canonical_smiles(perceive_aromaticity(kekule), ignore_stereo=ignore_stereo)


def enumerate_tautomers(
    graph: MoleculeGraph,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_tautomers: int = DEFAULT_MAX_TAUTOMERS,
    ignore_stereo: bool = False,
) -> TautomerSet:
    """Breadth-first closure of ``graph`` under the proton-shift rules."""
    if graph.has_placeholders:
        raise MoleculeError("tautomer enumeration needs a placeholder-free graph")
    start = kekulize(graph)
    keys = {_key(start, ignore_stereo): start}
    queue = deque([(start, 0)])
    exceeded = False
    while queue:
        current, depth = queue.popleft()
        if depth >= max_depth:
            continue
        for path in _shift_paths(current):
            shifted = _apply_shift(current, path)
            if shifted is None:
                continue
            key = _key(shifted, ignore_stereo)
            if key in keys:
                continue
            if len(keys) >= max_tautomers:
                exceeded = True
                queue.clear()
                break
            keys[key] = shifted
            queue.append((shifted, depth + 1))
    ordered = sorted(keys)
    return TautomerSet(
        tuple(perceive_aromaticity(keys[k]) for k in ordered),
        frozenset(ordered),
        exceeded,
    )


def compare_tautomers(
    a: MoleculeGraph,
    b: MoleculeGraph,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_tautomers: int = DEFAULT_MAX_TAUTOMERS,
    ignore_stereo: bool = False,
) -> TautomerComparison:
    """Tautomer equivalence with a flag telling whether the budget was hit.

    When either enumeration exceeds the budget the answer falls back to plain
    canonical equality.
    """
    ka = canonical_smiles(a, ignore_stereo=ignore_stereo)
    kb = canonical_smiles(b, ignore_stereo=ignore_stereo)
    if ka == kb:
        return TautomerComparison(True)
    if a.formula() != b.formula():
        return TautomerComparison(False)
    ta = enumerate_tautomers(a, max_depth, max_tautomers, ignore_stereo)
    tb = enumerate_tautomers(b, max_depth, max_tautomers, ignore_stereo)
    if ta.budget_exceeded or tb.budget_exceeded:
        return TautomerComparison(False, budget_limited=True)
    return TautomerComparison(bool(ta.keys & tb.keys))


def tautomer_equivalent(a: MoleculeGraph, b: MoleculeGraph, **kwargs) -> bool:
    return compare_tautomers(a, b, **kwargs).equivalent
