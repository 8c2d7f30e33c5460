"""Canonical ranking and canonical SMILES.

Atoms get Morgan-style invariants which are refined by neighbourhood until
the partition is stable. Remaining ties are broken by individualising one
atom of the first tied class and refining again. Without stereo any member
of a tied class gives the same string, so only one branch is followed; with
stereo every member is tried and the lexicographically smallest string wins
(up to a leaf budget).
"""
from __future__ import annotations

from typing import Optional, Sequence

from .aromatic import ring_membership
from .core import MoleculeGraph
from .smiles import write_ranked

STEREO_LEAF_BUDGET = 512


def _dense(keys: Sequence) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def atom_invariants(graph: MoleculeGraph, stereo: bool = True) -> list[tuple]:
    rings = ring_membership(graph)
    out = []
    for i, atom in enumerate(graph.atoms):
        out.append((
            # terminal atoms first gives the familiar "CCO" style starts
            graph.degree(i),
            1 if atom.is_placeholder else 0,
            atom.placeholder or "",
            atom.atomic_number,
            atom.isotope or 0,
            atom.charge,
            graph.hydrogen_count(i),
            atom.aromatic,
            rings[i],
            bool(stereo and atom.stereo),
        ))
    return out


def refine(graph: MoleculeGraph, ranks: Sequence[int], stereo: bool = True) -> list[int]:
    """Iterate neighbour-rank refinement to a stable partition."""
    ranks = list(ranks)
    n_classes = len(set(ranks))
    while True:
        keys = []
        for i in range(len(graph)):
            env = sorted(
                (int(b.order), bool(stereo and b.cis_trans), ranks[j]) for j, b in graph.neighbors(i)
            )
            keys.append((ranks[i], tuple(env)))
        new = _dense(keys)
        n_new = len(set(new))
        if n_new == n_classes:
            return ranks
        ranks, n_classes = new, n_new


def _individualize(ranks: list[int], atom: int) -> list[int]:
    cell = ranks[atom]
    return _dense([(r, 0 if (i == atom or r != cell) else 1) for i, r in enumerate(ranks)])


def canonical_ranks(graph: MoleculeGraph, stereo: bool = True) -> list[int]:
    """A total order of atoms; equal for isomorphic graphs up to automorphism."""
    return _search(graph, stereo)[1]


def _search(graph: MoleculeGraph, stereo: bool) -> tuple[str, list[int]]:
    n = len(graph)
    start = refine(graph, _dense(atom_invariants(graph, stereo)), stereo)
    explore_all = stereo and graph.has_stereo
    best: list[Optional[tuple[str, list[int]]]] = [None]
    leaves = [0]

    def recurse(ranks: list[int]) -> None:
        if len(set(ranks)) == n:
            leaves[0] += 1
            text = write_ranked(graph, ranks)
            if best[0] is None or text < best[0][0]:
                best[0] = (text, ranks)
            return
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        cell = min(r for r, c in counts.items() if c > 1)
        members = [i for i, r in enumerate(ranks) if r == cell]
        if not explore_all:
            members = members[:1]
        for atom in members:
            if best[0] is not None and leaves[0] >= STEREO_LEAF_BUDGET:
                return
            recurse(refine(graph, _individualize(ranks, atom), stereo))

    if n == 0:
        return "", []
    recurse(start)
    return best[0]


def canonical_smiles(graph: MoleculeGraph, ignore_stereo: bool = False) -> str:
    if ignore_stereo:
        graph = graph.without_stereo()
    return _search(graph, not ignore_stereo)[0]
