"""Ring perception, kekulization and aromaticity.

Rings are the smallest set of smallest rings (a minimum cycle basis found
with Horton's candidate set). A ring, or a pair of fused rings taken as one
envelope, is aromatic when every member is an sp2 C/N/O/S atom and the pi
electron count is 4n+2.
"""
from __future__ import annotations

from collections import deque
from dataclasses import replace
from functools import lru_cache

import networkx as nx

from .core import Atom, Bond, BondOrder, MoleculeError, MoleculeGraph, allowed_valences

AROMATIC_ELEMENTS = frozenset("CNOS")


class KekulizeError(MoleculeError):
    def __init__(self, message: str, atom: int):
        self.atom = atom
        super().__init__(message)


def _bfs_tree(graph: MoleculeGraph, root: int) -> tuple[dict[int, int], dict[int, int]]:
    parent = {root: -1}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in graph.neighbor_indices(u):
            if v not in parent:
                parent[v] = u
                depth[v] = depth[u] + 1
                queue.append(v)
    return parent, depth


def _path_to_root(parent: dict[int, int], v: int) -> list[int]:
    path = [v]
    while parent[v] != -1:
        v = parent[v]
        path.append(v)
    return path


@lru_cache(maxsize=4096)
def _sssr_cached(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[tuple[int, ...], ...]:
    graph = MoleculeGraph(
        tuple(_DUMMY for _ in range(n)), tuple(Bond(a, b) for a, b in edges)
    )
    return tuple(tuple(r) for r in _minimum_cycle_basis(graph))


def _minimum_cycle_basis(graph: MoleculeGraph) -> list[list[int]]:
    n = len(graph)
    edge_id = {(b.a, b.b): k for k, b in enumerate(graph.bonds)}
    n_rings = len(graph.bonds) - n + len(graph.components())
    if n_rings <= 0:
        return []

    candidates: dict[int, list[int]] = {}
    for v in range(n):
        if graph.degree(v) < 2:
            continue
        parent, depth = _bfs_tree(graph, v)
        for bond in graph.bonds:
            x, y = bond.a, bond.b
            if x not in parent or parent.get(x) == y or parent.get(y) == x:
                continue
            px = _path_to_root(parent, x)
            py = _path_to_root(parent, y)
            if set(px) & set(py) != {v}:
                continue
            # v ... x, then y ... back towards v
            ring = list(reversed(px)) + py[:-1]
            mask = 0
            for k in range(len(ring)):
                a, b = ring[k], ring[(k + 1) % len(ring)]
                mask |= 1 << edge_id[(a, b) if a < b else (b, a)]
            if mask not in candidates:
                candidates[mask] = ring

    # greedy GF(2) independence in order of size, then lexicographic atoms
    ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), sorted(kv[1])))
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    rings: list[list[int]] = []
    for mask, ring in ordered:
        vec = mask
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in basis:
                basis[pivot] = vec
                rings.append(ring)
                break
            vec ^= basis[pivot]
        if len(rings) == n_rings:
            break
    return rings


# stand-in atom for topology-only graphs
_DUMMY = Atom("C", explicit_h=0)


def sssr(graph: MoleculeGraph) -> list[list[int]]:
    """Smallest set of smallest rings as atom-index cycles."""
    edges = tuple((b.a, b.b) for b in graph.bonds)
    return [list(r) for r in _sssr_cached(len(graph), edges)]


def ring_bonds(graph: MoleculeGraph) -> set[tuple[int, int]]:
    out = set()
    for ring in sssr(graph):
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            out.add((a, b) if a < b else (b, a))
    return out


def ring_membership(graph: MoleculeGraph) -> list[int]:
    counts = [0] * len(graph)
    for ring in sssr(graph):
        for i in ring:
            counts[i] += 1
    return counts


def kekulize(graph: MoleculeGraph) -> MoleculeGraph:
    """Replace aromatic bonds by an alternating single/double assignment.

    Hydrogen counts are pinned first so that the aromatic hydrogen rule is
    applied exactly once. Aromatic flags are cleared on every atom.
    """
    graph = graph.with_pinned_hydrogens()
    if not any(b.order == BondOrder.AROMATIC for b in graph.bonds) and not any(
        a.aromatic for a in graph.atoms
    ):
        return graph

    need = set()
    for i, atom in enumerate(graph.atoms):
        if not atom.aromatic or atom.is_placeholder:
            continue
        vals = allowed_valences(atom.element, atom.charge)
        if vals is None:
            continue
        used = graph.bond_valence(i) + graph.hydrogen_count(i)
        if any(b.order == BondOrder.DOUBLE for _, b in graph.neighbors(i)):
            continue
        if used < vals[0]:
            need.add(i)

    g = nx.Graph()
    g.add_nodes_from(sorted(need))
    for b in graph.bonds:
        if b.order == BondOrder.AROMATIC and b.a in need and b.b in need:
            g.add_edge(b.a, b.b)
    matching = nx.max_weight_matching(g, maxcardinality=True)
    matched = {frozenset(e) for e in matching}
    covered = {i for e in matching for i in e}
    if covered != need:
        raise KekulizeError("cannot kekulize aromatic system", min(need - covered))

    bonds = []
    for b in graph.bonds:
        if b.order == BondOrder.AROMATIC:
            order = BondOrder.DOUBLE if frozenset((b.a, b.b)) in matched else BondOrder.SINGLE
            b = replace(b, order=order, cis_trans=None)
        bonds.append(b)
    atoms = [replace(a, aromatic=False) if a.aromatic else a for a in graph.atoms]
    return MoleculeGraph(atoms, bonds)


def _pi_electrons(graph: MoleculeGraph, i: int, rbonds: set[tuple[int, int]]) -> int | None:
    """Pi electrons atom ``i`` donates to a ring, or None if it cannot be aromatic."""
    atom = graph.atoms[i]
    if atom.is_placeholder or atom.element not in AROMATIC_ELEMENTS:
        return None
    ring_double = 0
    exo_double = []
    for j, b in graph.neighbors(i):
        if b.order == BondOrder.TRIPLE or b.order == BondOrder.AROMATIC:
            return None
        if b.order == BondOrder.DOUBLE:
            if (min(i, j), max(i, j)) in rbonds:
                ring_double += 1
            else:
                exo_double.append(j)
    if ring_double > 1 or (ring_double and exo_double) or len(exo_double) > 1:
        return None
    if ring_double:
        # hypervalent centres (e.g. S(IV) with a ring double bond) stay localized
        normal = allowed_valences(atom.element, atom.charge)
        if not normal or graph.bond_valence(i) + graph.hydrogen_count(i) != normal[0]:
            return None
        return 1
    if exo_double:
        partner = graph.atoms[exo_double[0]].element
        if atom.element == "C" and partner in ("O", "N", "S"):
            return 0
        return None
    n_conn = graph.degree(i) + graph.hydrogen_count(i)
    if atom.element == "C":
        if atom.charge == -1:
            return 2
        if atom.charge == 1:
            return 0
        return None
    if atom.element == "N":
        if atom.charge == 0 and n_conn == 3:
            return 2
        if atom.charge == -1 and n_conn == 2:
            return 2
        return None
    if atom.element in ("O", "S"):
        if atom.charge == 0 and n_conn == 2:
            return 2
        return None
    return None


def _huckel(n: int) -> bool:
    return n >= 2 and (n - 2) % 4 == 0


def perceive_aromaticity(graph: MoleculeGraph) -> MoleculeGraph:
    """Mark aromatic rings on a kekulized graph (hydrogens must be pinned)."""
    rings = sssr(graph)
    if not rings:
        return graph
    rbonds = ring_bonds(graph)
    pi = [_pi_electrons(graph, i, rbonds) for i in range(len(graph))]

    def ring_edges(ring):
        return {
            (min(ring[k], ring[(k + 1) % len(ring)]), max(ring[k], ring[(k + 1) % len(ring)]))
            for k in range(len(ring))
        }

    aromatic_edges: set[tuple[int, int]] = set()
    aromatic_atoms: set[int] = set()
    flags = []
    for ring in rings:
        ok = all(pi[i] is not None for i in ring) and _huckel(sum(pi[i] for i in ring))
        flags.append(ok)
        if ok:
            aromatic_edges |= ring_edges(ring)
            aromatic_atoms |= set(ring)
    for x in range(len(rings)):
        for y in range(x + 1, len(rings)):
            if flags[x] and flags[y]:
                continue
            ex, ey = ring_edges(rings[x]), ring_edges(rings[y])
            if not ex & ey:
                continue
            atoms = set(rings[x]) | set(rings[y])
            if all(pi[i] is not None for i in atoms) and _huckel(sum(pi[i] for i in atoms)):
                aromatic_edges |= ex | ey
                aromatic_atoms |= atoms

    if not aromatic_atoms:
        return graph
    atoms = [
        replace(a, aromatic=True) if i in aromatic_atoms else a
        for i, a in enumerate(graph.atoms)
    ]
    bonds = [
        replace(b, order=BondOrder.AROMATIC, cis_trans=None) if (b.a, b.b) in aromatic_edges else b
        for b in graph.bonds
    ]
    return MoleculeGraph(atoms, bonds)


def normalize_aromaticity(graph: MoleculeGraph) -> MoleculeGraph:
    """Kekulize then re-perceive, so drawing convention does not matter."""
    return perceive_aromaticity(kekulize(graph))
