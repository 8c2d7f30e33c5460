"""Exhaustive reference implementations used to check the fast algorithms.

Nothing here shares code with the search routines under test beyond the
graph data structure itself.
"""
from __future__ import annotations

from itertools import permutations, product

from rxnfuse.molgraph import HydrogenMatch, MoleculeGraph


def atom_signature(g: MoleculeGraph, i: int) -> tuple:
    a = g.atoms[i]
    return (a.element, a.charge, a.isotope, a.placeholder, a.aromatic, g.hydrogen_count(i))


def bond_table(g: MoleculeGraph) -> dict:
    return {(min(b.a, b.b), max(b.a, b.b)): int(b.order) for b in g.bonds}


def isomorphic(a: MoleculeGraph, b: MoleculeGraph) -> bool:
    """Try every bijection (stereo ignored)."""
    if len(a) != len(b) or len(a.bonds) != len(b.bonds):
        return False
    if sorted(atom_signature(a, i) for i in range(len(a))) != sorted(atom_signature(b, i) for i in range(len(b))):
        return False
    ba, bb = bond_table(a), bond_table(b)
    sig_b = [atom_signature(b, i) for i in range(len(b))]
    for perm in permutations(range(len(b))):
        if any(atom_signature(a, i) != sig_b[perm[i]] for i in range(len(a))):
            continue
        if all(bb.get((min(perm[x], perm[y]), max(perm[x], perm[y]))) == o for (x, y), o in ba.items()):
            return True
    return False


def substructure_maps(pattern: MoleculeGraph, target: MoleculeGraph, wildcard: bool) -> set[tuple]:
    """Every injective map satisfying the match rules, by enumeration.

    Heavy pattern atoms are placed by plain permutations of target atoms;
    placeholders then take any remaining atom or, with ``wildcard``, any
    implicit hydrogen of the atom their neighbour was placed on.
    """
    heavy = [i for i in range(len(pattern)) if not pattern.atoms[i].is_placeholder]
    holders = [i for i in range(len(pattern)) if pattern.atoms[i].is_placeholder]
    pbonds = bond_table(pattern)
    tbonds = bond_table(target)
    found = set()
    for placed in permutations(range(len(target)), len(heavy)):
        m = dict(zip(heavy, placed))
        ok = all(
            not target.atoms[t].is_placeholder
            and pattern.atoms[p].element == target.atoms[t].element
            and pattern.atoms[p].charge == target.atoms[t].charge
            for p, t in m.items()
        )
        if not ok:
            continue
        if any(tbonds.get((min(m[x], m[y]), max(m[x], m[y]))) != o
               for (x, y), o in pbonds.items() if x in m and y in m):
            continue
        free = [t for t in range(len(target)) if t not in placed]
        options = []
        for h in holders:
            opts = []
            for t in free:
                if wildcard or target.atoms[t].placeholder == pattern.atoms[h].placeholder:
                    opts.append(t)
            nbrs = pattern.neighbor_indices(h)
            if wildcard and len(nbrs) == 1 and nbrs[0] in m:
                n = m[nbrs[0]]
                key = (min(h, nbrs[0]), max(h, nbrs[0]))
                if pbonds[key] == 1 and target.hydrogen_count(n) > 0:
                    opts.append(HydrogenMatch(n))
            options.append(opts)
        for choice in product(*options):
            full = dict(m)
            full.update(zip(holders, choice))
            ints = [t for t in full.values() if isinstance(t, int)]
            if len(set(ints)) != len(ints):
                continue
            hs = {}
            for t in full.values():
                if isinstance(t, HydrogenMatch):
                    hs[t.neighbor] = hs.get(t.neighbor, 0) + 1
            if any(c > target.hydrogen_count(n) for n, c in hs.items()):
                continue
            good = True
            for (x, y), o in pbonds.items():
                tx, ty = full[x], full[y]
                if isinstance(tx, HydrogenMatch) or isinstance(ty, HydrogenMatch):
                    continue
                if tbonds.get((min(tx, ty), max(tx, ty))) != o:
                    good = False
                    break
            if good:
                found.add(tuple(full[i] for i in range(len(pattern))))
    return found


def subgraph(g: MoleculeGraph, keep: list[int]) -> MoleculeGraph:
    from dataclasses import replace

    from rxnfuse.molgraph import Bond

    index = {old: new for new, old in enumerate(keep)}
    atoms = [replace(g.atoms[i], explicit_h=g.hydrogen_count(i), stereo=None) for i in keep]
    bonds = [Bond(index[b.a], index[b.b], b.order) for b in g.bonds if b.a in index and b.b in index]
    return MoleculeGraph(atoms, bonds)


def rooted_isomorphic(a: MoleculeGraph, ra: int, b: MoleculeGraph, rb: int) -> bool:
    """Bijection search that must send root ``ra`` to root ``rb``."""
    if len(a) != len(b) or len(a.bonds) != len(b.bonds):
        return False
    ba, bb = bond_table(a), bond_table(b)
    for perm in permutations(range(len(b))):
        if perm[ra] != rb:
            continue
        if any(atom_signature(a, i)[:2] + atom_signature(a, i)[3:] != atom_signature(b, perm[i])[:2]
               + atom_signature(b, perm[i])[3:] for i in range(len(a))):
            continue
        if all(bb.get((min(perm[x], perm[y]), max(perm[x], perm[y]))) == o for (x, y), o in ba.items()):
            return True
    return False


def scope_assignments(template: MoleculeGraph, target: MoleculeGraph) -> list[dict]:
    """Every clean way of reading substituents off ``target``.

    Each result maps a placeholder label to "H" or to (atoms, root): the
    connected leftover atoms reached from the placeholder's image. A reading
    is clean when leftovers cover the whole target, each leftover group only
    touches the core through its own junction bond, and repeated labels get
    rooted-isomorphic groups.
    """
    out = []
    for m in substructure_maps(template, target, wildcard=True):
        core = {t for p, t in enumerate(m) if not template.atoms[p].is_placeholder}
        claimed = set(core)
        reading: dict = {}
        clean = True
        for p, t in enumerate(m):
            atom = template.atoms[p]
            if not atom.is_placeholder:
                continue
            if isinstance(t, HydrogenMatch):
                group = "H"
            else:
                comp = {t}
                stack = [t]
                while stack:
                    u = stack.pop()
                    for v in target.neighbor_indices(u):
                        if v not in core and v not in comp:
                            comp.add(v)
                            stack.append(v)
                junction = {m[q] for q in template.neighbor_indices(p)}
                for u in comp:
                    for v in target.neighbor_indices(u):
                        if v in core and not (u == t and v in junction):
                            clean = False
                if comp & claimed:
                    clean = False
                claimed |= comp
                group = (tuple(sorted(comp)), t)
            prev = reading.get(atom.placeholder)
            if prev is not None and not same_group(target, prev, group):
                clean = False
            reading[atom.placeholder] = group
        if clean and len(claimed) == len(target):
            out.append(reading)
    return out


def same_group(target: MoleculeGraph, x, y) -> bool:
    if x == "H" or y == "H":
        return x == y
    ga = subgraph(target, list(x[0]))
    gb = subgraph(target, list(y[0]))
    return rooted_isomorphic(ga, list(x[0]).index(x[1]), gb, list(y[0]).index(y[1]))


def distinct_readings(target: MoleculeGraph, readings: list[dict]) -> list[dict]:
    """Readings up to isomorphism of each label's group."""
    kept: list[dict] = []
    for r in readings:
        if not any(r.keys() == k.keys() and all(same_group(target, r[l], k[l]) for l in r) for k in kept):
            kept.append(r)
    return kept
