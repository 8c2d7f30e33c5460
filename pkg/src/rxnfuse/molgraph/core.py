"""Atoms, bonds and the immutable molecular graph.

Stereo descriptors are stored relative to atom index order so that a graph
carries no memory of the SMILES it came from:

* a tetrahedral ``@``/``@@`` tag is read looking from the lowest-index
  neighbour (an implicit hydrogen counts as index -1, so it comes first)
  towards the atom, with the remaining neighbours in ascending index order;
* a double bond's ``cis``/``trans`` tag relates the lowest-index substituent
  of each endpoint.

Any operation that renumbers atoms or changes neighbourhoods goes through
:func:`remap_stereo` to keep these tags meaningful.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence


class MoleculeError(ValueError):
    """Base class for structural errors."""


class SmilesError(MoleculeError):
    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class LabelNotFoundError(MoleculeError):
    pass


class ValenceError(MoleculeError):
    pass


PERIODIC_TABLE = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce "
    "Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn "
    "Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl "
    "Mc Lv Ts Og"
).split()
ATOMIC_NUMBER = {sym: i + 1 for i, sym in enumerate(PERIODIC_TABLE)}

PLACEHOLDER_ELEMENT = "*"

# Allowed valences by atomic number. Charged atoms use the row of the
# isoelectronic neutral element (N+ behaves like C, O- like F, ...).
_VALENCES = {
    2: (0,), 5: (3,), 6: (4,), 7: (3,), 8: (2,), 9: (1,), 10: (0,),
    13: (3,), 14: (4,), 15: (3, 5), 16: (2, 4, 6), 17: (1,), 18: (0,),
    31: (3,), 32: (4,), 33: (3, 5), 34: (2, 4, 6), 35: (1,), 36: (0,),
    51: (3, 5), 52: (2, 4, 6), 53: (1,), 54: (0,),
}


def allowed_valences(element: str, charge: int = 0) -> Optional[tuple[int, ...]]:
    """Standard valences for an element/charge, or None if unconstrained."""
    z = ATOMIC_NUMBER.get(element)
    if z is None:
        return None
    return _VALENCES.get(z - charge)


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        # aromatic bonds count as single here; the pi contribution is
        # handled by the aromatic hydrogen rule
        return 1 if self is BondOrder.AROMATIC else int(self)


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    isotope: Optional[int] = None
    explicit_h: Optional[int] = None
    aromatic: bool = False
    placeholder: Optional[str] = None
    stereo: Optional[str] = None

    def __post_init__(self):
        if self.placeholder is not None:
            if not self.placeholder:
                raise MoleculeError("placeholder label must be nonempty")
            if self.element != PLACEHOLDER_ELEMENT:
                raise MoleculeError("placeholder atoms carry no element")
        elif self.element not in ATOMIC_NUMBER:
            raise MoleculeError(f"unknown element {self.element!r}")
        if self.stereo not in (None, "@", "@@"):
            raise MoleculeError(f"bad tetrahedral tag {self.stereo!r}")

    @classmethod
    def make_placeholder(cls, label: str) -> "Atom":
        return cls(PLACEHOLDER_ELEMENT, placeholder=label, explicit_h=0)

    @property
    def is_placeholder(self) -> bool:
        return self.placeholder is not None

    @property
    def atomic_number(self) -> int:
        return ATOMIC_NUMBER.get(self.element, 0)


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE
    cis_trans: Optional[str] = None

    def __post_init__(self):
        if self.a == self.b:
            raise MoleculeError("bond endpoints must differ")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        object.__setattr__(self, "order", BondOrder(self.order))
        if self.cis_trans not in (None, "cis", "trans"):
            raise MoleculeError(f"bad double-bond tag {self.cis_trans!r}")

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


@dataclass(frozen=True)
class MoleculeGraph:
    atoms: tuple[Atom, ...] = ()
    bonds: tuple[Bond, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        n = len(self.atoms)
        seen = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise MoleculeError(f"bond {bond.a}-{bond.b} references a missing atom")
            if (bond.a, bond.b) in seen:
                raise MoleculeError(f"duplicate bond {bond.a}-{bond.b}")
            seen.add((bond.a, bond.b))

    def __len__(self) -> int:
        return len(self.atoms)

    # -- adjacency ---------------------------------------------------------

    @cached_property
    def _adjacency(self) -> tuple[tuple[tuple[int, Bond], ...], ...]:
        adj: list[list[tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond))
            adj[bond.b].append((bond.a, bond))
        return tuple(tuple(sorted(x, key=lambda t: t[0])) for x in adj)

    @cached_property
    def _bond_index(self) -> dict[tuple[int, int], Bond]:
        return {(b.a, b.b): b for b in self.bonds}

    def neighbors(self, i: int) -> tuple[tuple[int, Bond], ...]:
        """(neighbour index, bond) pairs in ascending neighbour order."""
        return self._adjacency[i]

    def neighbor_indices(self, i: int) -> list[int]:
        return [j for j, _ in self._adjacency[i]]

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        return self._bond_index.get((i, j) if i < j else (j, i))

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    # -- hydrogens and valence --------------------------------------------

    def bond_valence(self, i: int) -> int:
        return sum(bond.order.valence for _, bond in self._adjacency[i])

    def hydrogen_count(self, i: int) -> int:
        atom = self.atoms[i]
        if atom.explicit_h is not None:
            return atom.explicit_h
        if atom.is_placeholder:
            return 0
        return derived_hydrogens(atom, self.bond_valence(i))

    def free_valence(self, i: int) -> Optional[int]:
        """Unused valence beyond bonds and hydrogens (None if unconstrained)."""
        atom = self.atoms[i]
        if atom.is_placeholder:
            return None
        vals = allowed_valences(atom.element, atom.charge)
        if vals is None:
            return None
        used = self.bond_valence(i) + self.hydrogen_count(i)
        if atom.aromatic:
            used += 1
        fitting = [v for v in vals if v >= used]
        return (fitting[0] if fitting else vals[-1]) - used

    @cached_property
    def total_hydrogens(self) -> tuple[int, ...]:
        return tuple(self.hydrogen_count(i) for i in range(len(self.atoms)))

    def with_pinned_hydrogens(self) -> "MoleculeGraph":
        """Copy where every atom states its hydrogen count explicitly."""
        atoms = tuple(
            a if a.explicit_h is not None else replace(a, explicit_h=self.hydrogen_count(i))
            for i, a in enumerate(self.atoms)
        )
        return MoleculeGraph(atoms, self.bonds)

    # -- queries -----------------------------------------------------------

    def placeholder_indices(self, label: Optional[str] = None) -> list[int]:
        return [
            i for i, a in enumerate(self.atoms)
            if a.is_placeholder and (label is None or a.placeholder == label)
        ]

    def placeholder_labels(self) -> set[str]:
        return {a.placeholder for a in self.atoms if a.is_placeholder}

    @property
    def has_placeholders(self) -> bool:
        return any(a.is_placeholder for a in self.atoms)

    @property
    def has_stereo(self) -> bool:
        return any(a.stereo for a in self.atoms) or any(b.cis_trans for b in self.bonds)

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if not a.is_placeholder)

    def formula(self) -> Counter:
        """Element counts including hydrogens, plus net charge under key 'charge'."""
        counts: Counter = Counter()
        for i, atom in enumerate(self.atoms):
            key = atom.placeholder and f"[{atom.placeholder}]" or atom.element
            counts[key] += 1
            counts["H"] += self.hydrogen_count(i)
        counts["charge"] = sum(a.charge for a in self.atoms)
        return +counts if counts["charge"] == 0 else counts

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in self._adjacency[i]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            comps.append(sorted(comp))
        return comps

    # -- derived copies ----------------------------------------------------

    def without_stereo(self) -> "MoleculeGraph":
        if not self.has_stereo:
            return self
        atoms = tuple(replace(a, stereo=None) if a.stereo else a for a in self.atoms)
        bonds = tuple(replace(b, cis_trans=None) if b.cis_trans else b for b in self.bonds)
        return MoleculeGraph(atoms, bonds)

    def permute(self, order: Sequence[int]) -> "MoleculeGraph":
        """Renumber atoms so that new atom ``k`` is old atom ``order[k]``."""
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        old_to_new = {old: new for new, old in enumerate(order)}
        atoms = [self.atoms[old] for old in order]
        bonds = [Bond(old_to_new[b.a], old_to_new[b.b], b.order, b.cis_trans) for b in self.bonds]
        return remap_stereo(self, atoms, bonds, old_to_new)


def derived_hydrogens(atom: Atom, bond_valence: int) -> int:
    """Implicit hydrogens by the standard-valence rule."""
    vals = allowed_valences(atom.element, atom.charge)
    if vals is None:
        return 0
    if atom.aromatic:
        # one valence goes to the ring pi system; use the lowest valence
        return max(0, vals[0] - bond_valence - 1)
    for v in vals:
        if v >= bond_valence:
            return v - bond_valence
    return 0


def permutation_parity(seq: Sequence[int], target: Sequence[int]) -> int:
    """0 if ``seq`` is an even permutation of ``target``, else 1."""
    pos = {v: k for k, v in enumerate(target)}
    perm = [pos[v] for v in seq]
    parity = 0
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def flip_tetrahedral(tag: str) -> str:
    return "@@" if tag == "@" else "@"


def flip_double(tag: str) -> str:
    return "trans" if tag == "cis" else "cis"


def stereo_reference(graph: MoleculeGraph, i: int) -> list[int]:
    """Reference neighbour order of atom ``i``: implicit H (-1) then ascending."""
    order = [-1] * graph.hydrogen_count(i)
    return order + graph.neighbor_indices(i)


def double_bond_substituent(graph: MoleculeGraph, end: int, partner: int) -> Optional[int]:
    subs = [j for j in graph.neighbor_indices(end) if j != partner]
    return subs[0] if subs else None


def remap_stereo(
    old: MoleculeGraph,
    atoms: Iterable[Atom],
    bonds: Iterable[Bond],
    old_to_new: Mapping[int, int],
) -> MoleculeGraph:
    """Build a graph from edited atoms/bonds, re-referencing stereo tags.

    ``old_to_new`` maps surviving old atom indices to new ones; an old
    neighbour that turned into an implicit hydrogen maps to -1, and one that
    vanished is simply absent. Tags whose frame cannot be recovered are
    dropped.
    """
    atoms = list(atoms)
    bonds = list(bonds)
    draft = MoleculeGraph(
        [replace(a, stereo=None) for a in atoms],
        [replace(b, cis_trans=None) for b in bonds],
    )
    new_to_old = {n: o for o, n in old_to_new.items() if n >= 0}

    for new_i, atom in enumerate(atoms):
        if not atom.stereo:
            continue
        old_i = new_to_old.get(new_i)
        if old_i is None or not old.atoms[old_i].stereo:
            atoms[new_i] = replace(atom, stereo=None)
            continue
        mapped = [old_to_new.get(x, -2) if x >= 0 else -1 for x in stereo_reference(old, old_i)]
        ref = stereo_reference(draft, new_i)
        if -2 in mapped or sorted(mapped) != sorted(ref) or ref.count(-1) > 1 or len(ref) < 3:
            atoms[new_i] = replace(atom, stereo=None)
            continue
        tag = old.atoms[old_i].stereo
        if permutation_parity(mapped, sorted(mapped)):
            tag = flip_tetrahedral(tag)
        atoms[new_i] = replace(atom, stereo=tag)

    for k, bond in enumerate(bonds):
        if not bond.cis_trans:
            continue
        old_a, old_b = new_to_old.get(bond.a), new_to_old.get(bond.b)
        old_bond = old.bond_between(old_a, old_b) if old_a is not None and old_b is not None else None
        if old_bond is None or not old_bond.cis_trans or bond.order != BondOrder.DOUBLE:
            bonds[k] = replace(bond, cis_trans=None)
            continue
        tag = old_bond.cis_trans
        ok = True
        for new_end, new_partner in ((bond.a, bond.b), (bond.b, bond.a)):
            old_end = new_to_old[new_end]
            old_ref = double_bond_substituent(old, old_end, new_to_old[new_partner])
            new_ref = double_bond_substituent(draft, new_end, new_partner)
            if old_ref is None or new_ref is None:
                ok = False
                break
            mapped = old_to_new.get(old_ref, -2)
            if mapped != new_ref:
                subs = [j for j in draft.neighbor_indices(new_end) if j != new_partner]
                if mapped in subs or (mapped in (-1, -2) and len(subs) == 1):
                    tag = flip_double(tag)
                else:
                    ok = False
                    break
        bonds[k] = replace(bond, cis_trans=tag if ok else None)

    return MoleculeGraph(atoms, bonds)


@dataclass(frozen=True)
class Fragment:
    """A substituent graph with one attachment atom."""

    graph: MoleculeGraph
    attachment: int = 0

    def __post_init__(self):
        if not 0 <= self.attachment < len(self.graph):
            raise MoleculeError("fragment attachment index out of range")
        free = self.graph.free_valence(self.attachment)
        if free is not None and free < 1 and self.graph.hydrogen_count(self.attachment) < 1:
            raise ValenceError("fragment attachment atom has no free valence")


class HydrogenMarker:
    """The R = H substituent."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "HYDROGEN"

    def __reduce__(self):
        return (HydrogenMarker, ())


HYDROGEN = HydrogenMarker()


@dataclass(frozen=True)
class HydrogenMatch:
    """A pattern placeholder matched onto an implicit H of ``neighbor``."""

    neighbor: int


@dataclass(frozen=True)
class AtomMapping:
    """Injective map from pattern atoms (by position) to target atoms."""

    targets: tuple = field(default=())

    @property
    def pairs(self) -> dict[int, object]:
        return dict(enumerate(self.targets))

    def sort_key(self) -> tuple:
        return tuple((1, t.neighbor) if isinstance(t, HydrogenMatch) else (0, t) for t in self.targets)

    def hydrogen_matches(self) -> list[int]:
        return [p for p, t in enumerate(self.targets) if isinstance(t, HydrogenMatch)]
