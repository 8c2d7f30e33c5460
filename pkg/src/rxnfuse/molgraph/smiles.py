"""SMILES reading and rank-ordered writing.

Supported dialect: organic-subset and bracket atoms (isotope, H count,
charge, atom class), ring closures (digits and %nn), branches, tetrahedral
@/@@ and directional / \\ bonds. Bracket atoms ``[R]``, ``[R1]``, ``[R1']``,
``[X]``, ``[Ar]``, ``[*]``, ``[*:n]`` and ``[n*]`` become placeholders.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .aromatic import KekulizeError, normalize_aromaticity
from .core import (
    ATOMIC_NUMBER,
    Atom,
    Bond,
    BondOrder,
    MoleculeError,
    MoleculeGraph,
    SmilesError,
    derived_hydrogens,
    flip_tetrahedral,
    permutation_parity,
    stereo_reference,
)

ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}
BRACKET_AROMATIC = {"b", "c", "n", "o", "p", "s", "se", "as", "te"}

_BOND_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
               ":": BondOrder.AROMATIC, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE}

_PLACEHOLDER_RE = re.compile(r"^(?:(?P<iso>\d+)\*|\*(?::(?P<map>\d+))?|(?P<label>(?:R\d*|X\d*|Ar\d*)'*))$")
_BRACKET_RE = re.compile(
    r"^(?P<iso>\d+)?(?P<sym>[A-Z][a-z]?|se|as|te|[bcnops])"
    r"(?P<chiral>@@?)?(?P<h>H\d*)?(?P<charge>[+-]+\d*)?(?::(?P<cls>\d+))?$"
)


def _placeholder_label(content: str) -> Optional[str]:
    m = _PLACEHOLDER_RE.match(content)
    if not m:
        return None
    if m.group("iso"):
        return f"R{int(m.group('iso'))}"
    if m.group("map"):
        return f"R{int(m.group('map'))}"
    if m.group("label"):
        return m.group("label")
    return "R"


def _parse_charge(text: str) -> int:
    sign = 1 if text[0] == "+" else -1
    rest = text.lstrip("+-")
    if rest:
        return sign * int(rest)
    return sign * len(text)


@dataclass
class _BondDraft:
    order: Optional[BondOrder]
    direction: Optional[str] = None
    left: int = -1


@dataclass
class _State:
    atoms: list[dict] = field(default_factory=list)
    offsets: list[int] = field(default_factory=list)
    bonds: dict[tuple[int, int], _BondDraft] = field(default_factory=dict)
    order: list[list] = field(default_factory=list)
    bracket: list[bool] = field(default_factory=list)


def _read_atom(text: str, pos: int) -> tuple[dict, bool, int]:
    """Return (atom fields, is_bracket, next position)."""
    if text[pos] == "[":
        end = text.find("]", pos)
        if end < 0:
            raise SmilesError("unterminated bracket atom", pos)
        content = text[pos + 1:end]
        label = _placeholder_label(content)
        if label is not None:
            return {"element": "*", "placeholder": label, "explicit_h": 0}, True, end + 1
        m = _BRACKET_RE.match(content)
        if not m:
            raise SmilesError(f"malformed bracket atom [{content}]", pos)
        sym = m.group("sym")
        aromatic = sym in BRACKET_AROMATIC and sym[0].islower()
        element = sym.capitalize() if aromatic else sym
        if element not in ATOMIC_NUMBER:
            raise SmilesError(f"unknown element {sym!r}", pos)
        h = m.group("h")
        fields = {
            "element": element,
            "aromatic": aromatic,
            "isotope": int(m.group("iso")) if m.group("iso") else None,
            "explicit_h": (int(h[1:]) if len(h) > 1 else 1) if h else 0,
            "charge": _parse_charge(m.group("charge")) if m.group("charge") else 0,
            "stereo": m.group("chiral"),
        }
        return fields, True, end + 1
    two = text[pos:pos + 2]
    if two in ("Cl", "Br"):
        return {"element": two}, False, pos + 2
    ch = text[pos]
    if ch in ORGANIC:
        return {"element": ch}, False, pos + 1
    if ch in AROMATIC_ORGANIC:
        return {"element": ch.upper(), "aromatic": True}, False, pos + 1
    if ch == "*":
        return {"element": "*", "placeholder": "R", "explicit_h": 0}, False, pos + 1
    raise SmilesError(f"unexpected character {ch!r}", pos)


def parse_smiles(text: str) -> MoleculeGraph:
    """Parse a SMILES string into a graph with perceived aromaticity."""
    if not text or not text.strip():
        raise SmilesError("empty SMILES", 0)
    text = text.strip()
    st = _State()
    prev: Optional[int] = None
    pending: Optional[str] = None
    pending_at = 0
    branches: list[tuple[int, int]] = []
    rings: dict[int, tuple[int, Optional[str], int, int]] = {}
    pos = 0
    n = len(text)

    def add_bond(a: int, b: int, symbol: Optional[str], left: int, at: int) -> None:
        key = (a, b) if a < b else (b, a)
        if key in st.bonds or a == b:
            raise SmilesError("duplicate bond or self-loop", at)
        order = _BOND_CHARS[symbol] if symbol else None
        direction = symbol if symbol in ("/", "\\") else None
        st.bonds[key] = _BondDraft(order, direction, left)

    while pos < n:
        ch = text[pos]
        if ch == "(":
            if prev is None:
                raise SmilesError("branch without preceding atom", pos)
            branches.append((prev, pos))
            pos += 1
        elif ch == ")":
            if not branches:
                raise SmilesError("unbalanced ')'", pos)
            if pending:
                raise SmilesError("bond symbol before ')'", pos)
            prev = branches.pop()[0]
            pos += 1
        elif ch in _BOND_CHARS:
            if pending is not None:
                raise SmilesError("two consecutive bond symbols", pos)
            pending, pending_at = ch, pos
            pos += 1
        elif ch == "$":
            raise SmilesError("quadruple bonds are not supported", pos)
        elif ch == ".":
            if pending is not None or prev is None:
                raise SmilesError("misplaced '.'", pos)
            prev = None
            pos += 1
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesError("ring closure without atom", pos)
            if ch == "%":
                digits = text[pos + 1:pos + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesError("malformed %nn ring closure", pos)
                num, width = int(digits), 3
            else:
                num, width = int(ch), 1
            if num in rings:
                opener, sym, slot, _ = rings.pop(num)
                if sym and pending and sym != pending:
                    raise SmilesError("conflicting ring-closure bond symbols", pos)
                symbol = pending or sym
                left = prev if pending else opener
                add_bond(opener, prev, symbol, left, pos)
                st.order[opener][slot] = prev
                st.order[prev].append(opener)
            else:
                rings[num] = (prev, pending, len(st.order[prev]), pos)
                st.order[prev].append(None)
            pending = None
            pos += width
        else:
            start = pos
            fields, is_bracket, pos = _read_atom(text, pos)
            idx = len(st.atoms)
            st.atoms.append(fields)
            st.offsets.append(start)
            st.bracket.append(is_bracket)
            st.order.append([])
            if prev is not None:
                add_bond(prev, idx, pending, prev, pending_at)
                st.order[prev].append(idx)
                st.order[idx].append(prev)
            elif pending is not None:
                raise SmilesError("bond symbol without preceding atom", pending_at)
            if fields.get("stereo") and fields.get("explicit_h"):
                st.order[idx].extend(["H"] * fields["explicit_h"])
            pending = None
            prev = idx

    if pending is not None:
        raise SmilesError("dangling bond symbol", pending_at)
    if branches:
        raise SmilesError("unbalanced '('", branches[-1][1])
    if rings:
        raise SmilesError("unclosed ring", min(r[3] for r in rings.values()))
    return _build(st)


def _build(st: _State) -> MoleculeGraph:
    atoms = []
    for fields in st.atoms:
        stereo = fields.pop("stereo", None)
        atoms.append(Atom(**fields))
        fields["stereo"] = stereo
    bonds = []
    for (a, b), draft in st.bonds.items():
        order = draft.order
        if order is None:
            order = BondOrder.AROMATIC if atoms[a].aromatic and atoms[b].aromatic else BondOrder.SINGLE
        bonds.append(Bond(a, b, order))
    try:
        graph = MoleculeGraph(atoms, bonds).with_pinned_hydrogens()
    except MoleculeError as exc:
        raise SmilesError(str(exc), 0) from exc

    # tetrahedral tags: SMILES neighbour order -> index reference frame
    atoms = list(graph.atoms)
    for i, fields in enumerate(st.atoms):
        tag = fields.get("stereo")
        if not tag:
            continue
        written = [-1 if x == "H" else x for x in st.order[i]]
        ref = stereo_reference(graph, i)
        if sorted(written) != sorted(ref) or ref.count(-1) > 1 or len(ref) < 3:
            continue
        if permutation_parity(written, sorted(written)):
            tag = flip_tetrahedral(tag)
        atoms[i] = replace(atoms[i], stereo=tag)

    # double-bond tags from directional single bonds
    bonds = list(graph.bonds)
    for k, bond in enumerate(bonds):
        if bond.order != BondOrder.DOUBLE:
            continue
        sides = []
        for end, partner in ((bond.a, bond.b), (bond.b, bond.a)):
            side = None
            for j in graph.neighbor_indices(end):
                if j == partner:
                    continue
                draft = st.bonds[(min(end, j), max(end, j))]
                if draft.direction:
                    side = _side(end, j, draft)
                    sub = j
                    break
            if side is None:
                break
            ref = min(j for j in graph.neighbor_indices(end) if j != partner)
            sides.append(side if sub == ref else -side)
        if len(sides) == 2:
            bonds[k] = replace(bond, cis_trans="cis" if sides[0] == sides[1] else "trans")

    graph = MoleculeGraph(atoms, bonds)
    try:
        return normalize_aromaticity(graph)
    except KekulizeError as exc:
        raise SmilesError(str(exc), st.offsets[exc.atom]) from exc


def _side(end: int, sub: int, draft: _BondDraft) -> int:
    """+1 if ``sub`` sits above ``end`` in the drawing implied by / and \\."""
    up = 1 if draft.direction == "/" else -1
    return -up if draft.left == sub else up


# -- writing ---------------------------------------------------------------


def _atom_token(graph: MoleculeGraph, i: int, stereo: Optional[str]) -> str:
    atom = graph.atoms[i]
    if atom.is_placeholder:
        return f"[{atom.placeholder}]"
    sym = atom.element.lower() if atom.aromatic else atom.element
    h = graph.hydrogen_count(i)
    if (
        atom.element in ORGANIC
        and atom.isotope is None
        and atom.charge == 0
        and stereo is None
        and derived_hydrogens(atom, graph.bond_valence(i)) == h
    ):
        return sym
    out = "["
    if atom.isotope is not None:
        out += str(atom.isotope)
    out += sym
    if stereo:
        out += stereo
    if h:
        out += "H" if h == 1 else f"H{h}"
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        out += sign if abs(atom.charge) == 1 else f"{sign}{abs(atom.charge)}"
    return out + "]"


def _bond_token(graph: MoleculeGraph, bond: Bond) -> str:
    if bond.order == BondOrder.DOUBLE:
        return "="
    if bond.order == BondOrder.TRIPLE:
        return "#"
    if bond.order == BondOrder.SINGLE and graph.atoms[bond.a].aromatic and graph.atoms[bond.b].aromatic:
        return "-"
    return ""


def write_ranked(graph: MoleculeGraph, ranks: Sequence[int]) -> str:
    """Serialize ``graph`` with a depth-first walk ordered by ``ranks``.

    Each component starts at its lowest-ranked atom and branches are taken in
    ascending rank order. Component strings are sorted before joining.
    """
    n = len(graph)
    visited = [False] * n
    parts = []
    for comp in graph.components():
        start = min(comp, key=lambda i: ranks[i])
        parts.append(_write_component(graph, ranks, start, visited))
    return ".".join(sorted(parts))


def _write_component(graph: MoleculeGraph, ranks: Sequence[int], start: int, visited: list[bool]) -> str:
    parent: dict[int, int] = {start: -1}
    children: dict[int, list[int]] = {}
    closures_here: dict[int, list[int]] = {}  # closer -> openers
    openings: dict[int, list[int]] = {}  # opener -> closers
    visit_order: list[int] = []
    used_edges: set[tuple[int, int]] = set()

    def visit(u: int) -> None:
        visited[u] = True
        visit_order.append(u)
        children[u] = []
        nbrs = sorted(graph.neighbor_indices(u), key=lambda j: ranks[j])
        for v in nbrs:
            e = (min(u, v), max(u, v))
            if visited[v] and v != parent[u] and e not in used_edges:
                used_edges.add(e)
                closures_here.setdefault(u, []).append(v)
                openings.setdefault(v, []).append(u)
        for v in nbrs:
            e = (min(u, v), max(u, v))
            if not visited[v]:
                used_edges.add(e)
                parent[v] = u
                children[u].append(v)
                visit(v)

    visit(start)
    position = {a: k for k, a in enumerate(visit_order)}

    directions = _assign_directions(graph, position, parent)

    digits_in_use: dict[tuple[int, int], int] = {}
    free_digits: list[int] = []
    next_digit = [1]

    def take_digit() -> int:
        if free_digits:
            free_digits.sort()
            return free_digits.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        return d

    def digit_text(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    out: list[str] = []

    def emit(u: int) -> None:
        closing = sorted(closures_here.get(u, []), key=lambda v: digits_in_use[(v, u)])
        opening = sorted(openings.get(u, []), key=lambda v: (position[v]))
        ring_partners = closing + opening
        atom = graph.atoms[u]
        stereo = None
        if atom.stereo:
            written = []
            if parent[u] != -1:
                written.append(parent[u])
            written += [-1] * graph.hydrogen_count(u)
            written += ring_partners + children[u]
            ref = stereo_reference(graph, u)
            stereo = atom.stereo
            if permutation_parity(written, ref):
                stereo = flip_tetrahedral(stereo)
        out.append(_atom_token(graph, u, stereo))
        released = []
        for v in closing:
            d = digits_in_use.pop((v, u))
            out.append(digit_text(d))
            released.append(d)
        for v in opening:
            d = take_digit()
            digits_in_use[(u, v)] = d
            bond = graph.bond_between(u, v)
            out.append(directions.get((min(u, v), max(u, v)), _bond_token(graph, bond)) + digit_text(d))
        free_digits.extend(released)
        kids = children[u]
        for k, v in enumerate(kids):
            bond = graph.bond_between(u, v)
            token = directions.get((min(u, v), max(u, v)), _bond_token(graph, bond))
            if k < len(kids) - 1:
                out.append("(" + token)
                emit(v)
                out.append(")")
            else:
                out.append(token)
                emit(v)

    emit(start)
    return "".join(out)


def _assign_directions(graph: MoleculeGraph, position: dict[int, int], parent: dict[int, int]) -> dict:
    """Pick / and \\ characters encoding every double-bond tag."""
    chars: dict[tuple[int, int], str] = {}
    stereo_bonds = [b for b in graph.bonds if b.cis_trans and b.order == BondOrder.DOUBLE]
    stereo_bonds.sort(key=lambda b: min(position[b.a], position[b.b]))

    def side_of(end: int, sub: int, ch: str) -> int:
        up = 1 if ch == "/" else -1
        return -up if position[sub] < position[end] else up

    def char_for(end: int, sub: int, side: int) -> str:
        # inverse of side_of
        up = -side if position[sub] < position[end] else side
        return "/" if up == 1 else "\\"

    for bond in stereo_bonds:
        a, b = (bond.a, bond.b) if position[bond.a] < position[bond.b] else (bond.b, bond.a)
        subs_a = sorted((j for j in graph.neighbor_indices(a) if j != b), key=lambda j: position[j])
        subs_b = sorted((j for j in graph.neighbor_indices(b) if j != a), key=lambda j: position[j])
        if not subs_a or not subs_b:
            continue
        ref_a = min(j for j in graph.neighbor_indices(a) if j != b)
        ref_b = min(j for j in graph.neighbor_indices(b) if j != a)

        def pick(subs, end):
            for j in subs:
                if (min(end, j), max(end, j)) in chars:
                    return j
            return subs[0]

        x = pick(subs_a, a)
        kx = (min(a, x), max(a, x))
        if kx not in chars:
            chars[kx] = "/"
        sx = side_of(a, x, chars[kx])
        same = bond.cis_trans == "cis"
        if x != ref_a:
            same = not same
        for y in sorted(subs_b, key=lambda j: (min(b, j), max(b, j)) not in chars):
            want = sx if same == (y == ref_b) else -sx
            ky = (min(b, y), max(b, y))
            if ky in chars:
                if side_of(b, y, chars[ky]) == want:
                    break
                continue
            chars[ky] = char_for(b, y, want)
            break
    return chars
