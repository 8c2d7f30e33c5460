"""Self-contained molecular graph core."""
from .aromatic import kekulize, normalize_aromaticity, perceive_aromaticity, sssr
from .canon import canonical_ranks, canonical_smiles
from .core import (
    HYDROGEN,
    Atom,
    AtomMapping,
    Bond,
    BondOrder,
    Fragment,
    HydrogenMarker,
    HydrogenMatch,
    LabelNotFoundError,
    MoleculeError,
    MoleculeGraph,
    SmilesError,
    ValenceError,
)
from .edit import attach_fragment, fragment_from_smiles, induced_subgraph, substitute_all
from .match import MatchOptions, match_substructure
from .smiles import parse_smiles
from .tautomer import (
    TautomerComparison,
    compare_tautomers,
    enumerate_tautomers,
    tautomer_equivalent,
)


def write_smiles(graph: MoleculeGraph) -> str:
    """Canonical SMILES; placeholders are written as ``[label]``."""
    return canonical_smiles(graph)


def canonical_key(graph: MoleculeGraph, ignore_stereo: bool = False) -> str:
    """String equal for two graphs iff they are isomorphic (stereo included
    unless ``ignore_stereo``)."""
    return canonical_smiles(graph, ignore_stereo=ignore_stereo)


def fragment_key(sub) -> str:
    """Canonical key of a substituent, drawn with a ``[*]``-style attachment mark."""
    if isinstance(sub, HydrogenMarker):
        return "[H]"
    marked = attach_fragment(
        MoleculeGraph([Atom.make_placeholder("R"), Atom.make_placeholder("#")], [Bond(0, 1)]),
        "#",
        sub,
    )
    return canonical_key(marked)


__all__ = [
    "HYDROGEN",
    "Atom",
    "AtomMapping",
    "Bond",
    "BondOrder",
    "Fragment",
    "HydrogenMarker",
    "HydrogenMatch",
    "LabelNotFoundError",
    "MatchOptions",
    "MoleculeError",
    "MoleculeGraph",
    "SmilesError",
    "TautomerComparison",
    "ValenceError",
    "attach_fragment",
    "canonical_key",
    "canonical_ranks",
    "compare_tautomers",
    "enumerate_tautomers",
    "fragment_from_smiles",
    "fragment_key",
    "induced_subgraph",
    "kekulize",
    "match_substructure",
    "normalize_aromaticity",
    "parse_smiles",
    "perceive_aromaticity",
    "sssr",
    "substitute_all",
    "tautomer_equivalent",
    "write_smiles",
]
