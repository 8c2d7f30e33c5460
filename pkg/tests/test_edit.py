import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rxnfuse.molgraph import (
    HYDROGEN,
    LabelNotFoundError,
    ValenceError,
    attach_fragment,
    canonical_key,
    fragment_from_smiles,
    parse_smiles,
    substitute_all,
    write_smiles,
)


def key(s):
    return canonical_key(parse_smiles(s))


def same(graph, smiles):
    # reparse so aromaticity and hydrogens are normalized the same way
    return canonical_key(parse_smiles(write_smiles(graph))) == key(smiles)


@pytest.mark.parametrize("template,frag,expected", [
    ("[R1]c1ccccc1", "O", "Oc1ccccc1"),
    ("[R1]c1ccccc1", "[*]C", "Cc1ccccc1"),
    ("[R1]c1ccccc1", "[*]OC", "COc1ccccc1"),
    ("[R1]C(=O)[R1]", "[*]C", "CC(=O)C"),
    ("[R1]c1ccc(C=O)cc1", "[*]c1ccccc1", "O=Cc1ccc(-c2ccccc2)cc1"),
    ("[R1]N", "[*]C(=O)C", "CC(=O)N"),
    ("[R]CC", "[*]Cl", "ClCC"),
])
def test_attach_examples(template, frag, expected):
    assert same(attach_fragment(parse_smiles(template), template[1:template.index("]")],
                                fragment_from_smiles(frag)), expected)


def test_hydrogen_gives_parent():
    assert same(attach_fragment(parse_smiles("[R1]c1ccccc1"), "R1", HYDROGEN), "c1ccccc1")
    assert same(attach_fragment(parse_smiles("[R1]C(=O)C"), "R1", HYDROGEN), "CC=O")


def test_acetone_from_two_sites():
    g = attach_fragment(parse_smiles("[R1]C(=O)[R1]"), "R1", fragment_from_smiles("C"))
    assert same(g, "CC(=O)C")
    assert not g.has_placeholders


def test_substitute_all_fills_each_label():
    g = substitute_all(parse_smiles("[R1]C(=O)[R2]"),
                       {"R1": fragment_from_smiles("C"), "R2": fragment_from_smiles("[*]CC")})
    assert same(g, "CCC(C)=O")


def test_stereo_on_template_survives():
    g = attach_fragment(parse_smiles("N[C@@H]([R1])C(=O)O"), "R1", fragment_from_smiles("C"))
    assert same(g, "N[C@@H](C)C(=O)O")
    assert not same(g, "N[C@H](C)C(=O)O")


def test_missing_label():
    with pytest.raises(LabelNotFoundError):
        attach_fragment(parse_smiles("[R1]C"), "R2", HYDROGEN)


def test_fragment_without_free_valence():
    with pytest.raises((ValenceError, ValueError)):
        attach_fragment(parse_smiles("[R1]C"), "R1", fragment_from_smiles("[*]C(C)(C)(C)C"))


def test_fragment_needs_one_mark():
    with pytest.raises(ValueError):
        fragment_from_smiles("[*]C[*]")


FRAGMENTS = ["C", "[*]CC", "[*]OC", "[*]c1ccccc1", "[*]Cl", "[*]C(F)(F)F", "[*]N", "[*]C#N", "[*]C(=O)OC"]
TEMPLATES = ["[R1]c1ccccc1", "[R1]C(=O)[R2]", "[R1]CC[R1]", "[R1]N1CCCC1", "O=C([R1])O"]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TEMPLATES), st.sampled_from(FRAGMENTS))
def test_heavy_atom_count_adds_up(template, frag):
    t = parse_smiles(template)
    f = fragment_from_smiles(frag)
    sites = len(t.placeholder_indices("R1"))
    out = attach_fragment(t, "R1", f)
    assert out.heavy_atom_count() == t.heavy_atom_count() + sites * f.graph.heavy_atom_count()
    assert len(out.placeholder_indices("R1")) == 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TEMPLATES))
def test_hydrogen_removes_sites(template):
    t = parse_smiles(template)
    out = attach_fragment(t, "R1", HYDROGEN)
    assert len(out) == len(t) - len(t.placeholder_indices("R1"))
