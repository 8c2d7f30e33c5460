import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rxnfuse.docmodel import (
    IDT,
    MOL,
    BoundingBox,
    ConditionSet,
    CorefPair,
    Document,
    Figure,
    GrammarError,
    Identifier,
    MoleculeEntity,
    Reaction,
    SchemaError,
    build_registry,
    document_from_json,
    load_document,
    load_reactions,
    normalize_identifier,
    parse_coref_sequence,
    parse_detection_sequence,
    save_reactions,
    serialize_coref_sequence,
    serialize_detection_sequence,
    split_identifier,
)


def test_single_detection_group():
    out = parse_detection_sequence([10, 20, 50, 60, "Mol"])
    assert out == [MoleculeEntity(BoundingBox(10, 20, 50, 60))]


def test_empty_detection_sequence():
    assert parse_detection_sequence([]) == []


def test_truncated_group_offset():
    with pytest.raises(GrammarError) as info:
        parse_detection_sequence([10, 20, 50])
    assert info.value.offset == 3


@pytest.mark.parametrize("tokens,offset", [
    ([10, 20, 50, 60, 70], 4),
    ([10, 20, 1000, 60, MOL], 2),
    ([50, 20, 10, 60, MOL], 0),
    ([10, 70, 50, 60, MOL], 1),
    ([10, 20, 50, 60, MOL, 1, 2, 3, 4, IDT], 9),
    ([10, 20, 50, 60, MOL, 1, "x", 3, 4, MOL], 6),
])
def test_detection_violations(tokens, offset):
    with pytest.raises(GrammarError) as info:
        parse_detection_sequence(tokens)
    assert info.value.offset == offset


def test_coref_pair_with_identifier():
    pairs = parse_coref_sequence([10, 20, 50, 60, MOL, 55, 20, 70, 30, IDT])
    assert len(pairs) == 1
    assert pairs[0].identifier.bbox == BoundingBox(55, 20, 70, 30)


def test_coref_two_molecules_no_identifiers():
    pairs = parse_coref_sequence([10, 20, 50, 60, MOL, 100, 20, 150, 60, MOL])
    assert len(pairs) == 2
    assert all(p.identifier is None for p in pairs)


def test_dangling_identifier():
    with pytest.raises(GrammarError) as info:
        parse_coref_sequence([55, 20, 70, 30, IDT])
    assert info.value.offset == 4


def test_identifier_after_identifier_is_dangling():
    with pytest.raises(GrammarError) as info:
        parse_coref_sequence([1, 1, 2, 2, MOL, 3, 3, 4, 4, IDT, 5, 5, 6, 6, IDT])
    assert info.value.offset == 14


coords = st.tuples(st.integers(0, 999), st.integers(0, 999)).map(sorted)


@st.composite
def groups(draw, kind):
    xs, ys = draw(coords), draw(coords)
    return [xs[0], ys[0], xs[1], ys[1], kind]


@st.composite
def coref_tokens(draw):
    out = []
    for _ in range(draw(st.integers(0, 6))):
        out += draw(groups(MOL))
        if draw(st.booleans()):
            out += draw(groups(IDT))
    return out


@given(st.lists(groups(MOL), max_size=6).map(lambda gs: [t for g in gs for t in g]))
def test_detection_serialize_inverts_parse(tokens):
    assert serialize_detection_sequence(parse_detection_sequence(tokens)) == tokens


@given(coref_tokens())
def test_coref_serialize_inverts_parse(tokens):
    assert serialize_coref_sequence(parse_coref_sequence(tokens)) == tokens


@given(coref_tokens(), st.integers(0, 60))
def test_error_offset_points_into_offending_group(tokens, cut):
    pos = min(cut, len(tokens))
    bad = tokens[:pos] + ["junk"] + tokens[pos:]
    with pytest.raises(GrammarError) as info:
        parse_coref_sequence(bad)
    start = pos - pos % 5
    assert start <= info.value.offset <= start + 4 or info.value.offset == len(bad)


@pytest.mark.parametrize("raw,clean", [
    ("1a", "1a"), ("(1a)", "1a"), ("**3b**", "3b"), ("2c.", "2c"), (" [4] ", "4"), ("(**5a**),", "5a"),
])
def test_identifier_normalization(raw, clean):
    assert normalize_identifier(raw) == clean


def test_split_identifier():
    assert split_identifier("3a, R = Me, 85%") == ("3a", "R = Me, 85%")
    assert split_identifier("(2b)") == ("2b", "")


def _doc(pairs):
    return Document(figures=(Figure(tuple(pairs)),))


def _pair(label, smiles):
    return CorefPair(MoleculeEntity(None, smiles), Identifier(None, label) if label else None)


def test_registry_basic():
    reg, warnings = build_registry(_doc([_pair("1a", "CCO")]))
    assert reg == {"1a": "CCO"} and warnings == []


def test_registry_first_wins():
    reg, warnings = build_registry(_doc([_pair("1a", "CCO"), _pair("(1a)", "CCN")]))
    assert reg == {"1a": "CCO"}
    assert [w.code for w in warnings] == ["registry-conflict"]


def test_registry_skips_unlabelled():
    reg, _ = build_registry(_doc([_pair(None, "CCO")]))
    assert reg == {}


def test_registry_idempotent():
    doc = _doc([_pair("1a", "CCO"), _pair("2", "c1ccccc1"), _pair("1a", "CCN")])
    assert build_registry(doc) == build_registry(doc)


def test_minimal_document(tmp_path):
    path = tmp_path / "d.json"
    path.write_text('{"figures":[],"texts":[],"tables":[]}')
    assert load_document(path) == Document()


def test_unknown_fields_preserved():
    doc = document_from_json({
        "figures": [{"coref_pairs": [{"bbox": [1, 2, 3, 4], "smiles": "C", "label": "1", "score": 0.9}],
                     "schemes": [], "page": 3}],
        "texts": [], "tables": [], "source": "x.pdf",
    })
    assert doc.extra == {"source": "x.pdf"}
    assert doc.figures[0].extra == {"page": 3}
    assert doc.figures[0].coref_pairs[0].molecule.extra == {"score": 0.9}
    assert doc.figures[0].coref_pairs[0].label == "1"


@pytest.mark.parametrize("data,pointer", [
    ({"tables": [{"headers": ["a", "b"], "rows": [["1", "2"], ["3"]]}]}, "/tables/0/rows/1"),
    ({"figures": [{"schemes": [{"reactants": [], "products": []}]}]}, "/figures/0/schemes/0/products"),
    ({"texts": [{"product_ids": []}]}, "/texts/0/product_ids"),
    ({"texts": [{"product_ids": ["1"], "conditions": [{"role": "mood", "text": "x"}]}]}, "/texts/0/conditions/0/role"),
    ({"figures": [{"coref_pairs": [{"bbox": [5, 1, 2, 3]}]}]}, "/figures/0/coref_pairs/0/bbox"),
    ({"figures": "nope"}, "/figures"),
    ([], ""),
])
def test_schema_errors_carry_pointers(data, pointer):
    with pytest.raises(SchemaError) as info:
        document_from_json(data)
    assert info.value.pointer == pointer


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError) as info:
        load_document(path)
    assert info.value.pointer == ""


smiles_sets = st.frozensets(st.sampled_from(["CCO", "c1ccccc1", "CC(=O)C", "N", "O=C=O"]), min_size=1, max_size=3)
condition_sets = st.builds(
    ConditionSet,
    temperature=st.sampled_from([None, "25", "80"]),
    temperature_unit=st.sampled_from([None, "C"]),
    solvent=st.sampled_from([None, "THF", "toluene"]),
    reagents=st.lists(st.sampled_from(["K2CO3", "Et3N"]), max_size=2, unique=True).map(tuple),
    yield_percent=st.sampled_from([None, 87, 45.5]),
)


@given(st.lists(st.builds(Reaction, smiles_sets, smiles_sets,
                          st.lists(condition_sets, max_size=2).map(tuple)), max_size=4))
def test_reactions_round_trip(tmp_path_factory, reactions):
    path = tmp_path_factory.mktemp("r") / "out.json"
    save_reactions(path, reactions)
    assert load_reactions(path) == reactions
    json.loads(path.read_text())
