"""Exact-match precision/recall/F1 and soft-match accuracy for reaction lists."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .docmodel import Reaction
from .molgraph import MoleculeError, canonical_key, enumerate_tautomers, parse_smiles
from .molgraph.tautomer import DEFAULT_MAX_DEPTH, DEFAULT_MAX_TAUTOMERS


class InvalidStructureError(ValueError):
    pass


def f1_score(precision: Optional[float], recall: Optional[float]) -> Optional[float]:
    """Harmonic mean; None when either input is undefined, 0 when both are 0."""
    if precision is None or recall is None:
        return None
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def percentage(part: int, whole: int) -> Optional[float]:
    return 100.0 * part / whole if whole else None


@dataclass(frozen=True)
class ItemMatch:
    prediction: int
    gold: Optional[int]


@dataclass(frozen=True)
class MatchReport:
    tp: int
    fp: int
    fn: int
    per_item: tuple[ItemMatch, ...] = ()

    @property
    def precision(self) -> Optional[float]:
        return percentage(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        return percentage(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> Optional[float]:
        return f1_score(self.precision, self.recall)

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "precision_undefined": self.precision is None,
            "per_item": [{"prediction": m.prediction, "matched_gold": m.gold} for m in self.per_item],
        }


@dataclass(frozen=True)
class SoftMatchReport:
    correct: int
    total: int
    per_item: tuple[ItemMatch, ...] = ()
    budget_limited: int = 0

    @property
    def accuracy(self) -> Optional[float]:
        return percentage(self.correct, self.total)

    def to_json(self) -> dict:
        return {
            "correct": self.correct,
            "total": self.total,
            "accuracy": self.accuracy,
            "budget_limited": self.budget_limited,
            "per_item": [{"prediction": m.prediction, "matched_gold": m.gold} for m in self.per_item],
        }


def _key(smiles: str, ignore_stereo: bool, where: str) -> str:
    try:
        graph = parse_smiles(smiles)
    except MoleculeError as exc:
        raise InvalidStructureError(f"{where}: {exc}") from exc
    if graph.has_placeholders:
        raise InvalidStructureError(f"{where}: {smiles!r} still has placeholders")
    return canonical_key(graph, ignore_stereo=ignore_stereo)


def reaction_key(reaction: Reaction, ignore_stereo: bool = False, where: str = "") -> tuple[frozenset, frozenset]:
    return (
        frozenset(_key(s, ignore_stereo, where) for s in reaction.reactants),
        frozenset(_key(s, ignore_stereo, where) for s in reaction.products),
    )


def exact_match_prf(
    pred: Sequence[Reaction], gold: Sequence[Reaction], ignore_stereo: bool = False
) -> MatchReport:
    """Greedy injective matching on (reactant keys, product keys); conditions ignored."""
    pred_keys = [reaction_key(r, ignore_stereo, f"prediction {i}") for i, r in enumerate(pred)]
    gold_keys = [reaction_key(r, ignore_stereo, f"gold {i}") for i, r in enumerate(gold)]
    free: dict[tuple, list[int]] = {}
    for gi, key in enumerate(gold_keys):
        free.setdefault(key, []).append(gi)
    items = []
    tp = 0
    for pi, key in enumerate(pred_keys):
        slots = free.get(key)
        if slots:
            items.append(ItemMatch(pi, slots.pop(0)))
            tp += 1
        else:
            items.append(ItemMatch(pi, None))
    return MatchReport(tp, len(pred) - tp, len(gold) - tp, tuple(items))


class _TautomerIndex:
    """Tautomer key sets per structure, computed once per distinct SMILES."""

    def __init__(self, max_depth: int, max_tautomers: int, ignore_stereo: bool):
        self.max_depth = max_depth
        self.max_tautomers = max_tautomers
        self.ignore_stereo = ignore_stereo
        self.cache: dict[str, frozenset[str]] = {}
        self.limited: set[str] = set()

    def keys(self, smiles: str, where: str) -> frozenset[str]:
        if smiles not in self.cache:
            try:
                graph = parse_smiles(smiles)
            except MoleculeError as exc:
                raise InvalidStructureError(f"{where}: {exc}") from exc
            if graph.has_placeholders:
                raise InvalidStructureError(f"{where}: {smiles!r} still has placeholders")
            own = canonical_key(graph, ignore_stereo=self.ignore_stereo)
            found = enumerate_tautomers(graph, self.max_depth, self.max_tautomers, self.ignore_stereo)
            if found.budget_exceeded:
                self.limited.add(smiles)
                self.cache[smiles] = frozenset({own})
            else:
                self.cache[smiles] = found.keys | {own}
        return self.cache[smiles]


def _side_subset(pred: Iterable[frozenset], gold: Sequence[frozenset]) -> bool:
    return all(any(p & g for g in gold) for p in pred)


def soft_match_accuracy(
    pred: Sequence[Reaction],
    gold: Sequence[Reaction],
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_tautomers: int = DEFAULT_MAX_TAUTOMERS,
    ignore_stereo: bool = False,
) -> SoftMatchReport:
    """A prediction is correct if some gold entry contains its reactants and
    products as subsets, molecules compared up to tautomerism. Gold entries
    may be reused."""
    index = _TautomerIndex(max_depth, max_tautomers, ignore_stereo)
    gold_sides = [
        (
            [index.keys(s, f"gold {i}") for s in sorted(r.reactants)],
            [index.keys(s, f"gold {i}") for s in sorted(r.products)],
        )
        for i, r in enumerate(gold)
    ]
    items = []
    correct = 0
    for pi, r in enumerate(pred):
        reactants = [index.keys(s, f"prediction {pi}") for s in sorted(r.reactants)]
        products = [index.keys(s, f"prediction {pi}") for s in sorted(r.products)]
        hit = next(
            (gi for gi, (gr, gp) in enumerate(gold_sides)
             if _side_subset(reactants, gr) and _side_subset(products, gp)),
            None,
        )
        items.append(ItemMatch(pi, hit))
        correct += hit is not None
    return SoftMatchReport(correct, len(pred), tuple(items), len(index.limited))


def accuracy(correct: int, total: int) -> Optional[float]:
    return percentage(correct, total)
