"""R-group resolution for substrate-scope figures."""
from .infer import (
    Inference,
    MissingDefinitionError,
    NoMappingError,
    ReactionTemplate,
    infer_rgroups_from_product,
    resolve_by_text,
    substitute_template,
)
from .scope import DROPPED, EMITTED, EntryOutcome, ScopeResult, resolve_substrate_scope, scheme_reaction
from .text import (
    DEFAULT_DICTIONARY,
    AbbreviationDictionary,
    LabelError,
    LabelParts,
    RGroupDefinition,
    UnknownAbbreviationError,
    parse_condensed,
    parse_label,
    parse_rgroup_text,
    resolve_substituent,
)

__all__ = [
    "DEFAULT_DICTIONARY",
    "DROPPED",
    "EMITTED",
    "AbbreviationDictionary",
    "EntryOutcome",
    "Inference",
    "LabelError",
    "LabelParts",
    "MissingDefinitionError",
    "NoMappingError",
    "RGroupDefinition",
    "ReactionTemplate",
    "ScopeResult",
    "UnknownAbbreviationError",
    "infer_rgroups_from_product",
    "parse_condensed",
    "parse_label",
    "parse_rgroup_text",
    "resolve_by_text",
    "resolve_substituent",
    "resolve_substrate_scope",
    "scheme_reaction",
    "substitute_template",
]
