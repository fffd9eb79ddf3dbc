"""Reaction templates, the seed reaction store, retrieval and validity checks."""

from .store import (
    RXN_ALGORITHM_ID,
    ConditionHit,
    ConditionSet,
    ReactionRecord,
    TemplateHit,
    TemplateStore,
    ValidityResult,
    default_store,
    load_records,
    load_templates,
    reaction_fingerprint,
    record_from_dict,
)
from .templates import ReactionTemplate, apply_template, product_key, template_from_dict


def retrieve_templates(reactants, k: int = 5, store: TemplateStore | None = None):
    return (store or default_store()).retrieve_templates(reactants, k)


def recommend_conditions(reactants, products, k: int = 3, store: TemplateStore | None = None):
    return (store or default_store()).recommend_conditions(reactants, products, k)


def check_reaction_validity(reactants, products, allow_subset: bool = False, store: TemplateStore | None = None):
    return (store or default_store()).check_reaction_validity(reactants, products, allow_subset)


__all__ = [
    "RXN_ALGORITHM_ID",
    "ConditionHit",
    "ConditionSet",
    "ReactionRecord",
    "ReactionTemplate",
    "TemplateHit",
    "TemplateStore",
    "ValidityResult",
    "apply_template",
    "check_reaction_validity",
    "default_store",
    "load_records",
    "load_templates",
    "product_key",
    "reaction_fingerprint",
    "recommend_conditions",
    "record_from_dict",
    "retrieve_templates",
    "template_from_dict",
]
