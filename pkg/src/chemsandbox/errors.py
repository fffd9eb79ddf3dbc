"""Error taxonomy shared by every tool.

Each class carries a stable snake_case ``code`` which is what the sandbox
service puts on the wire; the class hierarchy is what Python callers catch.
"""

from __future__ import annotations

from typing import Any


class ChemError(Exception):
    """Base class for all domain errors raised by the package."""

    code = "chem_error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"code": self.code, "message": self.message}
        for key, value in self.details.items():
            if value is not None:
                out[key] = value
        return out


# -- molgraph ---------------------------------------------------------------


class SmilesError(ChemError):
    code = "smiles_error"

    def __init__(self, message: str, position: int | None = None, **details: Any) -> None:
        super().__init__(message, position=position, **details)
        self.position = position


class SmilesSyntaxError(SmilesError):
    code = "syntax_error"


class RingBondMismatch(SmilesError):
    code = "ring_bond_mismatch"


class UnsupportedFeature(SmilesError):
    code = "unsupported_feature"


class ValenceError(SmilesError):
    code = "valence_error"

    def __init__(
        self,
        message: str,
        atom: int,
        valence: int,
        allowed: tuple[int, ...],
        position: int | None = None,
    ) -> None:
        super().__init__(message, position=position, atom=atom, valence=valence, allowed=list(allowed))
        self.atom = atom
        self.valence = valence
        self.allowed = allowed


class AromaticityError(SmilesError):
    code = "aromaticity_error"


class SizeLimitExceeded(ChemError):
    code = "size_limit_exceeded"


# -- patterns ---------------------------------------------------------------


class PatternSyntaxError(ChemError):
    code = "pattern_syntax_error"

    def __init__(self, message: str, position: int | None = None) -> None:
        super().__init__(message, position=position)
        self.position = position


class UnsupportedPredicate(PatternSyntaxError):
    code = "unsupported_predicate"


class UnknownGroup(ChemError):
    code = "unknown_group"


class QueryNotRingSystem(ChemError):
    code = "query_not_ring_system"


# -- descriptors ------------------------------------------------------------


class AlgorithmMismatch(ChemError):
    code = "algorithm_mismatch"


class UntypedAtom(ChemError):
    code = "untyped_atom"

    def __init__(self, message: str, atom: int) -> None:
        super().__init__(message, atom=atom)
        self.atom = atom


# -- editor -----------------------------------------------------------------


class EditError(ChemError):
    code = "edit_error"


class NoMatch(EditError):
    code = "no_match"


class NoFreeValence(EditError):
    code = "no_free_valence"


class WouldDisconnect(EditError):
    code = "would_disconnect"


class InvalidFragment(EditError):
    code = "invalid_fragment"


class EmptyResult(EditError):
    code = "empty_result"


# -- rxnstore ---------------------------------------------------------------


class TemplateError(ChemError):
    code = "template_error"


class InvalidProduct(ChemError):
    code = "invalid_product"


class EmptyStore(ChemError):
    code = "empty_store"


# -- reward / grpo ------------------------------------------------------------


class ConfigError(ChemError):
    code = "config_error"


class ShapeMismatch(ChemError):
    code = "shape_mismatch"


class EmptyMask(ChemError):
    code = "empty_mask"


class GroupTooSmall(ChemError):
    code = "group_too_small"


class NonFiniteLogprob(ChemError):
    code = "non_finite_logprob"


# -- service / trajectory -----------------------------------------------------


class UnknownTool(ChemError):
    code = "unknown_tool"


class SchemaViolation(ChemError):
    code = "schema_violation"

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(message, path=path)
        self.path = path


class UnknownSession(ChemError):
    code = "unknown_session"


class SandboxUnavailable(ChemError):
    code = "sandbox_unavailable"


class RewriterViolation(ChemError):
    code = "rewriter_violation"


class TokenizerFailure(ChemError):
    code = "tokenizer_failure"
