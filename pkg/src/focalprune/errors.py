"""Exception taxonomy shared by the whole library.

Every error carries a stable ``code`` string so that callers (CLI, bindings,
downstream tooling) can dispatch on machine-readable identifiers instead of
exception classes or message text.
"""

from __future__ import annotations


class FocalpruneError(Exception):
    """Base class for all library errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class MalformedHeader(FocalpruneError):
    code = "malformed_header"


class UnsupportedDtype(FocalpruneError):
    code = "unsupported_dtype"


class UnsupportedLayout(FocalpruneError):
    code = "unsupported_layout"


class NonFiniteData(FocalpruneError):
    code = "non_finite_data"


class IoFailure(FocalpruneError):
    code = "io_failure"


class EmptyInput(FocalpruneError):
    code = "empty_input"


class DimensionMismatch(FocalpruneError):
    code = "dimension_mismatch"


class EmptyFocal(FocalpruneError):
    code = "empty_focal"


class EmptyCandidates(FocalpruneError):
    code = "empty_candidates"


class EmptyRetained(FocalpruneError):
    code = "empty_retained"


class BudgetBelowFocal(FocalpruneError):
    code = "budget_below_focal"


class BudgetInvalid(FocalpruneError):
    code = "budget_invalid"


class InvalidModel(FocalpruneError):
    code = "invalid_model"


class InvalidParams(FocalpruneError):
    code = "invalid_params"


class LengthMismatch(FocalpruneError):
    code = "length_mismatch"
