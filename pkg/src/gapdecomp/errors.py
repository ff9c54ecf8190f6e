"""Exception types raised by the estimators and the data layer."""


class GapDecompError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"

    def to_record(self):
        """Machine-readable error record (used by the CLI)."""
        return {"error": self.kind, "message": str(self)}


class DomainError(GapDecompError, ValueError):
    kind = "domain_error"


class SingularMatrixError(GapDecompError, ValueError):
    """Design matrix is rank deficient; ``column`` is the offending index."""

    kind = "singular_matrix"

    def __init__(self, message, column=None, column_name=None):
        super().__init__(message)
        self.column = column
        self.column_name = column_name

    def to_record(self):
        rec = super().to_record()
        rec["column"] = self.column
        if self.column_name is not None:
            rec["column_name"] = self.column_name
        return rec


class SchemaError(GapDecompError, ValueError):
    kind = "schema_error"


class ParseError(GapDecompError, ValueError):
    kind = "parse_error"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column

    def to_record(self):
        rec = super().to_record()
        rec["row"] = self.row
        rec["column"] = self.column
        return rec


class EmptySampleError(GapDecompError, ValueError):
    kind = "empty_sample"


class NonConvergenceError(GapDecompError, RuntimeError):
    """Iterative fit hit its iteration cap; ``last_iterate`` holds the final coefficients."""

    kind = "non_convergence"

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SeparationError(GapDecompError, RuntimeError):
    kind = "separation"


class InferenceError(GapDecompError, RuntimeError):
    kind = "inference_error"
