"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the CLI copies
into its reports.
"""


class ProjcheckError(Exception):
    code = "error"


class IndexOutOfRange(ProjcheckError):
    code = "index_out_of_range"


class SpaceTooLarge(ProjcheckError):
    code = "space_too_large"

    def __init__(self, size, guard):
        self.size = size
        self.guard = guard
        super().__init__(
            f"configuration space has {size} elements, exceeding the "
            f"enumeration guard of {guard} (set PROJCHECK_GUARD to override)"
        )


class NotNested(ProjcheckError):
    code = "not_nested"


class IncompleteTable(ProjcheckError):
    code = "incomplete_table"


class MissingCovariates(ProjcheckError):
    code = "missing_covariates"


class UnsupportedStatistic(ProjcheckError):
    """A statistic component is not defined on the requested family."""

    code = "unsupported_statistic"


class UnknownStatistic(ProjcheckError):
    code = "unknown_statistic"


class SchemaError(ProjcheckError):
    code = "schema_error"

    def __init__(self, violations):
        # list of (path, message)
        self.violations = list(violations)
        lines = [f"{p or '<root>'}: {m}" for p, m in self.violations]
        super().__init__("invalid model spec:\n  " + "\n  ".join(lines))


class BoundaryObservation(ProjcheckError):
    """Observed statistic is not in the relative interior of the mean space."""

    code = "boundary_observation"

    def __init__(self, observed, face, message=None):
        self.observed = observed
        self.face = face
        super().__init__(
            message
            or f"observed statistic {observed} lies on the boundary of the "
            f"attainable hull (face: {face}); the MLE does not exist"
        )


class MaxIterations(ProjcheckError):
    code = "max_iterations"


class Degenerate(ProjcheckError):
    code = "degenerate"


class InternalInconsistency(ProjcheckError):
    """Verdicts contradict a proven implication. Always a bug."""

    code = "internal_inconsistency"
