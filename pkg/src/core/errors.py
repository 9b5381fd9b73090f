"""
Exception hierarchy for spcimpute

SpcValidationError covers faults in what the user supplied (exit code 2),
SpcRuntimeError covers numerical failures during a run (exit code 1).
"""

from typing import Optional, Sequence


class SpcError(Exception):
    """Base class for every error raised by spcimpute"""


class SpcValidationError(SpcError):
    """User input (data, schema, configuration) is invalid"""


class SpcRuntimeError(SpcError):
    """A numerical or runtime step failed"""


# Validation errors


class SchemaMismatch(SpcValidationError):
    """A column named in the schema is missing from the input"""


class NonNumeric(SpcValidationError):
    """A cell that must be numeric could not be parsed"""

    def __init__(self, column: str, row: int, value: str):
        self.column = column
        self.row = row
        self.value = value
        super().__init__(
            f"Column '{column}' row {row}: cannot parse {value!r} as a number"
        )


class EmptyArm(SpcValidationError):
    """A treatment arm has no units"""


class MissingOutcome(SpcValidationError):
    """An in-sample unit has no observed outcome"""


class MissingTreatment(SpcValidationError):
    """A unit has no treatment code"""


class InsufficientArm(SpcValidationError):
    """An arm has too few units for the posterior draws (df < 2)"""


class AllMissing(SpcValidationError):
    """A covariate has no observed value to impute from"""


class OutOfRange(SpcValidationError):
    """A value lies outside its admissible range"""


class InvalidDf(SpcValidationError):
    """Degrees of freedom below 1"""


class InvalidConfig(SpcValidationError):
    """Configuration values are inconsistent or out of range"""


class MisalignedUnits(SpcValidationError):
    """Two tables that must share unit ids do not"""


# Runtime errors


class NotPSD(SpcRuntimeError):
    """A matrix that must be positive semi-definite is not"""

    def __init__(
        self,
        message: str,
        eigenvalue: Optional[float] = None,
        eigenvector: Optional[Sequence[float]] = None,
    ):
        self.eigenvalue = eigenvalue
        self.eigenvector = None if eigenvector is None else list(eigenvector)
        if eigenvalue is not None and eigenvector is not None:
            direction = ", ".join(f"{v:+.3f}" for v in self.eigenvector)
            message = (
                f"{message} (smallest eigenvalue {eigenvalue:.4g} "
                f"along direction [{direction}])"
            )
        super().__init__(message)


class SingularPivot(SpcRuntimeError):
    """A sweep pivot is numerically zero"""


class RankDeficient(SpcRuntimeError):
    """The design matrix does not have full column rank"""

    def __init__(self, column: str):
        self.column = column
        super().__init__(
            f"Design matrix is rank deficient: column '{column}' is collinear "
            "with the columns before it"
        )


class SingularObservedBlock(SpcRuntimeError):
    """The observed arm's variance is zero, so it cannot be conditioned on"""
