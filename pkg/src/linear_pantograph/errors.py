"""Exception hierarchy shared by every module of the package."""
from __future__ import annotations
from typing import Any


class PantographError(Exception):
    """Base class; `details` is copied verbatim into the CLI diagnostic JSON."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details


class AlphaOutOfRange(PantographError):
    pass


class TruncationFailure(PantographError):
    pass


class PrecisionLoss(PantographError):
    """Raised inside the precision ladder when cancellation ate the requested accuracy."""


class OutsideValidatedDomain(PantographError):
    pass


class BracketNotFound(PantographError):
    pass


class NoZeroFound(PantographError):
    pass


class QuadratureFailure(PantographError):
    pass


class RootFindingFailure(PantographError):
    pass


class IllConditionedInitialSystem(PantographError):
    pass


class ResonantFrequency(PantographError):
    def __init__(self, message: str, index: int, **details: Any):
        super().__init__(message, index=index, **details)
        self.index = index


class UnsupportedForcing(PantographError):
    pass


class DefectiveWithoutStructure(PantographError):
    pass


class AmbiguousNearZero(PantographError):
    def __init__(self, message: str, report: Any, **details: Any):
        super().__init__(message, report=report.model_dump() if hasattr(report, 'model_dump') else report, **details)
        self.report = report


class RankAmbiguous(PantographError):
    pass


class UnenumeratedCase(PantographError):
    pass


class NearLinearDependence(PantographError):
    pass


class StepTooLarge(PantographError):
    pass
