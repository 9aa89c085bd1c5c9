"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` of the form
``<module>/<ErrorName>`` so the CLI and the JSON service can surface
failures uniformly.
"""

from __future__ import annotations


class CuimetError(Exception):
    """Base class for all engine errors."""

    code = "cuimet/Error"

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self)}


# --- trial-data -------------------------------------------------------------

class MissingColumn(CuimetError):
    code = "trial-data/MissingColumn"


class NonBinaryValue(CuimetError):
    code = "trial-data/NonBinaryValue"


class BadDoseLevel(CuimetError):
    code = "trial-data/BadDoseLevel"


class EmptyDataset(CuimetError):
    code = "trial-data/EmptyDataset"


class DuplicateEndpointName(CuimetError):
    code = "trial-data/DuplicateEndpointName"


class IndexOutOfRange(CuimetError):
    code = "trial-data/IndexOutOfRange"


# --- estimation -------------------------------------------------------------

class TooFewDoseLevels(CuimetError):
    code = "estimation/TooFewDoseLevels"


class EmpiricalHasNoCurve(CuimetError):
    code = "estimation/EmpiricalHasNoCurve"


class InvalidFitConfig(CuimetError):
    code = "estimation/InvalidFitConfig"


# --- utility ----------------------------------------------------------------

class AllZeroWeights(CuimetError):
    code = "utility/AllZeroWeights"


class InvalidWeight(CuimetError):
    code = "utility/InvalidWeight"


class DimensionMismatch(CuimetError):
    code = "utility/DimensionMismatch"


# --- bootstrap --------------------------------------------------------------

class EmptySampleList(CuimetError):
    code = "bootstrap/EmptySampleList"


class BaselineFitFailed(CuimetError):
    code = "bootstrap/BaselineFitFailed"


class AllReplicatesExcluded(CuimetError):
    code = "bootstrap/AllReplicatesExcluded"


class InvalidBootstrapConfig(CuimetError):
    code = "bootstrap/InvalidBootstrapConfig"


# --- simulation -------------------------------------------------------------

class OutOfDomain(CuimetError):
    code = "simulation/OutOfDomain"


class NotPositiveSemiDefinite(CuimetError):
    code = "simulation/NotPositiveSemiDefinite"


class InvalidScenario(CuimetError):
    code = "simulation/InvalidScenario"


class ScenarioFormatError(CuimetError):
    code = "simulation/ScenarioFormatError"


# --- app-interface ----------------------------------------------------------

class InvalidRequest(CuimetError):
    code = "app-interface/InvalidRequest"


class UnknownDataset(CuimetError):
    code = "app-interface/UnknownDataset"
