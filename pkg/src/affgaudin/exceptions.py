"""Exception hierarchy shared by every subpackage."""


class AffGaudinError(Exception):
    """Base class for all library errors."""


class UnsupportedAlgebra(AffGaudinError):
    pass


class AlgebraMismatch(AffGaudinError):
    pass


class InvalidHighestWeight(AffGaudinError):
    pass


class InvalidWeight(AffGaudinError):
    pass


class DegenerateSites(AffGaudinError):
    pass


class SingularShift(AffGaudinError):
    pass


class ZeroLevel(AffGaudinError):
    pass


class CriticalLevel(AffGaudinError):
    pass


class DegenerateConfiguration(AffGaudinError):
    pass


class NotOnBetheLocus(AffGaudinError):
    pass


class UnsupportedPoleStrength(AffGaudinError):
    pass


class ForbiddenLevel(AffGaudinError):
    pass


class SingularChart(AffGaudinError):
    pass


class IntegrationFailure(AffGaudinError):
    pass


class ContourConflict(AffGaudinError):
    pass


class NoSingleValuedSolution(AffGaudinError):
    pass


class SpecValidationError(AffGaudinError):
    """Problem spec failed schema or semantic validation.

    ``diagnostics`` holds one human readable message per offending field.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
