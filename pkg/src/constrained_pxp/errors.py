"""Exception types raised by the package."""


class ConstrainedPXPError(Exception):
    """Base class for all package errors."""


class LengthTooLarge(ConstrainedPXPError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"basis needs {required} states but the enumeration budget is {budget}; "
            f"raise the budget to at least {required} or use a smaller L"
        )


class LengthTooSmall(ConstrainedPXPError):
    pass


class UnsupportedModel(ConstrainedPXPError):
    pass


class RequiresPBC(ConstrainedPXPError):
    pass


class RequiresRealSector(ConstrainedPXPError):
    pass


class DimensionMismatch(ConstrainedPXPError):
    pass


class FlipLeavesBasis(ConstrainedPXPError):
    pass


class TooLargeForFullSpectrum(ConstrainedPXPError):
    pass


class EnergyOutOfRange(ConstrainedPXPError):
    pass


class Z2NotInBasis(ConstrainedPXPError):
    pass


class PrematureAnnihilation(ConstrainedPXPError):
    pass


class VectorsNotRetained(ConstrainedPXPError):
    pass


class MethodInfeasible(ConstrainedPXPError):
    pass
