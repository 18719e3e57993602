"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SignallingError(DomainError):
    """A marginal was requested but the discarded side signals to the kept side."""

    def __init__(self, message, inputs=None):
        super().__init__(message)
        self.inputs = inputs


class InvalidConstructionError(DomainError):
    def __init__(self, message, input_pair=None):
        super().__init__(message)
        self.input_pair = input_pair


class DegenerateRowError(DomainError):
    """A LESS/GREATER row has zero mass on its denominator class."""
