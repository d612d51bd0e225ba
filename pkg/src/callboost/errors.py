"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inputs are inconsistent with each other (symbol tables, id sets, config keys)."""


class ContractViolation(ValueError):
    """An operation was called on input that breaks its precondition."""


class CallsignParseError(ValueError):
    """An ICAO callsign code is malformed."""

    def __init__(self, code, span, reason):
        self.code = code
        self.span = span
        super().__init__(f"cannot parse callsign {code!r}: {reason} at {span!r}")
