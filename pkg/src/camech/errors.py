"""Exception types shared across the package."""


class CamechError(Exception):
    """Base class for all package-specific errors."""


class ParseError(CamechError):
    """An input document is malformed or not exactly representable."""


class ValidationError(CamechError):
    """An instance violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid instance")


class TiesPresent(CamechError):
    """Two distinct bids share a norm value under the reject tie rule."""

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)


class NotGranted(CamechError):
    """A blocker query was made for a bid that was denied."""


class InstanceTooLarge(CamechError):
    """The instance exceeds a solver's size guard."""


class ExponentNotSupported(CamechError):
    """No exact closed form for this quantity at the requested norm exponent."""


class NonMonotoneDetected(CamechError):
    """Probing found a denial above a granted value; the critical value is undefined."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BundleSpaceTooLarge(CamechError):
    """Too many goods to enumerate every bundle."""


class TooManyTieOrders(CamechError):
    """The tie groups admit more permutations than the enumeration guard allows."""


class UnknownScenario(CamechError):
    """The scenario name is not in the registry."""


class ValuationUndefined(CamechError):
    """A complex valuation table has no entry covering the queried bundle."""
