"""Shared exception types."""


class AdtrapError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AdtrapError):
    """A document or configuration failed validation.

    Carries a JSON-pointer-style location so that command-line users can
    find the offending element in a scenario file.
    """

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        self.message = message
        super().__init__(f"{pointer}: {message}" if pointer else message)


class UnknownIdError(AdtrapError):
    """A cross-reference named an id that does not exist."""


class NotEligibleError(AdtrapError):
    """A page or ad failed an admission rule of the display network."""


class BudgetError(AdtrapError):
    """Internal invariant violation: an impression would overdraw a campaign."""


class SimulationError(AdtrapError):
    """The simulated event stream violated an ordering or state rule."""


class InconsistentObservationsError(AdtrapError):
    """No assignment of audiences to visitors reproduces the observed counters.

    Usually means the modelling assumptions were broken, for example an ad
    that also ran on a site whose visitors do not appear in the analysed log.
    """
