"""Exception types shared across the package.

The CLI maps these onto exit codes: malformed input files / bad parameters
exit 2, invariant violations exit 3, resource-cap overruns exit 4.
"""


class InvariantViolationError(ValueError):
    """A domain invariant does not hold (non-CP channel, non-density state, ...)."""


class DegenerateTransmissionError(InvariantViolationError):
    """Transmission probability too close to zero to normalize the final state."""


class CapExceededError(RuntimeError):
    """A requested dense construction exceeds the configured dimension cap."""


class FormatError(ValueError):
    """A serialized channel/code/report does not match the expected schema."""
