"""Shared exception types.

Module-specific errors subclass :class:`AquagaugeError` in the module that
raises them; the two defined here are shared across modules.
"""


class AquagaugeError(Exception):
    """Base class for every error this package raises on bad data or usage."""


class NonFinite(AquagaugeError):
    """A numeric input was NaN or infinite."""

    def __init__(self, value, context: str = "value"):
        super().__init__(f"{context} is not finite: {value!r}")
        self.value = value


class LengthMismatch(AquagaugeError):
    """Two aligned sequences had different lengths."""

    def __init__(self, expected: int, got: int):
        super().__init__(f"length mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got
