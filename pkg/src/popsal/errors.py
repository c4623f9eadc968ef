"""Exception hierarchy shared across the toolkit.

Validation-type errors map to CLI exit code 1, I/O-type errors to exit code 2.
"""


class PopsalError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(PopsalError):
    """A spec/config violates its invariants (bad geometry, bad parameters)."""


class ValidationError(PopsalError):
    """An input value or label fails validation."""


class DegenerateStimulusError(ValidationError):
    """Requested stimulus has no target-distractor difference."""


class IntegrityError(ValidationError):
    """Stored or computed data violates a structural invariant."""


class MissingComponentError(PopsalError):
    """A required file (image, mask, metadata, saliency map) is absent."""


class OutputError(PopsalError):
    """An output location cannot be written."""
