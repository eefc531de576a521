"""Shared exception base for the whole package.

Every error the pipeline raises deliberately derives from :class:`AtcError`,
so the CLI can distinguish "the artifact refused" from genuine bugs.
"""


class AtcError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AtcError):
    """An experiment configuration is invalid or internally inconsistent."""
