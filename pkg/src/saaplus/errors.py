"""Exception hierarchy shared across the package."""


class SaaError(Exception):
    """Base class for all package errors."""


class ConfigError(SaaError):
    """Invalid user-supplied configuration: manifests, profiles, CLI flags.

    CLI maps this to exit code 2.
    """


class TransportError(SaaError):
    """A remote model adapter could not be reached or returned garbage.

    Distinct from "no detections", which is an empty but valid result.
    CLI maps this to exit code 3, the HTTP service to status 502.
    """


class FixtureError(ConfigError):
    """An oracle fixture file is malformed or inconsistent with its image."""


class MetricUndefinedError(SaaError):
    """Raised when max-F1-pixel is requested but no positive ground-truth
    pixel exists anywhere in the pool, so the score is undefined."""
