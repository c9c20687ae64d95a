"""Error types shared across the package."""


class ConfigError(ValueError):
    """Invalid scenario or experiment configuration."""


class TraceParseError(ValueError):
    """Malformed video trace file; message names the offending line."""


class InvalidTspec(ValueError):
    """Traffic specification violates its own invariants."""
