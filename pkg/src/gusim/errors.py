"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration value violates its documented constraints."""


class GeometryError(ValueError):
    """A geometric computation has no admissible solution."""


class RankDeficiencyError(ValueError):
    """A matrix required to be full rank is numerically rank deficient."""


class SelectionError(RuntimeError):
    """A scheduling algorithm cannot produce the requested number of users."""
