"""Exception hierarchy shared across the package.

Keeping domain violations distinct from configuration problems lets the
command line map them onto separate exit codes.
"""

from __future__ import annotations


class MixtailError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MixtailError, ValueError):
    """A numeric precondition was violated (bad k, p, rho, ...)."""


class InvalidEstimateError(MixtailError):
    """A flagged (non-positive or non-finite) estimate was fed to an
    operation that refuses to extrapolate from it."""


class ConfigError(MixtailError, ValueError):
    """A config file or input table could not be parsed or validated."""


class BudgetExceededError(MixtailError):
    """A simulation request exceeds the configured draw budget."""
