"""Exception hierarchy shared by every crelab module."""


class CrelabError(Exception):
    """Base class for all library errors."""


class DomainError(CrelabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstructionError(DomainError):
    """Invalid parameters for a lottery or common-ratio problem."""


class ConfigError(CrelabError, ValueError):
    """A model configuration is internally inconsistent."""


class ModelError(CrelabError, ValueError):
    """A model produced an invalid quantity (e.g. a non-positive scale)."""


class DataError(CrelabError, ValueError):
    """Input data is malformed or out of range."""


class UsageError(CrelabError, ValueError):
    """Unknown identifier or bad request from a caller."""
