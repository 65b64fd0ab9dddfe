"""Exception hierarchy shared by the library and the command line tool."""


class InputError(ValueError):
    """Malformed or mutually inconsistent inputs (dimension mismatch, parse errors)."""


class ContractionError(InputError):
    """A map that is required to be a contraction has spectral norm >= 1."""


class ResourceLimitError(RuntimeError):
    """A configured size cap would be exceeded (point count, vertex enumeration)."""


class PreconditionError(RuntimeError):
    """A mathematical precondition failed on otherwise well-formed data."""
