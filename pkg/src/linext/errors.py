class PosetError(Exception):
    pass


class CycleError(PosetError):
    pass


class EmptyPosetError(PosetError):
    pass


class AlreadyDeletedError(PosetError):
    pass


class NotForestError(PosetError):
    pass


class NotMaximalError(PosetError):
    pass


class InvalidExtensionError(PosetError):
    pass


class DomainError(PosetError, ValueError):
    pass


class SizeLimitError(PosetError):
    """Raised when an exact computation would exceed its configured budget."""


class PosetParseError(PosetError, ValueError):
    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
