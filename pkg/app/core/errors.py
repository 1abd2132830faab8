"""Domain exceptions shared by the services, the CLI and the HTTP layer."""


class CkitError(Exception):
    """Base class for every error raised by ckit."""


class InputError(CkitError, ValueError):
    """The caller handed us something we cannot work with."""


class UndefinedSignatureError(InputError):
    """Levine-Tristram signature requested at a root of the Alexander polynomial."""


class InternalCheckError(CkitError, AssertionError):
    """An internal consistency check failed."""


class UnknownKnotError(InputError):
    """A knot name that is not in the loaded table."""


def check(condition: bool, message: str) -> None:
    if not condition:
        raise InternalCheckError(message)
