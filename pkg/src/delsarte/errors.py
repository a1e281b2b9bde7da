"""Exception hierarchy.  Each failure mode named by the command line maps to
one class so callers can translate them into stable exit codes."""


class DelsarteError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimension(DelsarteError, ValueError):
    pass


class InvalidArgument(DelsarteError, ValueError):
    pass


class DomainError(DelsarteError, ValueError):
    pass


class InvalidSpec(DelsarteError, ValueError):
    pass


class StructureError(DelsarteError):
    """The assumed extremal structure (form, K) does not produce a solution."""


class DegenerateStructure(StructureError):
    pass


class WrongStructure(StructureError):
    pass


class AmbiguousSolution(StructureError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class LpStructureError(StructureError):
    pass


class VerificationError(DelsarteError):
    """A certificate check failed; ``check`` names it."""

    def __init__(self, check, message):
        super().__init__(f"{check}: {message}")
        self.check = check


class CertificateParseError(DelsarteError):
    pass
