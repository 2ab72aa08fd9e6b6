"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class MusielakError(Exception):
    """Base class for all library errors."""


# -- measure ---------------------------------------------------------------


class NodeMismatch(MusielakError, ValueError):
    """A field does not line up with the nodes of a measure space."""


class IntegrationOverflow(MusielakError, OverflowError):
    """A partial sum left the representable floating point range."""


# -- expression language ---------------------------------------------------


class ExprSyntaxError(MusielakError, ValueError):
    """Malformed expression text.

    ``offset`` is a byte offset into the UTF-8 encoding of the source and
    ``expected`` the set of tokens that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected=(), text: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text
        exp = ", ".join(sorted(self.expected)) if self.expected else "-"
        super().__init__(f"{message} at byte {offset} (expected: {exp})")


class UnknownIdentifier(ExprSyntaxError):
    """A name that is neither a variable, a declared parameter nor a function."""


class DomainError(MusielakError, ArithmeticError):
    """Evaluation left the real domain of an operation.

    ``path`` locates the failing node as a tuple of child indices from the root.
    """

    def __init__(self, message: str, path=()):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path) or "root"
        super().__init__(f"{message} (node {where})")


class EvaluationOverflow(DomainError):
    """A finite input produced a non-finite value."""


class UnboundParameter(MusielakError, KeyError):
    """A named parameter was used without a value."""


# -- functions and spaces --------------------------------------------------


class NonmonotoneQuotient(MusielakError, ValueError):
    """Right difference quotients increased as the step shrank (input not convex)."""


class EmptyFamily(MusielakError, ValueError):
    pass


class DominationViolated(MusielakError, ValueError):
    """A family member exceeds its declared dominating function."""

    def __init__(self, message: str, witness: dict):
        self.witness = witness
        super().__init__(f"{message}: {witness}")


class MonotonicityViolated(MusielakError, ValueError):
    def __init__(self, message: str, witness: dict):
        self.witness = witness
        super().__init__(f"{message}: {witness}")


class HypothesisViolated(MusielakError, ValueError):
    def __init__(self, message: str, witness: dict):
        self.witness = witness
        super().__init__(f"{message}: {witness}")


class BracketFailure(MusielakError, RuntimeError):
    """Doubling/halving from the seed never straddled modular = 1."""


class NonmonotoneModular(MusielakError, RuntimeError):
    """The modular increased with the scaling parameter during the norm search."""


class UnboundedOnRectangle(MusielakError, ValueError):
    pass


class SpecError(MusielakError, ValueError):
    """A JSON or inline specification could not be interpreted."""
