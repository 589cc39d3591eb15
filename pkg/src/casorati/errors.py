"""Exception types shared across the package."""


class CasoratiError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CasoratiError):
    """Malformed expression source."""

    def __init__(self, position, expected, source=None):
        self.position = position
        self.expected = expected
        self.source = source
        super().__init__(f"at position {position}: expected {expected}")


class UnknownIdentifier(ParseError):
    def __init__(self, name, position, source=None):
        self.name = name
        self.position = position
        self.expected = "u1..un, a declared parameter, pi or e"
        self.source = source
        CasoratiError.__init__(self, f"unknown identifier {name!r} at position {position}")


class DomainError(CasoratiError, ValueError):
    """A function was evaluated outside of its domain."""

    def __init__(self, function, argument):
        self.function = function
        self.argument = argument
        super().__init__(f"{function} evaluated outside its domain (argument {argument!r})")


class RankDeficient(CasoratiError):
    """The Jacobian of an immersion lost rank at the evaluation point."""

    def __init__(self, singular_values):
        self.singular_values = singular_values
        super().__init__(f"jacobian is rank deficient, singular values {list(singular_values)}")


class DimensionError(CasoratiError, ValueError):
    pass


class NotUnit(CasoratiError, ValueError):
    pass


class NotLagrangian(CasoratiError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"submanifold is not Lagrangian here (residual {residual:.3e})")
