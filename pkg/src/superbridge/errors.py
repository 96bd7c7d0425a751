"""Exception types shared across the package."""


class SuperbridgeError(Exception):
    """Base class for all errors raised by this package."""


class PlatParseError(SuperbridgeError):
    """A plat description line could not be parsed; message carries the position."""


class CurveParseError(SuperbridgeError):
    """A curve CSV file could not be parsed; message carries the line number."""


class StepLimitExceeded(SuperbridgeError):
    """The strand-freeing rewrite did not terminate within the step budget."""


class ZeroPolynomial(SuperbridgeError):
    """Root counting was asked about the identically-zero polynomial."""


class ZeroDirection(SuperbridgeError):
    """A direction vector with all components zero was supplied."""


class NormViolation(SuperbridgeError):
    """The perturbation pair exceeds the unit-norm budget on the circle."""


class GenericityFailure(SuperbridgeError):
    """Height function has a flat vertex or segment for this direction."""


class CrossingViolation(SuperbridgeError):
    """Return strands cannot be radially separated at the requested tube width."""


class FreeStrandRequired(SuperbridgeError):
    """The construction needs a plat whose leftmost strand carries no crossings."""


class NotAKnot(SuperbridgeError):
    """The plat closure has more than one component."""


class BoundViolation(SuperbridgeError):
    """A certified inequality failed; indicates a bug, not a discovery."""


class InvalidTorusParams(SuperbridgeError):
    """Torus curve parameters out of range (need gcd(p,q)=1, 2 <= p < q, 0 < r < R)."""
