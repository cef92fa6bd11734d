"""Exception types raised across the package."""


class FBHError(ValueError):
    """Base class for every error the library raises on bad input or data."""


class NumericsError(FBHError):
    """Bad samples or a failed numerical routine."""


class IntegrationStalled(NumericsError):
    def __init__(self, s):
        self.s = float(s)
        super().__init__(f"integration stalled at s={self.s:.12g}")


class DomainError(FBHError):
    """Evaluation point outside the domain of a closed form or chart."""


class FrenetDegenerate(FBHError):
    pass


class FrameError(FBHError):
    """A frame is not orthonormal or not adapted to the submersion."""
