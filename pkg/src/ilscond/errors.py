"""Exception hierarchy shared across the package."""


class IlsError(Exception):
    """Base class for all errors raised by ilscond."""


class DimensionMismatch(IlsError, ValueError):
    pass


class NotPositiveDefinite(IlsError):
    """A (possibly perturbed) gram matrix A^t J A failed the SPD test."""


class PerturbationLeftDomain(NotPositiveDefinite):
    """A perturbation moved the problem outside the positive definite region."""


class AngleOutOfRange(IlsError, ValueError):
    pass


class SingularX(IlsError, ValueError):
    pass


class NotOrthogonal(IlsError, ValueError):
    pass


class ZeroSolution(IlsError):
    """Relative conditioning is undefined when the solution is zero."""


class ZeroNormalizer(IlsError):
    pass


class VanishingTerm(IlsError):
    """A quantity the overestimation theorem divides by is zero."""

    def __init__(self, name: str):
        super().__init__(f"vanishing term: {name}")
        self.name = name


class NonPositiveInput(IlsError, ValueError):
    pass


class PreconditionViolated(IlsError, ValueError):
    pass


class AlphaOutOfRange(IlsError, ValueError):
    pass


class InvalidEpsilon(IlsError, ValueError):
    pass
