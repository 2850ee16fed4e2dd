"""Exception types raised by zakwave.

Every error derives from :class:`ZakwaveError`, which is itself a
``ValueError`` so that callers validating user input can catch either.
"""


class ZakwaveError(ValueError):
    pass


class EvenDimension(ZakwaveError):
    pass


class NotCoprime(ZakwaveError):
    pass


class NonPositive(ZakwaveError):
    pass


class GridMismatch(ZakwaveError):
    pass


class ZeroSignal(ZakwaveError):
    pass


class IndexOutOfRange(ZakwaveError):
    pass


class InvalidAlpha(ZakwaveError):
    pass


class BadModulus(ZakwaveError):
    pass


class NoInverse(ZakwaveError):
    pass


class EmptyTrialSet(ZakwaveError):
    pass


class InvalidConstellation(ZakwaveError):
    pass


class EmptyProfile(ZakwaveError):
    pass


class SpreadTooLarge(ZakwaveError):
    pass


class BadPdr(ZakwaveError):
    pass


class SingularChannel(ZakwaveError):
    pass


class RegionAliased(ZakwaveError):
    pass


class EmptyDictionary(ZakwaveError):
    pass
