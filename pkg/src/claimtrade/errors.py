"""Error types. Every error raised by the package derives from ClaimTradeError."""


class ClaimTradeError(Exception):
    pass


class DuplicateId(ClaimTradeError):
    pass


class DanglingEndpoint(ClaimTradeError):
    pass


class SelfLoop(ClaimTradeError):
    pass


class NonPositiveLiability(ClaimTradeError):
    pass


class PaymentFunctionMismatch(ClaimTradeError):
    pass


class MonotonicityViolation(ClaimTradeError):
    pass


class UnknownBank(ClaimTradeError):
    pass


class UnknownClaim(ClaimTradeError):
    pass


class FundsOutOfRange(ClaimTradeError):
    pass


class WrongPaymentKind(ClaimTradeError):
    pass


class NonConvergence(ClaimTradeError):
    pass


class Unaffordable(ClaimTradeError):
    pass


class SpecViolation(ClaimTradeError):
    pass


class LpInfeasible(ClaimTradeError):
    pass


class DimensionMismatch(ClaimTradeError):
    pass


class InstanceTooLarge(ClaimTradeError):
    pass


class BadParameters(ClaimTradeError):
    pass


class ParseError(ClaimTradeError):
    pass
