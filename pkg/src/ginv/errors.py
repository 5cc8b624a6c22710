"""Exception hierarchy shared by every module."""


class GinvError(Exception):
    """Base class for toolkit errors."""


class DimensionMismatch(GinvError, ValueError):
    pass


class ZeroMatrix(GinvError):
    pass


class Singular(GinvError):
    pass


class NotIdempotent(GinvError):
    pass


class NotGroupInvertible(GinvError):
    """Raised when the core G.F of a full-rank factorization is not invertible.

    ``rank`` and ``rank_square`` are the numerical ranks of M and M^2.
    """

    def __init__(self, rank: int, rank_square: int, detail: str = ""):
        self.rank = rank
        self.rank_square = rank_square
        msg = f"not group invertible: rank(M)={rank}, rank(M^2)={rank_square}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NoLambda(GinvError):
    pass


class NotCommuting(GinvError):
    pass


class ZeroScalar(GinvError, ValueError):
    pass


class HypothesisViolation(GinvError):
    def __init__(self, theorem_id: str, failing: dict):
        self.theorem_id = theorem_id
        self.failing = dict(failing)
        items = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.failing.items())
        super().__init__(f"{theorem_id} hypotheses fail: {items}")


class SearchExhausted(GinvError):
    pass


class ContractViolation(GinvError):
    """A forged instance broke its own contract (oracle disagreement)."""


class FormatError(GinvError, ValueError):
    """Malformed input file; message carries the offending location."""
