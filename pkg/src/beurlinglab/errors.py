"""Exception hierarchy shared by all modules."""


class BeurlingLabError(Exception):
    """Base class for every error raised by beurlinglab."""


class NotHermitian(BeurlingLabError):
    pass


class NotPSD(BeurlingLabError):
    pass


class NotAContraction(BeurlingLabError):
    def __init__(self, norm):
        super().__init__(f"operator norm {norm:.6g} exceeds 1")
        self.norm = norm


class NotStarStable(BeurlingLabError):
    pass


class TruncationOverflow(BeurlingLabError):
    """A shift or product would push mass past the truncation degree."""


class LevelMismatch(BeurlingLabError):
    pass


class OutsideDisc(BeurlingLabError):
    pass


class DimensionMismatch(BeurlingLabError):
    pass


class NotInvariant(BeurlingLabError):
    pass


class EquivalenceViolation(BeurlingLabError):
    """Absorption and ergodicity verdicts disagree on a determinate instance."""


class HorizonExceeded(BeurlingLabError):
    pass


class NoInvariantVector(BeurlingLabError):
    pass


class NotProductForm(BeurlingLabError):
    pass


class NotVacuumFixing(BeurlingLabError):
    pass


class Inconclusive(BeurlingLabError):
    pass


class NotIsometric(BeurlingLabError):
    pass


class NotConvergent(BeurlingLabError):
    pass


class BadDims(BeurlingLabError):
    pass
