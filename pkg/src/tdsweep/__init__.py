"""One-to-all travel-time profiles on time-dependent road networks.

The pipeline: parse or generate a time-dependent graph (``graph``), build a
contraction hierarchy over it (``hierarchy``), then answer one-to-all profile
queries either with the label-correcting baseline (``profile_search``) or
with the pruned downward sweep (``sweep``).  ``ttf`` supplies the
piecewise-linear travel-time function algebra that all of them share.
"""

from .ttf import (
    DEFAULT_PERIOD,
    PeriodMismatchError,
    TTF,
    TTFPoint,
    approximate,
    dominates,
    evaluate,
    extrema,
    link,
    merge_min,
    validate_fifo,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PERIOD",
    "PeriodMismatchError",
    "TTF",
    "TTFPoint",
    "approximate",
    "dominates",
    "evaluate",
    "extrema",
    "link",
    "merge_min",
    "validate_fifo",
    "__version__",
]
