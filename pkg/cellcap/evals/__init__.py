from .special_functions import SpecialFunctionEval
from .interference import InterferenceEval
from .capacity import CapacityEval
from .quoted import QuotedRatioEval
from .runner import ValidationRunner

__all__ = [
    "SpecialFunctionEval",
    "InterferenceEval",
    "CapacityEval",
    "QuotedRatioEval",
    "ValidationRunner",
]
