"""Non-asymptotic upper functions for suprema of random functionals."""
from .errors import CapacityInfinite, ClassSError, DomainError, NumericalGuard
from .weights import WeightFunction, certified_s_star, ensure_class_S, eval_s_star, s_star

__version__ = "0.1.0"
