"""Exact formal group law computations: Weierstrass and elliptic laws, flop
differences, Hirzebruch genera, Chow-ring towers and numeric sigma functions."""

from .series import GF, QQ, NotDivisibleError, SeriesError, TruncatedSeries, VarTable
from .fgl import (
    ExponentialPair,
    FGLValidationError,
    FormalGroupLaw,
    additive_fgl,
    fgl_from_exponential,
    fgl_twist,
    multiplicative_fgl,
    universal_fgl,
)
from .weierstrass import (
    WeierstrassCurve,
    curve_formal_group,
    curve_invariants,
    discriminant_check,
    krichever_curve_fgl,
    krichever_fgl,
)

__version__ = "0.1.0"
