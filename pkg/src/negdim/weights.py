"""Multiplicity weights for a lattice of arbitrary real dimension.

For positive integer dimension D the number of lattice points at level i
is the binomial coefficient C(i + D - 1, i).  Writing it as
Gamma(i + D) / (Gamma(i + 1) Gamma(D)) continues the weight sequence to
any real D.  For non-positive integer D the numerator Gamma(i + D)
diverges at the leading indices i = 0, 1, ..., -D; those entries are
represented by the explicit `POLE` marker rather than an IEEE infinity,
so callers must decide how to treat the condensate region.

Two normalizations are provided:

* ``"unit"`` - q_0 = 1 (divide by Gamma(D)).  At non-positive integer D
  the 1/Gamma(D) factor itself vanishes, which would zero the whole
  sequence; there the unit normalization silently reduces to the raw
  scaling below, leaving the overall constant free (it is a free fit
  parameter downstream anyway).
* ``"raw"`` - Gamma(i + D) / Gamma(i + 1), no 1/Gamma(D) factor.  For
  D = -1 this gives exactly 1 / (i (i - 1)) for i >= 2.
"""

import math
from dataclasses import dataclass

from scipy.special import gammaln, gammasgn

from .errors import DomainError

_NORMALIZATIONS = ("unit", "raw")


class _PoleMarker:
    """Singleton marker for indices where Gamma(i + D) diverges."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "POLE"

    def __reduce__(self):
        return (_PoleMarker, ())


POLE = _PoleMarker()


def is_pole(value) -> bool:
    """True if `value` is the pole marker."""
    return value is POLE


def _check_dimension(dim: float) -> float:
    dim = float(dim)
    if not math.isfinite(dim):
        raise DomainError(f"dimension must be a finite real number, got {dim!r}")
    return dim


def _check_index(i: int) -> int:
    if i != int(i) or i < 0:
        raise DomainError(f"level index must be a nonnegative integer, got {i!r}")
    return int(i)


def pole_indices(dim: float) -> frozenset:
    """Indices i with i + D a non-positive integer (divergent weight).

    Empty unless D is a non-positive integer, in which case the poles
    sit at i = 0, 1, ..., -D.
    """
    dim = _check_dimension(dim)
    if dim <= 0 and float(dim).is_integer():
        return frozenset(range(int(-dim) + 1))
    return frozenset()


def weight(i: int, dim: float, normalization: str = "unit"):
    """Weight q_i(D) = Gamma(i+D) / (Gamma(i+1) Gamma(D)), or `POLE`.

    Positive integer D is evaluated in exact integer arithmetic as
    C(i + D - 1, i); everything else goes through log-Gamma with sign
    tracking.  Returns `POLE` exactly when i + D is a non-positive
    integer.
    """
    i = _check_index(i)
    dim = _check_dimension(dim)
    if normalization not in _NORMALIZATIONS:
        raise DomainError(f"unknown normalization {normalization!r}")

    dim_is_integer = float(dim).is_integer()
    if dim_is_integer and i + dim <= 0:
        return POLE

    if dim_is_integer:
        d = int(dim)
        if d > 0:
            if normalization == "unit":
                try:
                    return float(math.comb(i + d - 1, i))
                except OverflowError:
                    return math.inf
            # raw = unit * Gamma(D) = comb * (D-1)!
            try:
                return float(math.comb(i + d - 1, i) * math.factorial(d - 1))
            except OverflowError:
                return math.inf
        # Non-positive integer D past the poles: i + D >= 1, so
        # Gamma(i+D)/Gamma(i+1) = 1 / (i (i-1) ... (i+D)), a product of
        # 1 - D integer factors.  Unit normalization is undefined here
        # (1/Gamma(D) = 0); both modes return the raw value.
        denom = 1
        for m in range(i + d, i + 1):
            denom *= m
        return 1.0 / denom

    # Non-integer D: log-Gamma continuation with explicit signs.
    log_num = gammaln(i + dim)
    sign = float(gammasgn(i + dim))
    log_val = log_num - gammaln(i + 1)
    if normalization == "unit":
        log_val -= gammaln(dim)
        sign *= float(gammasgn(dim))
    return sign * math.exp(log_val)


@dataclass(frozen=True)
class WeightSequence:
    """Weights q_0..q_imax for one dimension; entries are floats or POLE."""

    dim: float
    values: tuple
    normalization: str

    def __post_init__(self):
        if self.normalization not in _NORMALIZATIONS:
            raise DomainError(f"unknown normalization {self.normalization!r}")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    @property
    def poles(self) -> frozenset:
        return frozenset(i for i, v in enumerate(self.values) if is_pole(v))


def weight_sequence(dim: float, i_max: int, normalization: str = "unit") -> WeightSequence:
    """Evaluate ``weight`` for i = 0..i_max."""
    i_max = _check_index(i_max)
    dim = _check_dimension(dim)
    values = tuple(weight(i, dim, normalization) for i in range(i_max + 1))
    return WeightSequence(dim=dim, values=values, normalization=normalization)
