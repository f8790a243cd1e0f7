"""Working-precision context shared by every numerical operation.

All arithmetic runs on mpmath under an explicit significand width.  A
PrecisionCtx travels with every operation; nothing reads global state
except through `workprec`, which scopes the mpmath precision to a block.
Floats are taken at their exact binary value; pass decimal strings when
a decimal literal is meant (the CLI always does).
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

DEFAULT_BITS = 256


def to_mpf(x):
    """Convert x to mpf (or mpc) at the current precision.

    Accepts int, float, str, Fraction, mpf, mpc, complex.
    """
    if isinstance(x, (mp.mpf, mp.mpc)):
        return x
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    if isinstance(x, complex):
        return mp.mpc(x.real, x.imag)
    return mp.mpf(x)


@dataclass(frozen=True)
class PrecisionCtx:
    """Precision contract: significand bits, relative tolerance, series budget.

    The default pairs 256 bits (~77 decimal digits) with a 1e-30 relative
    tolerance, leaving a wide guard band for cancellation.
    """

    significand_bits: int = DEFAULT_BITS
    tol: object = field(default="1e-30")
    max_series_terms: int = 20000

    def __post_init__(self):
        if self.significand_bits < 64:
            raise ValueError("significand_bits must be >= 64")
        if self.max_series_terms <= 0:
            raise ValueError("max_series_terms must be positive")
        t = self.tol_mpf()
        if not t > 0:
            raise ValueError("tol must be positive")

    def tol_mpf(self):
        with mp.workprec(max(self.significand_bits, 64)):
            return to_mpf(self.tol)

    @property
    def decimal_digits(self) -> int:
        """Full decimal digits representable at this width (floor(bits*log10 2))."""
        return int(math.floor(self.significand_bits * math.log10(2)))

    def scaled(self, bits: int) -> "PrecisionCtx":
        """Same contract at a different significand width."""
        return PrecisionCtx(bits, self.tol, self.max_series_terms)


@contextmanager
def workprec(prec: PrecisionCtx, extra_bits: int = 0):
    """Run a block at prec.significand_bits (+ guard bits)."""
    with mp.workprec(prec.significand_bits + extra_bits):
        yield mp


def nstr_full(x, prec: PrecisionCtx) -> str:
    """Decimal string carrying the full digit count of the context."""
    return mp.nstr(x, prec.decimal_digits, strip_zeros=True)
