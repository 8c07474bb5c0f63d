"""Arbitrary-precision scalars and truncated power series.

All numbers are gmpy2 ``mpfr`` (real) or ``mpc`` (complex) values.  A
:class:`PrecisionContext` fixes the working precision; every routine that
creates new numbers runs inside ``ctx.local()`` so results carry
``bits + guard_bits`` bits of mantissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .errors import ConfigurationError, DomainError

HPReal = mpfr
HPComplex = mpc
HPNumber = Union[mpfr, mpc]

MIN_BITS = 64


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision shared by a computation.

    ``bits`` is the published precision, ``guard_bits`` are carried on top of
    it internally.  Tolerances are expressed as powers of ``eps = 2**-bits``.
    """

    bits: int = 256
    guard_bits: int = 64

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < MIN_BITS:
            raise ConfigurationError(f"bits must be an integer >= {MIN_BITS}, got {self.bits!r}")
        if not isinstance(self.guard_bits, int) or self.guard_bits < 0:
            raise ConfigurationError(f"guard_bits must be a non-negative integer, got {self.guard_bits!r}")

    @property
    def work_bits(self) -> int:
        return self.bits + self.guard_bits

    @property
    def eps(self) -> mpfr:
        # powers of two are exact at any mpfr precision
        return gmpy2.mul_2exp(mpfr(1), -self.bits)

    def local(self, extra_bits: int = 0):
        """Context manager setting the gmpy2 precision to ``work_bits + extra_bits``."""
        return gmpy2.context(gmpy2.get_context(), precision=self.work_bits + extra_bits)

    def tol(self, numerator: int = 1, denominator: int = 1) -> mpfr:
        """``2**(-bits * numerator / denominator)`` as an exact power of two."""
        return gmpy2.mul_2exp(mpfr(1), -((self.bits * numerator) // denominator))

    def pow2(self, exponent: int) -> mpfr:
        return gmpy2.mul_2exp(mpfr(1), exponent)

    def scalar(self, x) -> HPNumber:
        """Convert ints, Fractions, strings, floats and gmpy2 numbers at working precision."""
        with self.local():
            return to_hp(x)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.bits, self.guard_bits)

    @classmethod
    def for_matrix(cls, l: int, m: int, bits_per_step: int = 2, guard_bits: int = 64,
                   floor: int = 256) -> "PrecisionContext":
        """Default precision for computations on the ``m x m`` matrix with offset ``l``."""
        return cls(max(floor, bits_per_step * (l + m)), guard_bits)


def to_hp(x) -> HPNumber:
    """Convert ``x`` at the *current* gmpy2 precision."""
    if isinstance(x, mpc):
        return mpc(x)
    if isinstance(x, complex):
        return mpc(x)
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator))
    if isinstance(x, tuple) and len(x) == 2:
        return mpc(to_hp(x[0]), to_hp(x[1]))
    return mpfr(x)


def is_complex(x) -> bool:
    return isinstance(x, mpc)


def real_part(x) -> mpfr:
    return x.real if isinstance(x, mpc) else x


def imag_part(x) -> mpfr:
    return x.imag if isinstance(x, mpc) else mpfr(0)


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient, 0 outside ``0 <= k <= n``."""
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


# -- decimal text I/O -------------------------------------------------------

def real_to_decimal(x, digits: int) -> str:
    """Deterministic decimal string with ``digits`` significant digits.

    Positional for decimal exponents in ``[-6, 21)``, scientific otherwise.
    """
    x = mpfr(x) if not isinstance(x, mpfr) else x
    if gmpy2.is_zero(x):
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e10 = exp - 1
    if -6 <= e10 < 0:
        return f"{sign}0.{'0' * (-e10 - 1)}{mant}"
    if 0 <= e10 < 21:
        mant = mant.ljust(e10 + 1, "0")
        head, tail = mant[: e10 + 1], mant[e10 + 1:]
        return f"{sign}{head}.{tail}" if tail else f"{sign}{head}"
    body = mant[0] + ("." + mant[1:] if len(mant) > 1 else "")
    return f"{sign}{body}e{e10}"


def to_decimal_pair(x, digits: int) -> list:
    """``[re, im]`` decimal strings for real or complex ``x``."""
    return [real_to_decimal(real_part(x), digits), real_to_decimal(imag_part(x), digits)]


def from_decimal_pair(pair, ctx: PrecisionContext) -> HPNumber:
    re, im = pair
    with ctx.local():
        if im in ("0", "0.0", "-0"):
            return mpfr(re)
        return mpc(mpfr(re), mpfr(im))


def output_digits(ctx: PrecisionContext) -> int:
    """Significant digits used in published decimal strings."""
    return max(6, min(ctx.bits // 4, int((ctx.bits - ctx.guard_bits) * math.log10(2))))


# -- truncated power series -------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """Truncated Taylor series ``sum(coeffs[k] * x**k for k <= order)``."""

    coeffs: tuple
    ctx: PrecisionContext
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise DomainError("a power series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def from_values(cls, values: Sequence, ctx: PrecisionContext, label: str = "") -> "PowerSeries":
        with ctx.local():
            return cls(tuple(to_hp(v) for v in values), ctx, label)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise DomainError(f"cannot extend a series of order {self.order} to {order}")
        return PowerSeries(self.coeffs[: order + 1], self.ctx, self.label, dict(self.meta))

    def relabel(self, label: str) -> "PowerSeries":
        return PowerSeries(self.coeffs, self.ctx, label, dict(self.meta))

    def is_real(self) -> bool:
        return not any(isinstance(c, mpc) for c in self.coeffs)

    def horner(self, x) -> HPNumber:
        with self.ctx.local():
            x = to_hp(x)
            acc = mpfr(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        _check_ctx(self, other)
        n = min(self.order, other.order) + 1
        with self.ctx.local():
            return PowerSeries(tuple(self.coeffs[k] + other.coeffs[k] for k in range(n)), self.ctx)

    def scale(self, factor) -> "PowerSeries":
        with self.ctx.local():
            f = to_hp(factor)
            return PowerSeries(tuple(f * c for c in self.coeffs), self.ctx, self.label)


def _check_ctx(a: PowerSeries, b: PowerSeries):
    if a.ctx != b.ctx:
        raise ConfigurationError(f"precision contexts differ: {a.ctx} vs {b.ctx}")


def _require_unit_constant(a: PowerSeries, what: str):
    c0 = a.coeffs[0]
    with a.ctx.local():
        if abs(c0 - 1) > a.ctx.eps:
            raise DomainError(f"{what} requires constant coefficient 1, got {c0}")


def series_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product truncated at ``min(a.order, b.order)``."""
    _check_ctx(a, b)
    n = min(a.order, b.order) + 1
    ac, bc = a.coeffs, b.coeffs
    with a.ctx.local():
        out = []
        for m in range(n):
            s = mpfr(0)
            for k in range(m + 1):
                s += ac[k] * bc[m - k]
            out.append(s)
    return PowerSeries(tuple(out), a.ctx)


def series_reciprocal(a: PowerSeries) -> PowerSeries:
    """``1/a`` for a series with ``a[0] == 1``."""
    _require_unit_constant(a, "series_reciprocal")
    ac = a.coeffs
    with a.ctx.local():
        r = [mpfr(1)]
        for m in range(1, a.order + 1):
            s = mpfr(0)
            for k in range(1, m + 1):
                s += ac[k] * r[m - k]
            r.append(-s)
    return PowerSeries(tuple(r), a.ctx)


def series_exp(a: PowerSeries) -> PowerSeries:
    """Formal exponential of a series with zero constant term (``m r_m = sum k a_k r_{m-k}``)."""
    with a.ctx.local():
        if abs(a.coeffs[0]) > a.ctx.eps:
            raise DomainError(f"series_exp requires a zero constant term, got {a.coeffs[0]}")
        ac = a.coeffs
        r = [mpfr(1)]
        for m in range(1, a.order + 1):
            s = mpfr(0)
            for k in range(1, m + 1):
                s += k * ac[k] * r[m - k]
            r.append(s / m)
    return PowerSeries(tuple(r), a.ctx)


def series_div_poly(a: PowerSeries, p: Sequence) -> PowerSeries:
    """Divide ``a`` by the polynomial ``p`` (``p[0] == 1``), keeping ``a.order`` terms."""
    with a.ctx.local():
        pc = [to_hp(c) for c in p]
        if not pc or abs(pc[0] - 1) > a.ctx.eps:
            raise DomainError("series_div_poly requires p[0] == 1")
        r = []
        for m in range(a.order + 1):
            s = a.coeffs[m]
            for k in range(1, min(m, len(pc) - 1) + 1):
                s -= pc[k] * r[m - k]
            r.append(s)
    return PowerSeries(tuple(r), a.ctx)


def poly_from_roots_unit(roots: Sequence[Fraction]) -> list:
    """Exact coefficients of ``prod(1 - x/r)`` for nonzero rational roots."""
    coeffs = [Fraction(1)]
    for r in roots:
        factor = -1 / Fraction(r)
        nxt = coeffs + [Fraction(0)]
        for k in range(len(coeffs), 0, -1):
            nxt[k] += factor * coeffs[k - 1]
        coeffs = nxt
    return coeffs
