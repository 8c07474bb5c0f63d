"""Independent reference values computed with mpmath.

Nothing in here touches the gmpy2 series machinery, so agreement between the
two is a genuine cross-check.  Zeta values come from Euler-Maclaurin
summation with an explicit remainder bound.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import gmpy2
import mpmath
from gmpy2 import mpfr

from .errors import ConvergenceError
from .precision import PrecisionContext


def mpf_to_mpfr(x) -> mpfr:
    """Exact conversion of an mpmath ``mpf`` to gmpy2 (current gmpy2 precision must hold it)."""
    if not isinstance(x, mpmath.mpf):
        with mpmath.workprec(gmpy2.get_context().precision):
            x = mpmath.mpf(x)
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return mpfr(0)
    v = gmpy2.mul_2exp(mpfr(gmpy2.mpz(man)), exp)
    return -v if sign else v


def mpfr_to_mpf(x) -> mpmath.mpf:
    if isinstance(x, gmpy2.mpc):
        return mpmath.mpc(mpfr_to_mpf(x.real), mpfr_to_mpf(x.imag))
    if gmpy2.is_zero(x):
        return mpmath.mpf(0)
    man, exp = x.as_mantissa_exp()
    # exact: mpf keeps the full mantissa when built at sufficient precision
    with mpmath.workprec(max(53, int(man).bit_length())):
        return mpmath.ldexp(mpmath.mpf(int(man)), int(exp))


def euler_maclaurin_zeta(s, prec: int):
    """zeta(s) for s != 1 to absolute/relative accuracy about ``2**-prec``.

    Uses ``sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2 + sum_j B_2j/(2j)! (s)_{2j-1} N^(-s-2j+1)``
    and stops once the standard remainder bound
    ``|(s)_{2J+1} B_{2J+2}/(2J+2)!| N^(-sigma-2J-1) |s+2J+1|/(sigma+2J+1)`` drops below the target.
    """
    with mpmath.workprec(prec + 20):
        s = mpmath.mpmathify(s)
        if s == 1:
            raise ValueError("zeta has a pole at s = 1")
        sigma = mpmath.re(s)
        target = mpmath.ldexp(1, -prec - 4)
        n_terms = max(10, int(prec * 0.3) + int(abs(s)) + 1)
        for _ in range(12):
            result = _em_sum(s, sigma, n_terms, target)
            if result is not None:
                return +result
            n_terms *= 2
        raise ConvergenceError(f"Euler-Maclaurin did not reach 2^-{prec} for s={s}")


def _em_sum(s, sigma, n_terms, target):
    N = mpmath.mpf(n_terms)
    head = mpmath.fsum(mpmath.power(n, -s) for n in range(1, n_terms))
    total = head + mpmath.power(N, 1 - s) / (s - 1) + mpmath.power(N, -s) / 2
    scale = abs(total) if total != 0 else mpmath.mpf(1)
    rising = s  # (s)_{2j-1}
    npow = mpmath.power(N, -s - 1)
    n2 = N * N
    for j in range(1, 4 * n_terms):
        term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * npow
        total += term
        # remainder bound after j terms
        rising_next = rising * (s + 2 * j - 1) * (s + 2 * j)
        denom = sigma + 2 * j + 1
        if denom > 0:
            bound = (abs(rising_next * mpmath.bernoulli(2 * j + 2) / mpmath.factorial(2 * j + 2))
                     * mpmath.power(N, -sigma - 2 * j - 1) * abs(s + 2 * j + 1) / denom)
            if bound < target * max(scale, mpmath.mpf(1)):
                return total
            if j > 8 and bound > abs(term) * 10:
                return None  # asymptotic series started diverging; need larger N
        rising = rising_next
        npow /= n2
    return None


def euler_maclaurin_zeta_derivative(s, prec: int):
    """zeta'(s) by a central difference of the Euler-Maclaurin evaluator.

    With step ``h = 2^-(prec+10)`` and values accurate to ``2^-(3 prec+40)``
    both the ``h^2`` truncation and the cancellation stay below ``2^-prec``.
    """
    wp = 3 * prec + 40
    with mpmath.workprec(wp):
        s = mpmath.mpmathify(s)
        h = mpmath.ldexp(1, -prec - 10)
        d = (euler_maclaurin_zeta(s + h, wp) - euler_maclaurin_zeta(s - h, wp)) / (2 * h)
    with mpmath.workprec(prec + 20):
        return +d


@dataclass(frozen=True)
class OracleTable:
    """Reference constants at a given precision (all gmpy2 ``mpfr``)."""

    ctx: PrecisionContext
    euler_gamma: mpfr
    pi: mpfr
    log_pi: mpfr
    log_2pi: mpfr
    zeta_half: mpfr
    zeta_3: mpfr
    zeta_prime_0: mpfr
    zeta_prime_minus2: mpfr
    zeta_int: tuple  # zeta(k) for k = 0..K, entries 0 and 1 unused (None)
    R1: mpfr
    R1_from_derivative: mpfr

    def zeta(self, k: int) -> mpfr:
        return self.zeta_int[k]


@functools.lru_cache(maxsize=32)
def zeta_oracle_values(ctx: PrecisionContext, max_k: int = 2, prec: int | None = None) -> OracleTable:
    """Constants needed by the generators and by the cross-checks.

    ``prec`` overrides the mpmath working precision (default ``ctx.work_bits + 32``).
    """
    prec = prec or ctx.work_bits + 32
    with mpmath.workprec(prec):
        gamma = +mpmath.euler
        pi = +mpmath.pi
        log_pi = mpmath.log(pi)
        log_2pi = mpmath.log(2 * pi)
        z_half = euler_maclaurin_zeta(mpmath.mpf(1) / 2, prec)
        zs = [None, None] + [euler_maclaurin_zeta(k, prec) for k in range(2, max(max_k, 3) + 1)]
        z3 = zs[3]
        zp0 = euler_maclaurin_zeta_derivative(0, prec)
        zpm2 = euler_maclaurin_zeta_derivative(-2, prec)
        r1 = pi ** 2 / (9 * z3)
        r1_d = -1 / (36 * zpm2)
    with gmpy2.context(gmpy2.get_context(), precision=prec + 8):
        conv = mpf_to_mpfr
        table = dict(
            euler_gamma=conv(gamma), pi=conv(pi), log_pi=conv(log_pi), log_2pi=conv(log_2pi),
            zeta_half=conv(z_half), zeta_3=conv(z3), zeta_prime_0=conv(zp0),
            zeta_prime_minus2=conv(zpm2),
            zeta_int=tuple(None if z is None else conv(z) for z in zs[: max(max_k, 3) + 1]),
            R1=conv(r1), R1_from_derivative=conv(r1_d),
        )
    return OracleTable(ctx=ctx, **table)


def zeta_point(s, ctx: PrecisionContext):
    """Point value of zeta (mpmath number) at the context's working precision."""
    return euler_maclaurin_zeta(s, ctx.work_bits)


def zeta_star_point(z, ctx: PrecisionContext):
    """``2(z-1) zeta(z)`` at a point, via Euler-Maclaurin."""
    with mpmath.workprec(ctx.work_bits + 20):
        z = mpmath.mpmathify(z)
        return 2 * (z - 1) * euler_maclaurin_zeta(z, ctx.work_bits)


def zeta_trivial_point(z, ctx: PrecisionContext):
    """``pi^(z/2) / Gamma(1 + z/2)`` via mpmath."""
    with mpmath.workprec(ctx.work_bits + 20):
        z = mpmath.mpmathify(z)
        return mpmath.power(mpmath.pi, z / 2) * mpmath.rgamma(1 + z / 2)
