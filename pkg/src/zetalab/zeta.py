"""Taylor coefficients of zeta*, zeta_T and zeta-hat_l and their w-plane transports.

z-plane series are expanded at ``z = 0``.  The Moebius change of variable
``z = w/(w+1)`` carries them to the w-plane ("theta" coefficients) and
``series_reciprocal`` turns those into the "tau" coefficients of ``1/f~(w)``.
"""

from __future__ import annotations

import functools
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import gmpy2
from gmpy2 import mpfr

from . import GENERATOR_VERSION
from .errors import DomainError, InputError, PrecisionError
from .oracle import zeta_oracle_values
from .precision import (
    PowerSeries,
    PrecisionContext,
    binomial,
    poly_from_roots_unit,
    series_div_poly,
    series_exp,
    series_mul,
    series_reciprocal,
    to_decimal_pair,
    from_decimal_pair,
)

ZETA_STAR = "zeta-star"
ZETA_TRIVIAL = "zeta-trivial"
ZETA_HAT = "zeta-hat"


@dataclass(frozen=True)
class FunctionId:
    """Which function a series/matrix/spectrum belongs to.

    ``FunctionId(ZETA_HAT, 1)`` normalizes to zeta*, since the divisor is an empty product.
    """

    kind: str = ZETA_STAR
    l: int = 0

    def __post_init__(self):
        if self.kind not in (ZETA_STAR, ZETA_TRIVIAL, ZETA_HAT):
            raise DomainError(f"unknown function kind {self.kind!r}")
        if self.kind == ZETA_HAT:
            if not isinstance(self.l, int) or self.l < 1:
                raise DomainError(f"zeta-hat needs l >= 1, got {self.l!r}")
            if self.l == 1:
                object.__setattr__(self, "kind", ZETA_STAR)
                object.__setattr__(self, "l", 0)
        elif self.l != 0:
            object.__setattr__(self, "l", 0)

    @classmethod
    def parse(cls, text: str) -> "FunctionId":
        text = text.strip()
        if text.startswith(ZETA_HAT):
            _, _, num = text.partition(":")
            try:
                return cls(ZETA_HAT, int(num))
            except ValueError:
                raise DomainError(f"zeta-hat needs an index, e.g. zeta-hat:3 (got {text!r})") from None
        return cls(text)

    @property
    def label(self) -> str:
        return f"{ZETA_HAT}:{self.l}" if self.kind == ZETA_HAT else self.kind

    @property
    def symbol(self) -> str:
        return {ZETA_STAR: "zeta*", ZETA_TRIVIAL: "zeta_T"}.get(self.kind, f"zeta^_{self.l}")

    def __str__(self):
        return self.label


ZetaStar = FunctionId(ZETA_STAR)
ZetaTrivial = FunctionId(ZETA_TRIVIAL)


def ZetaHat(l: int) -> FunctionId:
    return FunctionId(ZETA_HAT, l)


class TrivialZeroTable:
    """Exact rational positions of the trivial zeros and the limits ``W_l``."""

    @staticmethod
    def z(n: int) -> Fraction:
        return Fraction(-2 * n)

    @staticmethod
    def w(n: int) -> Fraction:
        z = TrivialZeroTable.z(n)
        return z / (1 - z)

    @staticmethod
    def W(l: int) -> Fraction:
        if l < 1:
            raise DomainError("W_l is defined for l >= 1")
        out = Fraction(1)
        for k in range(1, l + 1):
            out *= Fraction(2 * k + 1, 2 * k)
        return out


# -- zeta* via the Hasse series for eta ------------------------------------

def _hasse_weights(n_terms: int) -> list:
    """Integer numerators ``W_k`` with ``sum_{n=k}^{N} C(n,k)/2^(n+1) = W_k / 2^(N+1)``."""
    N = n_terms
    weights = []
    for k in range(N + 1):
        acc = 0
        c = 1  # C(n, k) starting at n = k
        for n in range(k, N + 1):
            acc += c << (N - n)
            c = c * (n + 1) // (n + 1 - k)
        weights.append(acc)
    return weights


def _eta_coeffs(M: int, n_terms: int, wp: int) -> list:
    """Taylor coefficients of the Hasse partial sum ``sum_{n<=N} 2^-(n+1) Delta^n (k+1)^-s``."""
    weights = _hasse_weights(n_terms)
    extra = n_terms.bit_length() + 8
    with gmpy2.context(gmpy2.get_context(), precision=wp + extra):
        scale = gmpy2.mul_2exp(mpfr(1), -(n_terms + 1))
        acc = [mpfr(0)] * (M + 1)
        for k in range(n_terms + 1):
            w = mpfr(weights[k]) * scale
            if k & 1:
                w = -w
            if k == 0:
                acc[0] += w
                continue
            neg_log = -gmpy2.log(mpfr(k + 1))
            p = w
            for j in range(M + 1):
                acc[j] += p
                p = p * neg_log / (j + 1)
    return acc


def _hasse_term_size(M: int, n: int, wp: int) -> mpfr:
    """max_j of the j-th coefficient of the n-th outer Hasse term (exact up to rounding)."""
    with gmpy2.context(gmpy2.get_context(), precision=wp + n + 16):
        acc = [mpfr(0)] * (M + 1)
        for k in range(n + 1):
            c = binomial(n, k)
            c = -c if k & 1 else c
            if k == 0:
                acc[0] += c
                continue
            neg_log = -gmpy2.log(mpfr(k + 1))
            p = mpfr(c)
            for j in range(M + 1):
                acc[j] += p
                p = p * neg_log / (j + 1)
        return max(abs(a) for a in acc) * gmpy2.mul_2exp(mpfr(1), -(n + 1))


def _pole_factor_coeffs(M: int, wp: int) -> list:
    """Taylor coefficients of ``(1 - 2^(1-s)) / (s - 1)`` (constant term 1)."""
    with gmpy2.context(gmpy2.get_context(), precision=wp):
        neg_log2 = -gmpy2.log(mpfr(2))
        c = [mpfr(1)]
        p = mpfr(2)
        for t in range(1, M + 1):
            p = p * neg_log2 / t
            c.append(p)
        h, run = [], mpfr(0)
        for t in range(M + 1):
            run += c[t]
            h.append(run)
    return h


def _target_bits(ctx: PrecisionContext, M: int) -> int:
    # the Moebius pullback multiplies absolute errors by up to 2^M
    return ctx.work_bits + M + 8


def zeta_star_taylor(M: int, ctx: PrecisionContext, max_terms: int | None = None) -> PowerSeries:
    """Coefficients ``a_0..a_M`` of ``zeta*(z) = 2(z-1)zeta(z)`` at ``z = 0`` (``a_0 = 1``).

    ``(s-1)zeta(s) = [(s-1)/(1-2^(1-s))] * eta(s)`` with eta from the globally
    convergent Hasse series, expanded termwise in ``s``.  The truncation point is
    accepted once the first omitted outer term is below the absolute target.
    """
    if M < 0:
        raise DomainError("order must be non-negative")
    target = _target_bits(ctx, M)
    wp = target + 16
    cap = max_terms if max_terms is not None else 4 * target
    n_terms = target + 8
    while True:
        if n_terms > cap:
            raise PrecisionError(
                f"Hasse series needs more than {cap} terms for order {M} at {ctx.bits} bits; "
                "raise --bits or the term cap")
        size = _hasse_term_size(M, n_terms + 1, wp)
        if size < gmpy2.mul_2exp(mpfr(1), -target):
            break
        n_terms = int(n_terms * 1.25) + 8
    eta = _eta_coeffs(M, n_terms, wp)
    with gmpy2.context(gmpy2.get_context(), precision=wp):
        pole = PowerSeries(tuple(_pole_factor_coeffs(M, wp)), _wp_ctx(wp))
        g = series_reciprocal(pole)
        prod = series_mul(g, PowerSeries(tuple(eta), _wp_ctx(wp)))
        coeffs = [2 * c for c in prod.coeffs]
    with ctx.local():
        coeffs = [mpfr(c) for c in coeffs]
    out = PowerSeries(tuple(coeffs), ctx, label=f"{ZETA_STAR}/z")
    out.meta.update(hasse_terms=n_terms, generator_bits=wp)
    return out


def _wp_ctx(wp: int) -> PrecisionContext:
    return PrecisionContext(max(64, wp), 0)


def zeta_trivial_taylor(M: int, ctx: PrecisionContext) -> PowerSeries:
    """Coefficients of ``zeta_T(z) = pi^(z/2)/Gamma(1+z/2) = exp(z/2 ln pi - lnGamma(1+z/2))``."""
    if M < 0:
        raise DomainError("order must be non-negative")
    wp = _target_bits(ctx, M) + 16
    wctx = _wp_ctx(wp)
    table = zeta_oracle_values(wctx, max_k=max(M, 3))
    with gmpy2.context(gmpy2.get_context(), precision=wp):
        log_series = [mpfr(0)] * (M + 1)
        if M >= 1:
            log_series[1] = (table.log_pi + table.euler_gamma) / 2
        for k in range(2, M + 1):
            # -lnGamma(1+x) contributes -(-1)^k zeta(k) x^k / k with x = z/2
            term = table.zeta(k) / (k * gmpy2.mul_2exp(mpfr(1), k))
            log_series[k] = -term if k % 2 == 0 else term
        ex = series_exp(PowerSeries(tuple(log_series), wctx))
    with ctx.local():
        coeffs = tuple(mpfr(c) for c in ex.coeffs)
    return PowerSeries(coeffs, ctx, label=f"{ZETA_TRIVIAL}/z")


def zeta_hat_taylor(l: int, M: int, ctx: PrecisionContext) -> PowerSeries:
    """``zeta*(z) / prod_{k<l}(1 - z/z_k)`` with ``z_k = -2k``."""
    if l < 1:
        raise DomainError("zeta-hat needs l >= 1")
    base = zeta_star_taylor(M, ctx)
    if l == 1:
        return base
    poly = poly_from_roots_unit([TrivialZeroTable.z(k) for k in range(1, l)])
    # divide at generator precision so the later pullback keeps its accuracy
    wctx = _wp_ctx(_target_bits(ctx, M) + 16)
    with wctx.local():
        hi = PowerSeries(tuple(mpfr(c) for c in base.coeffs), wctx)
        q = series_div_poly(hi, poly)
    with ctx.local():
        coeffs = tuple(mpfr(c) for c in q.coeffs)
    return PowerSeries(coeffs, ctx, label=f"{ZETA_HAT}:{l}/z")


def moebius_pullback(a: PowerSeries) -> PowerSeries:
    """theta-coefficients of ``f(w/(w+1))``: ``theta_m = sum_k a_k (-1)^(m-k) C(m-1, m-k)``."""
    with a.ctx.local():
        if abs(a.coeffs[0] - 1) > a.ctx.eps:
            raise DomainError("moebius_pullback requires f(0) = 1")
    M = a.order
    ac = a.coeffs
    with a.ctx.local(extra_bits=M + 8):
        theta = [mpfr(1)]
        for m in range(1, M + 1):
            s = mpfr(0)
            for k in range(1, m + 1):
                c = binomial(m - 1, m - k)
                s += ac[k] * (c if (m - k) % 2 == 0 else -c)
            theta.append(s)
    with a.ctx.local():
        theta = [+t for t in theta]
    return PowerSeries(tuple(theta), a.ctx, label=a.label.replace("/z", "/theta"))


def moebius_pushforward(theta: PowerSeries) -> PowerSeries:
    """Inverse of :func:`moebius_pullback`: ``a_m = sum_k theta_k C(m-1, m-k)``."""
    with theta.ctx.local():
        if abs(theta.coeffs[0] - 1) > theta.ctx.eps:
            raise DomainError("moebius_pushforward requires theta_0 = 1")
    M = theta.order
    tc = theta.coeffs
    with theta.ctx.local(extra_bits=M + 8):
        a = [mpfr(1)]
        for m in range(1, M + 1):
            s = mpfr(0)
            for k in range(1, m + 1):
                s += tc[k] * binomial(m - 1, m - k)
            a.append(s)
    with theta.ctx.local():
        a = [+c for c in a]
    return PowerSeries(tuple(a), theta.ctx, label=theta.label.replace("/theta", "/z"))


def tau_coefficients(theta: PowerSeries) -> PowerSeries:
    """Taylor coefficients of ``1/f~(w)``."""
    return series_reciprocal(theta).relabel(theta.label.replace("/theta", "/tau"))


# -- dispatch and caching ---------------------------------------------------

def canonical_order(M: int, block: int = 64) -> int:
    """Round a requested order up so results do not depend on request history."""
    return max(block, -(-M // block) * block)


def taylor(function: FunctionId, M: int, ctx: PrecisionContext) -> PowerSeries:
    """z-plane Taylor coefficients of ``function`` through order ``M`` (computed at a canonical order)."""
    full = _taylor_canonical(function, canonical_order(M), ctx)
    return full.truncate(M)


@functools.lru_cache(maxsize=64)
def _taylor_canonical(function: FunctionId, M: int, ctx: PrecisionContext) -> PowerSeries:
    cache_dir = default_cache_dir()
    if cache_dir is not None:
        cached = load_coefficients(cache_dir, function, ctx, M)
        if cached is not None:
            return cached
    if function.kind == ZETA_STAR:
        out = zeta_star_taylor(M, ctx)
    elif function.kind == ZETA_TRIVIAL:
        out = zeta_trivial_taylor(M, ctx)
    else:
        out = zeta_hat_taylor(function.l, M, ctx)
    return out.relabel(f"{function.label}/z")


def theta_series(function: FunctionId, M: int, ctx: PrecisionContext) -> PowerSeries:
    return _theta_canonical(function, canonical_order(M), ctx).truncate(M)


@functools.lru_cache(maxsize=64)
def _theta_canonical(function: FunctionId, M: int, ctx: PrecisionContext) -> PowerSeries:
    return moebius_pullback(_taylor_canonical(function, M, ctx))


def tau_series(function: FunctionId, M: int, ctx: PrecisionContext) -> PowerSeries:
    return tau_coefficients(theta_series(function, M, ctx))


# -- coefficient cache files -----------------------------------------------

CACHE_ENV = "ZETALAB_CACHE_DIR"


def default_cache_dir() -> Path | None:
    value = os.environ.get(CACHE_ENV)
    return Path(value) if value else None


def cache_path(cache_dir: Path, function: FunctionId, ctx: PrecisionContext, order: int) -> Path:
    name = function.label.replace(":", "-")
    return Path(cache_dir) / f"{name}_b{ctx.bits}_g{ctx.guard_bits}_o{order}.json"


def coefficient_document(series: PowerSeries, function: FunctionId) -> dict:
    digits = math.ceil(series.ctx.work_bits * math.log10(2)) + 3
    return {
        "function": function.label,
        "precision_bits": series.ctx.bits,
        "guard_bits": series.ctx.guard_bits,
        "order": series.order,
        "generator_version": GENERATOR_VERSION,
        "coeffs": [to_decimal_pair(c, digits) for c in series.coeffs],
    }


def write_coefficients(cache_dir: Path, series: PowerSeries, function: FunctionId) -> Path:
    """Write the JSON cache document; identical input gives byte-identical output."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_path(cache_dir, function, series.ctx, series.order)
    text = json.dumps(coefficient_document(series, function), indent=1) + "\n"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text)
    tmp.replace(path)
    return path


def load_coefficients(cache_dir: Path, function: FunctionId, ctx: PrecisionContext,
                      order: int) -> PowerSeries | None:
    """Read a cached series, or ``None`` when absent, stale or for different settings."""
    path = cache_path(Path(cache_dir), function, ctx, order)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if (doc.get("generator_version") != GENERATOR_VERSION or doc.get("function") != function.label
            or doc.get("precision_bits") != ctx.bits or doc.get("guard_bits") != ctx.guard_bits
            or doc.get("order") != order or len(doc.get("coeffs", [])) != order + 1):
        return None
    coeffs = tuple(from_decimal_pair(p, ctx) for p in doc["coeffs"])
    return PowerSeries(coeffs, ctx, label=f"{function.label}/z")


def require_order(series: PowerSeries, order: int, what: str):
    if series.order < order:
        raise InputError(f"{what} needs coefficients through order {order}, have {series.order}")
