"""Pade approximants of f~(w), their leading numerator coefficients and the R_l estimator.

The leading coefficient ``p_{l,m,l}`` is available by two independent routes:
solving the Pade contact conditions (a Toeplitz linear system) and the Jacobi
ratio ``det L_{l,m+1} / det L_{l,m}``.  For ``l = 1`` a third route,
``-tau_{m+1}/tau_m``, comes from the reciprocal series.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import linalg
from .errors import DegeneracyError, InputError, PrecisionError
from .precision import PowerSeries, PrecisionContext, output_digits, real_to_decimal, to_decimal_pair, to_hp
from .toeplitz import build_toeplitz
from .zeta import FunctionId, TrivialZeroTable, ZetaStar, require_order, tau_coefficients


@dataclass(frozen=True, eq=False)
class PadeResult:
    """``P/Q`` with ``P = 1 + p_1 w + ... + p_l w^l`` and ``Q = 1 + q_1 w + ... + q_m w^m``."""

    l: int
    m: int
    P: tuple
    Q: tuple
    residual_order: int
    ctx: PrecisionContext

    @property
    def leading(self):
        return self.P[self.l]


def W_limit(l: int) -> Fraction:
    """``prod_{k=1..l} (2k+1)/(2k)``, the predicted limit of ``p_{l,m,l}``."""
    return TrivialZeroTable.W(l)


def _theta_at(theta: PowerSeries, k: int):
    return theta.coeffs[k] if k >= 0 else mpfr(0)


def contact_residuals(theta: PowerSeries, P: Sequence, Q: Sequence, upto: int) -> list:
    """Coefficients of ``Q f~ - P`` for degrees ``0..upto``, each scaled by its term magnitude."""
    out = []
    with theta.ctx.local():
        for d in range(upto + 1):
            s = mpfr(0)
            scale = mpfr(0)
            for j in range(min(d, len(Q) - 1) + 1):
                t = Q[j] * theta.coeffs[d - j]
                s += t
                scale += abs(t)
            if d < len(P):
                s -= P[d]
                scale += abs(P[d])
            out.append((s, scale))
    return out


def pade_approximant(l: int, m: int, theta: PowerSeries) -> PadeResult:
    """``[l/m]`` Pade approximant from the contact conditions on degrees ``l+1..l+m``."""
    if l < 0 or m < 1:
        raise InputError(f"need l >= 0 and m >= 1, got l={l}, m={m}")
    require_order(theta, l + m + 1, f"the [{l}/{m}] Pade approximant")
    ctx = theta.ctx
    A = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            A[i, j] = _theta_at(theta, l + i - j)
    rhs = []
    with ctx.local():
        for i in range(m):
            rhs.append(-theta.coeffs[l + 1 + i])
    try:
        q = linalg.lu_solve(A, rhs, ctx)
    except DegeneracyError:
        raise DegeneracyError(f"Pade [{l}/{m}] system is singular (block in the Pade table)") from None
    with ctx.local():
        Q = [mpfr(1)] + list(q)
        P = []
        for d in range(l + 1):
            s = mpfr(0)
            for j in range(min(d, m) + 1):
                s += Q[j] * theta.coeffs[d - j]
            P.append(s)
    res = contact_residuals(theta, P, Q, l + m + 1)
    tol = ctx.tol(1, 4)
    order = len(res)
    with ctx.local():
        for d, (r, scale) in enumerate(res):
            if abs(r) > tol * max(scale, mpfr(1)):
                order = d
                break
    if order < l + m + 1:
        raise PrecisionError(f"Pade [{l}/{m}] contact verified only through degree {order - 1}")
    return PadeResult(l, m, tuple(P), tuple(Q), order, ctx)


def leading_coeff_det_ratio(l: int, m: int, theta: PowerSeries):
    """``det L_{l,m+1} / det L_{l,m}``."""
    require_order(theta, l + m, f"det L_{{{l},{m + 1}}}")
    ctx = theta.ctx
    d0 = linalg.determinant(build_toeplitz(l, m, theta).entries, ctx)
    d1 = linalg.determinant(build_toeplitz(l, m + 1, theta).entries, ctx)
    with ctx.local():
        if abs(d0) <= ctx.eps:
            raise DegeneracyError(f"det L_{{{l},{m}}} vanishes at working precision")
        return d1 / d0


def tau_ratio(tau: PowerSeries, m: int):
    """``-tau_{m+1} / tau_m``."""
    with tau.ctx.local():
        return -tau.coeffs[m + 1] / tau.coeffs[m]


# -- R_l estimation -----------------------------------------------------------

def aitken(values: Sequence) -> tuple:
    """One geometric-ratio elimination pass: ``(extrapolated values, fitted ratios)``."""
    out, ratios = [], []
    for a, b, c in zip(values, values[1:], values[2:]):
        d1, d2 = b - a, c - b
        if gmpy2.is_zero(d1) or gmpy2.is_zero(d2 - d1):
            out.append(c)
            ratios.append(mpfr(0))
            continue
        r = d2 / d1
        out.append(c + d2 * r / (1 - r))
        ratios.append(r)
    return out, ratios


@dataclass(frozen=True, eq=False)
class REstimate:
    """Samples ``det(L_{l,m}) / W_l^m`` and their extrapolated limit ``R_l``."""

    l: int
    samples: tuple  # (m, value)
    extrapolated: object
    ratio: object
    ctx: PrecisionContext
    tau_samples: tuple = ()  # l = 1 only: (m, tau_m / (-3/2)^m)
    meta: dict = field(default_factory=dict)


def estimate_R(l: int, theta: PowerSeries, m_range: Sequence[int]) -> REstimate:
    """Sample ``det(L_{l,m}) / W_l^m`` and extrapolate (two Aitken passes on the last quarter)."""
    m_values = sorted(set(int(m) for m in m_range))
    if not m_values or m_values[0] < 1:
        raise InputError("m_range must contain positive integers")
    require_order(theta, l + m_values[-1] - 1, "estimate_R")
    ctx = theta.ctx
    W = W_limit(l)
    samples = []
    with ctx.local():
        Wf = mpfr(gmpy2.mpq(W.numerator, W.denominator))
        for m in m_values:
            d = linalg.determinant(build_toeplitz(l, m, theta).entries, ctx)
            samples.append((m, d / Wf ** m))
        tail = [v for _, v in samples[len(samples) - max(3, len(samples) // 4):]]
        tail_ms = [mm for mm, _ in samples[len(samples) - len(tail):]]
        consecutive = all(b - a == 1 for a, b in zip(tail_ms, tail_ms[1:]))
        ratio = None
        if len(tail) >= 3 and consecutive:
            first, ratios = aitken(tail)
            ratio = ratios[-1]
            if len(first) >= 3:
                second, _ = aitken(first)
                extrapolated = second[-1]
            else:
                extrapolated = first[-1]
        else:
            extrapolated = tail[-1]
        tau_samples = ()
        if l == 1 and theta.order >= m_values[-1]:
            tau = tau_coefficients(theta.truncate(m_values[-1]))
            base = mpfr(-3) / 2
            tau_samples = tuple((m, tau.coeffs[m] / base ** m) for m in m_values)
    return REstimate(l, tuple(samples), extrapolated, ratio, ctx, tau_samples)


# -- numerator roots ---------------------------------------------------------------

class NumeratorRoots(NamedTuple):
    roots: list
    reduced_degree: bool


def _poly_eval(coeffs, x):
    acc = mpfr(0)
    dacc = mpfr(0)
    for c in reversed(coeffs):
        dacc = dacc * x + acc
        acc = acc * x + c
    return acc, dacc


def polynomial_roots(coeffs: Sequence, ctx: PrecisionContext, newton_steps: int = 5) -> NumeratorRoots:
    """Roots of ``sum coeffs[k] w^k``: closed form through degree 2, companion QR + Newton beyond."""
    with ctx.local():
        c = [to_hp(x) for x in coeffs]
        reduced = False
        while len(c) > 1 and abs(c[-1]) <= ctx.eps * max(abs(x) for x in c):
            c.pop()
            reduced = True
        deg = len(c) - 1
        if deg < 1:
            return NumeratorRoots([], reduced)
        if deg == 1:
            return NumeratorRoots([-c[0] / c[1]], reduced)
        if deg == 2:
            a, b, cc = c[2], c[1], c[0]
            disc = b * b - 4 * a * cc
            if isinstance(disc, mpc) or disc < 0:
                r = gmpy2.sqrt(mpc(disc))
                return NumeratorRoots([(-b + r) / (2 * a), (-b - r) / (2 * a)], reduced)
            r = gmpy2.sqrt(disc)
            big = -(b + r) / 2 if b >= 0 else -(b - r) / 2
            return NumeratorRoots(sorted([big / a, cc / big]), reduced)
    seeds = linalg.poly_roots_companion(c, ctx)
    out = []
    with ctx.local():
        for z in seeds:
            for _ in range(newton_steps):
                f, df = _poly_eval(c, z)
                if gmpy2.is_zero(abs(df)):
                    break
                z = z - f / df
            out.append(z)
    return NumeratorRoots(out, reduced)


def numerator_roots(pade: PadeResult) -> NumeratorRoots:
    if pade.l < 1:
        raise InputError("numerator_roots needs l >= 1")
    return polynomial_roots(pade.P, pade.ctx)


# -- report --------------------------------------------------------------------

def pade_report(l: int, m_values: Sequence[int], theta: PowerSeries, function: FunctionId = ZetaStar,
                r_range: Sequence[int] | None = None) -> dict:
    """Machine-readable summary over an m grid; degenerate entries are flagged and skipped."""
    ctx = theta.ctx
    digits = output_digits(ctx)
    W = W_limit(l)
    tau = tau_coefficients(theta) if l == 1 else None
    rows = []
    with ctx.local():
        Wf = mpfr(gmpy2.mpq(W.numerator, W.denominator))
    for m in m_values:
        row = {"m": m}
        try:
            pr = pade_approximant(l, m, theta)
            ratio = leading_coeff_det_ratio(l, m, theta)
            roots = numerator_roots(pr)
        except (DegeneracyError, PrecisionError) as exc:
            row["degenerate"] = str(exc)
            rows.append(row)
            continue
        with ctx.local():
            row.update(
                P=[real_to_decimal(x, digits) if not isinstance(x, mpc) else to_decimal_pair(x, digits)
                   for x in pr.P],
                Q=[real_to_decimal(x, digits) if not isinstance(x, mpc) else to_decimal_pair(x, digits)
                   for x in pr.Q],
                p_ll=real_to_decimal(pr.leading, digits),
                det_ratio=real_to_decimal(ratio, digits),
                deviation=real_to_decimal(pr.leading - Wf, 12),
                roots=[to_decimal_pair(z, digits) for z in roots.roots],
                roots_reduced_degree=roots.reduced_degree,
                residual_order=pr.residual_order,
            )
            if tau is not None and m + 1 <= tau.order:
                row["tau_ratio"] = real_to_decimal(tau_ratio(tau, m), digits)
        rows.append(row)
    report = {
        "l": l,
        "function": function.label,
        "bits": ctx.bits,
        "guard_bits": ctx.guard_bits,
        "W_l": f"{W.numerator}/{W.denominator}",
        "trivial_zeros_w": [f"{TrivialZeroTable.w(k)}" for k in range(1, l + 1)],
        "rows": rows,
    }
    devs = [(r["m"], abs(float(r["deviation"]))) for r in rows if "deviation" in r]
    threshold = None
    for i in range(len(devs)):
        tail = devs[i:]
        if all(b[1] <= a[1] for a, b in zip(tail, tail[1:])):
            threshold = tail[0][0] if tail else None
            break
    report["monotone_from_m"] = threshold
    if r_range:
        est = estimate_R(l, theta, r_range)
        with ctx.local():
            report["R"] = {
                "samples": [[mm, real_to_decimal(v, digits)] for mm, v in est.samples],
                "extrapolated": real_to_decimal(est.extrapolated, digits),
                "fitted_ratio": real_to_decimal(est.ratio, 12) if est.ratio is not None else None,
                "tau_samples": [[mm, real_to_decimal(v, digits)] for mm, v in est.tau_samples],
                "all_positive": all(v > 0 for _, v in est.samples),
            }
    return report
