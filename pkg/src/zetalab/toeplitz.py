"""The Toeplitz matrices ``L_{l,m}(f)``, their determinants and spectra."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import GENERATOR_VERSION, linalg
from .errors import InputError, PrecisionError
from .precision import PowerSeries, PrecisionContext, output_digits, to_decimal_pair
from .zeta import FunctionId, ZetaStar


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """Dense ``m x m`` matrix with ``entries[i, j] = theta_{l+i-j}`` (``theta_0 = 1``, negative indices 0)."""

    l: int
    m: int
    entries: np.ndarray
    source: FunctionId
    ctx: PrecisionContext

    def diagonal_value(self, d: int):
        """Entry on diagonal ``i - j = d``."""
        return self.entries[d, 0] if d >= 0 else self.entries[0, -d]


def build_toeplitz(l: int, m: int, theta: PowerSeries, source: FunctionId = ZetaStar) -> ToeplitzMatrix:
    if l < 1 or m < 1:
        raise InputError(f"need l >= 1 and m >= 1, got l={l}, m={m}")
    need = l + m - 1
    if theta.order < need:
        raise InputError(f"L_{{{l},{m}}} needs theta coefficients through order {need}, have {theta.order}")
    zero = mpfr(0)
    diag = {d: (theta.coeffs[l + d] if l + d >= 0 else zero) for d in range(-(m - 1), m)}
    A = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            A[i, j] = diag[i - j]
    return ToeplitzMatrix(l, m, A, source, theta.ctx)


def determinant(A: ToeplitzMatrix):
    return linalg.determinant(A.entries, A.ctx)


def hessenberg(A: np.ndarray, ctx: PrecisionContext):
    return linalg.hessenberg(A, ctx)


def real_threshold(ctx: PrecisionContext, lam) -> mpfr:
    """``eps_real = 2^(-bits/3) (1 + |lambda|)``: below this an imaginary part counts as rounding noise."""
    with ctx.local():
        return ctx.tol(1, 3) * (1 + abs(lam))


def symmetrize_conjugates(values: list, ctx: PrecisionContext) -> list:
    """Snap near-real values to the real axis and average conjugate partners.

    Only meaningful for real matrices, whose spectra are closed under conjugation.
    """
    with ctx.local():
        reals, upper, lower = [], [], []
        for v in values:
            if not isinstance(v, mpc):
                reals.append(v)
            elif abs(v.imag) <= real_threshold(ctx, v):
                reals.append(v.real)
            elif v.imag > 0:
                upper.append(v)
            else:
                lower.append(v)
        out = list(reals)
        lower = sorted(lower, key=lambda z: (z.real, z.imag))
        for u in sorted(upper, key=lambda z: (z.real, z.imag)):
            if not lower:
                out.append(u)
                continue
            j = min(range(len(lower)), key=lambda i: abs(lower[i] - u.conjugate()))
            partner = lower.pop(j)
            avg = (u + partner.conjugate()) / 2
            out.append(avg)
            out.append(avg.conjugate())
        out.extend(lower)
    return out


def sort_key(z):
    if isinstance(z, mpc):
        return (z.real, z.imag)
    return (z, mpfr(0))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalue multiset of ``L_{l,m}(f)`` with the LU determinant and the trace."""

    l: int
    m: int
    source: FunctionId
    eigenvalues: tuple
    det: object
    trace: object
    ctx: PrecisionContext
    meta: dict = field(default_factory=dict)

    def product(self):
        with self.ctx.local():
            p = mpfr(1)
            for v in self.eigenvalues:
                p *= v
            return p

    def total(self):
        with self.ctx.local():
            return sum(self.eigenvalues, mpfr(0))

    def det_residual(self) -> mpfr:
        """``|prod(lambda) - det| / |det|`` (absolute if det vanishes)."""
        with self.ctx.local():
            diff = abs(self.product() - self.det)
            scale = abs(self.det)
            return diff / scale if not gmpy2.is_zero(scale) else diff

    def trace_residual(self) -> mpfr:
        with self.ctx.local():
            return abs(self.total() - self.trace) / (1 + abs(self.trace))

    def check_invariants(self, bound=None) -> bool:
        bound = bound if bound is not None else self.ctx.tol(1, 4)
        return self.det_residual() <= bound and self.trace_residual() <= bound

    def as_complex(self) -> list:
        return [complex(v) for v in self.eigenvalues]

    def to_dict(self, digits: int | None = None) -> dict:
        digits = digits or output_digits(self.ctx)
        return {
            "l": self.l,
            "m": self.m,
            "function": self.source.label,
            "bits": self.ctx.bits,
            "guard_bits": self.ctx.guard_bits,
            "generator_version": GENERATOR_VERSION,
            "eigenvalues": [to_decimal_pair(v, digits) for v in self.eigenvalues],
            "det": to_decimal_pair(self.det, digits),
            "trace": to_decimal_pair(self.trace, digits),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# function={self.source.label} l={self.l} m={self.m} bits={self.ctx.bits} "
                  f"guard_bits={self.ctx.guard_bits} generator_version={GENERATOR_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im"])
        digits = output_digits(self.ctx)
        for v in self.eigenvalues:
            w.writerow(to_decimal_pair(v, digits))
        return buf.getvalue()


def eigenvalues(A: ToeplitzMatrix, check: bool = True) -> Spectrum:
    """Full spectrum of ``A`` by Hessenberg reduction and shifted QR.

    ``L_{1,m}`` is lower Hessenberg already, so its transpose skips the reduction.
    The determinant is computed independently by LU and the returned spectrum
    is checked against it and against the trace.
    """
    ctx = A.ctx
    stats = []
    if A.l == 1:
        H = A.entries.T.copy()
    else:
        H, _ = linalg.hessenberg(A.entries, ctx)
    values = linalg.hessenberg_eigenvalues(H, ctx, stats=stats)
    if linalg.is_real_matrix(A.entries):
        values = symmetrize_conjugates(values, ctx)
    values = sorted(values, key=sort_key)
    det = linalg.determinant(A.entries, ctx)
    with ctx.local():
        trace = A.m * A.entries[0, 0]
    spec = Spectrum(A.l, A.m, A.source, tuple(values), det, trace, ctx,
                    {"qr_sweeps": stats[0].sweeps if stats else 0})
    if check and not spec.check_invariants():
        raise PrecisionError(
            f"spectrum of L_{{{A.l},{A.m}}} fails the det/trace identities "
            f"(det residual {float(spec.det_residual()):.3e}, trace residual "
            f"{float(spec.trace_residual()):.3e}); raise the precision")
    return spec
