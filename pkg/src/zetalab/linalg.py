"""Dense linear algebra on numpy object arrays of gmpy2 numbers.

LU with partial pivoting (determinants, solves), Householder reduction to
upper Hessenberg form, and the shifted QR algorithm for eigenvalues: the
Francis double-shift variant for real matrices and a single-shift
(Wilkinson) variant with Givens rotations for complex ones.  Only the active
window is updated during QR since eigenvectors are never needed.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import ConvergenceError, DegeneracyError
from .precision import PrecisionContext, to_hp


def as_matrix(rows, ctx: PrecisionContext) -> np.ndarray:
    """Copy a nested sequence into an object array at working precision."""
    with ctx.local():
        data = [[to_hp(x) for x in row] for row in rows]
    out = np.empty((len(data), len(data[0]) if data else 0), dtype=object)
    for i, row in enumerate(data):
        out[i, :] = row
    return out


def is_real_matrix(A: np.ndarray) -> bool:
    return not any(isinstance(x, mpc) for x in A.flat)


def _abs(x) -> mpfr:
    return abs(x)


# -- LU -----------------------------------------------------------------------

class LU(NamedTuple):
    lu: np.ndarray
    perm: list
    sign: int
    singular: bool


def lu_decompose(A: np.ndarray, ctx: PrecisionContext) -> LU:
    """In-place-on-a-copy LU with partial pivoting; ``singular`` flags an all-zero pivot column."""
    n = A.shape[0]
    a = A.copy()
    perm = list(range(n))
    sign = 1
    singular = False
    with ctx.local():
        for k in range(n):
            col = [_abs(a[i, k]) for i in range(k, n)]
            p = k + max(range(len(col)), key=col.__getitem__)
            if gmpy2.is_zero(col[p - k]):
                singular = True
                continue
            if p != k:
                a[[k, p], :] = a[[p, k], :]
                perm[k], perm[p] = perm[p], perm[k]
                sign = -sign
            if k + 1 < n:
                factors = a[k + 1:, k] / a[k, k]
                a[k + 1:, k] = factors
                a[k + 1:, k + 1:] -= np.outer(factors, a[k, k + 1:])
    return LU(a, perm, sign, singular)


def determinant(A: np.ndarray, ctx: PrecisionContext):
    """Determinant by LU with partial pivoting (0 when a pivot column vanishes exactly)."""
    n = A.shape[0]
    if n == 0:
        return ctx.scalar(1)
    f = lu_decompose(A, ctx)
    with ctx.local():
        if f.singular:
            return mpfr(0)
        d = mpfr(f.sign)
        for k in range(n):
            d *= f.lu[k, k]
        return d


def lu_solve(A: np.ndarray, b: Sequence, ctx: PrecisionContext) -> list:
    """Solve ``A x = b``; raises :class:`DegeneracyError` for singular ``A``."""
    n = A.shape[0]
    f = lu_decompose(A, ctx)
    if f.singular:
        raise DegeneracyError("singular linear system")
    lu = f.lu
    with ctx.local():
        y = [to_hp(b[p]) for p in f.perm]
        for i in range(n):
            s = y[i]
            for j in range(i):
                s -= lu[i, j] * y[j]
            y[i] = s
        x = [None] * n
        for i in range(n - 1, -1, -1):
            s = y[i]
            for j in range(i + 1, n):
                s -= lu[i, j] * x[j]
            x[i] = s / lu[i, i]
    return x


# -- Hessenberg -----------------------------------------------------------------

class Reflector(NamedTuple):
    k: int
    v: np.ndarray
    beta: object


def _householder(x: np.ndarray):
    """``(v, beta)`` with ``(I - beta v v^H) x = alpha e_1``; ``beta = 0`` when x vanishes."""
    norm2 = sum((abs(xi) ** 2 for xi in x), mpfr(0))
    if gmpy2.is_zero(norm2):
        return None, None
    sigma = gmpy2.sqrt(norm2)
    x0 = x[0]
    if isinstance(x0, mpc):
        ax0 = abs(x0)
        phase = x0 / ax0 if not gmpy2.is_zero(ax0) else mpc(1)
        alpha = -phase * sigma
    else:
        alpha = -sigma if x0 >= 0 else sigma
    v = x.copy()
    v[0] = x0 - alpha
    vnorm2 = sum((abs(vi) ** 2 for vi in v), mpfr(0))
    if gmpy2.is_zero(vnorm2):
        return None, None
    return v, 2 / vnorm2


def _conj(v: np.ndarray) -> np.ndarray:
    if any(isinstance(x, mpc) for x in v):
        return np.array([x.conjugate() if isinstance(x, mpc) else x for x in v], dtype=object)
    return v


def hessenberg(A: np.ndarray, ctx: PrecisionContext):
    """Unitary similarity to upper Hessenberg form; returns ``(H, reflectors)``."""
    n = A.shape[0]
    H = A.copy()
    log = []
    with ctx.local():
        for k in range(n - 2):
            x = H[k + 1:, k].copy()
            if all(gmpy2.is_zero(abs(xi)) for xi in x[1:]):
                continue
            v, beta = _householder(x)
            if v is None:
                continue
            vh = _conj(v)
            # H <- P H P with P = I - beta v v^H acting on rows/cols k+1..n-1
            H[k + 1:, k:] -= np.outer(beta * v, vh.dot(H[k + 1:, k:]))
            H[:, k + 1:] -= np.outer(H[:, k + 1:].dot(v), beta * vh)
            H[k + 2:, k] = mpfr(0)
            log.append(Reflector(k, v, beta))
    return H, log


def hessenberg_reconstruct(H: np.ndarray, log: list, ctx: PrecisionContext) -> np.ndarray:
    """Undo the recorded reflectors (test hook: should give back the original matrix)."""
    A = H.copy()
    with ctx.local():
        for k, v, beta in reversed(log):
            vh = _conj(v)
            A[k + 1:, :] -= np.outer(beta * v, vh.dot(A[k + 1:, :]))
            A[:, k + 1:] -= np.outer(A[:, k + 1:].dot(v), beta * vh)
    return A


# -- QR iterations --------------------------------------------------------------------

def _eig2x2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]], real pair or conjugate pair for real input."""
    tr_half = (a + d) / 2
    disc = ((a - d) / 2) ** 2 + b * c
    if isinstance(disc, mpc):
        r = gmpy2.sqrt(disc)
        return [tr_half + r, tr_half - r]
    if disc >= 0:
        r = gmpy2.sqrt(disc)
        # avoid cancellation: larger root first, other via determinant
        big = tr_half + r if tr_half >= 0 else tr_half - r
        det = a * d - b * c
        small = det / big if not gmpy2.is_zero(big) else tr_half - r
        return [big, small]
    r = gmpy2.sqrt(-disc)
    return [mpc(tr_half, r), mpc(tr_half, -r)]


def _small_subdiag(H, hi, lo, tol, anorm):
    for k in range(hi, lo, -1):
        s = abs(H[k - 1, k - 1]) + abs(H[k, k])
        if gmpy2.is_zero(s):
            s = anorm
        if abs(H[k, k - 1]) <= tol * s:
            H[k, k - 1] = mpfr(0)
            return k
    return lo


def _francis_step(H, lo, hi, s, t):
    """One implicit double-shift sweep on the window ``lo..hi`` (real arithmetic)."""
    x = H[lo, lo] * H[lo, lo] + H[lo, lo + 1] * H[lo + 1, lo] - s * H[lo, lo] + t
    y = H[lo + 1, lo] * (H[lo, lo] + H[lo + 1, lo + 1] - s)
    z = H[lo + 1, lo] * H[lo + 2, lo + 1]
    for k in range(lo, hi - 1):
        v, beta = _householder(np.array([x, y, z], dtype=object))
        if v is not None:
            q = max(lo, k - 1)
            block = H[k:k + 3, q:hi + 1]
            H[k:k + 3, q:hi + 1] = block - np.outer(beta * v, v.dot(block))
            r = min(k + 3, hi)
            block = H[lo:r + 1, k:k + 3]
            H[lo:r + 1, k:k + 3] = block - np.outer(block.dot(v), beta * v)
            if k > lo:
                H[k + 1, k - 1] = mpfr(0)
                H[k + 2, k - 1] = mpfr(0)
        x = H[k + 1, k]
        y = H[k + 2, k]
        if k < hi - 2:
            z = H[k + 3, k]
    v, beta = _householder(np.array([x, y], dtype=object))
    if v is not None:
        k = hi - 1
        q = max(lo, k - 1)
        block = H[k:k + 2, q:hi + 1]
        H[k:k + 2, q:hi + 1] = block - np.outer(beta * v, v.dot(block))
        block = H[lo:hi + 1, k:k + 2]
        H[lo:hi + 1, k:k + 2] = block - np.outer(block.dot(v), beta * v)
        if k > lo:
            H[k + 1, k - 1] = mpfr(0)


def _givens_step(H, lo, hi, mu):
    """Explicit single-shift QR step ``H - mu I = QR, H <- RQ + mu I`` on the window."""
    for i in range(lo, hi + 1):
        H[i, i] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = H[k, k], H[k + 1, k]
        r = gmpy2.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if gmpy2.is_zero(r):
            rots.append(None)
            continue
        c, s = a / r, b / r
        cc = c.conjugate() if isinstance(c, mpc) else c
        sc = s.conjugate() if isinstance(s, mpc) else s
        rk = H[k, k:hi + 1].copy()
        rk1 = H[k + 1, k:hi + 1].copy()
        H[k, k:hi + 1] = cc * rk + sc * rk1
        H[k + 1, k:hi + 1] = c * rk1 - s * rk
        H[k + 1, k] = mpc(0)
        rots.append((c, s, cc, sc))
    for k in range(lo, hi):
        rot = rots[k - lo]
        if rot is None:
            continue
        c, s, cc, sc = rot
        top = min(k + 2, hi)
        ck = H[lo:top + 1, k].copy()
        ck1 = H[lo:top + 1, k + 1].copy()
        H[lo:top + 1, k] = ck * c + ck1 * s
        H[lo:top + 1, k + 1] = ck1 * cc - ck * sc
    for i in range(lo, hi + 1):
        H[i, i] += mu


def _wilkinson_shift(a, b, c, d):
    """Eigenvalue of [[a, b], [c, d]] closest to ``d``."""
    tr_half = (a + d) / 2
    disc = mpc(((a - d) / 2) ** 2 + b * c)
    r = gmpy2.sqrt(disc)
    l1, l2 = tr_half + r, tr_half - r
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


class QRStats(NamedTuple):
    sweeps: int
    real_arithmetic: bool


def hessenberg_eigenvalues(H: np.ndarray, ctx: PrecisionContext, tol=None,
                           max_sweeps: int | None = None, stats: list | None = None) -> list:
    """All eigenvalues of an upper Hessenberg matrix (destroys a copy only)."""
    n = H.shape[0]
    H = H.copy()
    if n == 0:
        return []
    real = not any(isinstance(x, mpc) for x in H.flat)
    max_sweeps = max_sweeps if max_sweeps is not None else 40 * n
    eig = []
    sweeps = 0
    with ctx.local():
        tol = tol if tol is not None else ctx.eps
        if not real:
            for idx in np.ndindex(H.shape):
                H[idx] = mpc(H[idx])
        anorm = max(abs(x) for x in H.flat)
        if gmpy2.is_zero(anorm):
            return [mpfr(0)] * n
        hi = n - 1
        its = 0
        while hi >= 0:
            lo = _small_subdiag(H, hi, 0, tol, anorm)
            if lo == hi:
                eig.append(H[hi, hi])
                hi -= 1
                its = 0
                continue
            if lo == hi - 1 and real:
                eig.extend(_eig2x2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]))
                hi -= 2
                its = 0
                continue
            if sweeps >= max_sweeps:
                raise ConvergenceError(
                    f"QR did not converge after {sweeps} sweeps; stuck block rows {lo}..{hi}")
            sweeps += 1
            its += 1
            if real:
                if its % 11 == 10:
                    e = abs(H[hi, hi - 1]) + abs(H[hi - 1, hi - 2]) if hi - 2 >= lo else abs(H[hi, hi - 1])
                    center = H[hi, hi] + e * mpfr("0.75")
                    s = 2 * center
                    t = center * center + (e * mpfr("0.66")) ** 2
                else:
                    s = H[hi - 1, hi - 1] + H[hi, hi]
                    t = H[hi - 1, hi - 1] * H[hi, hi] - H[hi - 1, hi] * H[hi, hi - 1]
                _francis_step(H, lo, hi, s, t)
            else:
                if its % 11 == 10:
                    mu = H[hi, hi] + mpfr("0.75") * abs(H[hi, hi - 1])
                else:
                    mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
                _givens_step(H, lo, hi, mu)
    if stats is not None:
        stats.append(QRStats(sweeps, real))
    return eig


def eigenvalues_dense(A: np.ndarray, ctx: PrecisionContext, stats: list | None = None) -> list:
    H, _ = hessenberg(A, ctx)
    return hessenberg_eigenvalues(H, ctx, stats=stats)


def is_upper_hessenberg(A: np.ndarray) -> bool:
    n = A.shape[0]
    return all(gmpy2.is_zero(abs(A[i, j])) for i in range(n) for j in range(i - 1))


def poly_roots_companion(coeffs: Sequence, ctx: PrecisionContext) -> list:
    """Roots of ``sum coeffs[k] x^k`` as eigenvalues of the (Hessenberg) companion matrix."""
    with ctx.local():
        c = [to_hp(x) for x in coeffs]
        while len(c) > 1 and gmpy2.is_zero(abs(c[-1])):
            c.pop()
        deg = len(c) - 1
        if deg < 1:
            return []
        lead = c[-1]
        C = np.empty((deg, deg), dtype=object)
        C[:, :] = mpfr(0)
        for j in range(deg):
            C[0, j] = -c[deg - 1 - j] / lead
        for i in range(1, deg):
            C[i, i - 1] = mpfr(1)
    return hessenberg_eigenvalues(C, ctx)
