from fractions import Fraction

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from zetalab import linalg
from zetalab.errors import ConvergenceError, DegeneracyError
from zetalab.precision import PrecisionContext


def exact_det(rows):
    """Fraction Gaussian elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return det


square = st.integers(1, 7).flatmap(
    lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=n, max_size=n))


@given(square)
def test_determinant_matches_exact(rows):
    c = PrecisionContext(128)
    d = linalg.determinant(linalg.as_matrix(rows, c), c)
    e = exact_det(rows)
    with c.local():
        assert abs(d - mpfr(gmpy2.mpq(e.numerator, e.denominator))) <= c.tol(3, 4) * (1 + abs(d))


@given(square, st.data())
def test_lu_solve_residual(rows, data):
    c = PrecisionContext(128)
    n = len(rows)
    b = data.draw(st.lists(st.integers(-9, 9), min_size=n, max_size=n))
    A = linalg.as_matrix(rows, c)
    if exact_det(rows) == 0:
        with pytest.raises(DegeneracyError):
            linalg.lu_solve(A, b, c)
        return
    x = linalg.lu_solve(A, b, c)
    with c.local():
        scale = 1 + max(abs(v) for v in x)
        for i in range(n):
            r = sum((A[i, j] * x[j] for j in range(n)), mpfr(0)) - b[i]
            assert abs(r) <= c.tol(1, 2) * scale * 20


def test_empty_and_singular(ctx):
    assert linalg.determinant(np.empty((0, 0), dtype=object), ctx) == 1
    assert linalg.determinant(linalg.as_matrix([[1, 2], [2, 4]], ctx), ctx) == 0


def test_companion_roots(ctx):
    # (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6
    roots = linalg.poly_roots_companion([6, -7, 0, 1], ctx)
    got = sorted(float(r.real if isinstance(r, mpc) else r) for r in roots)
    assert got == pytest.approx([-3, 1, 2], abs=1e-60)
    # x^2 + 1: complex pair from a real matrix
    roots = linalg.poly_roots_companion([1, 0, 1], ctx)
    assert sorted(complex(r).imag for r in roots) == pytest.approx([-1, 1], abs=1e-60)


def test_hessenberg_similarity(ctx):
    rng = np.random.default_rng(3)
    rows = rng.integers(-5, 6, size=(7, 7)).tolist()
    A = linalg.as_matrix(rows, ctx)
    H, log = linalg.hessenberg(A, ctx)
    assert linalg.is_upper_hessenberg(H)
    back = linalg.hessenberg_reconstruct(H, log, ctx)
    with ctx.local():
        assert max(abs(x - y) for x, y in zip(back.flat, A.flat)) < ctx.tol(3, 4)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_real_eigenvalues_vs_numpy_and_invariants(seed, ctx):
    rng = np.random.default_rng(seed)
    rows = rng.integers(-9, 10, size=(9, 9)).tolist()
    A = linalg.as_matrix(rows, ctx)
    eig = linalg.eigenvalues_dense(A, ctx)
    ref = np.linalg.eigvals(np.array(rows, dtype=float))
    got = np.array([complex(v) for v in eig])
    for z in ref:
        assert np.min(np.abs(got - z)) < 1e-9
    with ctx.local():
        prod = mpfr(1)
        for v in eig:
            prod *= v
        det = linalg.determinant(A, ctx)
        assert abs(prod - det) <= ctx.tol(3, 4) * abs(det)
        assert abs(sum(eig, mpfr(0)) - sum(int(rows[i][i]) for i in range(9))) < ctx.tol(3, 4)


def test_complex_matrix(ctx):
    rng = np.random.default_rng(7)
    re = rng.integers(-5, 6, size=(6, 6))
    im = rng.integers(-5, 6, size=(6, 6))
    rows = [[complex(int(re[i, j]), int(im[i, j])) for j in range(6)] for i in range(6)]
    A = linalg.as_matrix(rows, ctx)
    eig = linalg.eigenvalues_dense(A, ctx)
    ref = np.linalg.eigvals(np.array(rows))
    got = np.array([complex(v) for v in eig])
    for z in ref:
        assert np.min(np.abs(got - z)) < 1e-9
    with ctx.local():
        # each eigenvalue makes A - lambda I singular to high accuracy
        for lam in eig:
            B = A.copy()
            for i in range(6):
                B[i, i] = B[i, i] - lam
            assert abs(linalg.determinant(B, ctx)) < ctx.tol(1, 2)


def test_convergence_error_names_the_block(ctx):
    rng = np.random.default_rng(11)
    A = linalg.as_matrix(rng.integers(-9, 10, size=(8, 8)).tolist(), ctx)
    H, _ = linalg.hessenberg(A, ctx)
    with pytest.raises(ConvergenceError, match="rows"):
        linalg.hessenberg_eigenvalues(H, ctx, max_sweeps=1)
