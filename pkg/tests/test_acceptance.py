"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line (also repeated in the pytest
terminal summary) before asserting.
"""

import filecmp
import subprocess
import sys
from pathlib import Path

import pytest
from gmpy2 import mpc, mpfr

from zetalab.oracle import zeta_oracle_values
from zetalab.pade import (
    estimate_R,
    leading_coeff_det_ratio,
    numerator_roots,
    pade_approximant,
    tau_ratio,
)
from zetalab.precision import PrecisionContext, real_to_decimal
from zetalab.spectra import (
    check_conjectures,
    classify,
    conjugate_closed,
    min_pairwise_gap,
    partition_complete,
    spectrum_of,
)
from zetalab.toeplitz import build_toeplitz
from zetalab import linalg
from zetalab.zeta import ZetaStar, tau_coefficients, theta_series

pytestmark = pytest.mark.acceptance

RESULTS = []


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# -- shared inputs -------------------------------------------------------------

@pytest.fixture(scope="module")
def ctx1024():
    return PrecisionContext(1024)


@pytest.fixture(scope="module")
def theta1024(ctx1024):
    return theta_series(ZetaStar, 192, ctx1024)


@pytest.fixture(scope="module")
def tau1024(theta1024):
    return tau_coefficients(theta1024)


@pytest.fixture(scope="module")
def oracle1024(ctx1024):
    return zeta_oracle_values(ctx1024, 3)


@pytest.fixture(scope="module")
def r_estimate(theta1024):
    return estimate_R(1, theta1024, range(1, 151))


@pytest.fixture(scope="module")
def theta256():
    return theta_series(ZetaStar, 110, PrecisionContext(256))


def spectrum(l, m):
    """Spectra at the default precision for the matrix size (shared across criteria)."""
    return spectrum_of(ZetaStar, l, m)


# -- criteria ------------------------------------------------------------------

def test_criterion_01_R1(r_estimate, oracle1024, ctx1024):
    est = r_estimate.extrapolated
    with ctx1024.local():
        published = mpfr("0.91228851841347")
        rel_pub = abs(est - published) / published
        rel_oracle = abs(est - oracle1024.R1) / oracle1024.R1
    ok_pub = rel_pub <= mpfr(10) ** -12
    ok_oracle = rel_oracle <= ctx1024.tol(1, 4)
    record("1a", ok_pub, f"R_1 = {real_to_decimal(est, 20)} vs 0.91228851841347, rel diff {float(rel_pub):.2e} "
                         f"(<= 1e-12)")
    record("1b", ok_oracle, f"R_1 vs pi^2/(9 zeta(3)) rel diff {float(rel_oracle):.2e} "
                            f"(<= 2^-{ctx1024.bits // 4} = {float(ctx1024.tol(1, 4)):.2e})")
    assert ok_pub and ok_oracle


def test_criterion_02_tau_asymptotic(tau1024, oracle1024, ctx1024):
    worst = 0.0
    with ctx1024.local():
        base = mpfr(-3) / 2
        R1 = oracle1024.R1
        ok = True
        for m in range(40, 121):
            dev = abs(tau1024.coeffs[m] / base ** m - R1)
            bound = 100 * (mpfr(5) / 6) ** m
            ok &= bool(dev <= bound)
            worst = max(worst, float(dev / bound))
    record(2, ok, f"max_m |tau_m/(-3/2)^m - R_1| / (100 (5/6)^m) = {worst:.3e} over 40 <= m <= 120 (<= 1)")
    assert ok


def test_criterion_03_mth_root(tau1024, ctx1024):
    with ctx1024.local():
        m = 192
        val = ((-1) ** m * tau1024.coeffs[m]) ** (mpfr(1) / m)
    ok = 1.48 <= float(val) <= 1.52
    record(3, ok, f"((-1)^192 tau_192)^(1/192) = {float(val):.6f} (in [1.48, 1.52])")
    assert ok


def test_criterion_04_det_identity(theta256):
    ctx = theta256.ctx
    worst = mpfr(0)
    th = theta_series(ZetaStar, 120, ctx)
    tau = tau_coefficients(th)
    with ctx.local():
        for m in range(1, 121):
            d = linalg.determinant(build_toeplitz(1, m, th).entries, ctx)
            ref = (-1) ** m * tau.coeffs[m]
            worst = max(worst, abs(d - ref) / abs(ref))
    ok = worst <= ctx.tol(1, 4)
    record(4, ok, f"max_(m<=120) |det L_1,m - (-1)^m tau_m| / |tau_m| = {float(worst):.2e} "
                  f"(<= 2^-{ctx.bits // 4})")
    assert ok


GRID5 = (1, 2, 3, 4, 8, 16, 24, 32, 48, 64, 96)


def test_criterion_05_eigenvalue_identities():
    worst_det, worst_tr, ok = 0.0, 0.0, True
    for l in (1, 2, 3, 4):
        for m in GRID5:
            s = spectrum(l, m)
            ctx = s.ctx
            with ctx.local():
                mtheta = s.trace
                dd = abs(s.product() - s.det)
                dt = abs(s.total() - mtheta)
                okd = dd <= ctx.tol(1, 4) * abs(s.det)
                okt = dt <= ctx.tol(1, 4) * (1 + abs(mtheta))
                ok &= bool(okd and okt)
                worst_det = max(worst_det, float(dd / abs(s.det)) / float(ctx.tol(1, 4)))
                worst_tr = max(worst_tr, float(dt / (1 + abs(mtheta))) / float(ctx.tol(1, 4)))
    record(5, ok, f"l<=4, m in {list(GRID5)}: worst det residual {worst_det:.2e} and trace residual "
                  f"{worst_tr:.2e} in units of 2^-(bits/4) (<= 1)")
    assert ok


def test_criterion_06_pade_three_paths(theta256):
    th = theta_series(ZetaStar, 82, theta256.ctx)
    ctx = th.ctx
    tau = tau_coefficients(th)
    worst = mpfr(0)
    with ctx.local():
        for m in range(1, 81):
            p = pade_approximant(1, m, th).leading
            d = leading_coeff_det_ratio(1, m, th)
            t = tau_ratio(tau, m)
            for a, b in ((p, d), (p, t), (d, t)):
                worst = max(worst, abs(a - b) / abs(a))
    ok = worst <= ctx.tol(1, 8)
    record(6, ok, f"max_(m<=80) pairwise rel diff of Pade / det ratio / tau ratio = {float(worst):.2e} "
                  f"(<= 2^-{ctx.bits // 8})")
    assert ok


def test_criterion_07_W_convergence(theta256):
    th = theta_series(ZetaStar, 103, theta256.ctx)
    p1 = float(pade_approximant(1, 50, th).leading)
    p2 = float(pade_approximant(2, 100, th).leading)
    ok = abs(p1 - 1.5) <= 1e-3 and abs(p2 - 15 / 8) <= 5e-3
    record(7, ok, f"|p_1,50,1 - 3/2| = {abs(p1 - 1.5):.2e} (<= 1e-3), |p_2,100,2 - 15/8| = "
                  f"{abs(p2 - 15 / 8):.2e} (<= 5e-3)")
    assert ok


def test_criterion_08_de_montessus(theta256):
    th = theta_series(ZetaStar, 103, theta256.ctx)
    roots = sorted((complex(r) for r in numerator_roots(pade_approximant(2, 100, th)).roots),
                   key=lambda z: (z.real, z.imag))
    targets = (-4 / 5, -2 / 3)
    dist = max(min(abs(r - t) for r in roots) for t in targets)
    ok = len(roots) == 2 and dist <= 1e-2
    record(8, ok, f"roots of P_2,100 = {[f'{r.real:.6f}{r.imag:+.1e}j' for r in roots]}, "
                  f"max distance to {{-2/3, -4/5}} = {dist:.2e} (<= 1e-2)")
    assert ok


EXPECTED_ORBITS = {2: 1, 3: 2, 5: 3, 6: 4, 7: 5}


def test_criterion_09_orbit_counts():
    got = {l: len(classify(spectrum(l, 192)).orbits) for l in EXPECTED_ORBITS}
    ok = got == EXPECTED_ORBITS
    record(9, ok, f"orbit counts at m=192 (no successor, default parameters): {got}, expected {EXPECTED_ORBITS}")
    assert ok


def test_criterion_10_conjecture_harness():
    lines, ok = [], True
    for l in (1, 2, 3):
        s = spectrum(l, 192)
        rep = check_conjectures(ZetaStar, l, 192, s.ctx, m_values=[192], spectra={192: s},
                                with_successor=False)
        gap = min_pairwise_gap(s)
        dev = rep.sections["1F''"]["values"][-1]["deviation"]
        ok_a = gap is not None and gap > 0 and rep.verdicts["1A"] == "consistent"
        ok_f = abs(dev) <= 0.05
        ok &= ok_a and ok_f
        lines.append(f"l={l}: min gap {float(gap):.2e}, 1F'' deviation {dev:+.4f}")
    inv_ok = True
    for l in (1, 2, 3):
        sweep = check_conjectures(ZetaStar, l, 48)
        inv = sweep.sections["invariants"]
        inv_ok &= inv["partition_complete"] and inv["conjugate_closed"]
    for l in (1, 2, 3):
        c = classify(spectrum(l, 192))
        inv_ok &= partition_complete(c, spectrum(l, 192)) and conjugate_closed(c)
    ok &= inv_ok
    record(10, ok, "; ".join(lines) + f" (|dev| <= 0.05); invariants on every classified spectrum: {inv_ok}")
    assert ok


GRID11 = (8, 24, 48, 96)


def _match_distance(a, b, ctx):
    with ctx.local():
        return max(min(abs(mpc(x) - mpc(y)) for y in b) for x in a)


def test_criterion_11_precision_stability():
    worst, ok, bad = 0.0, True, []
    for l in (1, 2, 3):
        for m in GRID11:
            base = spectrum(l, m).ctx
            hi = base.doubled()
            s_lo, n_lo = spectrum_of(ZetaStar, l, m, base), spectrum_of(ZetaStar, l, m + 1, base)
            s_hi, n_hi = spectrum_of(ZetaStar, l, m, hi), spectrum_of(ZetaStar, l, m + 1, hi)
            same = classify(s_lo, n_lo).membership() == classify(s_hi, n_hi).membership()
            d = _match_distance(s_lo.eigenvalues, s_hi.eigenvalues, hi)
            close = d <= base.tol(1, 4)
            worst = max(worst, float(d) / float(base.tol(1, 4)))
            if not (same and close):
                bad.append((l, m))
            ok &= same and bool(close)
    record(11, ok, f"l<=3, m in {list(GRID11)}: memberships unchanged at doubled bits, worst eigenvalue shift "
                   f"{worst:.2e} in units of 2^-(bits/4) (<= 1); failures {bad}")
    assert ok


CLI_RUNS = [
    ["coeffs", "--m", "40", "--bits", "400", "--out", "{o}/coeffs.json", "--cache-dir", "{o}/cache"],
    ["spectrum", "--l", "2", "--m", "30", "--out", "{o}/spectrum"],
    ["sweep", "--l", "3", "--m-range", "10..14", "--out", "{o}/sweep", "--frames-dir", "{o}/frames"],
    ["pade", "--l", "2", "--m-range", "5..12", "--r-range", "8..20", "--out", "{o}/pade.json"],
    ["conjectures", "--l", "2", "--m", "20", "--out", "{o}/conj.json"],
    ["plot", "--l", "1", "--m", "20", "--overlay-function", "zeta-trivial", "--out", "{o}/overlay.svg"],
]


def _cli_tree(root: Path):
    for args in CLI_RUNS:
        argv = [a.format(o=root) for a in args]
        subprocess.run([sys.executable, "-m", "zetalab", *argv], check=False, capture_output=True, cwd=root)


def _all_files(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


def test_criterion_12_reproducibility(tmp_path):
    a, b = tmp_path / "run1", tmp_path / "run2"
    a.mkdir()
    b.mkdir()
    _cli_tree(a)
    _cli_tree(b)
    fa, fb = _all_files(a), _all_files(b)
    differing = [str(p) for p in fa if not filecmp.cmp(a / p, b / p, shallow=False)] if fa == fb else ["<file sets>"]
    ok = bool(fa) and fa == fb and not differing
    record(12, ok, f"{len(fa)} output files from two identical CLI runs, byte-identical: {not differing} "
                   f"(differing: {differing})")
    assert ok
