import math

import gmpy2
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given
from hypothesis import strategies as st

from zetalab.errors import InputError
from zetalab.precision import PrecisionContext
from zetalab.spectra import (
    ClassifierParams,
    angular_gaps,
    check_conjectures,
    classify,
    conjugate_closed,
    fit_orbits,
    kasa_fit,
    load_spectrum,
    log_mean,
    min_pairwise_gap,
    overlay,
    overlay_spectra,
    partition_complete,
    save_spectrum,
    spectrum_of,
)
from zetalab.toeplitz import Spectrum, sort_key
from zetalab.zeta import ZetaStar, ZetaTrivial


def synthetic(values, ctx, m=None, l=1):
    """Spectrum record for a hand-made eigenvalue list (det and trace consistent by construction)."""
    with ctx.local():
        vals = tuple(sorted(values, key=sort_key))
        det = mpfr(1)
        for v in vals:
            det *= v
        tr = sum(vals, mpfr(0))
    return Spectrum(l, m or len(vals), ZetaStar, vals, det, tr, ctx)


def circle(n, radius, ctx, center=0, phase=0.0):
    with ctx.local():
        pi = gmpy2.const_pi()
        out = []
        for k in range(n):
            t = 2 * pi * k / n + mpfr(phase)
            out.append(mpc(center) + radius * mpc(gmpy2.cos(t), gmpy2.sin(t)))
        return out


def ring(n, radius, ctx):
    """``n`` (even) equispaced points on ``|w| = radius``, none real, exactly conjugation closed."""
    upper = [p for p in circle(n, radius, ctx, phase=math.pi / n) if p.imag > 0]
    return conj_closed(upper, ctx)


def conj_closed(points, ctx):
    with ctx.local():
        return [p for p in points] + [p.conjugate() for p in points if isinstance(p, mpc) and p.imag > 0]


def test_kasa_exact_circle(ctx):
    pts = circle(8, 2, ctx, phase=0.1)
    center, radius, res, alg = kasa_fit(pts, ctx)
    with ctx.local():
        assert abs(center) <= ctx.tol(1, 2)
        assert abs(radius - 2) <= ctx.tol(1, 2)
        assert res <= ctx.tol(1, 2) and alg <= ctx.tol(1, 2)
    gaps = angular_gaps(pts, center, ctx)
    assert max(gaps) / min(gaps) == pytest.approx(1.0, abs=1e-9)


def test_kasa_shifted_center(ctx):
    pts = circle(12, 3, ctx, center=mpc(1, -0.5), phase=0.3)
    center, radius, _, _ = kasa_fit(pts, ctx)
    assert complex(center) == pytest.approx(complex(1, -0.5), abs=1e-60)
    assert float(radius) == pytest.approx(3, abs=1e-60)


def test_small_cluster_is_unfitted(ctx):
    fits = fit_orbits(conj_closed([mpc(0.3, 1.0)], ctx), ctx)
    assert len(fits) == 1 and not fits[0].fitted


def test_collinear_cluster_goes_to_bow(ctx):
    pts = conj_closed([mpc(0, 0.1), mpc(0, 0.2)], ctx)
    fits = fit_orbits(pts, ctx)
    assert len(fits) == 1 and not fits[0].fitted
    c = classify(synthetic(pts, ctx))
    assert not c.orbits and len(c.bow) == 4


def test_all_real_spectrum_is_all_arrow(ctx):
    spec = synthetic([mpfr(x) for x in (-3, -1, 0.5, 2, 7)], ctx)
    c = classify(spec)
    assert len(c.arrow) == 5 and not c.bow and not c.orbits
    assert partition_complete(c, spec) and conjugate_closed(c)
    assert not c.successor_available and not c.reassigned_largest_real


def test_ring_plus_arrow(ctx):
    spec = synthetic(ring(16, 2, ctx) + [mpfr(0.5), mpfr(1.0)], ctx)
    c = classify(spec)
    assert len(c.orbits) == 1 and len(c.orbits[0].members) == 16
    assert c.counts == {"arr": 2, "bow": 0, "orb": [16], "targ": 1}
    assert float(c.orbits[0].fitted_radius) == pytest.approx(2)
    assert c.rendezvous[0].between == ("arrow", "orbit-1")
    assert partition_complete(c, spec) and conjugate_closed(c)


def test_two_rings_sorted_by_radius(ctx):
    c = classify(synthetic(ring(12, 1, ctx) + ring(20, 3, ctx), ctx))
    assert [len(o.members) for o in c.orbits] == [12, 20]


def test_arc_is_bow(ctx):
    # a quarter circle spans far less than 180 degrees around its fitted center
    with ctx.local():
        arc = [2 * mpc(gmpy2.cos(t), gmpy2.sin(t)) for t in (mpfr(0.2) + mpfr(0.1) * k for k in range(8))]
        pts = arc + [p.conjugate() for p in arc]
    c = classify(synthetic(pts, ctx))
    assert not c.orbits and len(c.bow) == 16


def test_largest_real_reassignment(ctx):
    spec = synthetic([mpfr(-2), mpfr(0.5), mpfr(3)], ctx)
    succ = synthetic([mpfr(-2.5), mpfr(0.4), mpc(3, 1), mpc(3, -1)], ctx)
    c = classify(spec, succ)
    assert c.reassigned_largest_real and c.bow == (mpfr(3),)
    assert [float(x) for x in c.arrow] == [-2, 0.5]
    # successor with as many reals: nothing moves
    succ2 = synthetic([mpfr(-2.5), mpfr(0.4), mpfr(3.1), mpfr(5)], ctx)
    assert not classify(spec, succ2).reassigned_largest_real
    with pytest.raises(InputError):
        classify(spec, spec)


def test_min_gap_and_log_mean(ctx):
    spec = synthetic([mpfr(1), mpfr(1), mpfr(-2), mpc(1, 1), mpc(1, -1)], ctx)
    assert min_pairwise_gap(spec) == 0
    re, im, neg = log_mean(spec)
    with ctx.local():
        ref = (gmpy2.log(mpfr(2)) + gmpy2.log(mpfr(2))) / 5
        assert abs(re - ref) < ctx.eps and abs(im) < ctx.eps and neg == 1


def _synthetic_family(ctx, duplicate_at=None):
    out = {}
    for m in range(1, 8):
        vals = [mpfr(-(k + 1)) - mpfr(k) / 10 for k in range(m)]
        if m == duplicate_at:
            vals[-1] = vals[-2]
        out[m] = synthetic(vals, ctx, m)
    return out


def test_duplicate_eigenvalue_violates_1A(ctx):
    rep = check_conjectures(ZetaStar, 1, 6, ctx, spectra=_synthetic_family(ctx, duplicate_at=4))
    assert rep.verdicts["1A"] == "violated-at:(1,4)"
    assert rep.outcome() == "violation"
    clean = check_conjectures(ZetaStar, 1, 6, ctx, spectra=_synthetic_family(ctx))
    assert clean.verdicts["1A"] == "consistent"
    # arrow entirely negative: 1B is violated at the first m
    assert clean.verdicts["1B"] == "violated-at:(1,1)"


def test_conjectures_on_real_spectra():
    rep = check_conjectures(ZetaStar, 1, 24)
    assert set(rep.sections) == {"1A", "1B", "1C", "1D", "1E", "1F''", "1G", "1H", "1I", "invariants"}
    assert rep.verdicts["1A"] == "consistent"
    assert rep.sections["invariants"]["partition_complete"]
    assert rep.sections["invariants"]["conjugate_closed"]
    assert rep.to_json() == rep.to_json()
    # l = 1 has no orbits: the circularity statement stays inconclusive
    assert rep.verdicts["1H"] == "inconclusive"


def test_overlay_self_and_trivial(ctx):
    s = spectrum_of(ZetaStar, 1, 24, ctx)
    doc = overlay_spectra(s, s)
    assert all(float(x) == 0 for x in doc["nearest_distance"]["values"])
    assert doc["nearest_distance"]["histogram"] == {"counts": [24], "edges": [0.0, 0.0]}
    assert set(doc["points"]) == {"a", "b"}
    doc = overlay(ZetaStar, ZetaTrivial, 1, 24, ctx)
    assert len(doc["points"]["zeta-star"]) + len(doc["points"]["zeta-trivial"]) == 48
    assert sum(doc["nearest_distance"]["histogram"]["counts"]) == 24


def test_spectrum_disk_cache_round_trip(tmp_path, ctx):
    s = spectrum_of(ZetaStar, 2, 10, ctx)
    save_spectrum(tmp_path, s)
    back = load_spectrum(tmp_path, ZetaStar, 2, 10, ctx)
    with ctx.local():
        assert all(abs(mpc(a) - mpc(b)) <= ctx.eps * (1 + abs(a)) for a, b in zip(s.eigenvalues, back.eigenvalues))
    assert load_spectrum(tmp_path, ZetaStar, 2, 10, PrecisionContext(512)) is None


def test_classification_is_deterministic(ctx):
    s, t = spectrum_of(ZetaStar, 3, 40, ctx), spectrum_of(ZetaStar, 3, 41, ctx)
    assert classify(s, t).to_dict() == classify(s, t).to_dict()


def test_params_validation():
    with pytest.raises(Exception):
        ClassifierParams(gap_factor=0)
    assert ClassifierParams().to_dict()["max_gap_ratio"] == 8.0


points = st.lists(
    st.tuples(st.integers(-40, 40), st.integers(0, 40)).map(lambda t: (t[0] / 10, t[1] / 10)),
    min_size=1, max_size=30, unique=True)


@given(points)
def test_partition_complete_property(pts):
    c = PrecisionContext(128)
    with c.local():
        vals = []
        for x, y in pts:
            if y == 0:
                vals.append(mpfr(x))
            else:
                vals += [mpc(x, y), mpc(x, -y)]
    if all(not isinstance(v, mpc) and v == 0 for v in vals):
        return
    spec = synthetic(vals, c)
    cl = classify(spec)
    assert partition_complete(cl, spec)
    assert conjugate_closed(cl)
