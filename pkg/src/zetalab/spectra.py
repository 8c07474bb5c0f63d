"""Arrow / bow / orbit classification of lambda-spectra and the conjecture checks.

A spectrum of a real ``L_{l,m}`` splits into

* the arrow: the real eigenvalues (after snapping, see ``toeplitz.real_threshold``),
* orbits: groups of non-real eigenvalues lying on nearly equidistributed circles,
* the bow: everything else.

Orbits are found by single-linkage clustering of the moduli, an algebraic
(Kasa) circle fit per cluster, and three acceptance tests on the fit.  All
parameters live in :class:`ClassifierParams` and are written into every report.
"""

from __future__ import annotations

import functools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from . import GENERATOR_VERSION, linalg
from .errors import DegeneracyError, InputError
from .pade import W_limit
from .precision import PrecisionContext, from_decimal_pair, output_digits, real_to_decimal, to_decimal_pair
from .toeplitz import Spectrum, build_toeplitz, eigenvalues
from .zeta import FunctionId, ZetaStar, default_cache_dir, theta_series

VERDICT_OK = "consistent"
VERDICT_UNKNOWN = "inconclusive"


def violated_at(l: int, m: int) -> str:
    return f"violated-at:({l},{m})"


# -- spectra ------------------------------------------------------------------

def default_context(l: int, m: int) -> PrecisionContext:
    return PrecisionContext.for_matrix(l, m)


def spectrum_cache_path(cache_dir: Path, function: FunctionId, l: int, m: int, ctx: PrecisionContext) -> Path:
    name = function.label.replace(":", "-")
    return Path(cache_dir) / "spectra" / f"{name}_l{l}_m{m}_b{ctx.bits}_g{ctx.guard_bits}.json"


def _spectrum_document(spec: Spectrum) -> dict:
    digits = math.ceil(spec.ctx.work_bits * math.log10(2)) + 3
    doc = spec.to_dict(digits)
    doc["meta"] = dict(spec.meta)
    return doc


def save_spectrum(cache_dir: Path, spec: Spectrum) -> Path:
    path = spectrum_cache_path(cache_dir, spec.source, spec.l, spec.m, spec.ctx)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(_spectrum_document(spec), indent=1) + "\n")
    tmp.replace(path)
    return path


def load_spectrum(cache_dir: Path, function: FunctionId, l: int, m: int, ctx: PrecisionContext) -> Spectrum | None:
    path = spectrum_cache_path(cache_dir, function, l, m, ctx)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if (doc.get("generator_version") != GENERATOR_VERSION or doc.get("function") != function.label
            or doc.get("bits") != ctx.bits or doc.get("guard_bits") != ctx.guard_bits
            or doc.get("l") != l or doc.get("m") != m or len(doc.get("eigenvalues", [])) != m):
        return None
    values = tuple(from_decimal_pair(p, ctx) for p in doc["eigenvalues"])
    return Spectrum(l, m, function, values, from_decimal_pair(doc["det"], ctx),
                    from_decimal_pair(doc["trace"], ctx), ctx, doc.get("meta", {}))


@functools.lru_cache(maxsize=512)
def _spectrum_cached(function: FunctionId, l: int, m: int, ctx: PrecisionContext) -> Spectrum:
    theta = theta_series(function, l + m - 1, ctx)
    return eigenvalues(build_toeplitz(l, m, theta, function))


def spectrum_of(function: FunctionId, l: int, m: int, ctx: PrecisionContext | None = None) -> Spectrum:
    """lambda-spectrum of ``L_{l,m}(function)``; memoized on ``(function, l, m, ctx)``.

    With ``ZETALAB_CACHE_DIR`` set, spectra are also persisted so interrupted
    sweeps resume where they stopped.
    """
    if l < 1 or m < 1:
        raise InputError(f"need l >= 1 and m >= 1, got l={l}, m={m}")
    ctx = ctx or default_context(l, m)
    cache_dir = default_cache_dir()
    if cache_dir is None:
        return _spectrum_cached(function, l, m, ctx)
    spec = load_spectrum(cache_dir, function, l, m, ctx)
    if spec is None:
        spec = _spectrum_cached(function, l, m, ctx)
        save_spectrum(cache_dir, spec)
    return spec


def _spectrum_job(args):
    return spectrum_of(*args)


def compute_spectra(function: FunctionId, l: int, m_values: Sequence[int], ctx: PrecisionContext,
                    workers: int = 1) -> dict:
    """``{m: Spectrum}`` for every requested ``m``; ``workers > 1`` fans out over processes."""
    m_values = sorted(set(m_values))
    if workers <= 1 or len(m_values) < 2:
        return {m: spectrum_of(function, l, m, ctx) for m in m_values}
    # largest matrices first so the pool stays busy
    order = sorted(m_values, reverse=True)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = dict(zip(order, pool.map(_spectrum_job, [(function, l, m, ctx) for m in order])))
    return {m: results[m] for m in m_values}


# -- circle fits ----------------------------------------------------------------

@dataclass(frozen=True)
class ClassifierParams:
    """Tunable knobs of the orbit detector.

    gap_factor: a modulus gap wider than ``gap_factor`` times the median gap splits clusters.
    residual_max: largest rms radial residual of an orbit, relative to its radius.
    span_min_deg: smallest angular extent of an orbit around its fitted center.
    max_gap_ratio: largest angular gap of an orbit relative to its median gap.
    min_points: clusters with fewer points get no circle and count as bow fragments.
    """

    gap_factor: float = 3.0
    residual_max: float = 0.05
    span_min_deg: float = 180.0
    max_gap_ratio: float = 8.0
    min_points: int = 4

    def __post_init__(self):
        if self.gap_factor <= 0 or self.residual_max <= 0 or self.max_gap_ratio <= 0:
            raise InputError("classifier parameters must be positive")
        if not 0 <= self.span_min_deg <= 360:
            raise InputError("span_min_deg must lie in [0, 360]")
        if self.min_points < 3:
            raise InputError("a circle needs at least 3 points")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class CircleFit:
    """One modulus cluster and, when it has enough points, its fitted circle."""

    members: tuple
    fitted: bool
    center: object = None
    radius: object = None
    residual: object = None  # rms of |w - c| - r
    algebraic_residual: object = None  # rms of |w|^2 + a Re w + b Im w + c
    span_deg: float = 0.0
    gap_ratio: float = math.inf  # max/min adjacent angular gap
    max_gap_over_median: float = math.inf

    def is_orbit(self, params: ClassifierParams) -> bool:
        if not self.fitted or len(self.members) < params.min_points:
            return False
        return (float(self.residual) <= params.residual_max * float(self.radius)
                and self.span_deg > params.span_min_deg
                and self.max_gap_over_median <= params.max_gap_ratio)


def kasa_fit(points: Sequence, ctx: PrecisionContext):
    """Least-squares circle through ``|w|^2 + a x + b y + c = 0``.

    Returns ``(center, radius, rms radial residual, rms algebraic residual)``.
    """
    with ctx.local():
        xs = [mpfr(p.real) if isinstance(p, mpc) else mpfr(p) for p in points]
        ys = [mpfr(p.imag) if isinstance(p, mpc) else mpfr(0) for p in points]
        n = len(xs)
        rows = [(x, y, mpfr(1)) for x, y in zip(xs, ys)]
        rhs = [-(x * x + y * y) for x, y in zip(xs, ys)]
        # normal equations of the 3-parameter linear problem
        N = np.empty((3, 3), dtype=object)
        v = []
        for i in range(3):
            for j in range(3):
                N[i, j] = sum((r[i] * r[j] for r in rows), mpfr(0))
            v.append(sum((r[i] * t for r, t in zip(rows, rhs)), mpfr(0)))
        a, b, c = linalg.lu_solve(N, v, ctx)
        cx, cy = -a / 2, -b / 2
        r2 = cx * cx + cy * cy - c
        radius = gmpy2.sqrt(r2) if r2 > 0 else mpfr(0)
        radial = [gmpy2.sqrt((x - cx) ** 2 + (y - cy) ** 2) - radius for x, y in zip(xs, ys)]
        alg = [x * x + y * y + a * x + b * y + c for x, y in zip(xs, ys)]
        rms = gmpy2.sqrt(sum((d * d for d in radial), mpfr(0)) / n)
        rms_alg = gmpy2.sqrt(sum((d * d for d in alg), mpfr(0)) / n)
        return mpc(cx, cy), radius, rms, rms_alg


def angular_gaps(points: Sequence, center, ctx: PrecisionContext) -> list:
    """Sorted-angle gaps around ``center`` (including the wrap-around gap), in radians."""
    with ctx.local():
        angles = sorted(float(gmpy2.atan2(mpc(p).imag - center.imag, mpc(p).real - center.real))
                        for p in points)
    if len(angles) < 2:
        return [2 * math.pi]
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(angles[0] + 2 * math.pi - angles[-1])
    return gaps


def _fit_cluster(members: list, ctx: PrecisionContext, min_points: int) -> CircleFit:
    members = tuple(members)
    if len(members) < max(3, min_points):
        return CircleFit(members, fitted=False)
    try:
        center, radius, res, res_alg = kasa_fit(members, ctx)
    except DegeneracyError:
        # collinear points: no circle through them
        return CircleFit(members, fitted=False)
    gaps = angular_gaps(members, center, ctx)
    gmax, gmin = max(gaps), min(gaps)
    med = float(np.median(gaps))
    return CircleFit(
        members, True, center, radius, res, res_alg,
        span_deg=math.degrees(2 * math.pi - gmax),
        gap_ratio=gmax / gmin if gmin > 0 else math.inf,
        max_gap_over_median=gmax / med if med > 0 else math.inf,
    )


def modulus_clusters(points: Sequence, ctx: PrecisionContext, gap_factor: float) -> list:
    """Single-linkage clusters of the closed upper half of a conjugation-closed set.

    Each cluster is returned with the conjugates of its strictly non-real members added back.
    """
    with ctx.local():
        upper = [p for p in points if not isinstance(p, mpc) or p.imag >= 0]
        if not upper:
            return []
        upper.sort(key=lambda p: (abs(p), float(mpc(p).real)))
        mods = [abs(p) for p in upper]
        gaps = [b - a for a, b in zip(mods, mods[1:])]
        floor = ctx.tol(1, 2) * (1 + mods[-1])
        cut = max(mpfr(gap_factor) * mpfr(float(np.median([float(g) for g in gaps]))) if gaps else mpfr(0),
                  floor)
        clusters, current = [], [upper[0]]
        for g, p in zip(gaps, upper[1:]):
            if g > cut:
                clusters.append(current)
                current = []
            current.append(p)
        clusters.append(current)
        out = []
        for cl in clusters:
            full = list(cl) + [p.conjugate() for p in cl if isinstance(p, mpc) and p.imag > 0]
            out.append(full)
        return out


def fit_orbits(points: Sequence, ctx: PrecisionContext, params: ClassifierParams = ClassifierParams()) -> list:
    """Cluster a conjugation-closed point set by modulus and fit a circle to every cluster.

    Clusters with fewer than ``params.min_points`` points come back unfitted.
    """
    return [_fit_cluster(cl, ctx, params.min_points)
            for cl in modulus_clusters(points, ctx, params.gap_factor)]


# -- classification ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Rendezvous:
    """Closest real-axis approach of two adjacent structures."""

    index: int
    between: tuple  # e.g. ("arrow", "orbit-1")
    point: float
    gap: float

    def to_dict(self) -> dict:
        return {"index": self.index, "between": list(self.between), "point": self.point, "gap": self.gap}


@dataclass(frozen=True, eq=False)
class Orbit:
    members: tuple
    fitted_center: object
    fitted_radius: object
    fit_residual: object
    algebraic_residual: object
    span_deg: float
    gap_ratio: float
    max_gap_over_median: float
    rendezvous: Rendezvous | None = None


@dataclass(frozen=True, eq=False)
class Classification:
    l: int
    m: int
    function: FunctionId
    arrow: tuple
    bow: tuple
    orbits: tuple
    reassigned_largest_real: bool
    successor_available: bool
    rendezvous: tuple
    params: ClassifierParams
    ctx: PrecisionContext
    fragments: int = 0

    @property
    def counts(self) -> dict:
        return {"arr": len(self.arrow), "bow": len(self.bow), "orb": [len(o.members) for o in self.orbits],
                "targ": len(self.orbits)}

    def parts(self) -> dict:
        out = {"arrow": list(self.arrow), "bow": list(self.bow)}
        for k, o in enumerate(self.orbits, 1):
            out[f"orbit-{k}"] = list(o.members)
        return out

    def membership(self) -> dict:
        """``{part name: sorted float pairs}``; used to compare classifications across precisions."""
        return {name: sorted((round(complex(v).real, 12), round(complex(v).imag, 12)) for v in vals)
                for name, vals in self.parts().items()}

    def to_dict(self, digits: int | None = None) -> dict:
        digits = digits or output_digits(self.ctx)
        pair = lambda v: to_decimal_pair(v, digits)  # noqa: E731
        return {
            "l": self.l,
            "m": self.m,
            "function": self.function.label,
            "bits": self.ctx.bits,
            "guard_bits": self.ctx.guard_bits,
            "generator_version": GENERATOR_VERSION,
            "arrow": [real_to_decimal(v, digits) for v in self.arrow],
            "bow": [pair(v) for v in self.bow],
            "orbits": [
                {
                    "center": pair(o.fitted_center),
                    "radius": real_to_decimal(o.fitted_radius, digits),
                    "residual": real_to_decimal(o.fit_residual, 12),
                    "algebraic_residual": real_to_decimal(o.algebraic_residual, 12),
                    "span_deg": round(o.span_deg, 6),
                    "gap_ratio": round(o.gap_ratio, 6),
                    "max_gap_over_median": round(o.max_gap_over_median, 6),
                    "members": [pair(v) for v in o.members],
                    "rendezvous": o.rendezvous.to_dict() if o.rendezvous else None,
                }
                for o in self.orbits
            ],
            "rendezvous": [r.to_dict() for r in self.rendezvous],
            "counts": self.counts,
            "bow_fragments": self.fragments,
            "reassigned_largest_real": self.reassigned_largest_real,
            "successor_available": self.successor_available,
            "parameters": self.params.to_dict(),
        }


def _sort_complex(values) -> list:
    return sorted(values, key=lambda v: (float(mpc(v).real), float(mpc(v).imag)))


def _rendezvous(index: int, names: tuple, a: Sequence, b: Sequence) -> Rendezvous | None:
    """Pair ``(p, q)`` minimizing ``|p - q| + |Im p| + |Im q|``; the point is the mean real part."""
    if not a or not b:
        return None
    A = np.array([complex(v) for v in a])
    B = np.array([complex(v) for v in b])
    d = np.abs(A[:, None] - B[None, :])
    score = d + np.abs(A.imag)[:, None] + np.abs(B.imag)[None, :]
    i, j = np.unravel_index(int(np.argmin(score)), score.shape)
    return Rendezvous(index, names, float((A[i].real + B[j].real) / 2), float(d[i, j]))


def count_real(spec: Spectrum) -> int:
    return sum(1 for v in spec.eigenvalues if not isinstance(v, mpc))


def classify(spec: Spectrum, successor: Spectrum | None = None,
             params: ClassifierParams = ClassifierParams()) -> Classification:
    """Arrow / bow / orbit partition of ``spec`` (index ``m``), using ``successor`` (index ``m+1``)
    for the largest-real-eigenvalue rule.  Without a successor the rule is skipped and flagged.
    """
    if successor is not None:
        if successor.l != spec.l or successor.source != spec.source or successor.m != spec.m + 1:
            raise InputError("successor must be the spectrum of the same (function, l) at m+1")
    ctx = spec.ctx
    reals = sorted(v for v in spec.eigenvalues if not isinstance(v, mpc))
    nonreal = [v for v in spec.eigenvalues if isinstance(v, mpc)]
    reassigned = False
    bow = []
    if successor is not None and reals and count_real(successor) < len(reals):
        bow.append(reals.pop())
        reassigned = True
    orbits, fragments = [], 0
    for fit in fit_orbits(nonreal, ctx, params):
        if fit.is_orbit(params):
            orbits.append(fit)
        else:
            fragments += 0 if fit.fitted else 1
            bow.extend(fit.members)
    orbits.sort(key=lambda f: float(f.radius))
    # Rend_0: arrow/orbit 1, Rend_k: orbit k/orbit k+1, Rend_targ: last orbit/bow
    names = ["arrow"] + [f"orbit-{k}" for k in range(1, len(orbits) + 1)] + ["bow"]
    sets = [reals] + [list(o.members) for o in orbits] + [bow]
    rends = []
    for k in range(len(sets) - 1):
        r = _rendezvous(k, (names[k], names[k + 1]), sets[k], sets[k + 1])
        if r is not None:
            rends.append(r)
    by_index = {r.index: r for r in rends}
    orbit_records = tuple(
        Orbit(tuple(_sort_complex(o.members)), o.center, o.radius, o.residual,
              o.algebraic_residual, o.span_deg, o.gap_ratio, o.max_gap_over_median, by_index.get(k))
        for k, o in enumerate(orbits, 1)
    )
    return Classification(spec.l, spec.m, spec.source, tuple(reals), tuple(_sort_complex(bow)), orbit_records,
                          reassigned, successor is not None, tuple(rends), params, ctx, fragments)


def partition_complete(c: Classification, spec: Spectrum) -> bool:
    """Every eigenvalue lands in exactly one part."""
    got = sorted(((float(mpc(v).real), float(mpc(v).imag)) for part in c.parts().values() for v in part))
    want = sorted((float(mpc(v).real), float(mpc(v).imag)) for v in spec.eigenvalues)
    return got == want and len(c.arrow) + len(c.bow) + sum(len(o.members) for o in c.orbits) == spec.m


def conjugate_closed(c: Classification) -> bool:
    """Bow and orbits contain the conjugate of each member; arrow members are real."""
    if any(isinstance(v, mpc) for v in c.arrow):
        return False
    for name, vals in c.parts().items():
        if name == "arrow":
            continue
        keys = sorted((float(mpc(v).real), float(mpc(v).imag)) for v in vals)
        conj = sorted((float(mpc(v).real), -float(mpc(v).imag)) for v in vals)
        if keys != conj:
            return False
    return True


# -- conjecture statistics ------------------------------------------------------

def min_pairwise_gap(spec: Spectrum):
    """Smallest ``|lambda_i - lambda_j|``; candidate pairs found in double, refined at full precision."""
    vals = list(spec.eigenvalues)
    if len(vals) < 2:
        return None
    z = np.array([complex(v) for v in vals])
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    dmin = float(d.min())
    cand = np.argwhere(d <= max(4 * dmin, 1e-6 * (1 + np.abs(z).max())))
    with spec.ctx.local():
        return min(abs(vals[i] - vals[j]) for i, j in cand if i < j)


def log_mean(spec: Spectrum):
    """``(1/m) sum log lambda`` on the principal branch.

    Returns ``(real part, imaginary part of the non-real contributions, number of negative reals)``.
    Negative real eigenvalues each add ``i pi``; conjugate pairs cancel.
    """
    ctx = spec.ctx
    with ctx.local():
        re = mpfr(0)
        im = mpfr(0)
        negatives = 0
        for v in spec.eigenvalues:
            if isinstance(v, mpc):
                lg = gmpy2.log(v)
                re += lg.real
                im += lg.imag
            else:
                re += gmpy2.log(abs(v))
                negatives += v < 0
        return re / spec.m, im, negatives


@dataclass
class ConjectureReport:
    l: int
    function: FunctionId
    m_values: list
    params: ClassifierParams
    ctx: PrecisionContext
    sections: dict = field(default_factory=dict)
    classifications: dict = field(default_factory=dict, repr=False)

    @property
    def verdicts(self) -> dict:
        return {k: v["verdict"] for k, v in self.sections.items()}

    def outcome(self) -> str:
        v = self.verdicts.values()
        if any(x.startswith("violated") for x in v):
            return "violation"
        if any(x == VERDICT_UNKNOWN for x in v):
            return VERDICT_UNKNOWN
        return VERDICT_OK

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "function": self.function.label,
            "m_values": self.m_values,
            "bits": self.ctx.bits,
            "guard_bits": self.ctx.guard_bits,
            "generator_version": GENERATOR_VERSION,
            "parameters": self.params.to_dict(),
            "outcome": self.outcome(),
            "conjectures": self.sections,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _first_violation(l: int, flags: list) -> str:
    """``flags``: (m, ok) in increasing m."""
    for m, ok in flags:
        if not ok:
            return violated_at(l, m)
    return VERDICT_OK


def _decreases(seq: list) -> list:
    return [{"m": m1, "from": a, "to": b} for (_, a), (m1, b) in zip(seq, seq[1:]) if b < a]


def check_conjectures(function: FunctionId, l: int, m_max: int, ctx: PrecisionContext | None = None,
                      m_values: Sequence[int] | None = None, params: ClassifierParams = ClassifierParams(),
                      spectra: dict | None = None, workers: int = 1, f2_tol: float = 0.05,
                      equidistribution_max: float = 4.0, with_successor: bool = True,
                      provider: Callable | None = None) -> ConjectureReport:
    """Conjectures 1A-1I on ``Spec(L_{l,m})`` for ``m = 1..m_max`` (or ``m_values``).

    Each classified ``m`` uses ``m+1`` for the largest-real rule; the extra
    spectrum is computed when the grid is consecutive.  ``spectra`` injects
    precomputed (or synthetic) spectra keyed by ``m``.
    """
    if m_max < 2:
        raise InputError("m_max must be at least 2")
    ms = sorted(set(m_values)) if m_values is not None else list(range(1, m_max + 1))
    if not ms or ms[0] < 1:
        raise InputError("m values must be positive")
    ctx = ctx or default_context(l, max(ms) + 1)
    spectra = dict(spectra or {})
    wanted = sorted(set(ms) | ({m + 1 for m in ms} if with_successor else set()))
    missing = [m for m in wanted if m not in spectra]
    if missing:
        if provider is not None:
            spectra.update({m: provider(m) for m in missing})
        else:
            spectra.update(compute_spectra(function, l, missing, ctx, workers))
    classes = {m: classify(spectra[m], spectra.get(m + 1), params) for m in ms}
    report = ConjectureReport(l, function, ms, params, ctx)
    rng = [ms[0], ms[-1]]
    S = report.sections
    digits = 12

    # 1A: simple spectrum
    gaps = [(m, min_pairwise_gap(spectra[m])) for m in ms]
    with ctx.local():
        flags = [(m, g is None or g > ctx.tol(1, 3)) for m, g in gaps]
    S["1A"] = {"range": rng, "min_gap": [[m, real_to_decimal(g, digits) if g is not None else None] for m, g in gaps],
               "threshold": f"2^-{ctx.bits // 3}", "verdict": _first_violation(l, flags)}

    # 1B / 1C: running extremes of the arrow
    run_max, run_min, rows = None, None, []
    for m in ms:
        arr = classes[m].arrow
        if arr:
            run_max = arr[-1] if run_max is None else max(run_max, arr[-1])
            run_min = arr[0] if run_min is None else min(run_min, arr[0])
        rows.append([m, real_to_decimal(arr[-1], digits) if arr else None,
                     real_to_decimal(arr[0], digits) if arr else None])
    have = [m for m in ms if classes[m].arrow]
    S["1B"] = {"range": rng, "per_m": [[m, r[1]] for m, r in zip(ms, rows)],
               "running_max": real_to_decimal(run_max, digits) if run_max is not None else None,
               "verdict": (VERDICT_UNKNOWN if not have else
                           _first_violation(l, [(m, classes[m].arrow[-1] > 0) for m in have]))}
    S["1C"] = {"range": rng, "per_m": [[m, r[2]] for m, r in zip(ms, rows)],
               "running_min": real_to_decimal(run_min, digits) if run_min is not None else None,
               "verdict": (VERDICT_UNKNOWN if not have else
                           _first_violation(l, [(m, classes[m].arrow[0] > 0) for m in have]))}

    # 1D: counts per structure, non-decreasing in m
    arr_seq = [(m, len(classes[m].arrow)) for m in ms]
    bow_seq = [(m, len(classes[m].bow)) for m in ms]
    kmax = max((len(classes[m].orbits) for m in ms), default=0)
    orb_seq = {k: [(m, len(classes[m].orbits[k - 1].members)) for m in ms if len(classes[m].orbits) >= k]
               for k in range(1, kmax + 1)}
    dec = {"arr": _decreases(arr_seq), "bow": _decreases(bow_seq)}
    dec.update({f"orb-{k}": _decreases(seq) for k, seq in orb_seq.items()})
    first = min((d["m"] for v in dec.values() for d in v), default=None)
    S["1D"] = {"range": rng, "arr": arr_seq, "bow": bow_seq, "orb": {str(k): v for k, v in orb_seq.items()},
               "decreases": dec, "consecutive": all(b - a == 1 for a, b in zip(ms, ms[1:])),
               "verdict": violated_at(l, first) if first is not None else VERDICT_OK}

    # 1E: shared arrow prefix moves left
    rows, flags = [], []
    for m in ms:
        if m + 1 not in classes:
            continue
        a, b = classes[m].arrow, classes[m + 1].arrow
        n = min(len(a), len(b))
        ok = all(b[j] < a[j] for j in range(n))
        rows.append({"m": m, "compared": n, "ok": ok})
        flags.append((m, ok))
    S["1E"] = {"range": rng, "comparisons": rows,
               "verdict": _first_violation(l, flags) if flags else VERDICT_UNKNOWN}

    # 1F'': (1/m) sum log lambda vs log W_l
    W = W_limit(l)
    logW = math.log(W.numerator / W.denominator)
    rows = []
    with ctx.local():
        for m in ms:
            re, im, neg = log_mean(spectra[m])
            rows.append({"m": m, "value": real_to_decimal(re, digits), "deviation": float(re) - logW,
                         "pair_imag": real_to_decimal(im, 6), "pair_imag_ok": bool(abs(im) <= ctx.tol(1, 4)),
                         "negative_reals": neg, "imag_mod_2pi": "pi" if neg % 2 else "0"})
    last = rows[-1]
    ok = abs(last["deviation"]) <= f2_tol
    S["1F''"] = {"range": rng, "log_W": logW, "W_l": f"{W.numerator}/{W.denominator}", "tolerance": f2_tol,
                 "values": rows, "at_m": last["m"],
                 "verdict": VERDICT_OK if ok else VERDICT_UNKNOWN}

    # 1G: number of orbits non-decreasing
    targ = [(m, len(classes[m].orbits)) for m in ms]
    d = _decreases(targ)
    S["1G"] = {"range": rng, "targ": targ, "decreases": d,
               "verdict": violated_at(l, d[0]["m"]) if d else VERDICT_OK}

    # 1H: orbits almost circular and almost equidistributed
    rows = []
    for m in ms:
        for k, o in enumerate(classes[m].orbits, 1):
            rows.append({"m": m, "k": k, "relative_residual": float(o.fit_residual) / float(o.fitted_radius),
                         "gap_ratio": o.gap_ratio, "max_gap_over_median": o.max_gap_over_median})
    good = all(r["relative_residual"] <= params.residual_max and r["max_gap_over_median"] <= equidistribution_max
               for r in rows)
    S["1H"] = {"range": rng, "orbits": rows, "equidistribution_max": equidistribution_max,
               "verdict": VERDICT_UNKNOWN if (l == 1 or not rows or not good) else VERDICT_OK}

    # 1I: rendezvous alternation along the target
    rows, flags = [], []
    for m in ms:
        c = classes[m]
        if not c.orbits:
            continue
        pts = {r.index: r.point for r in c.rendezvous}
        checks = []
        for k in range(len(c.orbits)):
            if k in pts and k + 1 in pts:
                ok = pts[k + 1] < pts[k] if k % 2 == 0 else pts[k + 1] > pts[k]
                checks.append(ok)
        rows.append({"m": m, "targ": len(c.orbits), "rendezvous": [r.to_dict() for r in c.rendezvous],
                     "alternates": all(checks)})
        flags.append((m, all(checks)))
    final = flags[-1][1] if flags else None
    S["1I"] = {"range": rng, "per_m": rows,
               "target_at_max_m": len(classes[ms[-1]].orbits),
               "verdict": VERDICT_OK if final else VERDICT_UNKNOWN}

    S["invariants"] = {
        "partition_complete": all(partition_complete(classes[m], spectra[m]) for m in ms),
        "conjugate_closed": all(conjugate_closed(classes[m]) for m in ms),
        "verdict": VERDICT_OK,
    }
    report.classifications = classes
    return report


# -- overlays -------------------------------------------------------------------

def nearest_distances(a: Sequence, b: Sequence, ctx: PrecisionContext) -> list:
    """For every point of ``a`` the distance to the closest point of ``b`` (full precision)."""
    A = np.array([complex(v) for v in a])
    B = np.array([complex(v) for v in b])
    idx = np.argmin(np.abs(A[:, None] - B[None, :]), axis=1)
    with ctx.local():
        return [abs(mpc(a[i]) - mpc(b[j])) for i, j in enumerate(idx)]


def overlay(function_a: FunctionId, function_b: FunctionId, l: int, m: int,
            ctx: PrecisionContext | None = None, bins: int = 20) -> dict:
    """Joint export of two spectra with the nearest-neighbour distance histogram (a to b)."""
    ctx = ctx or default_context(l, m)
    sa = spectrum_of(function_a, l, m, ctx)
    sb = spectrum_of(function_b, l, m, ctx)
    return overlay_spectra(sa, sb, bins)


def overlay_spectra(sa: Spectrum, sb: Spectrum, bins: int = 20) -> dict:
    if sa.l != sb.l or sa.m != sb.m:
        raise InputError("overlay needs spectra with the same l and m")
    ctx = sa.ctx
    digits = output_digits(ctx)
    dist = nearest_distances(sa.eigenvalues, sb.eigenvalues, ctx)
    df = np.array([float(d) for d in dist])
    if df.max() == 0:
        counts, edges = [len(df)], [0.0, 0.0]
    else:
        c, e = np.histogram(df, bins=bins, range=(0.0, float(df.max())))
        counts, edges = c.tolist(), e.tolist()
    return {
        "l": sa.l,
        "m": sa.m,
        "bits": ctx.bits,
        "guard_bits": ctx.guard_bits,
        "generator_version": GENERATOR_VERSION,
        "functions": [sa.source.label, sb.source.label],
        "points": {
            sa.source.label if sa.source != sb.source else "a": [to_decimal_pair(v, digits) for v in sa.eigenvalues],
            sb.source.label if sa.source != sb.source else "b": [to_decimal_pair(v, digits) for v in sb.eigenvalues],
        },
        "nearest_distance": {
            "values": [real_to_decimal(d, 12) for d in dist],
            "median": float(np.median(df)),
            "max": float(df.max()),
            "histogram": {"counts": counts, "edges": edges},
        },
    }


def classification_sweep(function: FunctionId, l: int, m_values: Sequence[int], ctx: PrecisionContext,
                         params: ClassifierParams = ClassifierParams(), workers: int = 1,
                         with_successor: bool = True) -> tuple:
    """``(spectra, classifications)`` over ``m_values``; successors computed when requested."""
    ms = sorted(set(m_values))
    need = set(ms) | ({m + 1 for m in ms} if with_successor else set())
    spectra = compute_spectra(function, l, sorted(need), ctx, workers)
    classes = {m: classify(spectra[m], spectra.get(m + 1), params) for m in ms}
    return spectra, classes
