"""Command-line front end.

Subcommands: ``coeffs``, ``spectrum``, ``sweep``, ``pade``, ``conjectures``, ``plot``.

Exit codes: 0 success, 2 configuration error, 3 precision/convergence error,
4 I/O error.  ``conjectures`` additionally returns 5 when a violation was
found and 6 when the outcome is inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import GENERATOR_VERSION, __version__
from .errors import ConfigurationError, ZetaLabError
from .pade import pade_report
from .precision import PrecisionContext
from .zeta import CACHE_ENV, FunctionId, taylor, theta_series, write_coefficients, coefficient_document

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_IO = 4
EXIT_VIOLATION = 5
EXIT_INCONCLUSIVE = 6


def parse_m_range(text: str) -> tuple:
    """``"A..B"`` -> ``(A, B)`` with ``1 <= A <= B``."""
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ConfigurationError(f"m-range must look like A..B, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigurationError(f"m-range bounds must be positive and ordered, got {text!r}")
    return lo, hi


@dataclass(frozen=True)
class RunConfig:
    command: str
    function: FunctionId
    l: int = 1
    m: int | None = None
    m_range: tuple | None = None
    bits: int | None = None
    guard_bits: int = 64
    cache_dir: Path | None = None
    out: Path | None = None
    overlay_function: FunctionId | None = None
    frames_dir: Path | None = None
    radius: float | None = None
    axis_range: float | None = None
    params: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if self.bits is not None and self.bits < 64:
            raise ConfigurationError(f"precision must be at least 64 bits, got {self.bits}")
        if self.l < 0:
            raise ConfigurationError("l must be non-negative")
        if self.m is not None and self.m < 0:
            raise ConfigurationError("m must be non-negative")
        if self.m_range is not None and (self.m_range[0] < 1 or self.m_range[1] < self.m_range[0]):
            raise ConfigurationError("m-range bounds must be positive and ordered")

    def m_values(self) -> list:
        if self.m_range is not None:
            return list(range(self.m_range[0], self.m_range[1] + 1))
        if self.m is not None:
            return [self.m]
        raise ConfigurationError(f"{self.command} needs --m or --m-range")

    def context(self, l: int, m_top: int) -> PrecisionContext:
        if self.bits is not None:
            return PrecisionContext(self.bits, self.guard_bits)
        return PrecisionContext.for_matrix(l, m_top, guard_bits=self.guard_bits)

    def header(self, ctx: PrecisionContext) -> dict:
        return {"generator_version": GENERATOR_VERSION, "bits": ctx.bits, "guard_bits": ctx.guard_bits,
                "command": self.command, "function": self.function.label, "l": self.l}


# -- writers ------------------------------------------------------------------

def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)
    return path


def _write_json(path: Path, doc: dict) -> Path:
    return _write_text(path, json.dumps(doc, indent=1) + "\n")


def _stem(fn: FunctionId, l: int, m: int) -> str:
    return f"{fn.label.replace(':', '-')}_l{l}_m{m}"


def _classifier_params(cfg: RunConfig):
    from .spectra import ClassifierParams
    return ClassifierParams(**cfg.params)


# -- commands -----------------------------------------------------------------

def cmd_coeffs(cfg: RunConfig) -> int:
    order = cfg.m if cfg.m is not None else (cfg.m_range[1] if cfg.m_range else None)
    if order is None:
        raise ConfigurationError("coeffs needs --m (the order)")
    ctx = PrecisionContext(cfg.bits or 256, cfg.guard_bits)
    series = taylor(cfg.function, order, ctx)
    cache_dir = cfg.cache_dir or Path("zetalab-cache")
    path = write_coefficients(cache_dir, series, cfg.function)
    print(path)
    if cfg.out is not None:
        doc = coefficient_document(series, cfg.function)
        th = theta_series(cfg.function, order, ctx)
        doc["theta"] = coefficient_document(th, cfg.function)["coeffs"]
        print(_write_json(cfg.out, doc))
    return EXIT_OK


def _spectrum_outputs(cfg: RunConfig, out: Path, spec, cls, svg: bool = True) -> list:
    from .plotting import plot_spectrum
    stem = _stem(cfg.function, spec.l, spec.m)
    paths = [_write_text(out / f"{stem}.spectrum.json", spec.to_json()),
             _write_text(out / f"{stem}.spectrum.csv", spec.to_csv())]
    if cls is not None:
        paths.append(_write_json(out / f"{stem}.classification.json", cls.to_dict()))
    if svg:
        meta = dict(cfg.header(spec.ctx), m=spec.m)
        paths.append(plot_spectrum(spec.eigenvalues, out / f"{stem}.svg", spec.l,
                                   f"Spec l={spec.l}, m={spec.m} ({cfg.function.symbol})",
                                   radius=cfg.radius, axis_range=cfg.axis_range, meta=meta))
    return paths


def cmd_spectrum(cfg: RunConfig, with_successor: bool = True) -> int:
    from .spectra import classification_sweep
    if cfg.m is None:
        raise ConfigurationError("spectrum needs --m")
    ctx = cfg.context(cfg.l, cfg.m + 1)
    spectra, classes = classification_sweep(cfg.function, cfg.l, [cfg.m], ctx, _classifier_params(cfg),
                                            with_successor=with_successor)
    out = cfg.out or Path("zetalab-out")
    for p in _spectrum_outputs(cfg, out, spectra[cfg.m], classes[cfg.m]):
        print(p)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    from .plotting import plot_union, write_frames
    from .spectra import classification_sweep
    ms = cfg.m_values()
    ctx = cfg.context(cfg.l, ms[-1] + 1)
    spectra, classes = classification_sweep(cfg.function, cfg.l, ms, ctx, _classifier_params(cfg),
                                            workers=cfg.workers)
    out = cfg.out or Path("zetalab-out")
    for m in ms:
        _spectrum_outputs(cfg, out, spectra[m], classes[m], svg=False)
    summary = dict(cfg.header(ctx), m_values=[ms[0], ms[-1]],
                   parameters=_classifier_params(cfg).to_dict(),
                   counts=[[m, classes[m].counts] for m in ms])
    print(_write_json(out / f"{_stem(cfg.function, cfg.l, ms[-1])}.sweep.json", summary))
    frames = cfg.frames_dir or out / "frames"
    write_frames({m: spectra[m] for m in ms}, frames, cfg.l, cfg.function.symbol, axis_range=cfg.axis_range,
                 meta=cfg.header(ctx))
    print(frames / "index.html")
    union = out / f"{cfg.function.label.replace(':', '-')}_l{cfg.l}_union_m{ms[0]}-{ms[-1]}.svg"
    print(plot_union([spectra[m].eigenvalues for m in ms], union, cfg.l,
                     f"Union of Spec l={cfg.l}, m={ms[0]}..{ms[-1]}", cfg.radius, cfg.axis_range,
                     meta=cfg.header(ctx)))
    return EXIT_OK


def cmd_pade(cfg: RunConfig, r_range: tuple | None = None) -> int:
    ms = cfg.m_values()
    top = max(ms[-1], r_range[1] if r_range else 0)
    ctx = cfg.context(cfg.l, top + 1)
    theta = theta_series(cfg.function, cfg.l + top + 2, ctx)
    rr = list(range(r_range[0], r_range[1] + 1)) if r_range else None
    report = pade_report(cfg.l, ms, theta, cfg.function, rr)
    report.update(generator_version=GENERATOR_VERSION, parameters={"m_values": [ms[0], ms[-1]],
                                                                   "r_range": list(r_range) if r_range else None})
    out = cfg.out or Path("zetalab-out") / f"{_stem(cfg.function, cfg.l, ms[-1])}.pade.json"
    print(_write_json(out, report))
    return EXIT_OK


def cmd_conjectures(cfg: RunConfig) -> int:
    from .spectra import VERDICT_OK, check_conjectures
    ms = cfg.m_values() if cfg.m_range else list(range(1, (cfg.m or 0) + 1))
    if len(ms) < 2 and (cfg.m or 0) < 2:
        raise ConfigurationError("conjectures needs m_max >= 2")
    ctx = cfg.context(cfg.l, ms[-1] + 1)
    report = check_conjectures(cfg.function, cfg.l, ms[-1], ctx, m_values=ms, params=_classifier_params(cfg),
                               workers=cfg.workers)
    out = cfg.out or Path("zetalab-out") / f"{_stem(cfg.function, cfg.l, ms[-1])}.conjectures.json"
    print(_write_text(out, report.to_json()))
    for name, verdict in report.verdicts.items():
        print(f"{name}: {verdict}")
    outcome = report.outcome()
    if outcome == VERDICT_OK:
        return EXIT_OK
    return EXIT_VIOLATION if outcome == "violation" else EXIT_INCONCLUSIVE


def cmd_plot(cfg: RunConfig, union: bool = False) -> int:
    from .plotting import plot_overlay, plot_spectrum, plot_union
    from .spectra import compute_spectra, overlay_spectra, spectrum_of
    if union:
        ms = cfg.m_values()
        ctx = cfg.context(cfg.l, ms[-1])
        spectra = compute_spectra(cfg.function, cfg.l, ms, ctx, cfg.workers)
        out = cfg.out or Path("zetalab-out") / f"{cfg.function.label.replace(':', '-')}_l{cfg.l}_union.svg"
        print(plot_union([spectra[m].eigenvalues for m in ms], out, cfg.l,
                         f"Union of Spec l={cfg.l}, m={ms[0]}..{ms[-1]}", cfg.radius, cfg.axis_range,
                         meta=cfg.header(ctx)))
        return EXIT_OK
    if cfg.m is None:
        raise ConfigurationError("plot needs --m (or --union with --m-range)")
    ctx = cfg.context(cfg.l, cfg.m)
    sa = spectrum_of(cfg.function, cfg.l, cfg.m, ctx)
    meta = dict(cfg.header(ctx), m=cfg.m)
    if cfg.overlay_function is None:
        out = cfg.out or Path("zetalab-out") / f"{_stem(cfg.function, cfg.l, cfg.m)}.svg"
        print(plot_spectrum(sa.eigenvalues, out, cfg.l, f"Spec l={cfg.l}, m={cfg.m} ({cfg.function.symbol})",
                            cfg.radius, cfg.axis_range, meta=meta))
        return EXIT_OK
    sb = spectrum_of(cfg.overlay_function, cfg.l, cfg.m, ctx)
    stem = f"{_stem(cfg.function, cfg.l, cfg.m)}_vs_{cfg.overlay_function.label.replace(':', '-')}"
    out = cfg.out or Path("zetalab-out") / f"{stem}.svg"
    meta["overlay_function"] = cfg.overlay_function.label
    print(plot_overlay(sa.eigenvalues, sb.eigenvalues, out, cfg.l, (cfg.function.symbol, cfg.overlay_function.symbol),
                       f"Spec l={cfg.l}, m={cfg.m}: {cfg.function.symbol} and {cfg.overlay_function.symbol}",
                       cfg.radius, cfg.axis_range, meta=meta))
    print(_write_json(Path(out).with_suffix(".json"), overlay_spectra(sa, sb)))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetalab", description="Toeplitz-matrix laboratory for zeta*(z) = 2(z-1)zeta(z).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({GENERATOR_VERSION})")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, m_required=False):
        sp.add_argument("--function", default="zeta-star", help="zeta-star | zeta-trivial | zeta-hat:L")
        sp.add_argument("--l", type=int, default=1)
        sp.add_argument("--m", type=int)
        sp.add_argument("--m-range", help="A..B (inclusive)")
        sp.add_argument("--bits", type=int, help="published precision (default grows with l + m)")
        sp.add_argument("--guard-bits", type=int, default=64)
        sp.add_argument("--cache-dir", type=Path, help=f"coefficient/spectrum cache (default ${CACHE_ENV})")
        sp.add_argument("--out", type=Path)
        sp.add_argument("--workers", type=int, default=1)

    def plotting(sp):
        sp.add_argument("--radius", type=float, help="reference circle radius (default W_l)")
        sp.add_argument("--axis-range", type=float)

    def classifier(sp):
        sp.add_argument("--orbit-gap-factor", type=float, default=3.0)
        sp.add_argument("--orbit-residual-max", type=float, default=0.05)
        sp.add_argument("--orbit-span-min", type=float, default=180.0)
        sp.add_argument("--orbit-max-gap-ratio", type=float, default=8.0)

    sp = sub.add_parser("coeffs", help="generate and cache Taylor coefficients")
    common(sp)
    sp = sub.add_parser("spectrum", help="one spectrum with classification and SVG")
    common(sp), plotting(sp), classifier(sp)
    sp.add_argument("--no-successor", action="store_true", help="skip m+1 (largest-real rule not applied)")
    sp = sub.add_parser("sweep", help="spectra over an m range, frames and union plot")
    common(sp), plotting(sp), classifier(sp)
    sp.add_argument("--frames-dir", type=Path)
    sp = sub.add_parser("pade", help="Pade report over an m grid")
    common(sp)
    sp.add_argument("--r-range", help="A..B consecutive m values for the R_l extrapolation")
    sp = sub.add_parser("conjectures", help="conjecture 1A-1I report for m = 1..M (--m) or --m-range")
    common(sp), classifier(sp)
    sp = sub.add_parser("plot", help="single, overlay or union SVG")
    common(sp), plotting(sp)
    sp.add_argument("--overlay-function")
    sp.add_argument("--union", action="store_true")
    return p


def config_from_args(args) -> RunConfig:
    params = {}
    if hasattr(args, "orbit_gap_factor"):
        params = {"gap_factor": args.orbit_gap_factor, "residual_max": args.orbit_residual_max,
                  "span_min_deg": args.orbit_span_min, "max_gap_ratio": args.orbit_max_gap_ratio}
    overlay = getattr(args, "overlay_function", None)
    return RunConfig(
        command=args.command,
        function=FunctionId.parse(args.function),
        l=args.l,
        m=args.m,
        m_range=parse_m_range(args.m_range) if args.m_range else None,
        bits=args.bits,
        guard_bits=args.guard_bits,
        cache_dir=args.cache_dir,
        out=args.out,
        overlay_function=FunctionId.parse(overlay) if overlay else None,
        frames_dir=getattr(args, "frames_dir", None),
        radius=getattr(args, "radius", None),
        axis_range=getattr(args, "axis_range", None),
        params=params,
        workers=args.workers,
    )


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.cache_dir is not None:
            os.environ[CACHE_ENV] = str(cfg.cache_dir)
        if cfg.command == "coeffs":
            return cmd_coeffs(cfg)
        if cfg.command == "spectrum":
            return cmd_spectrum(cfg, with_successor=not args.no_successor)
        if cfg.command == "sweep":
            return cmd_sweep(cfg)
        if cfg.command == "pade":
            return cmd_pade(cfg, parse_m_range(args.r_range) if args.r_range else None)
        if cfg.command == "conjectures":
            return cmd_conjectures(cfg)
        return cmd_plot(cfg, union=args.union)
    except OSError as exc:
        print(f"zetalab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ZetaLabError as exc:
        print(f"zetalab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
