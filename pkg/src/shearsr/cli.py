"""Benchmark harness: degrade, superresolve, score, report.

Each row is one (image, degradation) pair.  The degraded image is computed
once per row and shared by every method, so all methods see the same noise.
A failing row is reported on stderr and skipped; the exit status is 1 if any
row failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ffst, image, sme
from .blocks import read_block_config
from .resample import DegradationSpec

log = logging.getLogger("shearsr")

CSV_HEADER = ("image", "degradation", "method", "psnr_db")


@dataclass
class RunConfig:
    inputs: list[str]
    methods: list[str] = field(default_factory=lambda: list(sme.METHODS))
    degradations: list[str] = field(default_factory=lambda: ["ds"])
    lam: float = sme.DEFAULT_LAMBDA
    scales: int | None = None
    seed: int = 0
    out: Path | None = None
    size: int = 256
    sweeps: int = sme.DEFAULT_SWEEPS
    crop: tuple[int, int, int, int] | None = None
    dump_bands: bool = False
    block_config: str | None = None
    backend: str | None = None

    def validate(self) -> None:
        bad = [m for m in self.methods if m not in sme.METHODS]
        if bad:
            raise ValueError(f"unknown method(s) {bad}; choose from {list(sme.METHODS)}")
        for d in self.degradations:
            DegradationSpec.parse(d)
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True, order=True)
class ReportRow:
    image: str
    degradation: str
    method: str
    psnr_db: float

    def key(self):
        return (self.image, self.degradation, self.method)


def format_psnr(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.4f}"


def emit_report(rows: Sequence[ReportRow]) -> tuple[str, str]:
    """CSV text and an aligned plain-text table, rows sorted lexicographically."""
    rows = sorted(rows, key=ReportRow.key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.image, r.degradation, r.method, format_psnr(r.psnr_db)))
    cells = [CSV_HEADER] + [(r.image, r.degradation, r.method, format_psnr(r.psnr_db)) for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(4)]
    lines = []
    for n, c in enumerate(cells):
        lines.append("  ".join(
            c[i].rjust(widths[i]) if i == 3 else c[i].ljust(widths[i]) for i in range(4)
        ).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return buf.getvalue(), "\n".join(lines) + "\n"


def parse_report(text: str) -> list[ReportRow]:
    """Inverse of the CSV half of :func:`emit_report`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"bad report header {header!r}")
    return [ReportRow(img, deg, meth, float(p)) for img, deg, meth, p in reader]


def _file_tag(text: str) -> str:
    return text.replace(":", "-").replace("/", "_")


def load_input(source: str, size: int) -> tuple[str, np.ndarray]:
    if source in image.PRESETS:
        return source, image.make_preset(source, size)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"{source!r} is neither a preset {sorted(image.PRESETS)} nor a file")
    return path.stem, image.load_pgm(path)


def _degradation(spec: DegradationSpec, seed: int) -> DegradationSpec:
    # the run seed shifts every noise stream; 0 keeps the degradation's own seed
    if not spec.noise or seed == 0:
        return spec
    return DegradationSpec(spec.blur, spec.blur_sigma, True, spec.noise_sigma, (spec.seed + seed) % 2**64)


def _crop(img: np.ndarray, crop, scale: int = 1) -> np.ndarray:
    x, y, w, h = (v * scale for v in crop)
    return img[y : y + h, x : x + w]


def _dump_bands(y: np.ndarray, base: Path, scales: int | None) -> None:
    system = ffst.build_system(*y.shape, scales)
    coeffs = ffst.analyze(y, system)
    base.mkdir(parents=True, exist_ok=True)
    for plane, band in zip(coeffs.planes, coeffs.bands):
        peak = float(np.abs(plane).max())
        scaled = 0.5 + 0.5 * plane / peak if peak > 0 else np.full_like(plane, 0.5)
        cone, j, k = system.bands[band]
        image.save_pgm(scaled, base / f"band_{cone}_j{j}_k{k:+d}.pgm")


def run_row(cfg: RunConfig, name: str, truth: np.ndarray, deg_text: str, family_config) -> list[ReportRow]:
    spec = _degradation(DegradationSpec.parse(deg_text), cfg.seed)
    y = spec.apply(truth)
    tag = f"{name}__{_file_tag(deg_text)}"
    if cfg.out is not None:
        image.save_pgm(y, cfg.out / f"{tag}__input.pgm")
        if cfg.dump_bands:
            _dump_bands(y, cfg.out / f"{tag}__bands", cfg.scales)
        if cfg.crop:
            image.save_pgm(_crop(truth, cfg.crop), cfg.out / f"{name}__truth__crop.pgm")
    rows = []
    for method in cfg.methods:
        out, weights = sme.superresolve(
            y, method, lam=cfg.lam, scales=cfg.scales, sweeps=cfg.sweeps,
            family_config=family_config, backend=cfg.backend, return_weights=True,
        )
        rows.append(ReportRow(name, deg_text, method, image.psnr(truth, out)))
        if cfg.out is not None:
            image.save_pgm(out, cfg.out / f"{tag}__{method}.pgm")
            if cfg.crop:
                image.save_pgm(_crop(out, cfg.crop), cfg.out / f"{tag}__{method}__crop.pgm")
            if cfg.dump_bands and weights is not None:
                with open(cfg.out / f"{tag}__{method}__weights.txt", "w") as fh:
                    weights.dump(fh)
    return rows


def run_pipeline(cfg: RunConfig) -> tuple[list[ReportRow], list[str]]:
    """Run every image x degradation row; returns report rows and row errors."""
    cfg.validate()
    if cfg.out is not None:
        cfg.out = Path(cfg.out)
        cfg.out.mkdir(parents=True, exist_ok=True)
    family_config = read_block_config(cfg.block_config) if cfg.block_config else None
    rows, errors = [], []
    for source in cfg.inputs:
        try:
            name, truth = load_input(source, cfg.size)
        except (OSError, ValueError) as exc:
            errors.append(f"{source}: {exc}")
            continue
        for deg in cfg.degradations:
            try:
                rows.extend(run_row(cfg, name, truth, deg, family_config))
            except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
                errors.append(f"{name} / {deg}: {exc}")
    return rows, errors


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _crop_arg(text: str) -> tuple[int, int, int, int]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4 or min(vals) < 0 or vals[2] == 0 or vals[3] == 0:
        raise argparse.ArgumentTypeError("crop must be x,y,w,h with positive w and h")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shearsr", description="2x superresolution benchmark.")
    p.add_argument("--input", action="append", required=True,
                   help=f"preset ({', '.join(sorted(image.PRESETS))}) or PGM path; repeatable")
    p.add_argument("--methods", type=_csv_list, default=list(sme.METHODS),
                   help="comma-separated subset of " + ",".join(sme.METHODS))
    p.add_argument("--degrade", action="append",
                   help="ds[+blur][+noise:SEED]; repeatable (default ds)")
    p.add_argument("--lambda", dest="lam", type=float, default=sme.DEFAULT_LAMBDA)
    p.add_argument("--scales", type=int, default=None, help="shearlet scales for sme-shearlet")
    p.add_argument("--seed", type=int, default=0, help="added to every noise seed")
    p.add_argument("--out", type=Path, default=None, help="directory for output images")
    p.add_argument("--report", type=Path, default=None, help="CSV report path")
    p.add_argument("--crop", type=_crop_arg, default=None, help="x,y,w,h region (output pixels)")
    p.add_argument("--dump-bands", action="store_true",
                   help="also write shearlet bands of each input and the mixing weights")
    p.add_argument("--sweeps", type=int, default=sme.DEFAULT_SWEEPS)
    p.add_argument("--size", type=int, default=256, help="side length of preset images")
    p.add_argument("--block-config", default=None, help="key = value file overriding block shapes/angles")
    p.add_argument("--backend", choices=["python", "compiled"], default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(
        inputs=args.input, methods=args.methods, degradations=args.degrade or ["ds"],
        lam=args.lam, scales=args.scales, seed=args.seed, out=args.out, size=args.size,
        sweeps=args.sweeps, crop=args.crop, dump_bands=args.dump_bands,
        block_config=args.block_config, backend=args.backend,
    )
    try:
        rows, errors = run_pipeline(cfg)
    except (OSError, ValueError) as exc:
        print(f"shearsr: {exc}", file=sys.stderr)
        return 2
    text, table = emit_report(rows)
    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(text)
    sys.stdout.write(table)
    for e in errors:
        print(f"shearsr: row aborted: {e}", file=sys.stderr)
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
