"""Time the compiled and pure-Python solver kernels on the same problem.

    python3 benchmarks/bench_kernels.py --size 32 --repeat 3
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from shearsr import image, kernels, resample, sme
from shearsr.blocks import build_family


def _problem(size: int):
    truth = image.make_preset("circle", 2 * size)
    y = resample.degrade(truth, "ds")
    frame = sme.make_frame("sme-shearlet", y.shape)
    c = np.ascontiguousarray(frame.analyze(y))
    fam = build_family(*frame.grid, channels=range(c.shape[0]))
    return c, fam, sme._Problem.from_family(fam)


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench(size: int, repeat: int) -> list[tuple[str, str, float]]:
    c, fam, p = _problem(size)
    energy = np.ascontiguousarray((c**2).sum(axis=0))
    results = []
    for name in sorted(kernels.BACKENDS):
        k = kernels.get(name)
        stats = lambda: k.block_stats(c, energy, p.off_r, p.off_c, p.lines, p.ptr, p.nlines,
                                      p.cand_shape, p.cand_r, p.cand_c, kernels.thread_count())
        S1, R = (np.asarray(v) for v in stats())
        results.append((name, "block_stats", _best(stats, repeat)))
        order = np.lexsort((p.cand_id, R / np.maximum(S1, 1e-300))).astype(np.int64)

        def sweep():
            a = np.zeros(len(S1))
            cov = np.zeros(energy.shape)
            k.bcd_sweep(energy, cov, p.off_r, p.off_c, p.ptr, p.cand_shape, p.cand_r, p.cand_c,
                        order, S1, R, a, sme.DEFAULT_LAMBDA)

        results.append((name, "bcd_sweep", _best(sweep, repeat)))
        solve = lambda: sme.solve_weights(c, fam, backend=name)
        results.append((name, "solve_weights", _best(solve, repeat)))
    return results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=32, help="low-resolution side length")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rows = bench(args.size, args.repeat)
    print(f"grid {args.size}x{args.size}, best of {args.repeat}, threads={kernels.thread_count()}")
    base = {op: t for name, op, t in rows if name == "python"}
    for name, op, t in rows:
        speedup = base[op] / t if op in base and t > 0 else float("nan")
        print(f"{name:9s} {op:14s} {t * 1e3:10.2f} ms   x{speedup:7.1f}")


if __name__ == "__main__":
    main()
