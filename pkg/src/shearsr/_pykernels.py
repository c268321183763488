"""Pure-Python/numpy versions of the compiled solver kernels.

Same signatures and results as ``_kernels``; ``bcd_sweep`` is a plain loop
and is only practical on small grids.
"""
from __future__ import annotations

import numpy as np


def _positions(M, N, off_r, off_c, ptr, sh, rows, cols):
    sl = slice(ptr[sh], ptr[sh + 1])
    r = (rows[:, None] + off_r[None, sl]) % M
    c = (cols[:, None] + off_c[None, sl]) % N
    return r, c


def block_stats(coef, energy, off_r, off_c, lines, ptr, nlines, cand_shape, cand_r, cand_c, nthreads=1):
    C, M, N = coef.shape
    n = len(cand_shape)
    S1 = np.zeros(n)
    R = np.zeros(n)
    for sh in np.unique(cand_shape):
        idx = np.flatnonzero(cand_shape == sh)
        r, c = _positions(M, N, off_r, off_c, ptr, sh, cand_r[idx], cand_c[idx])
        S1[idx] = energy[r, c].sum(axis=1)
        lab = lines[ptr[sh] : ptr[sh + 1]]
        vals = coef[:, r, c]  # (C, nb, L)
        dev = np.zeros(len(idx))
        for line in range(nlines[sh]):
            cols = lab == line
            seg = vals[:, :, cols]
            mean = seg.mean(axis=2, keepdims=True)
            dev += ((seg - mean) ** 2).sum(axis=(0, 2))
        R[idx] = dev
    return S1, R


def bcd_sweep(energy, cov, off_r, off_c, ptr, cand_shape, cand_r, cand_c, order, S1, R, a, lam):
    M, N = energy.shape
    for b in order:
        if S1[b] <= 0.0:
            continue
        sh = cand_shape[b]
        sl = slice(ptr[sh], ptr[sh + 1])
        r = (cand_r[b] + off_r[sl]) % M
        c = (cand_c[b] + off_c[sl]) % N
        s2 = 0.0
        for rr, cc in zip(r, c):
            s2 += energy[rr, cc] * cov[rr, cc]
        new = a[b] + (S1[b] - s2 - lam * R[b]) / S1[b]
        if new < 0.0:
            new = 0.0
        delta = new - a[b]
        if delta != 0.0:
            a[b] = new
            for rr, cc in zip(r, c):
                cov[rr, cc] += delta


def accumulate(out, weight, off_r, off_c, ptr, cand_shape, cand_r, cand_c):
    M, N = out.shape
    live = np.flatnonzero(weight != 0.0)
    for sh in np.unique(cand_shape[live]):
        idx = live[cand_shape[live] == sh]
        r, c = _positions(M, N, off_r, off_c, ptr, sh, cand_r[idx], cand_c[idx])
        w = np.broadcast_to(weight[idx][:, None], r.shape)
        np.add.at(out, (r.ravel(), c.ravel()), w.ravel())
