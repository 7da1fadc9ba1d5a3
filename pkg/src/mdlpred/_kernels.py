"""Hot per-n kernel for the MDL/ML expected-loss engine.

For a fixed n the penalized score of an interior parameter is linear in
the observed fraction alpha:

    n*D(alpha||theta) + pen = alpha*n*(A - B) + n*B + pen + n*H(alpha)

with A = -ln(theta), B = -ln(1-theta) and H the (parameter-free) entropy
term, which drops out of comparisons.  Selection over alpha is therefore
the lower envelope of lines whose slopes strictly decrease with theta,
so the selected parameter is piecewise constant and nondecreasing in
alpha.  The kernel builds that envelope, maps segment boundaries onto
the k-grid by direct score comparison at the adjacent grid points, and
accumulates pmf-weighted squared errors per (selected-cell, alpha-cell).

Grid points whose two competing scores differ by less than a relative
1e-12 are *flagged* and excluded; the caller re-decides them with
high-precision arithmetic.  Alpha-cell boundaries are dyadic rationals
passed as integer pairs, so cell membership of k/n is decided exactly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

FLAG_BUF = 128
FLAG_REL_TOL = 1e-12


@njit(cache=True)
def mdl_window_kernel(
    n,
    kmin,
    kmax,
    theta0,
    log_p_center,
    k_center,
    ratio,
    thv,
    line_a,
    line_b,
    pen,
    has_zero,
    pen_zero,
    cell_zero,
    has_one,
    pen_one,
    cell_one,
    selcell,
    acut_num,
    acut_den,
    agap,
    acell_one,
    out,
    pmf,
    flag_k,
):
    """Accumulate one n into `out`; returns (window_loss, n_flags).

    pmf has length kmax-kmin+1 and is filled as a side effect (callers
    reuse it to resolve flagged ks).  Flagged ks contribute nothing here.
    """
    width = kmax - kmin + 1
    i0 = k_center - kmin
    pmf[i0] = math.exp(log_p_center)
    for i in range(i0, width - 1):
        k = kmin + i
        pmf[i + 1] = pmf[i] * ((n - k) / (k + 1.0)) * ratio
    for i in range(i0, 0, -1):
        k = kmin + i
        pmf[i - 1] = pmf[i] * (k / (n - k + 1.0)) / ratio

    nlines = thv.shape[0]
    slope = np.empty(nlines)
    inter = np.empty(nlines)
    for i in range(nlines):
        slope[i] = n * (line_a[i] - line_b[i])
        inter[i] = n * line_b[i] + pen[i]

    # lower envelope; slopes are strictly decreasing in i
    sidx = np.empty(nlines, np.int64)
    sx = np.empty(nlines + 1, np.float64)
    size = 0
    for i in range(nlines):
        while size > 0:
            j = sidx[size - 1]
            x = (inter[i] - inter[j]) / (slope[j] - slope[i])
            if size >= 2 and x <= sx[size - 1]:
                size -= 1
                continue
            sx[size] = x
            break
        if size == 0:
            sx[0] = -1.0e300
        sidx[size] = i
        size += 1
    sx[size] = 1.0e300

    wloss = 0.0
    nflags = 0
    ncuts = acut_num.shape[0]

    kin_lo = kmin if kmin > 0 else 1
    kin_hi = kmax if kmax < n else n - 1

    # interior grid points 1 <= k <= n-1
    if kin_lo <= kin_hi:
        t = 0
        alo = kin_lo / n
        # keep any boundary within two grid steps of the first k in play,
        # so its refinement and near-tie flagging still see that k
        while t + 1 < size and sx[t + 1] < alo - 2.0 / n:
            t += 1
        next_k = kin_lo
        g = 0
        while g + 1 < ncuts and next_k * acut_den[g + 1] >= acut_num[g + 1] * n:
            g += 1
        while next_k <= kin_hi:
            li = sidx[t]
            if t + 1 < size:
                lj = sidx[t + 1]
                ksw = int(math.ceil(sx[t + 1] * n))
                if ksw < next_k:
                    ksw = next_k
                if ksw > kin_hi + 1:
                    ksw = kin_hi + 1
                # direct comparisons pin down the true switch index
                while ksw - 1 >= next_k:
                    a = (ksw - 1) / n
                    if slope[lj] * a + inter[lj] < slope[li] * a + inter[li]:
                        ksw -= 1
                    else:
                        break
                while ksw <= kin_hi:
                    a = ksw / n
                    if slope[li] * a + inter[li] < slope[lj] * a + inter[lj]:
                        ksw += 1
                    else:
                        break
                run_end = ksw - 1
                # grid points hugging the boundary with near-equal scores
                for k in range(ksw - 1, ksw + 1):
                    if next_k <= k <= kin_hi:
                        a = k / n
                        s_l = slope[li] * a + inter[li]
                        s_r = slope[lj] * a + inter[lj]
                        m = abs(s_l)
                        if abs(s_r) > m:
                            m = abs(s_r)
                        if m < 1.0:
                            m = 1.0
                        if abs(s_l - s_r) <= FLAG_REL_TOL * m:
                            if nflags < flag_k.shape[0]:
                                dup = nflags > 0 and flag_k[nflags - 1] == k
                                if not dup:
                                    flag_k[nflags] = k
                                    nflags += 1
                            else:
                                nflags += 1  # overflow: caller falls back
            else:
                run_end = kin_hi
            if run_end > kin_hi:
                run_end = kin_hi
            val = thv[li]
            sq = (val - theta0) * (val - theta0)
            cs = selcell[li]
            for k in range(next_k, run_end + 1):
                while g + 1 < ncuts and k * acut_den[g + 1] >= acut_num[g + 1] * n:
                    g += 1
                flagged = False
                for f in range(nflags if nflags < flag_k.shape[0] else flag_k.shape[0]):
                    if flag_k[f] == k:
                        flagged = True
                        break
                if flagged:
                    continue
                term = pmf[k - kmin] * sq
                out[cs, agap[g]] += term
                wloss += term
            next_k = run_end + 1
            t += 1

    # alpha = 0: the zero parameter (divergence 0 there) competes with the
    # envelope value at 0; alpha = 1 is symmetric with the one parameter.
    # (endpoint handling below)
    if kmin == 0 and n >= 1:
        tseg = 0
        while tseg + 1 < size and sx[tseg + 1] <= 0.0:
            tseg += 1
        li = sidx[tseg]
        s_line = inter[li]
        near = False
        if has_zero:
            m = max(max(abs(s_line), abs(pen_zero)), 1.0)
            near = abs(s_line - pen_zero) <= FLAG_REL_TOL * m
        if near:
            if nflags < flag_k.shape[0]:
                flag_k[nflags] = 0
            nflags += 1
        else:
            if has_zero and pen_zero < s_line:
                best_val, best_cell = 0.0, cell_zero
            else:
                best_val, best_cell = thv[li], selcell[li]
            term = pmf[0] * (best_val - theta0) * (best_val - theta0)
            out[best_cell, agap[0]] += term
            wloss += term

    if kmax == n and n >= 1:
        li = sidx[size - 1]
        s_line = slope[li] + inter[li]
        near = False
        if has_one:
            m = max(max(abs(s_line), abs(pen_one)), 1.0)
            near = abs(s_line - pen_one) <= FLAG_REL_TOL * m
        if near:
            if nflags < flag_k.shape[0]:
                flag_k[nflags] = n
            nflags += 1
        else:
            if has_one and pen_one < s_line:
                best_val, best_cell = 1.0, cell_one
            else:
                best_val, best_cell = thv[li], selcell[li]
            term = pmf[width - 1] * (best_val - theta0) * (best_val - theta0)
            out[best_cell, acell_one] += term
            wloss += term

    return wloss, nflags


@njit(cache=True)
def bayes_window_kernel(
    n,
    kmin,
    kmax,
    theta0,
    log_p_center,
    k_center,
    ratio,
    thv,
    logw,
    logt,
    log1mt,
    rho,
    has_zero,
    logw_zero,
    has_one,
    logw_one,
    acut_num,
    acut_den,
    acut_float,
    agap,
    acell_one,
    out,
    pmf,
    block,
):
    """Posterior-mean loss for one n, accumulated into `out`.

    Within a block of consecutive k the unnormalized posterior weights
    follow u *= rho exactly (rho = theta/(1-theta) per parameter); each
    block restarts from a fresh max-shifted log evaluation, so a column
    that underflowed to zero can come back no higher than block*spread
    nats, which the block size keeps below the double-precision floor.
    The k = 0 and k = n rows are evaluated directly so the endpoint
    parameters (whose likelihood is exactly zero elsewhere) enter only
    where they belong.
    """
    width = kmax - kmin + 1
    i0 = k_center - kmin
    pmf[i0] = math.exp(log_p_center)
    for i in range(i0, width - 1):
        k = kmin + i
        pmf[i + 1] = pmf[i] * ((n - k) / (k + 1.0)) * ratio
    for i in range(i0, 0, -1):
        k = kmin + i
        pmf[i - 1] = pmf[i] * (k / (n - k + 1.0)) / ratio

    nlines = thv.shape[0]
    ncuts = acut_num.shape[0]
    wloss = 0.0

    # contiguous band where the pmf is a nonzero double
    lo = 0
    while lo < width and pmf[lo] == 0.0:
        lo += 1
    hi = width - 1
    while hi >= 0 and pmf[hi] == 0.0:
        hi -= 1
    if hi < lo:
        return 0.0

    kin_lo = max(kmin + lo, 1)
    kin_hi = min(kmin + hi, n - 1)

    u = np.empty(nlines)
    if kin_lo <= kin_hi:
        g = 0
        while g + 1 < ncuts and kin_lo * acut_den[g + 1] >= acut_num[g + 1] * n:
            g += 1
        kb0 = kin_lo
        while kb0 <= kin_hi:
            kb1 = min(kb0 + block - 1, kin_hi)
            m = -1.0e300
            for j in range(nlines):
                e = logw[j] + kb0 * logt[j] + (n - kb0) * log1mt[j]
                u[j] = e
                if e > m:
                    m = e
            for j in range(nlines):
                u[j] = math.exp(u[j] - m)
            for k in range(kb0, kb1 + 1):
                den = 0.0
                num = 0.0
                for j in range(nlines):
                    den += u[j]
                    num += u[j] * thv[j]
                pred = num / den
                while g + 1 < ncuts and k * acut_den[g + 1] >= acut_num[g + 1] * n:
                    g += 1
                term = pmf[k - kmin] * (pred - theta0) * (pred - theta0)
                sc = 0
                if pred >= 1.0:
                    sc = acell_one
                else:
                    gs = 0
                    while gs + 1 < ncuts and pred >= acut_float[gs + 1]:
                        gs += 1
                    sc = agap[gs]
                out[sc, agap[g]] += term
                wloss += term
                if k < kb1:
                    for j in range(nlines):
                        u[j] *= rho[j]
            kb0 = kb1 + 1

    # direct rows at the window's own endpoints
    for edge in range(2):
        if edge == 0:
            if not (kmin == 0 and lo == 0):
                continue
            k = 0
        else:
            if not (kmax == n and kmin + hi == n):
                continue
            k = n
        m = -1.0e300
        for j in range(nlines):
            e = logw[j] + k * logt[j] + (n - k) * log1mt[j]
            u[j] = e
            if e > m:
                m = e
        e_zero = logw_zero if (has_zero and k == 0) else -1.0e300
        e_one = logw_one if (has_one and k == n) else -1.0e300
        if e_zero > m:
            m = e_zero
        if e_one > m:
            m = e_one
        den = 0.0
        num = 0.0
        for j in range(nlines):
            w = math.exp(u[j] - m)
            den += w
            num += w * thv[j]
        if e_zero > -1.0e300:
            den += math.exp(e_zero - m)
        if e_one > -1.0e300:
            w = math.exp(e_one - m)
            den += w
            num += w
        pred = num / den
        term = pmf[k - kmin] * (pred - theta0) * (pred - theta0)
        if pred >= 1.0:
            sc = acell_one
        else:
            gs = 0
            while gs + 1 < ncuts and pred >= acut_float[gs + 1]:
                gs += 1
            sc = agap[gs]
        ac = agap[0] if k == 0 else acell_one
        out[sc, ac] += term
        wloss += term

    return wloss
