"""Numba path-simulation kernels.

Each path owns a counter-based RNG stream derived from (seed, stream id), so
results are bitwise reproducible under any parallel schedule.  Bounded
variation paths are piecewise deterministic and simulated event by event with
exact hitting times and exact jump-time discounting; Gaussian paths use Euler
steps between the exactly simulated jump times.
"""

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
_MASK = U64(0xFFFFFFFFFFFFFFFF)
_TWO_M52 = 2.0**-52


@njit(inline="always", cache=True)
def _splitmix(z):
    z = (z + U64(0x9E3779B97F4A7C15)) & _MASK
    x = z
    x = ((x ^ (x >> U64(30))) * U64(0xBF58476D1CE4E5B9)) & _MASK
    x = ((x ^ (x >> U64(27))) * U64(0x94D049BB133111EB)) & _MASK
    return z, x ^ (x >> U64(31))


@njit(inline="always", cache=True)
def _rotl(x, k):
    return ((x << U64(k)) | (x >> U64(64 - k))) & _MASK


@njit(inline="always", cache=True)
def _seed_state(seed, stream):
    z = ((U64(seed) * U64(0x9E3779B97F4A7C15)) ^ (U64(stream) * U64(0xD2B74407B1CE6E93))) & _MASK
    z, s0 = _splitmix(z)
    z, s1 = _splitmix(z)
    z, s2 = _splitmix(z)
    z, s3 = _splitmix(z)
    return s0, s1, s2, s3


@njit(inline="always", cache=True)
def _next_u64(s0, s1, s2, s3):
    # xoshiro256++
    out = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
    t = (s1 << U64(17)) & _MASK
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    return s0, s1, s2, s3, out


@njit(inline="always", cache=True)
def _unif(s0, s1, s2, s3, flip):
    # open interval (0, 1), symmetric so the antithetic map u -> 1-u is exact
    s0, s1, s2, s3, x = _next_u64(s0, s1, s2, s3)
    u = (np.float64(x >> U64(12)) + 0.5) * _TWO_M52
    if flip:
        u = 1.0 - u
    return s0, s1, s2, s3, u


@njit(inline="always", cache=True)
def _norm_pair(s0, s1, s2, s3, flip):
    # Box-Muller; antithetic paths negate the pair
    s0, s1, s2, s3, u1 = _unif(s0, s1, s2, s3, False)
    s0, s1, s2, s3, u2 = _unif(s0, s1, s2, s3, False)
    r = math.sqrt(-2.0 * math.log(u1))
    z1 = r * math.cos(2.0 * math.pi * u2)
    z2 = r * math.sin(2.0 * math.pi * u2)
    if flip:
        z1 = -z1
        z2 = -z2
    return s0, s1, s2, s3, z1, z2


@njit(inline="always", cache=True)
def _sample_jump(s0, s1, s2, s3, flip, alpha_cdf, hold_rates, trans_cdf):
    """Absorption time of the phase chain: exact phase-type draw."""
    s0, s1, s2, s3, u = _unif(s0, s1, s2, s3, flip)
    m = alpha_cdf.shape[0]
    ph = m - 1
    for j in range(m):
        if u <= alpha_cdf[j]:
            ph = j
            break
    z = 0.0
    while True:
        s0, s1, s2, s3, ue = _unif(s0, s1, s2, s3, flip)
        z += -math.log(ue) / hold_rates[ph]
        s0, s1, s2, s3, ut = _unif(s0, s1, s2, s3, flip)
        nxt = -1
        for j in range(m):
            if ut <= trans_cdf[ph, j]:
                nxt = j
                break
        if nxt < 0:
            return s0, s1, s2, s3, z
        ph = nxt


@njit(parallel=True, cache=True)
def dividend_paths_bv(n_paths, seed, antithetic, drift, lam, q, a, x0, t_max,
                      alpha_cdf, hold_rates, trans_cdf):
    """Barrier strategy until ruin, sigma = 0: event-driven and exact."""
    payout = np.zeros(n_paths)
    ruin = np.full(n_paths, np.inf)
    for p in prange(n_paths):
        stream = p // 2 if antithetic else p
        flip = antithetic and (p % 2 == 1)
        s0, s1, s2, s3 = _seed_state(seed, stream)
        t = 0.0
        u = x0
        acc = 0.0
        if u > a:
            acc += u - a
            u = a
        while t < t_max:
            s0, s1, s2, s3, uu = _unif(s0, s1, s2, s3, flip)
            tau = -math.log(uu) / lam
            if u / drift <= tau:
                ruin[p] = t + u / drift
                break
            t += tau
            u -= drift * tau
            if t >= t_max:
                break
            s0, s1, s2, s3, z = _sample_jump(s0, s1, s2, s3, flip,
                                             alpha_cdf, hold_rates, trans_cdf)
            if u + z > a:
                acc += math.exp(-q * t) * (u + z - a)
                u = a
            else:
                u += z
        payout[p] = acc
    return payout, ruin


@njit(parallel=True, cache=True)
def injection_paths_bv(n_paths, seed, antithetic, drift, lam, q, b, x0, t_max,
                       alpha_cdf, hold_rates, trans_cdf):
    """Doubly reflected surplus, sigma = 0.

    Sojourns at the lower boundary pay injections at rate `drift`, discounted
    in closed form between events; dividends are overshoots above b at exact
    jump times.  Returns the discounted dividend and injection streams.
    """
    divs = np.zeros(n_paths)
    injs = np.zeros(n_paths)
    for p in prange(n_paths):
        stream = p // 2 if antithetic else p
        flip = antithetic and (p % 2 == 1)
        s0, s1, s2, s3 = _seed_state(seed, stream)
        t = 0.0
        u = x0
        acc_l = 0.0
        acc_r = 0.0
        if u > b:
            acc_l += u - b
            u = b
        while t < t_max:
            s0, s1, s2, s3, uu = _unif(s0, s1, s2, s3, flip)
            tau = -math.log(uu) / lam
            t_jump = min(t + tau, t_max)
            t_hit = t + u / drift
            if t_hit < t_jump:
                acc_r += drift / q * (math.exp(-q * t_hit) - math.exp(-q * t_jump))
                u = 0.0
            else:
                u -= drift * (t_jump - t)
            t = t_jump
            if t >= t_max:
                break
            s0, s1, s2, s3, z = _sample_jump(s0, s1, s2, s3, flip,
                                             alpha_cdf, hold_rates, trans_cdf)
            if u + z > b:
                acc_l += math.exp(-q * t) * (u + z - b)
                u = b
            else:
                u += z
        divs[p] = acc_l
        injs[p] = acc_r
    return divs, injs


@njit(parallel=True, cache=True)
def dividend_paths_ubv(n_paths, seed, antithetic, drift, sigma, lam, q, a, x0,
                       t_max, dt, alpha_cdf, hold_rates, trans_cdf):
    """Barrier strategy until ruin, sigma > 0: Euler steps between exact jumps.

    Reflection at the barrier and ruin detection happen at grid points (the
    known upward bias of grid-detected ruin is documented by the caller);
    diffusion dividends are discounted at each step's left endpoint, jump
    overshoots at the exact jump time.
    """
    payout = np.zeros(n_paths)
    ruin = np.full(n_paths, np.inf)
    edt = math.exp(-q * dt)
    sqdt = math.sqrt(dt)
    for p in prange(n_paths):
        stream = p // 2 if antithetic else p
        flip = antithetic and (p % 2 == 1)
        s0, s1, s2, s3 = _seed_state(seed, stream)
        t = 0.0
        u = x0
        acc = 0.0
        disc = 1.0
        if u > a:
            acc += u - a
            u = a
        spare = 0.0
        have_spare = False
        alive = True
        while alive and t < t_max:
            s0, s1, s2, s3, uu = _unif(s0, s1, s2, s3, flip)
            t_jump = t + (-math.log(uu) / lam)
            t_seg = min(t_jump, t_max)
            while t < t_seg:
                h = t_seg - t
                full = h >= dt
                if full:
                    h = dt
                if have_spare:
                    zn = spare
                    have_spare = False
                else:
                    s0, s1, s2, s3, zn, spare = _norm_pair(s0, s1, s2, s3, flip)
                    have_spare = True
                root_h = sqdt if full else math.sqrt(h)
                u += -drift * h + sigma * root_h * zn
                if u > a:
                    acc += disc * (u - a)
                    u = a
                t += h
                disc = disc * edt if full else math.exp(-q * t)
                if u < 0.0:
                    ruin[p] = t
                    alive = False
                    break
            if not alive or t_jump >= t_max:
                break
            disc = math.exp(-q * t)
            s0, s1, s2, s3, z = _sample_jump(s0, s1, s2, s3, flip,
                                             alpha_cdf, hold_rates, trans_cdf)
            if u + z > a:
                acc += disc * (u + z - a)
                u = a
            else:
                u += z
        payout[p] = acc
    return payout, ruin


@njit(parallel=True, cache=True)
def injection_paths_ubv(n_paths, seed, antithetic, drift, sigma, lam, q, b, x0,
                        t_max, dt, alpha_cdf, hold_rates, trans_cdf):
    """Doubly reflected surplus, sigma > 0: step-wise projection at 0 and b."""
    divs = np.zeros(n_paths)
    injs = np.zeros(n_paths)
    edt = math.exp(-q * dt)
    sqdt = math.sqrt(dt)
    for p in prange(n_paths):
        stream = p // 2 if antithetic else p
        flip = antithetic and (p % 2 == 1)
        s0, s1, s2, s3 = _seed_state(seed, stream)
        t = 0.0
        u = x0
        acc_l = 0.0
        acc_r = 0.0
        disc = 1.0
        if u > b:
            acc_l += u - b
            u = b
        spare = 0.0
        have_spare = False
        while t < t_max:
            s0, s1, s2, s3, uu = _unif(s0, s1, s2, s3, flip)
            t_jump = t + (-math.log(uu) / lam)
            t_seg = min(t_jump, t_max)
            while t < t_seg:
                h = t_seg - t
                full = h >= dt
                if full:
                    h = dt
                if have_spare:
                    zn = spare
                    have_spare = False
                else:
                    s0, s1, s2, s3, zn, spare = _norm_pair(s0, s1, s2, s3, flip)
                    have_spare = True
                root_h = sqdt if full else math.sqrt(h)
                u += -drift * h + sigma * root_h * zn
                if u > b:
                    acc_l += disc * (u - b)
                    u = b
                elif u < 0.0:
                    acc_r += disc * (-u)
                    u = 0.0
                t += h
                disc = disc * edt if full else math.exp(-q * t)
            if t_jump >= t_max:
                break
            disc = math.exp(-q * t)
            s0, s1, s2, s3, z = _sample_jump(s0, s1, s2, s3, flip,
                                             alpha_cdf, hold_rates, trans_cdf)
            if u + z > b:
                acc_l += disc * (u + z - b)
                u = b
            else:
                u += z
        divs[p] = acc_l
        injs[p] = acc_r
    return divs, injs
