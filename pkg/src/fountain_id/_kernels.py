"""Numba path kernels.

Each path owns a counter-based splitmix64 stream seeded from a per-path
uint64, so ensembles are reproducible bit-for-bit independent of batching,
call order, or thread count.  Kernels write one output row per path and
perform no cross-path reduction.

Status codes written to the last output column:
  0 = exited through the boundary
  1 = absorbed in the interior (PLMP only)
  2 = step/event budget exhausted
"""

from __future__ import annotations

import math

import numpy as np
from numba import float64, njit, uint64

STATUS_EXIT = 0
STATUS_ABSORBED = 1
STATUS_BUDGET = 2

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z + _GOLDEN) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)) & uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _next_u(state):
    """Advance a splitmix64 stream; return (state, uniform in (0, 1))."""
    s = (state + _GOLDEN) & uint64(0xFFFFFFFFFFFFFFFF)
    z = _mix64(s - _GOLDEN)
    return s, (float64(z >> uint64(11)) + 0.5) * _INV_2_53


@njit(cache=True, inline="always", fastmath=True)
def _next_norm2(state):
    """Two standard normals via the Marsaglia polar method."""
    while True:
        state, u1 = _next_u(state)
        state, u2 = _next_u(state)
        v1 = 2.0 * u1 - 1.0
        v2 = 2.0 * u2 - 1.0
        s = v1 * v1 + v2 * v2
        if 0.0 < s < 1.0:
            f = math.sqrt(-2.0 * math.log(s) / s)
            return state, v1 * f, v2 * f


@njit(cache=True, fastmath=True)
def diffusion_exit_kernel(starts, bx, by, eta, dt, seeds, max_steps, out):
    """Euler-Maruyama until first step that lands on or beyond the circle.

    Deep in the interior the walk is advanced n steps at a time: the sum of
    n Euler increments is exactly Gaussian, and n is capped so the block
    stays at least 8 noise standard deviations (and 4 drift lengths) away
    from the circle, keeping the probability of an unseen intra-block
    boundary excursion below ~1e-8 per block.  Blocks only engage when
    n >= 4, so coarse-dt paths consume their streams step by step.

    out[m] = (exit_x, exit_y, exit_time, status).
    """
    n = starts.shape[0]
    sig = math.sqrt(2.0 * eta * dt)
    bnorm = math.sqrt(bx * bx + by * by)
    for m in range(n):
        st = _mix64(seeds[m])
        x = starts[m, 0]
        y = starts[m, 1]
        status = STATUS_BUDGET
        k = 0
        while k < max_steps:
            dist = 1.0 - math.sqrt(x * x + y * y)
            blk = (dist * dist) / (64.0 * sig * sig)
            if bnorm > 0.0:
                bcap = dist / (4.0 * bnorm * dt)
                if bcap < blk:
                    blk = bcap
            if blk >= 4.0:
                nblk = int(blk)
                if nblk > max_steps - k:
                    nblk = max_steps - k
                st, z1, z2 = _next_norm2(st)
                root = sig * math.sqrt(nblk)
                xb = x + bx * nblk * dt + root * z1
                yb = y + by * nblk * dt + root * z2
                if xb * xb + yb * yb < 1.0:
                    x = xb
                    y = yb
                    k += nblk
                    continue
                # astronomically rare: the block endpoint landed outside
                dxb = xb - x
                dyb = yb - y
                ab = dxb * dxb + dyb * dyb
                bb = 2.0 * (x * dxb + y * dyb)
                cb = x * x + y * y - 1.0
                tb = (-bb + math.sqrt(bb * bb - 4.0 * ab * cb)) / (2.0 * ab)
                exb = x + tb * dxb
                eyb = y + tb * dyb
                nrmb = math.sqrt(exb * exb + eyb * eyb)
                out[m, 0] = exb / nrmb
                out[m, 1] = eyb / nrmb
                out[m, 2] = (k + tb * nblk) * dt
                status = STATUS_EXIT
                break
            st, z1, z2 = _next_norm2(st)
            xn = x + bx * dt + sig * z1
            yn = y + by * dt + sig * z2
            if xn * xn + yn * yn >= 1.0:
                dx = xn - x
                dy = yn - y
                a = dx * dx + dy * dy
                b = 2.0 * (x * dx + y * dy)
                c = x * x + y * y - 1.0
                tstar = (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
                ex = x + tstar * dx
                ey = y + tstar * dy
                nrm = math.sqrt(ex * ex + ey * ey)
                out[m, 0] = ex / nrm
                out[m, 1] = ey / nrm
                out[m, 2] = (k + tstar) * dt
                status = STATUS_EXIT
                break
            x = xn
            y = yn
            k += 1
        if status == STATUS_BUDGET:
            out[m, 0] = x
            out[m, 1] = y
            out[m, 2] = max_steps * dt
        out[m, 3] = status


SCATTER_UNIFORM = 0
SCATTER_TRUNCNORM = 1

_SQRT2 = math.sqrt(2.0)
_TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _truncnorm_angle(state, mean, std):
    """Scattering angle from Norm(mean, std^2) truncated to (0, 2*pi].

    Rejection against the untruncated normal with a deterministic cap,
    then inverse-CDF bisection as a guaranteed-termination fallback.
    """
    for _ in range(10000):
        state, z1, z2 = _next_norm2(state)
        a = mean + std * z1
        if 0.0 < a <= _TWO_PI:
            return state, a
        a = mean + std * z2
        if 0.0 < a <= _TWO_PI:
            return state, a
    state, u = _next_u(state)
    c_lo = 0.5 * (1.0 + math.erf((0.0 - mean) / (std * _SQRT2)))
    c_hi = 0.5 * (1.0 + math.erf((_TWO_PI - mean) / (std * _SQRT2)))
    target = c_lo + u * (c_hi - c_lo)
    lo = 0.0
    hi = _TWO_PI
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf((mid - mean) / (std * _SQRT2))) < target:
            lo = mid
        else:
            hi = mid
    return state, 0.5 * (lo + hi)


@njit(cache=True, inline="always")
def _scatter_angle(state, law, mean, std):
    if law == SCATTER_UNIFORM:
        state, u = _next_u(state)
        return state, u * _TWO_PI
    return _truncnorm_angle(state, mean, std)


@njit(cache=True, fastmath=True)
def scatter_angle_kernel(seeds, law, mean, std, out):
    """Standalone sampler for the scattering-angle law (one angle per seed)."""
    for m in range(seeds.shape[0]):
        st = _mix64(seeds[m])
        st, a = _scatter_angle(st, law, mean, std)
        out[m] = a


@njit(cache=True, fastmath=True)
def plmp_exit_kernel(starts, speed, sigma_s, sigma_a, law, mean, std, seeds, max_events, out):
    """Event-driven piecewise-linear transport until exit or absorption.

    Straight-flight segments use exact ray-circle intersection, so exit
    points carry no discretization error.  The initial velocity angle is
    uniform on [0, 2*pi).  out[m] = (exit_x, exit_y, exit_time, status).
    """
    n = starts.shape[0]
    for m in range(n):
        st = _mix64(seeds[m])
        x = starts[m, 0]
        y = starts[m, 1]
        st, u0 = _next_u(st)
        ang = u0 * _TWO_PI
        t = 0.0
        status = STATUS_BUDGET
        for _ in range(max_events):
            vx = speed * math.cos(ang)
            vy = speed * math.sin(ang)
            # Exact flight time to the circle along the current ray.
            a = speed * speed
            b = 2.0 * (x * vx + y * vy)
            c = x * x + y * y - 1.0
            t_exit = (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
            st, u1 = _next_u(st)
            t_scat = -math.log(u1) / sigma_s if sigma_s > 0.0 else math.inf
            st, u2 = _next_u(st)
            t_abs = -math.log(u2) / sigma_a if sigma_a > 0.0 else math.inf
            if t_exit <= t_scat and t_exit <= t_abs:
                ex = x + t_exit * vx
                ey = y + t_exit * vy
                nrm = math.sqrt(ex * ex + ey * ey)
                out[m, 0] = ex / nrm
                out[m, 1] = ey / nrm
                out[m, 2] = t + t_exit
                status = STATUS_EXIT
                break
            if t_abs < t_scat:
                out[m, 0] = x + t_abs * vx
                out[m, 1] = y + t_abs * vy
                out[m, 2] = t + t_abs
                status = STATUS_ABSORBED
                break
            x += t_scat * vx
            y += t_scat * vy
            t += t_scat
            st, ang = _scatter_angle(st, law, mean, std)
        if status == STATUS_BUDGET:
            out[m, 0] = x
            out[m, 1] = y
            out[m, 2] = t
        out[m, 3] = status
