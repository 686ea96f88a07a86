"""Numba kernels for the hot inner loops.

Two workloads dominate: Numerov shooting sweeps (sequential recurrence,
called many times inside bisection) and the scaled Hermite-function
recurrence evaluated to high order on large grids.  Both are pure and
deterministic; the parallel Hermite kernel writes disjoint outputs, so the
results do not depend on the thread count.
"""

import numpy as np
from numba import njit, prange

_INV_SQRT2 = 0.7071067811865476
_PI_M14 = 0.7511255444649425  # pi**-0.25
_TWO_M14 = 0.8408964152537145  # 2**-0.25
_RESCALE = 1e250


@njit(cache=True)
def numerov_half_nodes(v, h, e, even_parity):
    """Sign changes of the outward Numerov solution of psi'' = (V - E) psi.

    Integrates from x = 0 along the half line with parity-consistent initial
    data (even: psi'(0) = 0, odd: psi(0) = 0) and counts interior nodes.
    The count is a nondecreasing step function of E whose jumps locate the
    eigenvalues of each parity family; it is insensitive to the exponential
    tail growth because the solution is rescaled, never re-signed.
    """
    n = v.size
    c = h * h / 12.0
    t0 = c * (v[0] - e)
    t1 = c * (v[1] - e)
    if even_parity:
        psi0 = 1.0
        psi1 = psi0 * (1.0 + 5.0 * t0) / (1.0 - t1)
    else:
        psi0 = 0.0
        psi1 = h
    count = 0
    sprev = 1.0 if psi1 >= 0.0 else -1.0
    for i in range(1, n - 1):
        t2 = c * (v[i + 1] - e)
        psi2 = (2.0 * psi1 * (1.0 + 5.0 * t1) - psi0 * (1.0 - t0)) / (1.0 - t2)
        a = abs(psi2)
        if a > _RESCALE:
            psi1 /= a
            psi2 /= a
        if psi2 != 0.0:
            s = 1.0 if psi2 > 0.0 else -1.0
            if s * sprev < 0.0:
                count += 1
            sprev = s
        psi0 = psi1
        psi1 = psi2
        t0 = t1
        t1 = t2
    return count


@njit(cache=True)
def numerov_inward(v, h, e):
    """Inward Numerov sweep from the outer edge toward x = 0.

    Integration against the decaying tail is numerically stable; the seed is
    tiny so the growth through the barrier stays inside double range for the
    supported (alpha, n) domain.  If a rescale still triggers, every stored
    value is scaled uniformly, which keeps the returned shape consistent.
    """
    n = v.size
    psi = np.zeros(n)
    c = h * h / 12.0
    psi[n - 1] = 0.0
    psi[n - 2] = 1e-250
    tip1 = c * (v[n - 1] - e)
    ti = c * (v[n - 2] - e)
    for i in range(n - 2, 0, -1):
        tim1 = c * (v[i - 1] - e)
        p = (2.0 * psi[i] * (1.0 + 5.0 * ti) - psi[i + 1] * (1.0 - tip1)) / (1.0 - tim1)
        psi[i - 1] = p
        if abs(p) > 1e260:
            for k in range(i - 1, n):
                psi[k] *= 1e-260
        tip1 = ti
        ti = tim1
    return psi


@njit(cache=True, parallel=True)
def hermite_orders(x, orders, out):
    """Normalized oscillator eigenfunctions phi_n at several orders at once.

    phi_n(x) = (sqrt(2 pi) 2^n n!)^{-1/2} H_n(x / sqrt 2) exp(-x^2 / 4),
    evaluated by the upward recurrence on the orthonormal Hermite functions
    with the Gaussian and normalization folded in, which is stable and
    overflow-free.  `orders` must be ascending; out has shape
    (len(orders), len(x)).
    """
    npts = x.size
    nord = orders.size
    nmax = orders[nord - 1]
    c1 = np.empty(nmax + 1)
    c2 = np.empty(nmax + 1)
    for m in range(1, nmax + 1):
        c1[m] = np.sqrt(2.0 / m)
        c2[m] = np.sqrt((m - 1.0) / m)
    for i in prange(npts):
        y = x[i] * _INV_SQRT2
        hm = 0.0
        h = _PI_M14 * np.exp(-0.5 * y * y)
        k = 0
        if orders[0] == 0:
            out[0, i] = _TWO_M14 * h
            k = 1
        for m in range(1, nmax + 1):
            hn = c1[m] * y * h - c2[m] * hm
            hm = h
            h = hn
            if k < nord and m == orders[k]:
                out[k, i] = _TWO_M14 * h
                k += 1
