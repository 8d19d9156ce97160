"""Bessel function ladders J_0..J_{K-1} evaluated in one pass.

The bath expansion and its diagnostics need the whole ladder of integer-order
Bessel functions at a common argument.  Computing each order independently
costs O(K) per order; the downward recurrence

    J_{k-1}(z) = (2k/z) J_k(z) - J_{k+1}(z)

produces the full ladder in O(K) total.  Run upward it is violently unstable
for k > z, so the ladder is generated downward from a start order well above
max(K, z) and normalised with the identity J_0(z) + 2 sum_{m>=1} J_{2m}(z) = 1
(Miller's algorithm).
"""

import numpy as np

__all__ = ["bessel_j_ladder"]

# Values above this trigger a rescale of the trial recurrence to avoid
# overflow while recursing down from the unnormalised seed.
_RESCALE_THRESHOLD = 1e250


def _start_order(n_orders, zmax):
    # Enough headroom that the trial solution has converged to the minimal
    # solution by the time the recurrence reaches order n_orders - 1.
    base = max(n_orders, int(zmax) + 1)
    return base + 16 + int(2.0 * np.sqrt(base))


def bessel_j_ladder(n_orders, z):
    """Return J_k(z) for k = 0..n_orders-1.

    Parameters
    ----------
    n_orders : int
        Number of orders, at least 1.
    z : float or array_like
        Argument(s).  Negative arguments are folded with
        J_k(-z) = (-1)^k J_k(z).

    Returns
    -------
    ndarray
        Shape (n_orders,) for scalar ``z``, else (n_orders,) + z.shape.
    """
    if n_orders < 1:
        raise ValueError("n_orders must be >= 1")
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    zf = np.atleast_1d(z_arr).ravel()
    neg = zf < 0
    za = np.abs(zf)

    out = np.zeros((n_orders, za.size))
    tiny = za < 1e-12
    if np.any(tiny):
        # Series limit: J_0 -> 1, J_1 -> z/2, higher orders negligible.
        out[0, tiny] = 1.0
        if n_orders > 1:
            out[1, tiny] = za[tiny] / 2.0
    work = ~tiny
    if np.any(work):
        zw = za[work]
        m = _start_order(n_orders, zw.max())
        jp = np.zeros_like(zw)          # J_{k+1} trial
        jc = np.full_like(zw, 1e-30)    # J_k trial seed
        ladder = np.zeros((n_orders, zw.size))
        norm = np.zeros_like(zw)        # accumulates J_0 + 2*sum J_{2m}
        for k in range(m, -1, -1):
            jm = (2.0 * (k + 1) / zw) * jc - jp
            jp = jc
            jc = jm
            big = np.abs(jc) > _RESCALE_THRESHOLD
            if np.any(big):
                jc[big] *= 1e-250
                jp[big] *= 1e-250
                norm[big] *= 1e-250
                ladder[:, big] *= 1e-250
            if k < n_orders:
                ladder[k] = jc
            if k > 0 and k % 2 == 0:
                norm += 2.0 * jc
        norm += jc  # k = 0 term
        out[:, work] = ladder / norm

    if np.any(neg):
        signs = np.where(np.arange(n_orders)[:, None] % 2 == 1, -1.0, 1.0)
        out[:, neg] = out[:, neg] * signs
    out = out.reshape((n_orders,) + z_arr.shape) if not scalar else out[:, 0]
    return out
