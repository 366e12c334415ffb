"""Independent reference computations used by the tests.

The transfer-matrix code below solves the 1D layered eigenproblem
-(d/dy)(1/eps)u' + (k1^2/eps) u = lam u exactly (per-layer closed form),
so it shares nothing with the finite-difference machinery under test.
"""

import numpy as np

# squared Bessel zeros: first zero of J1 and of J0
J11_SQ = 3.8317059702075123**2      # clamped-plate buckling constant, unit disk
J01_SQ = 2.404825557695773**2       # Dirichlet Laplacian constant, unit disk

# layered bulk used in the gap/defect experiments: slab eps=9 of thickness
# 0.375 per unit period, background 1
LAYERS = ((9.0, 0.375), (1.0, 0.625))


def cell_T(lam, k1, layers=LAYERS):
    """Monodromy matrix over one period; state (u, (1/eps) u')."""
    T = np.eye(2)
    for eps, d in layers:
        ks = lam * eps - k1**2
        if ks >= 0:
            k = np.sqrt(ks)
            if k < 1e-12:
                c, s_over_k, k_s = 1.0, d, 0.0
            else:
                c, s_over_k, k_s = np.cos(k * d), np.sin(k * d) / k, k * np.sin(k * d)
        else:
            k = np.sqrt(-ks)
            c, s_over_k, k_s = np.cosh(k * d), np.sinh(k * d) / k, -k * np.sinh(k * d)
        T = np.array([[c, eps * s_over_k], [-k_s / eps, c]]) @ T
    return T


def in_band(lam, k1, layers=LAYERS):
    return abs(np.trace(cell_T(lam, k1, layers))) <= 2.0


def _refine_edge(a, b, k1, layers):
    """Bisect a band edge bracketed by (a, b) with differing in_band."""
    fa = in_band(a, k1, layers)
    for _ in range(60):
        m = 0.5 * (a + b)
        if in_band(m, k1, layers) == fa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def tm_bands(k1, layers=LAYERS, lmax=12.0, n=24000):
    """Spectral bands [(lo, hi), ...] of the layered bulk at axial momentum k1."""
    lams = np.linspace(1e-6, lmax, n)
    inb = np.array([in_band(l, k1, layers) for l in lams])
    bands, start = [], None
    for i in range(n):
        if inb[i] and start is None:
            start = lams[i - 1] if i else lams[i]
            start = _refine_edge(start, lams[i], k1, layers) if i else lams[i]
        if not inb[i] and start is not None:
            bands.append((start, _refine_edge(lams[i - 1], lams[i], k1, layers)))
            start = None
    if start is not None:
        bands.append((start, lams[-1]))
    return bands


def decay_rate(lam, k1, layers=LAYERS):
    """Exact Bloch decay rate at an in-gap lam: log of the monodromy growth."""
    eigs = np.linalg.eigvals(cell_T(lam, k1, layers))
    return float(np.log(np.max(np.abs(eigs))))
