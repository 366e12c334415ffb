"""Cross-section constant and compactly supported divergence-free test fields.

The constant is the lowest eigenvalue of -Laplace on divergence-free vector
fields vanishing on the boundary of the cross-section.  On a simply connected
domain this reduces, through the stream function, to the first clamped-plate
buckling eigenvalue

    Lap^2 psi = nu * (-Lap psi),    psi = dpsi/dn = 0 on the boundary,

discretized with the 13-point bilaplacian / 5-point laplacian stencils.
Outside values referenced by the stencil are eliminated with a quadratic
ghost reflection across the true (curved) boundary, which enforces both
clamped conditions to the order the stencil supports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage

from .cross_section import CrossSection, Interval
from .errors import GeometryError, IterationError, ValidationError
from .grids import GridSpec

_BILAP_OFFSETS = (
    (1, 0, -8.0), (-1, 0, -8.0), (0, 1, -8.0), (0, -1, -8.0),
    (1, 1, 2.0), (1, -1, 2.0), (-1, 1, 2.0), (-1, -1, 2.0),
    (2, 0, 1.0), (-2, 0, 1.0), (0, 2, 1.0), (0, -2, 1.0),
)


@dataclass(frozen=True)
class NuEstimate:
    """Cross-section constant estimate (units 1/length^2)."""

    value: float
    grid_h: float
    extrapolated: bool = False
    achieved_quotient: float | None = None
    order: float | None = None

    def __post_init__(self):
        if not (self.value > 0):
            raise ValidationError("nu must be positive")

    def record(self) -> dict:
        return {"value": self.value, "h": self.grid_h, "order": self.order,
                "quotient": self.achieved_quotient,
                "extrapolated": self.extrapolated}


@dataclass(frozen=True)
class TestField:
    """Divergence-free vector field with compact support inside the domain.

    g has unit discrete L2 norm and is the rotated gradient (d2, -d1) of the
    stream function, so its centered-difference divergence vanishes
    identically.
    """

    g: np.ndarray
    stream: np.ndarray
    grid: GridSpec
    support_margin: float
    quotient: float
    lap_norm_sq: float
    ip_lap: float
    grad_norm_sq: float
    norm_sq: float = 1.0


# ---------------------------------------------------------------------------
# grid and operator assembly
# ---------------------------------------------------------------------------

def _domain_grid(cs: CrossSection, h: float, pad_cells: int = 3):
    lo, hi = cs.bbox()
    lo = np.asarray(lo, dtype=float) - pad_cells * h
    hi = np.asarray(hi, dtype=float) + pad_cells * h
    shape = tuple(int(np.ceil((b - a) / h)) for a, b in zip(lo, hi))
    grid = GridSpec(shape=shape, spacing=(h,) * len(shape), origin=tuple(lo))
    mesh = grid.meshgrid()
    pts = np.stack(mesh, axis=-1)
    mask = cs.contains(pts)
    if not mask.any():
        raise GeometryError("grid does not resolve the cross-section")
    return grid, mask, pts


def _check_resolution(cs: CrossSection, h: float):
    if cs.diameter() / h < 32:
        raise GeometryError(
            f"spacing {h:g} under-resolves the domain (need >= 32 cells across)")


def _restriction(mask: np.ndarray) -> sp.csr_matrix:
    m = int(mask.sum())
    cols = np.flatnonzero(mask.ravel())
    return sp.csr_matrix((np.ones(m), (np.arange(m), cols)),
                         shape=(m, mask.size))


def _full_laplacian(shape, h) -> sp.csr_matrix:
    """5-point (3-point in 1D) Laplacian on the full grid, zero ghosts."""
    ops = []
    for n in shape:
        e = np.ones(n)
        ops.append(sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1]) / h**2)
    if len(shape) == 1:
        return ops[0].tocsr()
    I0 = sp.identity(shape[0])
    I1 = sp.identity(shape[1])
    return (sp.kron(ops[0], I1) + sp.kron(I0, ops[1])).tocsr()


def _ring_nodes(mask: np.ndarray, reach: int) -> np.ndarray:
    """Interior nodes with an outside node within `reach` steps (any axis)."""
    size = 2 * reach + 1
    structure = np.ones((size,) * mask.ndim, dtype=bool)
    core = ndimage.binary_erosion(mask, structure=structure, border_value=0)
    return np.argwhere(mask & ~core)


def _ghost_source(cs, mask, pts, node, direction, outside_offset):
    """Eliminate an outside stencil value via quadratic reflection.

    Returns (source_index, weight_ratio) with ghost = ratio * psi[source],
    from the clamped-boundary model psi ~ c * d^2 along the stencil line.
    """
    node = tuple(node)
    p_idx = tuple(np.asarray(node) + outside_offset)
    q = pts[node]
    p = pts[p_idx]
    t = cs.crossing(q, p)
    b = q + t * (p - q)
    d_ghost = np.linalg.norm(p - b)
    shape = mask.shape
    best = None
    for m in range(0, 3):
        s_idx = tuple(np.asarray(node) - m * np.asarray(direction))
        if any(i < 0 or i >= n for i, n in zip(s_idx, shape)):
            continue
        if not mask[s_idx]:
            continue
        d_src = np.linalg.norm(pts[s_idx] - b)
        if best is None or d_src > best[0]:
            best = (d_src, s_idx)
    if best is None:
        return None, 0.0
    d_src, s_idx = best
    return s_idx, (d_ghost / d_src) ** 2


def _buckling_system(cs: CrossSection, h: float):
    """13-point bilaplacian A and 5-point -Laplacian B on interior nodes."""
    if cs.ndim != 2:
        raise ValidationError("the vector constant needs a 2D cross-section")
    cs.check_simply_connected()
    _check_resolution(cs, h)
    grid, mask, pts = _domain_grid(cs, h)
    P = _restriction(mask)
    Lf = _full_laplacian(grid.shape, h)
    A = (P @ (Lf @ Lf) @ P.T).tolil()
    B = (-(P @ Lf @ P.T)).tocsr()

    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(mask.sum())
    for node in _ring_nodes(mask, reach=2):
        row = idx[tuple(node)]
        for di, dj, w in _BILAP_OFFSETS:
            pi, pj = node[0] + di, node[1] + dj
            if 0 <= pi < mask.shape[0] and 0 <= pj < mask.shape[1] and mask[pi, pj]:
                continue
            g = np.gcd(abs(di), abs(dj)) if di and dj else max(abs(di), abs(dj))
            direction = (di // g, dj // g)
            src, ratio = _ghost_source(cs, mask, pts, node, direction, (di, dj))
            if src is not None:
                A[row, idx[src]] += (w / h**4) * ratio
    return A.tocsc(), B, grid, mask


def _scalar_system(cs: CrossSection, h: float):
    """Shortley-Weller -Laplacian with Dirichlet data on the true boundary."""
    _check_resolution(cs, h)
    grid, mask, pts = _domain_grid(cs, h)
    P = _restriction(mask)
    Lf = _full_laplacian(grid.shape, h)
    A = (-(P @ Lf @ P.T)).tolil()

    idx = -np.ones(mask.shape, dtype=np.int64)
    idx[mask] = np.arange(mask.sum())
    ndim = mask.ndim
    for node in _ring_nodes(mask, reach=1):
        node = tuple(node)
        row = idx[node]
        for axis in range(ndim):
            thetas = []
            nbrs = []
            for s in (+1, -1):
                off = np.zeros(ndim, dtype=int)
                off[axis] = s
                nb = tuple(np.asarray(node) + off)
                in_range = all(0 <= i < n for i, n in zip(nb, mask.shape))
                if in_range and mask[nb]:
                    thetas.append(1.0)
                    nbrs.append(nb)
                else:
                    q = pts[node]
                    p = pts[node] + off * h
                    thetas.append(max(cs.crossing(q, p), 1e-6))
                    nbrs.append(None)
            tE, tW = thetas
            if tE == 1.0 and tW == 1.0:
                continue
            # remove the zero-ghost row contribution for this axis
            A[row, row] -= 2.0 / h**2
            for nb in nbrs:
                if nb is not None:
                    A[row, idx[nb]] += 1.0 / h**2
            # unequal-arm second difference, boundary value zero on cut arms
            denom = tE * tW * (tE + tW) * h**2
            A[row, row] += 2.0 * (tE + tW) / denom
            if nbrs[0] is not None:
                A[row, idx[nbrs[0]]] -= 2.0 * tW / denom
            if nbrs[1] is not None:
                A[row, idx[nbrs[1]]] -= 2.0 * tE / denom
    return A.tocsc(), grid, mask


# ---------------------------------------------------------------------------
# eigen solves
# ---------------------------------------------------------------------------

def _power_smallest(A, B=None, tol=1e-9, maxiter=1000, seed=0):
    """Smallest eigenvalue of A x = lam B x by shift-invert power iteration.

    Stops when the relative eigenpair residual drops below `tol`.
    """
    lu = spla.splu(A)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    lam = res = None
    for _ in range(maxiter):
        w = lu.solve(B @ v if B is not None else v)
        w /= np.linalg.norm(w)
        Aw = A @ w
        Bw = B @ w if B is not None else w
        lam = float((w @ Aw) / (w @ Bw))
        res = float(np.linalg.norm(Aw - lam * Bw) /
                    (abs(lam) * np.linalg.norm(Bw)))
        v = w
        if res < tol:
            break
    if res > 1e-6:
        raise IterationError(
            f"shift-invert power iteration stalled (residual {res:.2e})",
            residual=res)
    return lam, v, res


def _dense_smallest(A, B=None):
    import scipy.linalg as la

    Ad = A.toarray()
    if B is None:
        vals, vecs = la.eig(Ad)
    else:
        vals, vecs = la.eig(Ad, B.toarray())
    real = vals.real
    real[np.abs(vals.imag) > 1e-8 * np.abs(vals.real + 1e-30)] = np.inf
    real[real <= 0] = np.inf
    k = int(np.argmin(real))
    return float(real[k]), vecs[:, k].real


def solve_nu_vector(cs: CrossSection, h: float, tol: float = 1e-10,
                    method: str = "auto") -> NuEstimate:
    """Cross-section constant via the clamped buckling eigenproblem."""
    nu, psi_full, grid, _, quot = _buckling_minimizer(cs, h, tol, method)
    return NuEstimate(value=nu, grid_h=h, achieved_quotient=quot)


def _buckling_minimizer(cs, h, tol=1e-10, method="auto"):
    A, B, grid, mask = _buckling_system(cs, h)
    if method == "dense":
        if A.shape[0] > 10_000:
            raise ValidationError("dense fallback limited to <= 10^4 unknowns")
        nu, v = _dense_smallest(A, B)
    else:
        nu, v, _ = _power_smallest(A, B, tol=tol)
    psi = np.zeros(mask.shape)
    psi[mask] = v
    # fix the overall sign so repeated runs agree
    if psi.sum() < 0:
        psi = -psi
    # Rayleigh value of the minimizer in the discrete quadratic forms; at the
    # minimizer grad(Lap psi) = -nu grad(psi), so this equals the vector-field
    # quotient ||Lap g||/||g|| without differencing across the clamped edge.
    quot = float((v @ (A @ v)) / (v @ (B @ v)))
    return float(nu), psi, grid, mask, quot


def solve_nu_scalar(cs: CrossSection, h: float, tol: float = 1e-10,
                    method: str = "auto") -> NuEstimate:
    """Scalar-analog constant: smallest Dirichlet eigenvalue of -Laplace."""
    A, grid, mask = _scalar_system(cs, h)
    if method == "dense":
        lam, _ = _dense_smallest(A)
    else:
        lam, _, _ = _power_smallest(A, tol=tol)
    return NuEstimate(value=float(lam), grid_h=h)


# ---------------------------------------------------------------------------
# test fields
# ---------------------------------------------------------------------------

def smoothstep(t: np.ndarray, k: int = 2) -> np.ndarray:
    """C^k polynomial step: 0 at t<=0, 1 at t>=1 (k=2 is the quintic)."""
    from math import comb

    t = np.clip(t, 0.0, 1.0)
    acc = np.zeros_like(t)
    for j in range(k + 1):
        acc = acc + comb(k + j, j) * comb(2 * k + 1, k - j) * (-t) ** j
    return t ** (k + 1) * acc


def _cgrad(f: np.ndarray, h: float):
    """Centered gradient with zero ghosts; components commute exactly."""
    grads = []
    for axis in range(f.ndim):
        up = np.zeros_like(f)
        dn = np.zeros_like(f)
        sl_hi = [slice(None)] * f.ndim
        sl_lo = [slice(None)] * f.ndim
        sl_hi[axis] = slice(1, None)
        sl_lo[axis] = slice(None, -1)
        up[tuple(sl_lo)] = f[tuple(sl_hi)]
        dn[tuple(sl_hi)] = f[tuple(sl_lo)]
        grads.append((up - dn) / (2 * h))
    return grads


def _fgrad(f: np.ndarray, h: float):
    """Forward-difference gradient with zero ghosts.

    Adjoint to the 5-point Laplacian: <f, lap2(f)> = -sum |fgrad(f)|^2
    exactly for fields supported away from the array edges.
    """
    grads = []
    for axis in range(f.ndim):
        up = np.zeros_like(f)
        sl_hi = [slice(None)] * f.ndim
        sl_lo = [slice(None)] * f.ndim
        sl_hi[axis] = slice(1, None)
        sl_lo[axis] = slice(None, -1)
        up[tuple(sl_lo)] = f[tuple(sl_hi)]
        grads.append((up - f) / h)
    return grads


def _lap2(f: np.ndarray, h: float) -> np.ndarray:
    out = -2 * f.ndim * f.copy()
    for axis in range(f.ndim):
        sl_hi = [slice(None)] * f.ndim
        sl_lo = [slice(None)] * f.ndim
        sl_hi[axis] = slice(1, None)
        sl_lo[axis] = slice(None, -1)
        shifted = np.zeros_like(f)
        shifted[tuple(sl_lo)] += f[tuple(sl_hi)]
        shifted[tuple(sl_hi)] += f[tuple(sl_lo)]
        out += shifted
    return out / h**2


def make_test_field(cs: CrossSection, rho: float, h: float,
                    tol: float = 1e-10) -> TestField:
    """Mollified buckling minimizer as a compactly supported test field.

    The stream eigenfunction is multiplied by a quintic smoothstep of the
    boundary distance, zero within distance rho of the boundary and ramping
    up to one at depth (rho + inradius)/2; its rotated gradient is the returned
    divergence-free field, normalized to unit discrete L2 norm.  The wide
    ramp keeps the third-derivative cost of truncation as small as the
    margin allows.
    """
    if not (0 < rho < cs.inradius() / 2):
        raise GeometryError(
            f"margin rho={rho:g} must lie in (0, inradius/2={cs.inradius() / 2:g})")
    _, psi, grid, mask, _ = _buckling_minimizer(cs, h, tol)
    mesh = grid.meshgrid()
    d = cs.boundary_distance(np.stack(mesh, axis=-1))
    ramp_top = 0.5 * (rho + cs.inradius())
    eta = smoothstep((d - rho) / (ramp_top - rho))
    eta[~mask] = 0.0
    stream = eta * psi
    if not np.any(stream):
        raise GeometryError("cutoff removed the whole field; rho too large")
    d1, d2 = _cgrad(stream, h)
    g = np.stack([d2, -d1])
    cell = h * h
    nrm = np.sqrt(np.sum(g * g) * cell)
    g /= nrm
    stream = stream / nrm
    lap_g = np.stack([_lap2(g[0], h), _lap2(g[1], h)])
    lap_norm_sq = float(np.sum(lap_g * lap_g) * cell)
    ip_lap = float(np.sum(lap_g * g) * cell)
    grad_norm_sq = float(sum(np.sum(dc * dc) for c in range(2)
                             for dc in _fgrad(g[c], h)) * cell)
    return TestField(g=g, stream=stream, grid=grid, support_margin=rho,
                     quotient=float(np.sqrt(lap_norm_sq)),
                     lap_norm_sq=lap_norm_sq, ip_lap=ip_lap,
                     grad_norm_sq=grad_norm_sq)


def divergence(tf: TestField) -> np.ndarray:
    """Discrete divergence of the test field (identically zero by build)."""
    d1 = _cgrad(tf.g[0], tf.grid.spacing[0])[0]
    d2 = _cgrad(tf.g[1], tf.grid.spacing[0])[1]
    return d1 + d2


# ---------------------------------------------------------------------------
# Richardson extrapolation
# ---------------------------------------------------------------------------

def refine_extrapolate(estimates) -> NuEstimate:
    """Richardson-extrapolate estimates assuming order-2 convergence.

    Accepts NuEstimate objects or bare (h, value) pairs.  Needs >= 3
    estimates at geometrically decreasing h; reports the observed order from
    the last three grids.  A non-monotone difference sequence is unsafe to
    extrapolate: it warns and returns the finest-grid value.
    """
    pairs = sorted(((float(e.grid_h), float(e.value))
                    if isinstance(e, NuEstimate) else (float(e[0]), float(e[1]))
                    for e in estimates), reverse=True)
    if len(pairs) < 3:
        raise ValidationError("need at least 3 estimates to extrapolate")
    hs = np.array([p[0] for p in pairs])
    vs = np.array([p[1] for p in pairs])
    diffs = np.diff(vs)
    if np.any(diffs[:-1] * diffs[1:] <= 0):
        warnings.warn("non-monotone refinement sequence; extrapolation unsafe",
                      RuntimeWarning)
        return NuEstimate(value=vs[-1], grid_h=hs[-1], extrapolated=False)
    r = hs[-3] / hs[-2]
    order = float(np.log(abs(diffs[-2] / diffs[-1])) / np.log(r))
    r_fine = hs[-2] / hs[-1]
    value = vs[-1] + (vs[-1] - vs[-2]) / (r_fine**2 - 1.0)
    return NuEstimate(value=float(value), grid_h=float(hs[-1]),
                      extrapolated=True, order=order)
