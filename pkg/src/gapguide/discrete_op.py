"""Matrix-free discrete operators on staggered grids.

Two operators drive everything downstream:

* the 3D Maxwell double curl  M u = curl (1/eps) curl u  on an
  edge-staggered (Yee) grid, quasi-periodic along x1 with Bloch phase
  e^{i k1 a} on the wraparound and perfect-conductor (or periodic)
  truncation transversely;
* the 2D scalar analog  A u = -div (1/eps) grad u  in flux form on nodes.

Both are built as D* W D with W a positive diagonal weight (face-averaged
1/eps) and D a difference operator whose adjoint is implemented exactly,
so Hermitian symmetry, nonnegativity, and curl(grad) = 0 hold to rounding
rather than to discretization order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import StructuralError, ValidationError
from .grids import GridSpec
from .media import SampledEpsilon

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _shift(arr, axis, step, phase):
    """arr shifted by one cell: out[i] = arr[i + step], with the wrapped
    slice multiplied by `phase` (Bloch), or zeroed when phase is None."""
    out = np.roll(arr, -step, axis=axis)
    edge = [slice(None)] * arr.ndim
    edge[axis] = slice(-1, None) if step > 0 else slice(0, 1)
    edge = tuple(edge)
    if phase is None:
        out[edge] = 0.0
    else:
        out[edge] = out[edge] * (phase if step > 0 else np.conj(phase))
    return out


@dataclass(frozen=True)
class YeeField3:
    """Three edge components on a 3D staggered grid.

    Component c lives on edges parallel to axis c: offset by half a cell
    along c, on nodes along the other axes.  All component arrays share the
    cell shape; the x1 wraparound carries the Bloch phase e^{i k1 a} with a
    the axial extent of the grid.
    """

    components: np.ndarray          # complex, shape (3, n1, n2, n3)
    grid: GridSpec
    bloch_k1: float = 0.0
    transverse_bc: str = "pec"

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex)
        if self.grid.ndim != 3 or c.shape != (3, *self.grid.shape):
            raise ValidationError("component array must have shape (3, n1, n2, n3)")
        if self.transverse_bc not in ("pec", "periodic"):
            raise ValidationError("transverse_bc must be 'pec' or 'periodic'")
        object.__setattr__(self, "components", c)

    @property
    def axial_period(self) -> float:
        lo, hi = self.grid.extent(0)
        return hi - lo

    def _phases(self):
        ph = np.exp(1j * self.bloch_k1 * self.axial_period)
        return (ph, None if self.transverse_bc == "pec" else 1.0,
                None if self.transverse_bc == "pec" else 1.0)

    def inner(self, other: "YeeField3") -> complex:
        return complex(np.vdot(self.components, other.components)
                       * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.linalg.norm(self.components)
                     * np.sqrt(self.grid.cell_volume))

    def with_components(self, comps) -> "YeeField3":
        return YeeField3(comps, self.grid, self.bloch_k1, self.transverse_bc)

    @classmethod
    def random(cls, grid, bloch_k1=0.0, transverse_bc="pec", seed=0):
        rng = np.random.default_rng(seed)
        c = rng.standard_normal((3, *grid.shape)) \
            + 1j * rng.standard_normal((3, *grid.shape))
        return cls(c, grid, bloch_k1, transverse_bc)


@dataclass(frozen=True)
class ScalarField2:
    """Scalar nodal field in 2D; Bloch along x1, Dirichlet or periodic in x2.

    On a Bloch/periodic axis the nodes sit at origin + i h; on a Dirichlet
    axis at origin + (i+1) h, so both walls are zero ghosts one spacing
    outside the unknowns.
    """

    values: np.ndarray
    grid: GridSpec
    bloch_k1: float = 0.0
    transverse_bc: str = "dirichlet"
    bloch_k2: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if self.grid.ndim != 2 or v.shape != self.grid.shape:
            raise ValidationError("values must match the 2D grid shape")
        if self.transverse_bc not in ("dirichlet", "periodic"):
            raise ValidationError("transverse_bc must be 'dirichlet' or 'periodic'")
        object.__setattr__(self, "values", v)

    @property
    def axial_period(self) -> float:
        lo, hi = self.grid.extent(0)
        return hi - lo

    def inner(self, other: "ScalarField2") -> complex:
        return complex(np.vdot(self.values, other.values) * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values) * np.sqrt(self.grid.cell_volume))

    def with_values(self, v) -> "ScalarField2":
        return ScalarField2(v, self.grid, self.bloch_k1,
                            self.transverse_bc, self.bloch_k2)


# ---------------------------------------------------------------------------
# 3D Maxwell double curl
# ---------------------------------------------------------------------------

def _dplus(arr, axis, h, phase):
    return (_shift(arr, axis, +1, phase) - arr) / h


def _dplus_adj(arr, axis, h, phase):
    # adjoint of _dplus in the plain l2 inner product
    return (_shift(arr, axis, -1, phase) - arr) / h


def curl_forward(u: YeeField3) -> np.ndarray:
    """Edge components -> face components, forward differences."""
    c = u.components
    h = u.grid.spacing
    ph = u._phases()
    out = np.empty_like(c)
    for i, j, k in _CYCLIC:
        out[i] = _dplus(c[k], j, h[j], ph[j]) - _dplus(c[j], k, h[k], ph[k])
    return out


def curl_adjoint(f: np.ndarray, like: YeeField3) -> np.ndarray:
    """Face components -> edge components; exact adjoint of curl_forward."""
    h = like.grid.spacing
    ph = like._phases()
    out = np.empty_like(f)
    for i, j, k in _CYCLIC:
        out[i] = _dplus_adj(f[j], k, h[k], ph[k]) - _dplus_adj(f[k], j, h[j], ph[j])
    return out


def grad_edges(p: np.ndarray, like: YeeField3) -> YeeField3:
    """Discrete gradient of a nodal scalar onto edges; curl of it is 0 exactly."""
    h = like.grid.spacing
    ph = like._phases()
    comps = np.stack([_dplus(np.asarray(p, dtype=complex), a, h[a], ph[a])
                      for a in range(3)])
    return like.with_components(comps)


def _face_weights(eps: SampledEpsilon, like) -> np.ndarray:
    """1/eps averaged onto the faces normal to each axis.

    The wrap along x1 uses the medium's periodicity (no phase); transverse
    wrap replicates the edge cell under PEC truncation.
    """
    inv = 1.0 / eps.values
    ndim = inv.ndim
    out = []
    for a in range(ndim):
        nb = np.roll(inv, -1, axis=a)
        if a > 0 and getattr(like, "transverse_bc", "pec") != "periodic":
            edge = [slice(None)] * ndim
            edge[a] = slice(-1, None)
            nb[tuple(edge)] = inv[tuple(edge)]
        out.append(0.5 * (inv + nb))
    return np.stack(out)


def apply_maxwell(u: YeeField3, eps: SampledEpsilon) -> YeeField3:
    """M u = curl (1/eps) curl u (Hermitian, nonnegative by construction)."""
    if eps.grid.shape != u.grid.shape:
        raise ValidationError("dielectric grid does not match the field grid")
    f = curl_forward(u)
    f *= _face_weights(eps, u)
    return u.with_components(curl_adjoint(f, u))


def maxwell_operator(eps: SampledEpsilon, bloch_k1: float = 0.0,
                     transverse_bc: str = "pec") -> spla.LinearOperator:
    """Matrix-free M on flattened 3-component complex vectors."""
    grid = GridSpec(eps.grid.shape, eps.grid.spacing, eps.grid.origin)
    shape3 = (3, *grid.shape)
    n = int(np.prod(shape3))
    w = _face_weights(eps, YeeField3(np.zeros(shape3, complex), grid,
                                     bloch_k1, transverse_bc))

    def matvec(x):
        u = YeeField3(x.reshape(shape3), grid, bloch_k1, transverse_bc)
        f = curl_forward(u)
        f *= w
        return curl_adjoint(f, u).ravel()

    return spla.LinearOperator((n, n), matvec=matvec, dtype=complex)


# ---------------------------------------------------------------------------
# 2D scalar flux-form operator
# ---------------------------------------------------------------------------

def _axis_phase(u: ScalarField2, axis: int):
    """None for a Dirichlet axis, Bloch phase for a quasi-periodic axis."""
    if axis == 0:
        return np.exp(1j * u.bloch_k1 * u.axial_period)
    if u.transverse_bc == "dirichlet":
        return None
    lo, hi = u.grid.extent(1)
    return np.exp(1j * u.bloch_k2 * (hi - lo))


def _scalar_face_weights(eps: SampledEpsilon, u: ScalarField2):
    """Per-axis 1/eps on faces; Dirichlet axes have shape+1 faces."""
    inv = 1.0 / eps.values
    out = []
    for a in range(2):
        if _axis_phase(u, a) is None:
            lo = np.take(inv, [0], axis=a)
            hi = np.take(inv, [-1], axis=a)
            padded = np.concatenate([lo, inv, hi], axis=a)
            lowr = np.take(padded, range(padded.shape[a] - 1), axis=a)
            uppr = np.take(padded, range(1, padded.shape[a]), axis=a)
            out.append(0.5 * (lowr + uppr))
        else:
            out.append(0.5 * (inv + np.roll(inv, -1, axis=a)))
    return out


def apply_scalar(u: ScalarField2, eps: SampledEpsilon) -> ScalarField2:
    """A u = -div (1/eps) grad u with face-averaged 1/eps."""
    if eps.grid.shape != u.grid.shape:
        raise ValidationError("dielectric grid does not match the field grid")
    v = u.values
    weights = _scalar_face_weights(eps, u)
    out = np.zeros_like(v)
    for a in range(2):
        h = u.grid.spacing[a]
        ph = _axis_phase(u, a)
        if ph is None:
            # n+1 faces with zero ghosts one spacing outside each wall
            zshape = list(v.shape)
            zshape[a] = 1
            z = np.zeros(zshape, dtype=v.dtype)
            ext_hi = np.concatenate([v, z], axis=a)
            ext_lo = np.concatenate([z, v], axis=a)
            flux = weights[a] * (ext_hi - ext_lo) / h
            lowr = np.take(flux, range(v.shape[a]), axis=a)
            uppr = np.take(flux, range(1, v.shape[a] + 1), axis=a)
            out += (lowr - uppr) / h
        else:
            d = (_shift(v, a, +1, ph) - v) / h
            f = weights[a] * d
            out += (_shift(f, a, -1, ph) - f) / h
    return u.with_values(out)


def scalar_matrix(eps: SampledEpsilon, bloch_k1: float = 0.0,
                  transverse_bc: str = "dirichlet",
                  bloch_k2: float = 0.0) -> sp.csr_matrix:
    """Sparse assembly of the 2D scalar operator (for factorized solves)."""
    grid = eps.grid
    proto = ScalarField2(np.zeros(grid.shape, complex), grid,
                         bloch_k1, transverse_bc, bloch_k2)
    weights = _scalar_face_weights(eps, proto)
    n1, n2 = grid.shape
    eyes = [sp.identity(n1, format="csr"), sp.identity(n2, format="csr")]
    A = sp.csr_matrix((n1 * n2, n1 * n2), dtype=complex)
    for a in range(2):
        n = grid.shape[a]
        h = grid.spacing[a]
        ph = _axis_phase(proto, a)
        if ph is None:
            # (n+1) x n bidiagonal difference with zero ghosts
            D1 = sp.diags([np.full(n, 1.0), np.full(n, -1.0)], [0, -1],
                          shape=(n + 1, n)) / h
        else:
            D1 = sp.lil_matrix((n, n), dtype=complex)
            D1.setdiag(-1.0)
            D1.setdiag(1.0, 1)
            D1[n - 1, 0] = ph
            D1 = (D1 / h).tocsr()
        D = sp.kron(D1, eyes[1]) if a == 0 else sp.kron(eyes[0], D1)
        W = sp.diags(weights[a].ravel())
        A = A + (D.conj().T @ W @ D)
    return A.tocsr()


# ---------------------------------------------------------------------------
# structural identity checks
# ---------------------------------------------------------------------------

def check_identities(eps: SampledEpsilon, trials: int = 20,
                     bloch_k1: float = 0.7, seed: int = 0) -> dict:
    """Verify symmetry, nonnegativity and curl(grad)=0 on random fields.

    Dispatches on the dielectric's dimensionality (3D Maxwell / 2D scalar).
    Raises StructuralError carrying the worst violation if any identity
    fails the 1e-12 budget.
    """
    rng = np.random.default_rng(seed)
    grid = eps.grid
    sym = gradimg = 0.0
    pos = np.inf
    for _ in range(trials):
        if grid.ndim == 3:
            u = YeeField3.random(grid, bloch_k1, seed=rng.integers(2**31))
            v = YeeField3.random(grid, bloch_k1, seed=rng.integers(2**31))
            Au, Av = apply_maxwell(u, eps), apply_maxwell(v, eps)
            p = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            gfield = grad_edges(p, u)
            gimg = curl_forward(gfield)
            gradimg = max(gradimg, float(np.max(np.abs(gimg))))
        else:
            vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            u = ScalarField2(vals, grid, bloch_k1)
            vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            v = ScalarField2(vals, grid, bloch_k1)
            Au, Av = apply_scalar(u, eps), apply_scalar(v, eps)
        scale = max(Au.norm() * v.norm() + u.norm() * Av.norm(), 1e-300)
        sym = max(sym, abs(u.inner(Av) - np.conj(v.inner(Au))) / scale)
        quad = u.inner(Au).real / max(u.norm() ** 2, 1e-300)
        pos = min(pos, quad)
    report = {"max_symmetry_violation": sym,
              "min_quadratic_form": pos,
              "max_grad_image": gradimg,
              "trials": trials}
    if sym > 1e-12:
        raise StructuralError("operator symmetry violated", max_violation=sym)
    if pos < -1e-12:
        raise StructuralError("operator form went negative", max_violation=-pos)
    if gradimg > 0.0 and grid.ndim == 3 and gradimg > 1e-12:
        raise StructuralError("curl(grad) != 0", max_violation=gradimg)
    return report


def plane_wave_eigenvalue(k: np.ndarray, spacing, eps_value: float) -> float:
    """Discrete symbol of the staggered curl-curl for a homogeneous medium."""
    k = np.asarray(k, dtype=float)
    h = np.asarray(spacing, dtype=float)
    return float(np.sum((2.0 / h) ** 2 * np.sin(k * h / 2.0) ** 2) / eps_value)
