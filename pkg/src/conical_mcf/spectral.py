"""Weighted spectral theory of the expander Jacobi operator on curves.

The operator L = Lap + (x/2).grad - 1/2 + |A|^2 is discretized in
conservative form

    L u |_i = (w_{i+1/2} (u_{i+1}-u_i)/h_{i+1/2}
               - w_{i-1/2} (u_i-u_{i-1})/h_{i-1/2}) / (w_i hbar_i)
              + (kappa_i^2 - 1/2) u_i,

with Gaussian weight w = exp(|x|^2/4) sampled at nodes and segment
midpoints, which is self-adjoint with respect to the lumped weighted inner
product <u, v>_w = sum u_i v_i w_i hbar_i by construction (not merely to
O(h^2)).  First Dirichlet eigenpairs on Sigma_R are computed by inverse
power iteration with banded Cholesky solves; a dense tridiagonal
eigensolver serves as an independent oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, eigh_tridiagonal

from .geometry import DiscreteCurve, GraphFunction, jacobi_operator_apply
from .graphs import normal_graph_heights

EIGEN_RESIDUAL_TOL = 1e-10
MAX_POWER_ITERS = 10_000


class EigenConvergenceError(RuntimeError):
    def __init__(self, trace):
        super().__init__(
            f"inverse power iteration did not converge in {MAX_POWER_ITERS} "
            f"iterations; Rayleigh trace tail: {trace[-5:]}"
        )
        self.rayleigh_trace = trace


def _base_curve(sigma):
    return getattr(sigma, "curve", sigma)


@dataclass
class WeightedJacobiOperator:
    """Dirichlet Jacobi operator on Sigma_R with Gaussian weight."""

    curve: DiscreteCurve
    radius: float
    interior: np.ndarray  # node indices of the full curve inside B_R
    masses: np.ndarray  # w_i * hbar_i per interior node
    diag: np.ndarray  # stiffness diagonal of A (symmetric form of -L)
    off: np.ndarray  # stiffness off-diagonal (length n-1)

    @property
    def n(self):
        return self.interior.size

    def apply(self, values):
        """-L restricted to the interior (values given on interior nodes)."""
        av = self.diag * values
        av[:-1] += self.off * values[1:]
        av[1:] += self.off * values[:-1]
        return av / self.masses

    def apply_l(self, values):
        return -self.apply(values)

    def inner(self, u, v):
        """Weighted inner product <u, v>_w on Sigma_R."""
        return float(np.sum(u * v * self.masses))

    def selfadjoint_defect(self, u, v):
        return abs(self.inner(self.apply_l(u), v) - self.inner(u, self.apply_l(v)))

    def banded_upper(self):
        ab = np.zeros((2, self.n))
        ab[0, 1:] = self.off
        ab[1, :] = self.diag
        return ab


def assemble_operator(sigma, radius):
    """Assemble the weighted Jacobi operator on Sigma_R = Sigma ∩ B_R.

    The curve must extend past radius R on both ends; the Dirichlet
    condition is imposed by node deletion (zero at the first nodes outside
    the ball).
    """
    curve = _base_curve(sigma)
    if radius < 2.0:
        raise ValueError("radius must be at least 2")
    r = curve.radii
    if r[0] <= radius or r[-1] <= radius:
        raise ValueError(f"curve does not extend past radius {radius}")
    mask = r <= radius
    idx = np.nonzero(mask)[0]
    if idx.size < 8:
        raise ValueError("too few nodes inside the ball")
    if np.any(np.diff(idx) != 1):
        raise ValueError("Sigma_R nodes are not contiguous along the curve")

    s = curve.arclength
    x = curve.nodes
    kappa = curve.curvature

    lo, hi = idx[0], idx[-1]
    # include the Dirichlet neighbours lo-1, hi+1 as zero nodes
    sl = slice(lo - 1, hi + 2)
    xs = x[sl]
    ss = s[sl]
    kk = kappa[sl]
    h_seg = np.diff(ss)
    mids = 0.5 * (xs[1:] + xs[:-1])
    w_mid = np.exp(0.25 * np.sum(mids**2, axis=1))
    w_node = np.exp(0.25 * np.sum(xs**2, axis=1))
    hbar = 0.5 * (h_seg[1:] + h_seg[:-1])

    # interior unknowns are nodes 1..n of the padded slice
    n = idx.size
    cond = w_mid / h_seg  # conductances per segment
    masses = w_node[1:-1] * hbar
    pot = (kk[1:-1] ** 2 - 0.5) * masses
    diag = cond[:-1] + cond[1:] - pot
    off = -cond[1:-1]
    return WeightedJacobiOperator(
        curve=curve, radius=float(radius), interior=idx, masses=masses, diag=diag, off=off
    )


@dataclass
class EigenResult:
    """First Dirichlet eigenpair (mu_R, phi_R) with normalization data."""

    radius: float
    mu: float
    phi: GraphFunction  # on the full curve, zero outside Sigma_R
    interior: np.ndarray
    normalization: float
    residual: float
    iterations: int

    @property
    def phi_interior(self):
        return self.phi.values[self.interior]


def _normalize(op, vec):
    nrm = np.sqrt(op.inner(vec, vec))
    vec = vec / nrm
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return vec


def first_eigenpair(op, tol=EIGEN_RESIDUAL_TOL, max_iters=MAX_POWER_ITERS):
    """First Dirichlet eigenpair by unshifted inverse power iteration.

    Solves L phi + mu phi = 0 (equivalently A phi = mu M phi with the
    symmetric stiffness A and lumped mass M); the first eigenvalue of -L is
    simple, so plain inverse iteration with the weighted Rayleigh quotient
    converges linearly with the spectral gap.
    """
    ab = op.banded_upper()
    try:
        chol = cholesky_banded(ab)
    except np.linalg.LinAlgError as err:
        raise RuntimeError(
            "stiffness matrix is not positive definite (unstable expander?)"
        ) from err
    phi = _normalize(op, np.exp(-0.25 * np.sum(op.curve.nodes[op.interior] ** 2, axis=1)))
    trace = []
    for it in range(1, max_iters + 1):
        rhs = op.masses * phi
        phi = _normalize(op, cho_solve_banded((chol, False), rhs))
        mu = op.inner(op.apply(phi), phi)
        trace.append(mu)
        res_vec = op.apply(phi) - mu * phi
        res = np.sqrt(op.inner(res_vec, res_vec))
        if res <= tol:
            break
    else:
        raise EigenConvergenceError(trace)
    if np.any(phi <= 0.0):
        phi = -phi
    if np.any(phi <= 0.0):
        raise RuntimeError("first eigenfunction is not interior-positive")
    full = np.zeros(op.curve.n_nodes)
    full[op.interior] = phi
    return EigenResult(
        radius=op.radius,
        mu=float(mu),
        phi=GraphFunction(op.curve, full),
        interior=op.interior,
        normalization=op.inner(phi, phi),
        residual=float(res),
        iterations=it,
    )


def dense_first_eigenpair(op):
    """Dense-matrix oracle: tridiagonal eigensolve of M^{-1/2} A M^{-1/2}."""
    m_half = np.sqrt(op.masses)
    d = op.diag / op.masses
    e = op.off / (m_half[:-1] * m_half[1:])
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    psi = vecs[:, 0]
    phi = _normalize(op, psi / m_half)
    if np.any(phi <= 0.0):
        phi = -phi
    return float(vals[0]), phi


def eigenvalue_curve(sigma, radii, tol=EIGEN_RESIDUAL_TOL):
    """(R, mu_R) along increasing radii; mu_R is non-increasing in R."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    out = []
    for r in radii:
        op = assemble_operator(sigma, r)
        out.append((float(r), first_eigenpair(op, tol=tol).mu))
    return out


def check_monotone_decreasing(curve_mu, tol):
    """Monotonicity audit for an eigenvalue curve within tolerance."""
    mus = [m for (_, m) in curve_mu]
    return all(b <= a + tol for a, b in zip(mus, mus[1:]))


# ---------------------------------------------------------------------------
# Jacobi fields from expander families


@dataclass
class JacobiFieldResult:
    """Linearly-growing Jacobi field extracted from an expander family.

    ``v`` is the normal speed of the family at s = 0 (Richardson-improved
    central differences of normal graph heights), ``residual`` the discrete
    L v profile, and ``w_samples`` the (r, r |w|) record of the deviation
    w = v - r psi(pi_Gamma) from the exact cone-variation growth.
    """

    v: GraphFunction
    residual: np.ndarray
    valid: np.ndarray
    tol_jac: float
    w_samples: np.ndarray
    positive: bool
    component: int

    def max_residual(self):
        return float(np.max(np.abs(self.residual[self.valid])))


def jacobi_field_from_family(family, component=0, require_positive=None):
    """Normal speed of an expander family at s = 0 on one component.

    Requires at least 3 members bracketing s = 0; with 5 or more the
    derivative is Richardson-extrapolated from the two innermost symmetric
    pairs.  Positivity is enforced for foliation families (positive link
    weights); the rotating-line kernel family is sign-indefinite by
    construction and is exempt.
    """
    s = family.s_values
    k0 = family.base_index()
    if len(s) < 3 or k0 == 0 or k0 == len(s) - 1 or abs(s[k0]) > 1e-14:
        raise ValueError("family must have >= 3 members bracketing s = 0")
    track = family.component_track(component)
    base = track[k0].curve
    r = base.radii
    cap = 8.0 * (s[-1] - s[0]) * float(np.max(r)) + 0.5

    def heights(k):
        return normal_graph_heights(base, track[k].curve, max_height=cap)

    d1 = s[k0 + 1] - s[k0]
    h_p1 = heights(k0 + 1)
    h_m1 = heights(k0 - 1)
    v1 = (h_p1 - h_m1) / (2.0 * d1)
    if k0 + 2 < len(s) and k0 - 2 >= 0:
        d2 = s[k0 + 2] - s[k0]
        h_p2 = heights(k0 + 2)
        h_m2 = heights(k0 - 2)
        v2 = (h_p2 - h_m2) / (2.0 * d2)
        ratio = (d2 / d1) ** 2
        v = (ratio * v1 - v2) / (ratio - 1.0)
    else:
        v = v1

    valid = np.isfinite(v)
    v_filled = v.copy()
    if not valid.all():
        good = np.nonzero(valid)[0]
        v_filled[: good[0]] = v[good[0]]
        v_filled[good[-1] + 1 :] = v[good[-1]]
        interior_bad = ~valid.copy()
        interior_bad[: good[0]] = False
        interior_bad[good[-1] + 1 :] = False
        if interior_bad.any():
            raise ValueError("family members are not graphs over the base expander")

    h = base.spacing
    residual = jacobi_operator_apply(base, v_filled)
    good = np.nonzero(valid)[0]
    res_valid = np.zeros_like(valid)
    res_valid[good[0] + 4 : good[-1] - 3] = True
    tol_jac = 10.0 * h**2 * float(np.max(r))

    positive = bool(np.all(v_filled[valid] > 0.0))
    if require_positive is None:
        require_positive = family.kind == "foliation"
    if require_positive and not positive:
        raise ValueError("Jacobi field is not positive (wrong family branch?)")

    # deviation from the exact linear growth r * psi(nearest ray)
    psi_at_node = _psi_projection(family, base)
    w = v_filled - r * psi_at_node
    sample_mask = valid & (r >= 2.0)
    rs = r[sample_mask]
    rw = (r * np.abs(w))[sample_mask]
    order = np.argsort(rs)
    w_samples = np.stack([rs[order], rw[order]], axis=1)

    return JacobiFieldResult(
        v=GraphFunction(base, v_filled),
        residual=residual,
        valid=res_valid,
        tol_jac=tol_jac,
        w_samples=w_samples,
        positive=positive,
        component=component,
    )


def _psi_projection(family, base):
    """psi composed with the closest-ray projection, per base node."""
    cone = family.cone
    nodes = base.nodes
    best_d = np.full(nodes.shape[0], np.inf)
    best_psi = np.ones(nodes.shape[0])
    for ang, psi_val in zip(cone.ray_angles, family.psi):
        d = np.array([np.cos(ang), np.sin(ang)])
        t = np.clip(nodes @ d, 0.0, None)
        dist = np.hypot(*(nodes - t[:, None] * d[None, :]).T)
        closer = dist < best_d
        best_d[closer] = dist[closer]
        best_psi[closer] = psi_val
    return best_psi
