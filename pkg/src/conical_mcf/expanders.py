"""Self-expanding curves asymptotic to planar cones, by ODE shooting.

The expander equation H = (x . nu) / 2 becomes, in arclength variables
with tangent angle theta,

    x' = cos(theta),  y' = sin(theta),  theta' = (y cos(theta) - x sin(theta)) / 2,

which is orientation-free (straight lines through the origin solve it).
Curves asymptotic to a ray pair are found from the one-parameter symmetric
family shooting perpendicular to the sector bisector at signed offset ``a``:
the asymptotic half-opening gamma(a) decreases monotonically through
gamma(0) = pi/2 (the flat solution), so a bisection on ``a`` hits any
target sector opening in (0, 2 pi).  Sweeping ``a`` from 0 outward and
taking the first bracket realizes the one-sided outermost selection.

Normals follow the package convention: nu points away from the region
whose level set flow the expander bounds (into the Gap for fattening
cones), so that H = (x . nu)/2 with x . nu < 0 at the vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geometry import DiscreteCurve, PlanarCone, expander_residual, hausdorff_distance

R_MAX_DEFAULT = 40.0
R_DETECT = 20.0
THETA_WINDOW = 1.0
THETA_WINDOW_TOL = 1e-8
ANGLE_TOL = 1e-6
BISECT_ITERS = 60
DEFAULT_STEP = 5e-3

STATUS_RMAX = 0
STATUS_BUDGET = 1
STATUS_BLOWUP = 2
STATUS_SPIRAL = 3


class CurvatureBlowUpError(RuntimeError):
    """Curvature exceeded the blow-up threshold; carries the arclength."""

    def __init__(self, arclength, value):
        super().__init__(f"curvature blow-up |kappa| = {value:.3g} at s = {arclength:.6g}")
        self.arclength = arclength


class ShootingBracketError(RuntimeError):
    """Shooting sweep failed to bracket the target angle."""

    def __init__(self, target, achieved_range):
        super().__init__(
            f"could not bracket asymptotic angle {target:.6f}; "
            f"achieved range [{achieved_range[0]:.6f}, {achieved_range[1]:.6f}]"
        )
        self.target = target
        self.achieved_range = achieved_range


@njit(cache=True)
def _integrate_expander(x0, y0, th0, h, max_steps, r_max, kappa_blowup, spiral_span):
    """Fixed-step RK4 on the expander arclength ODE.

    Returns (xs, ys, ths, n, status); the arrays are filled up to index n.
    """
    xs = np.empty(max_steps + 1)
    ys = np.empty(max_steps + 1)
    ths = np.empty(max_steps + 1)
    xs[0] = x0
    ys[0] = y0
    ths[0] = th0
    x, y, th = x0, y0, th0
    status = STATUS_BUDGET
    n = 0
    for k in range(max_steps):
        k1x = math.cos(th)
        k1y = math.sin(th)
        k1t = 0.5 * (y * k1x - x * k1y)
        if abs(k1t) > kappa_blowup:
            status = STATUS_BLOWUP
            break

        x2 = x + 0.5 * h * k1x
        y2 = y + 0.5 * h * k1y
        t2 = th + 0.5 * h * k1t
        k2x = math.cos(t2)
        k2y = math.sin(t2)
        k2t = 0.5 * (y2 * k2x - x2 * k2y)

        x3 = x + 0.5 * h * k2x
        y3 = y + 0.5 * h * k2y
        t3 = th + 0.5 * h * k2t
        k3x = math.cos(t3)
        k3y = math.sin(t3)
        k3t = 0.5 * (y3 * k3x - x3 * k3y)

        x4 = x + h * k3x
        y4 = y + h * k3y
        t4 = th + h * k3t
        k4x = math.cos(t4)
        k4y = math.sin(t4)
        k4t = 0.5 * (y4 * k4x - x4 * k4y)

        x = x + h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        th = th + h * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0

        n = k + 1
        xs[n] = x
        ys[n] = y
        ths[n] = th
        if abs(th - th0) > spiral_span:
            status = STATUS_SPIRAL
            break
        if x * x + y * y >= r_max * r_max:
            status = STATUS_RMAX
            break
    return xs, ys, ths, n, status


def _run(x0, y0, th0, h, length=None, r_max=R_MAX_DEFAULT, kappa_blowup=1e6):
    if length is None:
        max_steps = int((2.5 * r_max + abs(x0) + abs(y0)) / h) + 8
    else:
        max_steps = int(length / h) + 1
        r_max = 1e300
    xs, ys, ths, n, status = _integrate_expander(
        float(x0), float(y0), float(th0), float(h), max_steps, float(r_max), float(kappa_blowup), 4.0 * np.pi
    )
    if status == STATUS_BLOWUP:
        raise CurvatureBlowUpError(n * h, kappa_blowup)
    return xs[: n + 1], ys[: n + 1], ths[: n + 1], status


def shoot_expander(start, angle, length, h=DEFAULT_STEP, curvature=None, kappa_blowup=1e6):
    """Integrate the expander ODE from a point/angle for a given arclength.

    ``curvature`` is redundant data (the equation forces kappa = (x.nu)/2
    at the start); when supplied it is validated for consistency.  Returns
    the forward trajectory as a DiscreteCurve with the left-normal
    orientation.
    """
    x0, y0 = float(start[0]), float(start[1])
    if not (np.isfinite(x0) and np.isfinite(y0) and np.isfinite(angle) and length > 0):
        raise ValueError("start, angle must be finite and length > 0")
    forced = 0.5 * (y0 * math.cos(angle) - x0 * math.sin(angle))
    if curvature is not None and abs(curvature - forced) > 1e-8 * max(1.0, abs(forced)):
        raise ValueError(
            f"initial curvature {curvature:.6g} inconsistent with the expander "
            f"equation (forces kappa = {forced:.6g})"
        )
    xs, ys, ths, _ = _run(x0, y0, angle, h, length=length, kappa_blowup=kappa_blowup)
    return DiscreteCurve(np.stack([xs, ys], axis=1), closed=False, orientation=1)


def _asymptotic_angle(a, h, r_max=R_MAX_DEFAULT):
    """theta at truncation radius for the symmetric start (a, 0, pi/2)."""
    xs, ys, ths, status = _run(a, 0.0, 0.5 * np.pi, h, r_max=r_max)
    if status != STATUS_RMAX:
        return np.nan
    return ths[-1]


@dataclass
class ExpanderCurve:
    """A self-expanding curve asymptotic to a pair of rays."""

    curve: DiscreteCurve
    asymptotic_angles: tuple
    side: str
    decay_record: np.ndarray
    max_residual: float
    vertex_offset: float = 0.0
    bisector: float = 0.0

    @property
    def nodes(self):
        return self.curve.nodes

    def decay_eventually_decreasing(self):
        """Discrete witness of sigma = o(1/r): r*sigma falls over the tail decade."""
        rec = self.decay_record
        if rec.shape[0] < 4:
            return True
        r_hi = rec[:, 0].max()
        tail = rec[rec[:, 0] >= r_hi / 10.0]
        vals = tail[np.argsort(tail[:, 0]), 1]
        return bool(np.all(np.diff(vals) <= 1e-9 * max(1.0, vals.max())))


def _rotate(nodes, beta):
    c, s = math.cos(beta), math.sin(beta)
    rot = np.array([[c, -s], [s, c]])
    return nodes @ rot.T


def _build_symmetric_curve(a, beta, h, r_max):
    """Assemble the full symmetric expander for vertex offset ``a``.

    The forward branch is integrated once and mirrored across the bisector,
    which keeps the construction exactly symmetric; the result is rotated
    so the bisector points along ``beta``.
    """
    xs, ys, ths, status = _run(a, 0.0, 0.5 * np.pi, h, r_max=r_max)
    if status != STATUS_RMAX:
        raise ShootingBracketError(0.0, (np.nan, np.nan))
    fwd = np.stack([xs, ys], axis=1)
    mirrored = fwd[1:][::-1].copy()
    mirrored[:, 1] = -mirrored[:, 1]
    nodes = np.vstack([mirrored, fwd])
    theta_inf = ths[-1]
    curve = DiscreteCurve(_rotate(nodes, beta), closed=False, orientation=1)
    return curve, theta_inf


def _decay_record(curve, ray_angles, h):
    """(r, r*sigma) samples of the normal height over the asymptotic rays.

    Sampling stops where sigma falls below the integrator resolution floor;
    past that point the discrete curve coincides with its rays.
    """
    nodes = curve.nodes
    r = np.hypot(nodes[:, 0], nodes[:, 1])
    sigma = np.full(r.shape, np.inf)
    for ang in ray_angles:
        d = np.array([math.cos(ang), math.sin(ang)])
        t = np.clip(nodes @ d, 0.0, None)
        sigma = np.minimum(sigma, np.hypot(*(nodes - t[:, None] * d[None, :]).T))
    floor = max(1e-11, 50.0 * h**4)
    mask = (r >= 1.0) & (sigma >= floor)
    rs = r[mask]
    rsig = rs * sigma[mask]
    order = np.argsort(rs)
    sub = slice(None, None, max(1, rs.size // 400))
    return np.stack([rs[order][sub], rsig[order][sub]], axis=1)


def solve_expander_for_ray_pair(theta1, theta2, side="W", h=DEFAULT_STEP, r_max=R_MAX_DEFAULT):
    """Expander asymptotic to rays theta1, theta2, opening around the CCW
    sector from theta1 to theta2 (which belongs to region ``side``).

    The vertex offset is swept from the flat solution outward until the
    target half-opening is bracketed, then resolved by a fixed 60-step
    bisection (the one-sided outermost selection).
    """
    opening = (theta2 - theta1) % (2.0 * np.pi)
    if opening == 0.0:
        raise ValueError("ray pair must span a nonzero sector")
    beta = theta1 + 0.5 * opening
    gamma = 0.5 * opening

    if abs(gamma - 0.5 * np.pi) < 1e-13:
        a_star = 0.0
    else:
        direction = 1.0 if gamma < 0.5 * np.pi else -1.0
        a_prev, g_prev = 0.0, 0.5 * np.pi
        a_star = None
        achieved = [g_prev, g_prev]
        step = 0.25
        a = 0.0
        for _ in range(200):
            a += direction * step
            g = _asymptotic_angle(a, h, r_max)
            if np.isnan(g):
                break
            achieved = [min(achieved[0], g), max(achieved[1], g)]
            if (g - gamma) * (g_prev - gamma) <= 0.0:
                lo, hi = (a_prev, a) if a_prev < a else (a, a_prev)
                for _ in range(BISECT_ITERS):
                    mid = 0.5 * (lo + hi)
                    gm = _asymptotic_angle(mid, h, r_max)
                    # gamma(a) decreases in a
                    if gm > gamma:
                        lo = mid
                    else:
                        hi = mid
                a_star = 0.5 * (lo + hi)
                break
            a_prev, g_prev = a, g
        if a_star is None:
            raise ShootingBracketError(gamma, tuple(achieved))

    curve, theta_inf = _build_symmetric_curve(a_star, beta, h, r_max)
    if abs(theta_inf - gamma) > ANGLE_TOL:
        raise ShootingBracketError(gamma, (theta_inf, theta_inf))
    angles = ((beta - theta_inf) % (2 * np.pi), (beta + theta_inf) % (2 * np.pi))
    residual = expander_residual(curve)
    max_res = float(np.max(np.abs(residual[2:-2])))
    record = _decay_record(curve, angles, h)
    return ExpanderCurve(
        curve=curve,
        asymptotic_angles=angles,
        side=side,
        decay_record=record,
        max_residual=max_res,
        vertex_offset=a_star,
        bisector=beta % (2 * np.pi),
    )


@dataclass
class OutermostExpanders:
    """Sigma / Sigma' component sets with the fattening verdict."""

    sigma: list
    sigma_prime: list
    fattens: bool
    gap: float
    tol_fat: float


def outermost_expanders(cone, h=DEFAULT_STEP, r_max=R_MAX_DEFAULT):
    """Outermost expanders of a planar cone, assembled sector by sector.

    PlanarCone labels alternate, so every ray bounds exactly one sector of
    each side and the pairing is forced.  The level set flow of the region
    W grows across the cone (it swallows the gap), so Sigma = bd F_1(W) is
    made of the components opening around the OUTSIDE sectors, and Sigma'
    of those around the inside sectors.  ``fattens`` certifies Hausdorff
    separation above the mesh-tied threshold 5 h.
    """
    sigma, sigma_prime = [], []
    for (a, b, inside) in cone.sectors():
        try:
            comp = solve_expander_for_ray_pair(a, b, side="W'" if inside else "W", h=h, r_max=r_max)
        except (ShootingBracketError, CurvatureBlowUpError) as err:
            raise RuntimeError(f"sector [{a:.4f}, {b:.4f}] solve failed: {err}") from err
        (sigma_prime if inside else sigma).append(comp)
    gap = hausdorff_distance([c.curve for c in sigma], [c.curve for c in sigma_prime])
    tol_fat = 5.0 * h
    return OutermostExpanders(sigma, sigma_prime, gap > tol_fat, gap, tol_fat)


# ---------------------------------------------------------------------------
# Families of expanders over perturbed cones


@dataclass
class ExpanderFamily:
    """One-parameter family of one-sided expanders over perturbed cones.

    ``members[k]`` is the component list for parameter ``s_values[k]``;
    components are index-matched across members.  For foliation families
    (psi > 0) members are strictly ordered in s along the base normal.
    """

    s_values: np.ndarray
    members: list
    psi: np.ndarray
    cone: PlanarCone
    side: str = "W"
    kind: str = "foliation"

    def component_track(self, j):
        return [m[j] for m in self.members]

    @property
    def n_components(self):
        return len(self.members[0])

    def base_index(self):
        return int(np.argmin(np.abs(self.s_values)))


def _perturbed_cone(cone, psi, s):
    """Move every ray into its adjacent outside sector by s * psi (widens W)."""
    m = cone.n_rays
    new_angles = np.empty(m)
    for i in range(m):
        sign = 1.0 if not cone.inside[i] else -1.0
        # sector i starts at ray i; if it is inside, the ray's outside
        # neighbour is the previous sector, so the ray moves clockwise
        new_angles[i] = cone.ray_angles[i] + sign * s * psi[i]
    rolled = np.mod(new_angles, 2 * np.pi)
    if np.any(np.diff(new_angles) <= 0):
        raise ValueError("perturbation too large: rays crossed")
    order = np.argsort(rolled)
    labels = [cone.inside[i] for i in order]
    return PlanarCone(rolled[order], labels)


def expander_family(cone, psi, s_max, count=5, side="W", h=DEFAULT_STEP, r_max=R_MAX_DEFAULT):
    """One-sided family of expanders over perturbed cones.

    ``psi`` holds positive link weights (one per ray); s runs over
    ``count`` symmetric samples in [-s_max, s_max] including 0.  For the
    Sigma' side (inside-sector components) increasing s widens W; for the
    Sigma side the perturbation is mirrored (widening W'), so that on
    either side increasing s moves the members toward the Gap, along the
    component normal.  This realizes the one-sided foliation whose s = 0
    normal speed is the positive linearly-growing Jacobi field used by the
    barriers.  An ordering violation signals a wrong shooting branch.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (cone.n_rays,):
        raise ValueError("psi must assign one weight per ray")
    if np.any(psi <= 0.0):
        raise ValueError("psi must be positive on every ray")
    if count < 3 or count % 2 == 0:
        raise ValueError("count must be an odd number >= 3")
    if side not in ("W", "W'"):
        raise ValueError("side must be 'W' or \"W'\"")
    s_values = np.linspace(-s_max, s_max, count)
    sign = -1.0 if side == "W" else 1.0
    pick_inside = side == "W'"
    members = []
    for s in s_values:
        cone_s = _perturbed_cone(cone, psi, sign * s)
        comps = []
        for (a, b, inside) in cone_s.sectors():
            if inside != pick_inside:
                continue
            comps.append(solve_expander_for_ray_pair(a, b, side=side, h=h, r_max=r_max))
        members.append(comps)
    members = _match_components(members, s_values)
    fam = ExpanderFamily(s_values=s_values, members=members, psi=psi, cone=cone, side=side)
    _check_family_ordering(fam, s_max=s_max, r_max=r_max)
    return fam


def _match_components(members, s_values):
    """Index-match components across members by bisector angle.

    Ray renumbering after the perturbation can rotate the sector order, so
    components are aligned to the s = 0 member by circular distance of
    their bisectors (which move only by O(s))."""
    base = members[int(np.argmin(np.abs(s_values)))]
    ref = np.array([c.bisector for c in base])
    out = []
    for comps in members:
        arranged = []
        for target in ref:
            dist = [
                abs((c.bisector - target + np.pi) % (2 * np.pi) - np.pi) for c in comps
            ]
            arranged.append(comps[int(np.argmin(dist))])
        out.append(arranged)
    return out


def _check_family_ordering(fam, s_max, r_max):
    from .graphs import normal_graph_heights

    ds = np.min(np.diff(fam.s_values))
    cap = 6.0 * ds * r_max + 0.1
    for j in range(fam.n_components):
        track = fam.component_track(j)
        for k in range(len(track) - 1):
            heights = normal_graph_heights(track[k].curve, track[k + 1].curve, max_height=cap)
            core = heights[8:-8]
            good = np.isfinite(core)
            if np.mean(good) < 0.9 or np.min(core[good]) <= 0.0:
                raise RuntimeError(
                    f"family ordering violated between s={fam.s_values[k]:.4g} "
                    f"and s={fam.s_values[k + 1]:.4g} (component {j})"
                )


def rotation_family(line_angle=0.0, s_max=0.02, count=5, h=DEFAULT_STEP, r_max=R_MAX_DEFAULT):
    """Rotating-line family about the flat expander.

    This is the kernel family of the straight line (signed link weights
    +-1, a clockwise rotation for s > 0): its normal speed is the linear
    Jacobi field v(x) = x, which is sign-indefinite.  Used to exercise the
    Jacobi machinery and the positivity preconditions downstream.
    """
    cone = PlanarCone.line(line_angle)
    s_values = np.linspace(-s_max, s_max, count)
    members = []
    n_side = int(r_max / h)
    t = np.arange(-n_side, n_side + 1) * h
    for s in s_values:
        ang = line_angle - s
        d = np.array([math.cos(ang), math.sin(ang)])
        nodes = t[:, None] * d[None, :]
        curve = DiscreteCurve(nodes, closed=False, orientation=-1)
        members.append([
            ExpanderCurve(
                curve=curve,
                asymptotic_angles=(ang % (2 * np.pi), (ang + np.pi) % (2 * np.pi)),
                side="W",
                decay_record=np.zeros((0, 2)),
                max_residual=0.0,
                vertex_offset=0.0,
                bisector=(ang + np.pi / 2) % (2 * np.pi),
            )
        ])
    return ExpanderFamily(
        s_values=s_values, members=members, psi=np.array([1.0, 1.0]), cone=cone,
        side="W", kind="rotation",
    )


# ---------------------------------------------------------------------------
# Rotationally symmetric profile mode (surfaces of revolution)


@njit(cache=True)
def _integrate_profile(r0, z0, th0, h, max_steps, r_stop, blowup):
    """RK4 for the revolution-profile expander ODE in (r, z).

    theta' = (p . nu)/2 - sin(theta)/r with nu the left normal; the axis
    term is regularized at r = 0 via the umbilic limit.
    """
    rs = np.empty(max_steps + 1)
    zs = np.empty(max_steps + 1)
    ths = np.empty(max_steps + 1)
    rs[0] = r0
    zs[0] = z0
    ths[0] = th0
    r, z, th = r0, z0, th0
    n = 0
    status = STATUS_BUDGET
    for k in range(max_steps):

        def _rhs(rr, zz, tt):
            st = math.sin(tt)
            ct = math.cos(tt)
            if rr < 1e-12:
                # pole limit: theta' = (p.nu)/4
                dth = 0.25 * (-rr * st + zz * ct)
            else:
                dth = 0.5 * (-rr * st + zz * ct) - st / rr
            return ct, st, dth

        k1r, k1z, k1t = _rhs(r, z, th)
        if abs(k1t) > blowup:
            status = STATUS_BLOWUP
            break
        k2r, k2z, k2t = _rhs(r + 0.5 * h * k1r, z + 0.5 * h * k1z, th + 0.5 * h * k1t)
        k3r, k3z, k3t = _rhs(r + 0.5 * h * k2r, z + 0.5 * h * k2z, th + 0.5 * h * k2t)
        k4r, k4z, k4t = _rhs(r + h * k3r, z + h * k3z, th + h * k3t)
        r = r + h * (k1r + 2 * k2r + 2 * k3r + k4r) / 6.0
        z = z + h * (k1z + 2 * k2z + 2 * k3z + k4z) / 6.0
        th = th + h * (k1t + 2 * k2t + 2 * k3t + k4t) / 6.0
        n = k + 1
        rs[n] = r
        zs[n] = z
        ths[n] = th
        if r < 0.0:
            status = STATUS_BLOWUP
            break
        if r * r + z * z >= r_stop * r_stop:
            status = STATUS_RMAX
            break
    return rs, zs, ths, n, status


def rot_profile_residual(curve):
    """Expander residual H - (p.nu)/2 for a revolution profile in (r, z)."""
    nu = curve.unit_normal
    r = curve.nodes[:, 0]
    kappa2 = -nu[:, 0] / np.where(np.abs(r) < 1e-12, np.inf, r)
    H = curve.curvature + kappa2
    return H - 0.5 * np.sum(curve.nodes * nu, axis=1)


class AxisCrossingError(RuntimeError):
    def __init__(self, location):
        super().__init__(f"profile crossed the rotation axis near (r, z) = {location}")
        self.location = location


def rot_symmetric_profile_expander(cone_slope, side="W'", h=DEFAULT_STEP, r_max=R_MAX_DEFAULT):
    """Profile curves of rotationally symmetric expanders asymptotic to the
    double cone {x^2 + y^2 = a^2 z^2} (a = cone_slope).

    side "W'" (the connected one-sheeted region around the equator) returns
    one profile symmetric in z; side "W" (the two-sheeted region around the
    axis) returns two disjoint profiles, one per sheet.  Profiles are in
    (r, z) coordinates.
    """
    a = float(cone_slope)
    if a <= 0:
        raise ValueError("cone slope must be positive")
    target = math.atan2(1.0, a)  # ray direction angle in (r, z)

    def run(p0, th0):
        max_steps = int(3.5 * r_max / h)
        rs, zs, ths, n, status = _integrate_profile(
            p0[0], p0[1], th0, h, max_steps, r_max, 1e6
        )
        if status == STATUS_BLOWUP:
            raise AxisCrossingError((rs[n], zs[n]))
        return rs[: n + 1], zs[: n + 1], ths[: n + 1], status

    def shoot_angle(param, mode):
        if mode == "equator":
            rs, zs, ths, status = run((param, 0.0), 0.5 * np.pi)
        else:
            rs, zs, ths, status = run((1e-8, param), 0.0)
        if status != STATUS_RMAX:
            return np.nan
        return ths[-1]

    def bisect(mode, lo, hi):
        # sweep from the inner end until the target is first bracketed
        # (first-parameter selection), then bisect that bracket
        grid = np.linspace(lo, hi, 80)
        vals = np.array([shoot_angle(p, mode) for p in grid])
        ok = np.isfinite(vals)
        achieved = (np.nanmin(vals), np.nanmax(vals))
        bracket = None
        for i in range(len(grid) - 1):
            if ok[i] and ok[i + 1] and (vals[i] - target) * (vals[i + 1] - target) <= 0.0:
                bracket = (grid[i], grid[i + 1], vals[i] < target)
                break
        if bracket is None:
            raise ShootingBracketError(target, achieved)
        blo, bhi, increasing = bracket
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (blo + bhi)
            g = shoot_angle(mid, mode)
            if np.isnan(g):
                bhi = mid
                continue
            if (g < target) == increasing:
                blo = mid
            else:
                bhi = mid
        return 0.5 * (blo + bhi)

    curves = []
    if side == "W'":
        r0 = bisect("equator", 0.05, 3.0 * max(1.0, 1.0 / a))
        rs, zs, ths, _ = run((r0, 0.0), 0.5 * np.pi)
        fwd = np.stack([rs, zs], axis=1)
        mirrored = fwd[1:][::-1].copy()
        mirrored[:, 1] = -mirrored[:, 1]
        curves.append(DiscreteCurve(np.vstack([mirrored, fwd]), orientation=1))
        theta_inf = ths[-1]
    elif side == "W":
        z0 = bisect("pole", 0.05, 4.0 * max(1.0, a))
        rs, zs, ths, _ = run((1e-8, z0), 0.0)
        upper = np.stack([rs, zs], axis=1)
        lower = upper.copy()
        lower[:, 1] = -lower[:, 1]
        curves.append(DiscreteCurve(upper, orientation=1))
        curves.append(DiscreteCurve(lower[::-1].copy(), orientation=-1))
        theta_inf = ths[-1]
    else:
        raise ValueError("side must be 'W' or 'W''")

    slope = 1.0 / math.tan(theta_inf)
    out = []
    for c in curves:
        res = rot_profile_residual(c)
        out.append(
            ExpanderCurve(
                curve=c,
                asymptotic_angles=(theta_inf, np.pi - theta_inf),
                side=side,
                decay_record=np.zeros((0, 2)),
                max_residual=float(np.max(np.abs(res[4:-4]))),
                vertex_offset=0.0,
                bisector=0.0,
            )
        )
    return out, slope
