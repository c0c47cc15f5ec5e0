"""Discrete differential geometry of planar curves and normal graphs.

Conventions used throughout the package:

* A curve is an ordered polyline.  The unit tangent ``T`` follows node
  order, the unit normal is ``nu = orientation * rot90(T)`` where rot90 is
  the counterclockwise quarter turn, and the signed curvature ``kappa`` is
  taken with respect to ``nu``, so the curvature vector is ``H * nu`` with
  ``H = kappa``.  Flipping ``orientation`` negates (nu, kappa, H) and
  leaves the embedded point set unchanged.
* Curvature is computed by the three-point circumscribed-circle formula
  (second order on near-uniform arclength meshes); tangents by centered
  differences with one-sided second-order closure at open endpoints.
* Normal graphs over a base curve M are maps ``x -> x + u(x) * nu(x)``
  with the admissibility margin ``|u| |kappa| < eta < 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_ETA = 0.5


class DegenerateCurveError(ValueError):
    """Raised for polylines with repeated consecutive nodes."""


class AdmissibilityError(ValueError):
    """Graph violates |u||A| < eta; carries the offending node index."""

    def __init__(self, message, node):
        super().__init__(f"{message} (node {node})")
        self.node = node


def _rot90(vec):
    """Counterclockwise quarter turn of an (n, 2) array."""
    return np.stack([-vec[:, 1], vec[:, 0]], axis=1)


def _cross2(a, b):
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]


class DiscreteCurve:
    """Oriented arclength-sampled polyline with cached geometry.

    Parameters
    ----------
    nodes : (n, 2) array
        Node positions in order along the curve.  Consecutive nodes must
        be distinct.  For closed curves the segment from the last node
        back to the first is implied (do not repeat the first node).
    closed : bool
        Whether the polyline is a loop.
    orientation : {+1, -1}
        Selects the unit normal: +1 is the left normal of the traversal.
    """

    def __init__(self, nodes, closed=False, orientation=1):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise ValueError("nodes must be an (n >= 2, 2) array")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        seg = np.diff(nodes, axis=0)
        if closed:
            seg = np.vstack([seg, nodes[0] - nodes[-1]])
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len == 0.0):
            raise DegenerateCurveError("repeated consecutive nodes")
        self.nodes = nodes
        self.closed = bool(closed)
        self.orientation = int(orientation)
        self._seg_len = seg_len
        self._cache = {}

    # -- basic measures -------------------------------------------------

    def __len__(self):
        return self.nodes.shape[0]

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def segment_lengths(self):
        return self._seg_len

    @property
    def length(self):
        return float(self._seg_len.sum())

    @property
    def arclength(self):
        """Cumulative arclength per node, starting at 0."""
        if "s" not in self._cache:
            s = np.concatenate([[0.0], np.cumsum(self._seg_len)])
            self._cache["s"] = s[: self.n_nodes]
        return self._cache["s"]

    @property
    def spacing(self):
        """Median node spacing (the mesh scale h)."""
        return float(np.median(self._seg_len))

    @property
    def radii(self):
        """Distance of each node from the origin."""
        if "r" not in self._cache:
            self._cache["r"] = np.hypot(self.nodes[:, 0], self.nodes[:, 1])
        return self._cache["r"]

    # -- differential geometry ------------------------------------------

    def _neighbors(self):
        """Previous/next node arrays with wrap for closed curves."""
        x = self.nodes
        if self.closed:
            prev = np.roll(x, 1, axis=0)
            nxt = np.roll(x, -1, axis=0)
        else:
            prev = np.vstack([x[0], x[:-1]])
            nxt = np.vstack([x[1:], x[-1]])
        return prev, nxt

    @property
    def unit_tangent(self):
        if "T" not in self._cache:
            x = self.nodes
            prev, nxt = self._neighbors()
            t = nxt - prev
            if not self.closed:
                # second-order one-sided closure at the ends
                t[0] = self._one_sided_tangent(x[0], x[1], x[2])
                t[-1] = -self._one_sided_tangent(x[-1], x[-2], x[-3])
            norm = np.hypot(t[:, 0], t[:, 1])
            self._cache["T"] = t / norm[:, None]
        return self._cache["T"]

    @staticmethod
    def _one_sided_tangent(p0, p1, p2):
        d1 = np.hypot(*(p1 - p0))
        d2 = np.hypot(*(p2 - p1))
        w0 = -(2.0 * d1 + d2) / (d1 * (d1 + d2))
        w1 = (d1 + d2) / (d1 * d2)
        w2 = -d1 / (d2 * (d1 + d2))
        return w0 * p0 + w1 * p1 + w2 * p2

    @property
    def tangent_angle(self):
        """Unwrapped tangent angle theta per node (radians)."""
        if "theta" not in self._cache:
            t = self.unit_tangent
            self._cache["theta"] = np.unwrap(np.arctan2(t[:, 1], t[:, 0]))
        return self._cache["theta"]

    @property
    def unit_normal(self):
        """nu = orientation * rot90(T)."""
        return self.orientation * _rot90(self.unit_tangent)

    @property
    def curvature(self):
        """Signed curvature w.r.t. the chosen normal (H = kappa)."""
        if "kappa" not in self._cache:
            if self.n_nodes < 3:
                raise ValueError("curvature needs at least 3 nodes")
            prev, nxt = self._neighbors()
            x = self.nodes
            ba = x - prev
            cb = nxt - x
            ca = nxt - prev
            denom = (
                np.hypot(ba[:, 0], ba[:, 1])
                * np.hypot(cb[:, 0], cb[:, 1])
                * np.hypot(ca[:, 0], ca[:, 1])
            )
            kappa = np.zeros(self.n_nodes)
            good = denom > 0
            kappa[good] = 2.0 * _cross2(ba, cb)[good] / denom[good]
            if not self.closed:
                kappa[0] = self._extrapolate_end(kappa[1:4])
                kappa[-1] = self._extrapolate_end(kappa[-2:-5:-1])
            self._cache["kappa"] = self.orientation * kappa
        return self._cache["kappa"]

    @staticmethod
    def _extrapolate_end(inner):
        if len(inner) >= 3:
            return 3.0 * inner[0] - 3.0 * inner[1] + inner[2]
        return inner[0]

    @property
    def mean_curvature(self):
        """Scalar mean curvature H (= kappa for plane curves)."""
        return self.curvature

    @property
    def winding_number(self):
        """Total turning / 2*pi for closed curves (an integer)."""
        if not self.closed:
            raise ValueError("winding number requires a closed curve")
        t = self.unit_tangent
        t_next = np.roll(t, -1, axis=0)
        turns = np.arctan2(_cross2(t, t_next), np.sum(t * t_next, axis=1))
        return turns.sum() / (2.0 * np.pi)

    # -- transforms ------------------------------------------------------

    def flipped(self):
        """Same point set with the opposite normal."""
        return DiscreteCurve(self.nodes, self.closed, -self.orientation)

    def reversed(self):
        """Reverse traversal direction; the normal is preserved."""
        return DiscreteCurve(self.nodes[::-1], self.closed, -self.orientation)

    def translated(self, vec):
        return DiscreteCurve(self.nodes + np.asarray(vec), self.closed, self.orientation)


def resample_arclength(curve, h):
    """Resample a curve at uniform arclength spacing close to ``h``.

    The node polyline is first interpolated by a parametric cubic spline
    (periodic for closed curves), so coarse irregular samplings of a smooth
    curve are resampled back onto the curve itself rather than onto its
    chords.  The achieved spacing is ``L / n`` with ``n = floor(L / h)``
    (clipped to keep at least 2 segments open / 3 closed), which lies in
    [h, 2h) whenever the curve is at least two target spacings long.  Open
    endpoints are preserved exactly.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if curve.n_nodes < 3:
        raise ValueError("resampling needs at least 3 nodes")
    dense = _dense_trace(curve, h)
    seg = np.hypot(*np.diff(dense, axis=0).T)
    s_dense = np.concatenate([[0.0], np.cumsum(seg)])
    total = s_dense[-1]
    n_min = 3 if curve.closed else 2
    n_seg = max(n_min, int(np.floor(total / h)))
    if curve.closed:
        s_new = np.arange(n_seg) * (total / n_seg)
    else:
        s_new = np.linspace(0.0, total, n_seg + 1)
    x = np.interp(s_new, s_dense, dense[:, 0])
    y = np.interp(s_new, s_dense, dense[:, 1])
    out = np.stack([x, y], axis=1)
    if not curve.closed:
        out[0] = curve.nodes[0]
        out[-1] = curve.nodes[-1]
    return DiscreteCurve(out, curve.closed, curve.orientation)


def _dense_trace(curve, h):
    """Spline-interpolated dense polyline used for arclength resampling."""
    from scipy.interpolate import CubicSpline

    pts = curve.nodes
    per_segment = 16
    if curve.closed:
        pts_ext = np.vstack([pts, pts[0]])
        t = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts_ext, axis=0).T))])
        try:
            spline = CubicSpline(t, pts_ext, axis=0, bc_type="periodic")
        except ValueError:
            spline = None
    else:
        pts_ext = pts
        t = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        spline = CubicSpline(t, pts, axis=0, bc_type="natural") if len(pts) >= 4 else None
    n_dense = max(int(per_segment * max(t[-1] / h, len(pts_ext))), 256)
    tt = np.linspace(t[0], t[-1], n_dense)
    if spline is None:
        x = np.interp(tt, t, pts_ext[:, 0])
        y = np.interp(tt, t, pts_ext[:, 1])
        return np.stack([x, y], axis=1)
    return spline(tt)


def curvature_data(curve):
    """Per-node (nu, kappa, H) with the sign convention H = kappa, Hvec = H nu."""
    if curve.n_nodes < 3:
        raise ValueError("curvature data needs at least 3 nodes")
    return curve.unit_normal, curve.curvature, curve.mean_curvature


# ---------------------------------------------------------------------------
# Planar cones


class PlanarCone:
    """Finite set of rays from the origin with an inside/outside labeling.

    ``ray_angles`` is strictly increasing in [0, 2pi).  Sector k is the open
    angular interval from ray k to ray k+1 (cyclically); ``inside[k]`` marks
    whether it belongs to the region W.  Labels must alternate so the cone
    is the common boundary of W and W'.
    """

    def __init__(self, ray_angles, inside):
        angles = np.asarray(ray_angles, dtype=float)
        if angles.ndim != 1 or angles.size < 2:
            raise ValueError("need at least 2 rays")
        if np.any(angles < 0) or np.any(angles >= 2 * np.pi):
            raise ValueError("ray angles must lie in [0, 2*pi)")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("ray angles must be strictly increasing")
        inside = [bool(b) for b in inside]
        if len(inside) != angles.size:
            raise ValueError("one label per sector required")
        for k in range(len(inside)):
            if inside[k] == inside[(k + 1) % len(inside)]:
                raise ValueError("sector labels must alternate")
        self.ray_angles = angles
        self.inside = inside

    @property
    def n_rays(self):
        return self.ray_angles.size

    @classmethod
    def cross(cls):
        """The cone {xy = 0} with W = the quadrant pair around the axes' diagonals."""
        return cls([0.0, np.pi / 2, np.pi, 3 * np.pi / 2], [True, False, True, False])

    @classmethod
    def line(cls, angle=0.0):
        """A straight line through the origin as a 2-ray cone."""
        a = float(angle) % np.pi
        return cls([a, a + np.pi], [True, False])

    @classmethod
    def wedge(cls, opening, bisector=0.0):
        """Two rays with W the sector of the given opening around ``bisector``."""
        if not 0 < opening < 2 * np.pi:
            raise ValueError("opening must lie in (0, 2*pi)")
        a = (bisector - opening / 2.0) % (2 * np.pi)
        b = (bisector + opening / 2.0) % (2 * np.pi)
        if a < b:
            return cls([a, b], [True, False])
        return cls([b, a], [False, True])

    def sectors(self):
        """List of (start_angle, end_angle, inside) with end > start (CCW spans)."""
        out = []
        m = self.n_rays
        for k in range(m):
            a = self.ray_angles[k]
            b = self.ray_angles[(k + 1) % m]
            if k == m - 1:
                b += 2 * np.pi
            out.append((a, b, self.inside[k]))
        return out

    def sector_of(self, angle):
        """Index of the sector containing ``angle``."""
        a = np.mod(angle, 2 * np.pi)
        idx = np.searchsorted(self.ray_angles, a, side="right") - 1
        return int(idx % self.n_rays)

    def contains(self, points):
        """Boolean mask: True where the point lies in (closed) W."""
        points = np.atleast_2d(points)
        ang = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
        idx = (np.searchsorted(self.ray_angles, ang, side="right") - 1) % self.n_rays
        return np.array([self.inside[i] for i in idx])

    def distance(self, points):
        """Unsigned distance from points to the union of rays."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        best = np.full(points.shape[0], np.inf)
        for a in self.ray_angles:
            d = np.array([np.cos(a), np.sin(a)])
            t = np.clip(points @ d, 0.0, None)
            foot = t[:, None] * d[None, :]
            best = np.minimum(best, np.hypot(*(points - foot).T))
        return best

    def signed_distance(self, points):
        """Distance to the cone, negative inside W."""
        d = self.distance(points)
        sign = np.where(self.contains(points), -1.0, 1.0)
        return sign * d

    def to_json_dict(self):
        return {"rays": [float(a) for a in self.ray_angles], "inside": list(self.inside)}

    @classmethod
    def from_json_dict(cls, data):
        return cls(data["rays"], data["inside"])


# ---------------------------------------------------------------------------
# Normal graphs


class GraphFunction:
    """Scalar field on a base curve's nodes, representing a normal graph."""

    def __init__(self, base, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (base.n_nodes,):
            raise ValueError("values must have one entry per base node")
        self.base = base
        self.values = values

    @classmethod
    def zero(cls, base):
        return cls(base, np.zeros(base.n_nodes))

    @classmethod
    def constant(cls, base, c):
        return cls(base, np.full(base.n_nodes, float(c)))

    def admissibility_margin(self):
        """max |u| |kappa| over nodes (must stay below eta < 1)."""
        return float(np.max(np.abs(self.values * self.base.curvature)))

    def require_admissible(self, eta=DEFAULT_ETA):
        prod = np.abs(self.values * self.base.curvature)
        worst = int(np.argmax(prod))
        if prod[worst] >= eta:
            raise AdmissibilityError(
                f"graph admissibility |u||A| = {prod[worst]:.3g} >= eta = {eta}", worst
            )

    def d1(self):
        """First arclength derivative (centered, one-sided closure)."""
        return _d1(self.values, self.base)

    def d2(self):
        """Second arclength derivative (3-point, nearest-interior closure)."""
        return _d2(self.values, self.base)

    def __mul__(self, scalar):
        return GraphFunction(self.base, self.values * scalar)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, GraphFunction):
            if other.base is not self.base:
                raise ValueError("graphs must share a base curve")
            return GraphFunction(self.base, self.values + other.values)
        return GraphFunction(self.base, self.values + other)


def _wrap_arrays(values, curve):
    """Values and arclength with one ghost node on each side (wrap/extend)."""
    s = curve.arclength
    if curve.closed:
        total = curve.length
        v = np.concatenate([[values[-1]], values, [values[0]]])
        ss = np.concatenate([[s[0] - curve._seg_len[-1]], s, [total]])
    else:
        # ghost spacing is arbitrary: end entries are overwritten by the
        # one-sided closures, but keep it nonzero to avoid 0/0 noise
        v = np.concatenate([[values[0]], values, [values[-1]]])
        ss = np.concatenate([[2 * s[0] - s[1]], s, [2 * s[-1] - s[-2]]])
    return v, ss


def _d1(values, curve):
    v, s = _wrap_arrays(values, curve)
    d1 = np.empty_like(values)
    ds = s[2:] - s[:-2]
    d1[:] = (v[2:] - v[:-2]) / ds
    if not curve.closed:
        s0 = curve.arclength
        d1[0] = _one_sided_d1(values[0], values[1], values[2], s0[1] - s0[0], s0[2] - s0[1])
        d1[-1] = -_one_sided_d1(
            values[-1], values[-2], values[-3], s0[-1] - s0[-2], s0[-2] - s0[-3]
        )
    return d1


def _one_sided_d1(v0, v1, v2, d1, d2):
    w0 = -(2.0 * d1 + d2) / (d1 * (d1 + d2))
    w1 = (d1 + d2) / (d1 * d2)
    w2 = -d1 / (d2 * (d1 + d2))
    return w0 * v0 + w1 * v1 + w2 * v2


def _d2(values, curve):
    v, s = _wrap_arrays(values, curve)
    da = s[1:-1] - s[:-2]
    db = s[2:] - s[1:-1]
    out = 2.0 * (
        v[:-2] / (da * (da + db)) - v[1:-1] / (da * db) + v[2:] / (db * (da + db))
    )
    if not curve.closed:
        out[0] = out[1]
        out[-1] = out[-2]
    return out


def graph_embed(u, eta=DEFAULT_ETA):
    """Embed the normal graph: node i maps to x_i + u_i nu(x_i)."""
    u.require_admissible(eta)
    nodes = u.base.nodes + u.values[:, None] * u.base.unit_normal
    return DiscreteCurve(nodes, u.base.closed, u.base.orientation)


def graph_speed_factor(u, eta=DEFAULT_ETA):
    """v = (1 + |(Id - u S)^{-1} grad u|^2)^(1/2); for curves S = kappa."""
    u.require_admissible(eta)
    denom = 1.0 - u.values * u.base.curvature
    if np.any(denom <= 0):
        raise AdmissibilityError("(Id - u S) singular", int(np.argmin(denom)))
    slope = u.d1() / denom
    return np.sqrt(1.0 + slope**2)


def graph_unit_normal(u, eta=DEFAULT_ETA):
    """Unit normal of the graph, oriented so nu_Gamma . nu_M > 0."""
    u.require_admissible(eta)
    denom = 1.0 - u.values * u.base.curvature
    if np.any(denom <= 0):
        raise AdmissibilityError("(Id - u S) singular", int(np.argmin(denom)))
    slope = u.d1() / denom
    v = np.sqrt(1.0 + slope**2)
    tangent = u.base.unit_tangent
    normal = u.base.unit_normal
    return (-slope[:, None] * tangent + normal) / v[:, None]


@dataclass
class LinearizedMeanCurvature:
    """Geometric vs. linearized mean curvature of a normal graph.

    ``lhs`` is v * H_Gamma evaluated on the embedded curve, ``rhs`` the
    linearization H + Lap u + |A|^2 u on the base; their difference is the
    quadratic remainder (O(|u|_C2^2) for smooth graphs).
    """

    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray


def linearized_mean_curvature(u, eta=DEFAULT_ETA):
    base = u.base
    gamma = graph_embed(u, eta)
    v = graph_speed_factor(u, eta)
    lhs = v * gamma.mean_curvature
    rhs = base.mean_curvature + u.d2() + base.curvature**2 * u.values
    return LinearizedMeanCurvature(lhs=lhs, rhs=rhs, residual=lhs - rhs)


def expander_residual(curve):
    """Pointwise N = H - (x . nu) / 2 (zero iff the curve is a self-expander)."""
    xs = np.sum(curve.nodes * curve.unit_normal, axis=1)
    return curve.mean_curvature - 0.5 * xs


@dataclass
class RescaledFlowResidual:
    """Exact geometric residual of the forward rescaled flow for a graph.

    ``values`` holds v (dx/dtau - Hvec + x/2) . nu_Gamma per node, computed
    geometrically on the embedded curve.  ``linear_model`` is the discrete
    du/dtau - L u with L = Lap + (x/2).grad - 1/2 + |A|^2, ``baseline`` the
    u = 0 residual (the base curve's expander defect), and ``defect`` the
    remainder values - linear_model - baseline, which scales quadratically
    in u.
    """

    values: np.ndarray
    linear_model: np.ndarray
    baseline: np.ndarray
    defect: np.ndarray = field(init=False)

    def __post_init__(self):
        self.defect = self.values - self.linear_model - self.baseline


def jacobi_operator_apply(base, values):
    """Discrete L u = u'' + (x.T/2) u' + (|A|^2 - 1/2) u on a curve's nodes."""
    u = GraphFunction(base, values)
    xt = 0.5 * np.sum(base.nodes * base.unit_tangent, axis=1)
    return u.d2() + xt * u.d1() + (base.curvature**2 - 0.5) * values


def rescaled_flow_residual(
    u,
    du_dtau=None,
    eta=DEFAULT_ETA,
    expander_tol=None,
    check_expander=True,
):
    """Residual of the forward rescaled flow for a stationary-or-moving graph.

    Requires the base curve to be a discrete self-expander (its defect sets
    ``baseline``).  For a stationary graph (du_dtau = 0) the sign of
    ``values`` certifies super/subsolutions of rescaled MCF.
    """
    base = u.base
    baseline = -expander_residual(base)
    if check_expander:
        h = base.spacing
        tol = expander_tol
        if tol is None:
            tol = 50.0 * h**2 * max(1.0, float(np.max(base.radii)))
        interior = np.abs(baseline[2:-2]) if not base.closed else np.abs(baseline)
        if interior.size and float(np.max(interior)) > tol:
            raise ValueError(
                f"base curve is not an expander within tolerance "
                f"(max |H - x.nu/2| = {float(np.max(interior)):.3g} > {tol:.3g})"
            )
    dudt = np.zeros(base.n_nodes) if du_dtau is None else np.asarray(du_dtau.values if isinstance(du_dtau, GraphFunction) else du_dtau, dtype=float)
    gamma = graph_embed(u, eta)
    v = graph_speed_factor(u, eta)
    nu_g = graph_unit_normal(u, eta)
    xg_dot_nu = np.sum(gamma.nodes * nu_g, axis=1)
    values = dudt - v * gamma.mean_curvature + 0.5 * v * xg_dot_nu
    linear = dudt - jacobi_operator_apply(base, u.values)
    return RescaledFlowResidual(values=values, linear_model=linear, baseline=baseline)


# ---------------------------------------------------------------------------
# Distances


def point_polyline_distance(points, polyline, closed=False, window=4):
    """Distance from each point to a polyline.

    Candidate segments come from a KD-tree query on the polyline nodes;
    the distance is then exact over the segments adjacent to the nearest
    node (the true nearest segment is within ``window`` nodes of it for
    non-degenerate polylines).
    """
    from scipy.spatial import cKDTree

    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(polyline, dtype=float)
    verts = np.vstack([p, p[0]]) if closed else p
    n_seg = verts.shape[0] - 1
    tree = cKDTree(p)
    _, idx = tree.query(points, k=1)
    offsets = np.arange(-window, window)
    cand = idx[:, None] + offsets[None, :]
    if closed:
        cand = np.mod(cand, n_seg)
    else:
        cand = np.clip(cand, 0, n_seg - 1)
    a = verts[cand]
    seg = verts[cand + 1] - a
    seg_len2 = np.sum(seg**2, axis=2)
    seg_len2 = np.where(seg_len2 == 0.0, 1.0, seg_len2)
    diff = points[:, None, :] - a
    t = np.clip(np.sum(diff * seg, axis=2) / seg_len2, 0.0, 1.0)
    foot = a + t[:, :, None] * seg
    d = np.hypot(points[:, None, 0] - foot[:, :, 0], points[:, None, 1] - foot[:, :, 1])
    return np.min(d, axis=1)


def _curves_as_list(curves):
    if isinstance(curves, DiscreteCurve):
        return [curves]
    return list(curves)


def directed_hausdorff(curves_a, curves_b, within_radius=None):
    """sup over sample nodes of A of the distance to the polyline set B.

    ``within_radius`` restricts the source nodes of A to a centered ball
    (the distance is still measured to all of B).
    """
    curves_a = _curves_as_list(curves_a)
    curves_b = _curves_as_list(curves_b)
    worst = 0.0
    for ca in curves_a:
        pts = ca.nodes
        if within_radius is not None:
            pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= within_radius]
        if pts.shape[0] == 0:
            continue
        d = np.full(pts.shape[0], np.inf)
        for cb in curves_b:
            d = np.minimum(d, point_polyline_distance(pts, cb.nodes, cb.closed))
        worst = max(worst, float(np.max(d)))
    return worst


def hausdorff_distance(curves_a, curves_b, within_radius=None):
    """Symmetric Hausdorff distance between two families of polylines."""
    return max(
        directed_hausdorff(curves_a, curves_b, within_radius),
        directed_hausdorff(curves_b, curves_a, within_radius),
    )


# ---------------------------------------------------------------------------
# Curve CSV I/O


def write_curve_csv(curve, path):
    """Write `# closed=<0|1> orientation=<+1|-1>` header plus x,y rows."""
    orient = "+1" if curve.orientation > 0 else "-1"
    with open(path, "w") as fh:
        fh.write(f"# closed={int(curve.closed)} orientation={orient}\n")
        for x, y in curve.nodes:
            fh.write(f"{x:.17g},{y:.17g}\n")


def read_curve_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing curve header row")
        fields = dict(tok.split("=") for tok in header[1:].split())
        rows = [line.strip() for line in fh if line.strip()]
    nodes = np.array([[float(v) for v in row.split(",")] for row in rows])
    return DiscreteCurve(nodes, closed=bool(int(fields["closed"])), orientation=int(fields["orientation"]))
