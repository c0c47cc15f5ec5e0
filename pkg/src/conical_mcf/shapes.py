"""Initial shapes for level set runs, with exact-where-possible signed
distance functions.

Sign convention: negative inside the region V (the side labeled W for
conical shapes), positive in V'.  Offsetting by +eps moves the zero set
outward into V'.
"""

from __future__ import annotations

import numpy as np

from .geometry import DiscreteCurve, PlanarCone, point_polyline_distance


class Shape:
    singular = False
    max_radius = None  # None = unbounded

    def sdf(self, points):
        raise NotImplementedError

    def cone(self):
        """Tangent cone at the singular point (None for smooth shapes)."""
        return None

    def describe(self):
        return {"kind": type(self).__name__}


class CircleShape(Shape):
    def __init__(self, radius=1.0, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.max_radius = float(np.hypot(*self.center) + self.radius)

    def sdf(self, points):
        points = np.atleast_2d(points)
        return np.hypot(*(points - self.center).T) - self.radius

    def describe(self):
        return {"kind": "circle", "radius": self.radius, "center": self.center.tolist()}


class ConeShape(Shape):
    """A planar cone as initial data (includes lines and wedges)."""

    def __init__(self, cone):
        self.planar_cone = cone
        # a straight line (two collinear rays) is the only smooth cone
        angs = cone.ray_angles
        self.singular = not (
            cone.n_rays == 2 and abs(((angs[1] - angs[0]) % (2 * np.pi)) - np.pi) < 1e-12
        )

    def sdf(self, points):
        return self.planar_cone.signed_distance(points)

    def cone(self):
        return self.planar_cone

    def describe(self):
        return {"kind": "cone", **self.planar_cone.to_json_dict()}


class LemniscateShape(Shape):
    """Figure eight r^2 = a^2 cos 2(theta - rot): two lobes crossing at 0."""

    singular = True

    def __init__(self, scale=2.0, rotation=0.0, n_boundary=4000):
        self.scale = float(scale)
        self.rotation = float(rotation)
        self.max_radius = self.scale
        th = np.linspace(-np.pi / 4, np.pi / 4, n_boundary // 2)
        r = self.scale * np.sqrt(np.clip(np.cos(2.0 * th), 0.0, None))
        lobe = np.stack([r * np.cos(th + self.rotation), r * np.sin(th + self.rotation)], axis=1)
        self._boundary = [lobe, -lobe]

    def sdf(self, points):
        points = np.atleast_2d(points)
        d = np.minimum(
            point_polyline_distance(points, self._boundary[0]),
            point_polyline_distance(points, self._boundary[1]),
        )
        rel = points @ np.array(
            [[np.cos(self.rotation), -np.sin(self.rotation)],
             [np.sin(self.rotation), np.cos(self.rotation)]]
        )
        r2 = np.sum(rel**2, axis=1)
        cos2t = np.where(r2 > 0, (rel[:, 0] ** 2 - rel[:, 1] ** 2) / np.where(r2 > 0, r2, 1.0), 1.0)
        inside = r2 < self.scale**2 * cos2t
        return np.where(inside, -d, d)

    def cone(self):
        rays = np.sort(np.mod(self.rotation + np.array([1, 3, 5, 7]) * np.pi / 4, 2 * np.pi))
        # sectors through rotation and rotation + pi are the lobe directions
        labels = []
        for k in range(4):
            a = rays[k]
            b = rays[(k + 1) % 4] + (2 * np.pi if k == 3 else 0.0)
            mid = 0.5 * (a + b)
            ang = (mid - self.rotation) % np.pi
            labels.append(ang < np.pi / 4 or ang > 3 * np.pi / 4)
        return PlanarCone(rays, labels)

    def describe(self):
        return {"kind": "lemniscate", "scale": self.scale, "rotation": self.rotation}


class CornerShape(Shape):
    """Compact smooth curve with one corner: a wedge capped by a tangent arc.

    Two straight edges leave the origin at angles +-opening/2 around the
    +x axis and are joined by the circle tangent to both at distance
    cap_center along the bisector (C^1 junctions; the only singularity is
    the corner at the origin, modeled on the wedge cone).
    """

    singular = True

    def __init__(self, opening=2.0 * np.pi / 3.0, cap_center=1.2):
        if not 0 < opening < np.pi:
            raise ValueError("opening must lie in (0, pi) for a convex corner cap")
        self.opening = float(opening)
        self.cap_center = float(cap_center)
        half = 0.5 * self.opening
        self._half = half
        self._rho = self.cap_center * np.sin(half)
        self._tangent_dist = self.cap_center * np.cos(half)
        self._e1 = np.array([np.cos(half), np.sin(half)])
        self._e2 = np.array([np.cos(half), -np.sin(half)])
        self._center = np.array([self.cap_center, 0.0])
        self.max_radius = self.cap_center + self._rho

    def sdf(self, points):
        points = np.atleast_2d(points)
        d1 = _segment_distance(points, np.zeros(2), self._tangent_dist * self._e1)
        d2 = _segment_distance(points, np.zeros(2), self._tangent_dist * self._e2)
        rel = points - self._center
        rr = np.hypot(*rel.T)
        ang = np.arctan2(rel[:, 1], rel[:, 0])
        # tangent points sit at +-(pi/2 + half) around the cap center; the
        # boundary arc is the far side, |angle| <= pi/2 + half
        arc_ok = np.abs(ang) <= 0.5 * np.pi + self._half
        d_arc = np.where(arc_ok, np.abs(rr - self._rho), np.inf)
        d = np.minimum(np.minimum(d1, d2), d_arc)

        tp1 = self._tangent_dist * self._e1
        tp2 = self._tangent_dist * self._e2
        in_tri = _in_triangle(points, np.zeros(2), tp1, tp2)
        in_disc = rr <= self._rho
        return np.where(in_tri | in_disc, -d, d)

    def cone(self):
        return PlanarCone.wedge(self.opening)

    def describe(self):
        return {"kind": "corner", "opening": self.opening, "cap_center": self.cap_center}


class CurveShape(Shape):
    """Imported closed curve (sign by winding parity)."""

    def __init__(self, curve, singular=False):
        if not curve.closed:
            raise ValueError("imported shapes must be closed curves")
        self.curve = curve
        self.singular = bool(singular)
        self.max_radius = float(np.max(curve.radii))

    def sdf(self, points):
        points = np.atleast_2d(points)
        d = point_polyline_distance(points, self.curve.nodes, closed=True)
        inside = _winding_parity(points, self.curve.nodes)
        return np.where(inside, -d, d)

    def describe(self):
        return {"kind": "curve", "n_nodes": self.curve.n_nodes}


def _segment_distance(points, a, b):
    seg = b - a
    ll = float(seg @ seg)
    t = np.clip((points - a) @ seg / ll, 0.0, 1.0)
    foot = a + t[:, None] * seg
    return np.hypot(*(points - foot).T)


def _in_triangle(points, a, b, c):
    def side(p, u, v):
        return (v[0] - u[0]) * (p[:, 1] - u[1]) - (v[1] - u[1]) * (p[:, 0] - u[0])

    s1 = side(points, a, b)
    s2 = side(points, b, c)
    s3 = side(points, c, a)
    neg = (s1 < 0) | (s2 < 0) | (s3 < 0)
    pos = (s1 > 0) | (s2 > 0) | (s3 > 0)
    return ~(neg & pos)


def _winding_parity(points, polygon):
    """Even-odd inside test by horizontal ray casting (vectorized)."""
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(points.shape[0], dtype=bool)
    px, py = polygon[:, 0], polygon[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    for k in range(polygon.shape[0]):
        cond = (py[k] > y) != (qy[k] > y)
        if not np.any(cond):
            continue
        t = (y - py[k]) / (qy[k] - py[k])
        xin = px[k] + t * (qx[k] - px[k])
        inside ^= cond & (x < xin)
    return inside


def shape_from_config(spec):
    """Build a shape from its JSON description."""
    kind = spec["kind"]
    if kind == "circle":
        return CircleShape(spec.get("radius", 1.0), spec.get("center", (0.0, 0.0)))
    if kind == "cone":
        return ConeShape(PlanarCone(spec["rays"], spec["inside"]))
    if kind == "line":
        return ConeShape(PlanarCone.line(spec.get("angle", 0.0)))
    if kind == "cross":
        return ConeShape(PlanarCone.cross())
    if kind == "wedge":
        return ConeShape(PlanarCone.wedge(spec["opening"], spec.get("bisector", 0.0)))
    if kind == "lemniscate":
        return LemniscateShape(spec.get("scale", 2.0), spec.get("rotation", 0.0))
    if kind == "corner":
        return CornerShape(spec.get("opening", 2 * np.pi / 3), spec.get("cap_center", 1.2))
    if kind == "csv":
        from .geometry import read_curve_csv

        return CurveShape(read_curve_csv(spec["path"]), spec.get("singular", False))
    raise ValueError(f"unknown shape kind {kind!r}")
