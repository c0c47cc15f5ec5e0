"""Normal-graph projections between nearby curves.

Two directions are needed: heights of a target curve over a base curve's
normal lines (turning a nearby curve into a GraphFunction), and graph
coordinates (foot arclength, height) of scattered points over a base
curve.  Both use KD-tree windowed searches on the polylines.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


def normal_graph_heights(base, target, window=12, max_height=None):
    """Signed height of ``target`` over each node of ``base``.

    For base node x with unit normal nu, solves x + t * nu on the target
    polyline near the closest target node; returns t per base node (NaN
    where the normal line misses the searched window).  Heights beyond
    ``max_height`` are rejected as non-graphical.
    """
    pts = base.nodes
    nus = base.unit_normal
    tgt = target.nodes
    tree = cKDTree(tgt)
    _, idx = tree.query(pts, k=1)

    n_seg = tgt.shape[0] - 1
    offsets = np.arange(-window, window)
    cand = np.clip(idx[:, None] + offsets[None, :], 0, n_seg - 1)
    a = tgt[cand]
    b = tgt[cand + 1]
    seg = b - a

    # solve p + t nu = a + u seg  per candidate segment
    det = nus[:, None, 0] * (-seg[:, :, 1]) - nus[:, None, 1] * (-seg[:, :, 0])
    rhs = a - pts[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rhs[:, :, 0] * (-seg[:, :, 1]) - rhs[:, :, 1] * (-seg[:, :, 0])) / det
        u = (nus[:, None, 0] * rhs[:, :, 1] - nus[:, None, 1] * rhs[:, :, 0]) / det
    valid = (np.abs(det) > 1e-14) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
    if max_height is not None:
        valid &= np.abs(t) <= max_height
    t = np.where(valid, t, np.nan)
    # nearest intersection along the normal line
    out = np.full(pts.shape[0], np.nan)
    rows = np.any(valid, axis=1)
    if not rows.any():
        return out
    pick = np.nanargmin(np.where(valid, np.abs(t), np.inf), axis=1)
    sel = np.arange(pts.shape[0])
    out[rows] = t[sel, pick][rows]
    # quadratic refinement: the chord heights carry an O(h^2 kappa) sag that
    # oscillates node to node; re-intersecting a local parabola through the
    # target nodes removes it (second differences of heights stay clean)
    seg_idx = cand[sel, pick]
    u_pick = u[sel, pick]
    refinable = rows & (seg_idx >= 1) & (seg_idx + 1 <= n_seg - 1)
    if refinable.any():
        j = seg_idx[refinable]
        p = pts[refinable]
        nu = nus[refinable]
        pm, p0, p1 = tgt[j - 1], tgt[j], tgt[j + 1]
        d0 = np.hypot(*(p0 - pm).T)[:, None]
        d1 = np.hypot(*(p1 - p0).T)[:, None]
        denom = d0 * d1 * (d0 + d1)
        qa = (d0 * (p1 - p0) - d1 * (p0 - pm)) / denom
        qb = (d0**2 * (p1 - p0) + d1**2 * (p0 - pm)) / denom
        # solve cross(nu, Q(tau) - p) = 0 for tau near the chord solution
        def _cross(a, b):
            return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

        ca = _cross(nu, qa)
        cb = _cross(nu, qb)
        cc = _cross(nu, p0 - p)
        tau_lin = u_pick[refinable] * d1[:, 0]
        disc = cb**2 - 4.0 * ca * cc
        ok = disc >= 0.0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        # stable quadratic roots: q = -(b + sign(b) sqrt(disc)) / 2
        qq = -0.5 * (cb + np.copysign(sq, cb))
        with np.errstate(divide="ignore", invalid="ignore"):
            r_big = np.where(np.abs(ca) > 0.0, qq / ca, np.inf)
            r_small = np.where(np.abs(qq) > 0.0, cc / qq, tau_lin)
        tau_q = np.where(np.abs(r_big - tau_lin) < np.abs(r_small - tau_lin), r_big, r_small)
        tau = np.where(ok, tau_q, tau_lin)
        # keep the refinement only when it stays within the local stencil
        in_range = (tau >= -1.05 * d0[:, 0]) & (tau <= 1.05 * d1[:, 0])
        tau = np.where(in_range, tau, tau_lin)
        q = qa * tau[:, None] ** 2 + qb * tau[:, None] + p0
        out[refinable] = np.sum((q - p) * nu, axis=1)
    return out


def project_to_graph(base, points, window=12):
    """Graph coordinates of points over a base curve.

    Returns (heights, arclengths): for each point p the signed normal
    height and the foot arclength s with (p - x(s)) . T(s) = 0, resolved
    to second order along the polyline.  NaN for points whose foot falls
    outside the searched window.
    """
    points = np.atleast_2d(points)
    tree = cKDTree(base.nodes)
    _, idx = tree.query(points, k=1)
    tang = base.unit_tangent
    nus = base.unit_normal
    s = base.arclength
    n = base.n_nodes

    offsets = np.arange(-window, window + 1)
    cand = np.clip(idx[:, None] + offsets[None, :], 0, n - 1)
    diff = points[:, None, :] - base.nodes[cand]
    e = np.sum(diff * tang[cand], axis=2)  # tangential misfit per candidate

    heights = np.full(points.shape[0], np.nan)
    feet = np.full(points.shape[0], np.nan)
    for i in range(points.shape[0]):
        ci = cand[i]
        ei = e[i]
        sign_change = np.nonzero(ei[:-1] * ei[1:] <= 0.0)[0]
        sign_change = sign_change[ci[sign_change + 1] > ci[sign_change]]
        if sign_change.size == 0:
            continue
        # pick the crossing nearest the query node
        j = sign_change[np.argmin(np.abs(offsets[sign_change]))]
        j0, j1 = ci[j], ci[j + 1]
        w = ei[j] / (ei[j] - ei[j + 1]) if ei[j] != ei[j + 1] else 0.0
        foot = (1 - w) * base.nodes[j0] + w * base.nodes[j1]
        nu = (1 - w) * nus[j0] + w * nus[j1]
        nu /= np.hypot(nu[0], nu[1])
        heights[i] = (points[i] - foot) @ nu
        feet[i] = (1 - w) * s[j0] + w * s[j1]
    return heights, feet
