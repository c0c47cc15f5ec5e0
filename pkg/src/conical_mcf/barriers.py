"""Welded barrier constructions over self-expanders and their audits.

The static barrier over an expander component Sigma combines the
linearly-growing positive Jacobi field v with the first Dirichlet
eigenfunction phi on Sigma_3R:

    f = v + alpha phi,   h = max f over the Sigma_R crossing,
    u = f on Sigma_R,  min(f, h) on the annulus,  h outside B_2R,

and Gamma_s = graph of s u.  Supersolution quality is certified pointwise
by the exact geometric residual of the rescaled flow (geometry module), on
each smooth branch separately: the min-weld of two supersolutions is a
supersolution, so a branch-wise pass certifies the welded barrier.

Uniqueness barriers weld graphs of u(.,t) +- s f over Sigma_2R (rescaled
by sqrt(t)) to +- s h sqrt(t) normal offsets of a reference flow outside
B_{R sqrt(t)}; crossing margins are checked per time slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DiscreteCurve, GraphFunction, graph_embed, rescaled_flow_residual
from .graphs import normal_graph_heights, project_to_graph

DELTA1_DEFAULT = 0.1

REGION_F = 0
REGION_ANNULUS = 1
REGION_H = 2


class BarrierError(ValueError):
    """Barrier construction precondition or crossing failure."""


def _boundary_values(curve, values, radius):
    """Values interpolated at the crossings of |x| = radius along the curve."""
    r = curve.radii
    sign = r - radius
    out = []
    for i in np.nonzero(sign[:-1] * sign[1:] <= 0.0)[0]:
        if sign[i] == sign[i + 1]:
            continue
        w = sign[i] / (sign[i] - sign[i + 1])
        out.append((1.0 - w) * values[i] + w * values[i + 1])
    if not out:
        raise BarrierError(f"curve does not cross radius {radius}")
    return np.array(out)


@dataclass
class CrossingCertificate:
    """Margins of the weld-crossing lemma: h - f on the inner boundary and
    f - h on the outer one (both must be >= 0)."""

    radius_inner: float
    radius_outer: float
    margin_inner: float
    margin_outer: float
    h_const: float

    @property
    def passed(self):
        return self.margin_inner >= -1e-12 and self.margin_outer >= 0.0


@dataclass
class StaticBarrier:
    sigma: object  # ExpanderCurve
    R: float
    alpha: float
    s: float
    f: GraphFunction  # v + alpha phi_{3R} (valid on Sigma_{3R})
    h_const: float
    u: GraphFunction  # welded profile on the whole curve
    region: np.ndarray
    crossing: CrossingCertificate
    gamma_s: DiscreteCurve = field(init=False)

    def __post_init__(self):
        self.gamma_s = graph_embed(self.s * self.u)


def build_static_barrier(sigma, jacobi, eig3, R, alpha, s, eta=0.5):
    """Assemble the welded barrier Gamma_s = graph(s u) over one expander.

    Preconditions mirror the construction: mu_{3R} > 0, v > 0, the crossing
    margins of (f, h) at radii R and 2R nonnegative, and s u graphically
    admissible.  Raises BarrierError with advice when the crossing fails.
    """
    curve = jacobi.v.base
    if eig3.phi.base is not curve:
        raise BarrierError("eigenpair and Jacobi field must live on the same expander mesh")
    if abs(eig3.radius - 3.0 * R) > 1e-9:
        raise BarrierError(f"eigenpair radius {eig3.radius} is not 3R = {3.0 * R}")
    if eig3.mu <= 0.0:
        raise BarrierError("mu_{3R} must be positive (stable expander required)")
    if not jacobi.positive:
        raise BarrierError("Jacobi field is not positive on this expander")
    if alpha <= 0.0 or s <= 0.0:
        raise BarrierError("alpha and s must be positive")

    f_vals = jacobi.v.values + alpha * eig3.phi.values
    f = GraphFunction(curve, f_vals)
    h_const = float(np.max(_boundary_values(curve, f_vals, R)))
    margin_inner = h_const - float(np.max(_boundary_values(curve, f_vals, R)))
    margin_outer = float(np.min(_boundary_values(curve, f_vals, 2.0 * R))) - h_const
    cert = CrossingCertificate(
        radius_inner=R,
        radius_outer=2.0 * R,
        margin_inner=margin_inner,
        margin_outer=margin_outer,
        h_const=h_const,
    )
    if not cert.passed:
        raise BarrierError(
            f"crossing certificate failed (outer margin {margin_outer:.3g} < 0); "
            "increase R or decrease alpha"
        )

    r = curve.radii
    region = np.where(r <= R, REGION_F, np.where(r <= 2.0 * R, REGION_ANNULUS, REGION_H))
    u_vals = np.where(
        region == REGION_F,
        f_vals,
        np.where(region == REGION_ANNULUS, np.minimum(f_vals, h_const), h_const),
    )
    u = GraphFunction(curve, u_vals)
    su = GraphFunction(curve, s * u_vals)
    su.require_admissible(eta)  # rejects s beyond the graphicality bound
    return StaticBarrier(
        sigma=sigma, R=R, alpha=alpha, s=s, f=f, h_const=h_const, u=u,
        region=region, crossing=cert,
    )


def check_crossing(barrier):
    return barrier.crossing


def alpha_search(jacobi, eig3, R, iters=60):
    """Largest alpha with nonnegative crossing margins at radii (R, 2R).

    Constructive version of the existential alpha_0(R, Sigma): the outer
    margin is decreasing in alpha, so an expanding bracket plus a fixed
    bisection finds the threshold; callers typically use alpha_0 / 2.
    """
    curve = jacobi.v.base

    def outer_margin(alpha):
        f_vals = jacobi.v.values + alpha * eig3.phi.values
        h_const = np.max(_boundary_values(curve, f_vals, R))
        return float(np.min(_boundary_values(curve, f_vals, 2.0 * R))) - h_const

    if outer_margin(0.0) <= 0.0:
        raise BarrierError(
            "crossing fails already at alpha = 0: the Jacobi field does not "
            "grow enough between R and 2R; increase R"
        )
    hi = 1.0
    for _ in range(60):
        if outer_margin(hi) < 0.0:
            break
        hi *= 2.0
    else:
        return hi
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if outer_margin(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class RegionAudit:
    name: str
    node_indices: np.ndarray
    residuals: np.ndarray
    min_residual: float
    failing: np.ndarray

    @property
    def passed(self):
        return self.failing.size == 0


@dataclass
class SupersolutionReport:
    """Branch-wise pointwise audit of the rescaled-flow supersolution
    inequality for a static barrier."""

    barrier: StaticBarrier
    f_branch: RegionAudit
    h_branch: RegionAudit
    annulus_f: RegionAudit
    annulus_h: RegionAudit
    curvature_ok: bool  # |A|^2 < 1/4 on the h-region
    curvature_failing: np.ndarray
    model_f_min_over_s: float  # alpha mu_{3R} min phi over the f-branch region

    @property
    def passed(self):
        return (
            self.f_branch.passed
            and self.h_branch.passed
            and self.annulus_f.passed
            and self.annulus_h.passed
            and self.curvature_ok
        )

    def min_residual_over_s(self, region="f"):
        audit = {"f": self.f_branch, "h": self.h_branch}[region]
        return audit.min_residual / self.barrier.s


def _audit(name, indices, residual_values):
    vals = residual_values[indices]
    failing = indices[vals <= 0.0]
    return RegionAudit(
        name=name,
        node_indices=indices,
        residuals=vals,
        min_residual=float(np.min(vals)) if vals.size else np.nan,
        failing=failing,
    )


def check_supersolution(barrier, eig3=None, expander_tol=None):
    """Pointwise supersolution audit of the static barrier, branch-wise.

    The f-branch (graph of s f) is audited on Sigma_2R, the h-branch
    (constant graph s h) on E_R out to the end of the mesh; the annulus
    reports both, because the min-weld requires each smooth piece to be a
    supersolution there.  The audit evaluates the exact geometric residual
    of the rescaled flow; positivity at every node is the pass criterion.
    """
    curve = barrier.u.base
    r = curve.radii
    n = curve.n_nodes
    edge = np.zeros(n, dtype=bool)
    edge[:3] = edge[-3:] = True

    if expander_tol is None:
        expander_tol = 50.0 * curve.spacing**2 * max(1.0, float(np.max(r)))

    s = barrier.s
    rep_f = rescaled_flow_residual(s * barrier.f, expander_tol=expander_tol)
    rep_h = rescaled_flow_residual(
        GraphFunction.constant(curve, s * barrier.h_const), expander_tol=expander_tol
    )

    idx_f = np.nonzero((barrier.region == REGION_F) & ~edge)[0]
    idx_ann = np.nonzero((barrier.region == REGION_ANNULUS) & ~edge)[0]
    idx_h = np.nonzero((barrier.region == REGION_H) & ~edge)[0]

    f_branch = _audit("f on Sigma_R", idx_f, rep_f.values)
    annulus_f = _audit("f on annulus", idx_ann, rep_f.values)
    annulus_h = _audit("h on annulus", idx_ann, rep_h.values)
    h_branch = _audit("h on E_2R", idx_h, rep_h.values)

    a2 = curve.curvature**2
    idx_hreg = np.concatenate([idx_ann, idx_h])
    curv_fail = idx_hreg[a2[idx_hreg] >= 0.25]

    if eig3 is not None:
        phi = eig3.phi.values
        mask = np.concatenate([idx_f, idx_ann])
        model = barrier.alpha * eig3.mu * float(np.min(phi[mask][phi[mask] > 0]))
    else:
        model = np.nan

    return SupersolutionReport(
        barrier=barrier,
        f_branch=f_branch,
        h_branch=h_branch,
        annulus_f=annulus_f,
        annulus_h=annulus_h,
        curvature_ok=curv_fail.size == 0,
        curvature_failing=curv_fail,
        model_f_min_over_s=model,
    )


def s_search(sigma, jacobi, eig3, R, alpha, s_max=0.1, eta=0.5):
    """Largest dyadic s <= s_max whose barrier passes the supersolution audit."""
    s = s_max
    for _ in range(30):
        try:
            b = build_static_barrier(sigma, jacobi, eig3, R, alpha, s, eta=eta)
            if check_supersolution(b, eig3).passed:
                return s
        except (BarrierError, ValueError):
            pass
        s /= 2.0
    raise BarrierError("no dyadic s <= s_max passes the supersolution audit")


# ---------------------------------------------------------------------------
# Uniqueness barriers over a reference flow


class GraphicalityError(ValueError):
    """Rescaled flow slice is not a small graph over Sigma_{3R}."""

    def __init__(self, t, detail):
        super().__init__(f"graphicality window violated at t = {t:.6g}: {detail}")
        self.t = t


@dataclass
class TimeSliceBarrier:
    t: float
    u: np.ndarray  # rescaled graph of the reference flow over Sigma nodes
    close_plus: DiscreteCurve
    close_minus: DiscreteCurve
    far_plus: list
    far_minus: list
    far_heights: np.ndarray  # rescaled far+ height over Sigma (on Sigma_{3R})
    margins: dict

    @property
    def crossing_passed(self):
        tol = self.margins["tolerance"]
        return all(self.margins[k] >= -tol for k in ("i", "ii", "iii", "iv"))


@dataclass
class UniquenessBarrierPair:
    sigma: object
    R: float
    alpha: float
    s: float
    delta: float
    h_const: float
    f: GraphFunction
    slices: list  # TimeSliceBarrier per sampled time

    @property
    def crossing_passed(self):
        return all(sl.crossing_passed for sl in self.slices)


def _mesh_c3_norm(curve, values, mask):
    g = GraphFunction(curve, values)
    d1 = g.d1()
    d2 = g.d2()
    d3 = GraphFunction(curve, d2).d1()
    return max(
        float(np.max(np.abs(values[mask]))),
        float(np.max(np.abs(d1[mask]))),
        float(np.max(np.abs(d2[mask]))),
        float(np.max(np.abs(d3[mask]))),
    )


def _align_orientation(front, sigma_curve, scale):
    """Flip the front's orientation if its normal opposes nu_Sigma."""
    heights = normal_graph_heights(sigma_curve, front)
    good = np.isfinite(heights)
    if not good.any():
        return front
    idx = np.nonzero(good)[0][np.argsort(np.abs(heights[good]))[:50] if good.sum() > 50 else slice(None)]
    pts = sigma_curve.nodes[good][:1]
    from scipy.spatial import cKDTree

    tree = cKDTree(front.nodes)
    _, near = tree.query(sigma_curve.nodes[good], k=1)
    dots = np.sum(front.unit_normal[near] * sigma_curve.unit_normal[good], axis=1)
    if np.median(dots) < 0:
        return front.reversed()
    return front


def build_uniqueness_barriers(
    flow_slices, sigma, jacobi, eig3, R, alpha, s, delta,
    delta1=DELTA1_DEFAULT, band_fraction=0.15,
):
    """Close/far barrier pair over a time-sampled reference flow.

    ``flow_slices`` is a list of (t, curves) with the reference fronts
    M^1(t).  Each rescaled slice t^{-1/2} M^1(t) must be a graph over
    Sigma_{3R} with mesh C^3 norm <= delta / 2 (else GraphicalityError
    naming t).  Close pieces are graphs of (u +- s f) over Sigma_{2R}
    rescaled by sqrt(t); far pieces are exact +- s h sqrt(t) normal offsets
    of the reference fronts outside B_{R sqrt(t)}.  Crossing margins of the
    four-case weld lemma are certified per slice in bands near radii R and
    2R.
    """
    if delta >= delta1:
        raise BarrierError(f"delta = {delta} exceeds the graphicality threshold {delta1}")
    curve = jacobi.v.base
    static = build_static_barrier(sigma, jacobi, eig3, R, alpha, s)
    f_vals = static.f.values
    h_const = static.h_const
    r = curve.radii
    mask3 = r <= 3.0 * R
    mask2 = r <= 2.0 * R

    slices = []
    for t, fronts in flow_slices:
        scale = np.sqrt(t)
        rescaled = [
            DiscreteCurve(fr.nodes / scale, fr.closed, fr.orientation) for fr in fronts
        ]
        rescaled = [_align_orientation(fr, curve, scale) for fr in rescaled]
        heights = np.full(curve.n_nodes, np.nan)
        for fr in rescaled:
            hh = normal_graph_heights(curve, fr, max_height=1.0)
            take = np.isfinite(hh) & (
                ~np.isfinite(heights) | (np.abs(hh) < np.abs(heights))
            )
            heights[take] = hh[take]
        if not np.all(np.isfinite(heights[mask3])):
            raise GraphicalityError(t, "rescaled front is not a graph over Sigma_3R")
        norm = _mesh_c3_norm(curve, np.where(mask3, heights, 0.0), mask3)
        if norm > 0.5 * delta:
            raise GraphicalityError(
                t, f"C3 norm {norm:.4g} exceeds delta/2 = {0.5 * delta:.4g}"
            )
        u_t = np.where(mask3, heights, 0.0)

        # close pieces: sqrt(t) * graphs of u +- s f over Sigma_2R
        idx2 = np.nonzero(mask2)[0]
        sl2 = slice(idx2[0], idx2[-1] + 1)
        close = {}
        for sign in (+1.0, -1.0):
            vals = u_t + sign * s * f_vals
            nodes = curve.nodes[sl2] + vals[sl2, None] * curve.unit_normal[sl2]
            close[sign] = DiscreteCurve(scale * nodes, closed=False, orientation=curve.orientation)

        # far pieces: +- s h sqrt(t) normal offsets of the physical fronts
        far = {+1.0: [], -1.0: []}
        offset = s * h_const * scale
        for fr, fr_phys in zip(rescaled, fronts):
            keep = np.hypot(*fr_phys.nodes.T) >= R * scale
            fr_aligned = fr  # orientation already aligned; reuse normals
            nodes_phys = fr_aligned.nodes * scale
            nus = fr_aligned.unit_normal
            for sign in (+1.0, -1.0):
                nodes = nodes_phys + sign * offset * nus
                runs = _contiguous_runs(keep)
                for a, b in runs:
                    if b - a >= 3:
                        far[sign].append(
                            DiscreteCurve(nodes[a:b], closed=False, orientation=fr_aligned.orientation)
                        )

        far_h = np.full(curve.n_nodes, np.nan)
        for piece in far[+1.0]:
            resc = DiscreteCurve(piece.nodes / scale, piece.closed, piece.orientation)
            hh = normal_graph_heights(curve, resc, max_height=1.0)
            take = np.isfinite(hh) & (~np.isfinite(far_h) | (np.abs(hh) < np.abs(far_h)))
            far_h[take] = hh[take]

        margins = _crossing_margins(
            curve, u_t, f_vals, far_h, s, h_const, R, band_fraction, delta
        )
        slices.append(
            TimeSliceBarrier(
                t=t, u=u_t, close_plus=close[+1.0], close_minus=close[-1.0],
                far_plus=far[+1.0], far_minus=far[-1.0], far_heights=far_h,
                margins=margins,
            )
        )
    return UniquenessBarrierPair(
        sigma=sigma, R=R, alpha=alpha, s=s, delta=delta,
        h_const=h_const, f=static.f, slices=slices,
    )


def _contiguous_runs(mask):
    runs = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def _crossing_margins(curve, u_t, f_vals, far_plus_h, s, h_const, R, band_fraction, delta):
    """Four-case weld margins in rescaled height coordinates over Sigma.

    Near the close boundary (|x| ~ 2R): close+ above far+; near the far
    boundary (|x| ~ R): far+ above close+ (mirrored for the minus pieces).
    By symmetry of the construction the minus margins equal the plus ones
    up to O(s delta) wobble; all four are certified against a weld
    tolerance of that size.
    """
    r = curve.radii
    band = band_fraction * R
    outer = (r >= 2.0 * R - band) & (r <= 2.0 * R)
    inner = (r >= R) & (r <= R + band)
    ok = np.isfinite(far_plus_h)
    tol = 2.0 * s * h_const * delta + 1e-10

    close_p = u_t + s * f_vals
    close_m = u_t - s * f_vals
    far_p = far_plus_h
    far_m = 2.0 * u_t - far_plus_h  # symmetric offset below the flow

    m_i = float(np.min((close_p - far_p)[outer & ok])) if (outer & ok).any() else np.nan
    m_ii = float(np.min((far_p - close_p)[inner & ok])) if (inner & ok).any() else np.nan
    m_iii = float(np.min((far_m - close_m)[outer & ok])) if (outer & ok).any() else np.nan
    m_iv = float(np.min((close_m - far_m)[inner & ok])) if (inner & ok).any() else np.nan
    return {"i": m_i, "ii": m_ii, "iii": m_iii, "iv": m_iv, "tolerance": tol}


def check_flow_between_barriers(pair, other_slices):
    """Certify that another flow's fronts lie between Gamma^-_s and Gamma^+_s.

    In the close region the test is in graph heights over Sigma (with the
    min/max-weld applied on the annulus); beyond 2R it is the signed normal
    offset from the reference front against +- s h sqrt(t).
    """
    curve = pair.f.base
    r = curve.radii
    results = []
    by_time = {sl.t: sl for sl in pair.slices}
    for t, fronts in other_slices:
        sl = by_time[t]
        scale = np.sqrt(t)
        pts = np.vstack([fr.nodes for fr in fronts])
        rescaled_pts = pts / scale
        radii_pts = np.hypot(*rescaled_pts.T)

        upper = np.where(
            r <= 2.0 * pair.R,
            np.where(
                r <= pair.R,
                sl.u + pair.s * pair.f.values,
                np.fmin(sl.u + pair.s * pair.f.values, sl.far_heights),
            ),
            sl.far_heights,
        )
        lower = np.where(
            r <= 2.0 * pair.R,
            np.where(
                r <= pair.R,
                sl.u - pair.s * pair.f.values,
                np.fmax(sl.u - pair.s * pair.f.values, 2.0 * sl.u - sl.far_heights),
            ),
            2.0 * sl.u - sl.far_heights,
        )

        sel = radii_pts <= 2.0 * pair.R
        heights, feet = project_to_graph(curve, rescaled_pts[sel])
        good = np.isfinite(heights) & np.isfinite(feet)
        s_curve = curve.arclength
        viol_above = 0
        viol_below = 0
        margin = np.inf
        for hgt, ft in zip(heights[good], feet[good]):
            i = int(np.clip(np.searchsorted(s_curve, ft), 1, curve.n_nodes - 1))
            up = max(upper[i - 1], upper[i])
            lo = min(lower[i - 1], lower[i])
            if np.isfinite(up):
                margin = min(margin, up - hgt)
                if hgt > up:
                    viol_above += 1
            if np.isfinite(lo):
                margin = min(margin, hgt - lo)
                if hgt < lo:
                    viol_below += 1
        results.append(
            {
                "t": t,
                "checked": int(good.sum()),
                "violations_above": viol_above,
                "violations_below": viol_below,
                "min_margin": float(margin),
            }
        )
    return results


# ---------------------------------------------------------------------------
# Far-barrier pseudo-barrier audit


@dataclass
class FarBarrierReport:
    times: np.ndarray
    min_residuals: np.ndarray  # per time, over sampled far nodes
    excluded_counts: np.ndarray
    eta_measured: float
    c_empirical: float

    @property
    def passed(self):
        return bool(np.all(self.min_residuals > 0.0))

    def sign_flip_time(self):
        """First sampled time with a non-positive residual (None if none)."""
        bad = np.nonzero(self.min_residuals <= 0.0)[0]
        return float(self.times[bad[0]]) if bad.size else None


def check_far_barrier(flow_slices, s, eta, R=0.0, offset_scale=1.0):
    """Pointwise pseudo-barrier residual of +offset normal graphs.

    For each slice (t, fronts), offsets the fronts by c sqrt(t) with
    c = s * offset_scale and evaluates the exact residual

        H_M - v H_Gamma + c / (2 sqrt(t)) + c sqrt(t) (dnu/dt . nu_Gamma)

    geometrically (the time derivative of the offset profile is analytic,
    the normal-evolution term is |grad H| computed along the front).  Nodes
    inside B_{R sqrt(t)} are excluded per the localization rule.  The
    eta-window requires |A| |x| / max(R, 1) <= eta on sampled nodes.
    """
    times, mins, excluded = [], [], []
    c_emp = 0.0
    eta_seen = 0.0
    for t, fronts in flow_slices:
        scale = np.sqrt(t)
        c = s * offset_scale
        worst = np.inf
        n_excl = 0
        for fr in fronts:
            radii = np.hypot(*fr.nodes.T)
            keep = radii >= R * scale
            n_excl += int((~keep).sum())
            if keep.sum() < 5:
                continue
            h_m = fr.mean_curvature
            dh_ds = np.gradient(h_m, fr.arclength)
            window = np.abs(fr.curvature) * np.where(radii > 0, radii, 0.0) / max(R, 1.0)
            eta_seen = max(eta_seen, float(np.max(window[keep])))
            if np.any(window[keep] > eta):
                bad = np.nonzero(keep & (window > eta))[0][0]
                raise ValueError(
                    f"eta-window violated at t = {t:.4g} near {fr.nodes[bad]}"
                )
            gamma = DiscreteCurve(
                fr.nodes + c * scale * fr.unit_normal, fr.closed, fr.orientation
            )
            v = 1.0 / np.clip(np.sum(gamma.unit_normal * fr.unit_normal, axis=1), 1e-9, None)
            tdotn = np.sum(fr.unit_tangent * gamma.unit_normal, axis=1)
            residual = (
                h_m - v * gamma.mean_curvature + c / (2.0 * scale)
                - c * scale * dh_ds * tdotn
            )
            core = keep.copy()
            if not fr.closed:
                core[:3] = core[-3:] = False
            if core.any():
                worst = min(worst, float(np.min(residual[core])))
                flow_term = c / (2.0 * scale)
                defect = flow_term - residual[core]
                c_emp = max(c_emp, float(np.max(defect / (c * scale * max(eta, 1e-12)))))
        times.append(t)
        mins.append(worst)
        excluded.append(n_excl)
    return FarBarrierReport(
        times=np.array(times),
        min_residuals=np.array(mins),
        excluded_counts=np.array(excluded),
        eta_measured=eta_seen,
        c_empirical=c_emp,
    )
