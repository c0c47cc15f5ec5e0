import numpy as np
import pytest

from conical_mcf.geometry import (
    AdmissibilityError,
    DegenerateCurveError,
    DiscreteCurve,
    GraphFunction,
    PlanarCone,
    curvature_data,
    directed_hausdorff,
    expander_residual,
    graph_embed,
    graph_speed_factor,
    graph_unit_normal,
    hausdorff_distance,
    jacobi_operator_apply,
    linearized_mean_curvature,
    point_polyline_distance,
    read_curve_csv,
    resample_arclength,
    rescaled_flow_residual,
    write_curve_csv,
)


def circle(n=400, r=1.0, orientation=1):
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    nodes = r * np.stack([np.cos(t), np.sin(t)], axis=1)
    # ccw traversal: orientation +1 puts nu inward, -1 outward
    return DiscreteCurve(nodes, closed=True, orientation=orientation)


def line_curve(n=401, length=10.0):
    x = np.linspace(-length / 2, length / 2, n)
    return DiscreteCurve(np.stack([x, np.zeros_like(x)], axis=1))


# ---------------------------------------------------------------------------
# resample_arclength


def test_resample_irregular_circle_matches_exact_circle():
    rng = np.random.RandomState(3)
    t = np.linspace(0.0, 2.0 * np.pi, 17, endpoint=False)
    t += rng.uniform(-0.3, 0.3, 17) * (2.0 * np.pi / 17)
    t.sort()
    nodes = np.stack([np.cos(t), np.sin(t)], axis=1)
    coarse = DiscreteCurve(nodes, closed=True)
    fine = resample_arclength(coarse, 0.1)
    assert 55 <= fine.n_nodes <= 70
    seg = fine.segment_lengths
    assert seg.min() >= 0.1 * 0.95  # spacing within [h, 2h) up to arclength quantization
    assert seg.max() <= 0.2
    assert seg.max() - seg.min() <= 1e-3 * seg.mean()
    # oracle: exact unit circle
    radial_err = np.abs(np.hypot(*fine.nodes.T) - 1.0)
    assert radial_err.max() <= 1e-2


def test_resample_straight_segment_stays_on_segment():
    seg = DiscreteCurve([[0.0, 0.0], [0.4, 0.0], [1.0, 0.0]])
    out = resample_arclength(seg, 0.25)
    assert np.allclose(out.nodes[:, 1], 0.0, atol=1e-12)
    assert np.allclose(out.nodes[0], [0.0, 0.0])
    assert np.allclose(out.nodes[-1], [1.0, 0.0])
    assert np.all(np.diff(out.nodes[:, 0]) > 0)


def test_resample_rejects_coincident_nodes():
    with pytest.raises(DegenerateCurveError):
        DiscreteCurve([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])


# ---------------------------------------------------------------------------
# curvature_data


def test_circle_curvature_outward_normal():
    c = circle(n=400, r=2.0, orientation=-1)  # outward nu
    nu, kappa, H = curvature_data(c)
    # oracle: kappa = -1/r for outward normal
    assert np.allclose(kappa, -0.5, atol=1e-4)
    assert np.allclose(H, kappa)
    radial = c.nodes / 2.0
    assert np.allclose(nu, radial, atol=1e-4)


def test_line_curvature_zero():
    nu, kappa, H = curvature_data(line_curve())
    assert np.allclose(kappa, 0.0, atol=1e-12)


def test_parabola_curvature_at_origin():
    # oracle: y = x^2/2 has kappa = 1 at 0 w.r.t. the upward normal
    for n in (201, 401):
        x = np.linspace(-1.0, 1.0, n)
        c = DiscreteCurve(np.stack([x, x**2 / 2.0], axis=1), orientation=1)
        i0 = n // 2
        assert abs(c.curvature[i0] - 1.0) <= 3.0 * (x[1] - x[0]) ** 2
        assert c.unit_normal[i0, 1] > 0


def test_curvature_requires_three_nodes():
    two = DiscreteCurve([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        curvature_data(two)


def test_orientation_flip_covariance():
    c = circle(n=200, orientation=1)
    f = c.flipped()
    assert np.allclose(f.nodes, c.nodes)
    assert np.allclose(f.curvature, -c.curvature)
    assert np.allclose(f.unit_normal, -c.unit_normal)


def test_closed_curve_total_turning_is_integer():
    c = circle(n=150)
    assert abs(c.winding_number - 1.0) < 1e-10
    theta = c.tangent_angle
    # dtheta/ds tracks the circumcircle curvature to O(h^2)
    dtheta = np.gradient(theta, c.arclength)
    assert np.allclose(dtheta[2:-2], c.curvature[2:-2], atol=5e-3)


def test_curvature_mesh_convergence_order():
    # oracle: exact curvature of the ellipse (2 cos p, sin p)
    a, b = 2.0, 1.0
    errs = []
    for n in (200, 400, 800):
        p = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        c = DiscreteCurve(np.stack([a * np.cos(p), b * np.sin(p)], axis=1), closed=True)
        exact = a * b / (a**2 * np.sin(p) ** 2 + b**2 * np.cos(p) ** 2) ** 1.5
        errs.append(np.max(np.abs(c.curvature - exact)))
    order = np.log2(errs[0] / errs[2]) / 2.0
    assert order >= 1.8


# ---------------------------------------------------------------------------
# graph_embed


def test_graph_embed_zero_is_identity():
    c = circle(n=128)
    out = graph_embed(GraphFunction.zero(c))
    assert np.allclose(out.nodes, c.nodes)


def test_graph_embed_offset_circle_both_orientations():
    # oracle: exact offset circles.  x + c*nu has radius 1 - c for the
    # inward normal and 1 + c for the outward normal.
    c_in = circle(n=500, orientation=1)
    emb = graph_embed(GraphFunction.constant(c_in, 0.3))
    assert np.allclose(np.hypot(*emb.nodes.T), 0.7, atol=1e-10)
    assert np.allclose(emb.curvature, 1.0 / 0.7, atol=1e-3)

    c_out = circle(n=500, orientation=-1)
    emb2 = graph_embed(GraphFunction.constant(c_out, 0.3))
    assert np.allclose(np.hypot(*emb2.nodes.T), 1.3, atol=1e-10)
    assert np.allclose(emb2.curvature, -1.0 / 1.3, atol=1e-3)


def test_graph_embed_sinusoid_over_line_curvature():
    n = 2001
    x = np.linspace(-np.pi, np.pi, n)
    base = DiscreteCurve(np.stack([x, np.zeros_like(x)], axis=1))
    u = GraphFunction(base, np.sin(x) / 10.0)
    emb = graph_embed(u)
    # oracle: curvature of the graph y = sin(x)/10
    xk = emb.nodes[:, 0]
    exact = (-np.sin(xk) / 10.0) / (1.0 + (np.cos(xk) / 10.0) ** 2) ** 1.5
    h = x[1] - x[0]
    assert np.max(np.abs(emb.curvature[2:-2] - exact[2:-2])) <= 20.0 * h**2


def test_graph_embed_rejects_inadmissible():
    c = circle(n=64)
    with pytest.raises(AdmissibilityError) as err:
        graph_embed(GraphFunction.constant(c, 0.9))
    assert err.value.node >= 0


# ---------------------------------------------------------------------------
# graph_speed_factor / graph_unit_normal


def test_speed_factor_constant_graph():
    c = circle(n=128)
    v = graph_speed_factor(GraphFunction.constant(c, 0.2))
    assert np.allclose(v, 1.0, atol=1e-12)


def test_speed_factor_linear_graph_on_line():
    base = line_curve(n=101, length=2.0)
    u = GraphFunction(base, base.nodes[:, 0] / 2.0)
    v = graph_speed_factor(u)
    assert np.allclose(v[1:-1], np.sqrt(5.0) / 2.0, atol=1e-12)


def test_speed_factor_matches_embedded_normal():
    # Appendix consistency: v = (nu_Gamma . nu_M)^{-1}
    n = 800
    c = circle(n=n, orientation=-1)
    eps = 0.02
    u = GraphFunction(c, eps * np.cos(2.0 * c.arclength))
    v = graph_speed_factor(u)
    emb = graph_embed(u)
    dots = np.sum(emb.unit_normal * c.unit_normal, axis=1)
    h = 2.0 * np.pi / n
    assert np.max(np.abs(v - 1.0 / dots)) <= 10.0 * (h**2 + eps**3)


def test_unit_normal_zero_graph():
    c = circle(n=64)
    nu_g = graph_unit_normal(GraphFunction.zero(c))
    assert np.allclose(nu_g, c.unit_normal, atol=1e-12)


def test_unit_normal_slope_one_line():
    base = line_curve(n=101, length=2.0)
    u = GraphFunction(base, base.nodes[:, 0].copy())
    nu_g = graph_unit_normal(u)
    expected = np.array([-1.0, 1.0]) / np.sqrt(2.0)
    assert np.allclose(nu_g[1:-1], expected, atol=1e-12)


def test_unit_normal_matches_embedded_geometry():
    rng = np.random.RandomState(7)
    n = 6283  # h ~ 1e-3 on the unit circle
    c = circle(n=n, orientation=-1)
    coeff = rng.standard_normal(4) * 0.003
    s = c.arclength
    u = GraphFunction(c, coeff[0] * np.cos(s) + coeff[1] * np.sin(2 * s)
                      + coeff[2] * np.cos(3 * s) + coeff[3] * np.sin(4 * s))
    nu_formula = graph_unit_normal(u)
    nu_geom = graph_embed(u).unit_normal
    dev = 1.0 - np.sum(nu_formula * nu_geom, axis=1)
    assert np.max(np.abs(dev)) <= 1e-6


# ---------------------------------------------------------------------------
# linearized_mean_curvature


def test_linearized_mc_zero_graph_exact():
    c = circle(n=256)
    rep = linearized_mean_curvature(GraphFunction.zero(c))
    assert np.allclose(rep.residual, 0.0, atol=1e-13)


def test_linearized_mc_quadratic_scaling():
    n = 800
    c = circle(n=n, orientation=-1)
    s = c.arclength
    shape = np.cos(2.0 * s) + 0.5 * np.sin(3.0 * s)
    lams = np.array([0.1, 0.05, 0.025, 0.0125])
    norms = []
    for lam in lams:
        rep = linearized_mean_curvature(GraphFunction(c, lam * shape))
        norms.append(np.max(np.abs(rep.residual)))
    slope = np.polyfit(np.log(lams), np.log(norms), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_linearized_mc_parabola_over_line():
    n = 801
    base = line_curve(n=n, length=4.0)
    x = base.nodes[:, 0]
    h = x[1] - x[0]
    for eps in (0.02, 0.01):
        rep = linearized_mean_curvature(GraphFunction(base, eps * x**2))
        inner = slice(4, -4)
        # linear term Delta u = 2 eps recovered
        assert np.max(np.abs(rep.rhs[inner] - 2.0 * eps)) <= 10.0 * (h**2 + eps**2)
        assert np.max(np.abs(rep.residual[inner])) <= 30.0 * eps**2


# ---------------------------------------------------------------------------
# expander_residual


def test_expander_residual_line_through_origin():
    c = line_curve(n=401, length=20.0)
    assert np.max(np.abs(expander_residual(c))) <= 1e-12


def test_expander_residual_unit_circle():
    c = circle(n=400, orientation=-1)  # outward nu
    res = expander_residual(c)
    # H = -1, x.nu = 1  =>  N = -1 - 1/2
    assert np.allclose(res, -1.5, atol=1e-4)
    res_in = expander_residual(c.flipped())
    assert np.allclose(res_in, 1.5, atol=1e-4)


# ---------------------------------------------------------------------------
# rescaled_flow_residual


def test_rescaled_flow_residual_stationary_line():
    c = line_curve(n=801, length=20.0)
    rep = rescaled_flow_residual(GraphFunction.zero(c))
    assert np.max(np.abs(rep.values[2:-2])) <= 1e-10


def test_rescaled_flow_residual_rejects_non_expander():
    c = circle(n=200, orientation=-1)
    with pytest.raises(ValueError, match="not an expander"):
        rescaled_flow_residual(GraphFunction.zero(c))


def test_rescaled_flow_defect_superquadratic_on_line_expander():
    # On the flat expander the quadratic error coefficients vanish with the
    # second fundamental form, so the defect is at least O(lambda^2) (here
    # cubic); curved expanders realize the generic quadratic law.
    n = 1601
    c = line_curve(n=n, length=16.0)
    x = c.nodes[:, 0]
    window = np.exp(-(x**2) / 8.0)
    shape = window * (1.0 + 0.3 * np.sin(1.5 * x))
    lams = np.array([0.08, 0.04, 0.02, 0.01])
    norms = []
    for lam in lams:
        rep = rescaled_flow_residual(GraphFunction(c, lam * shape))
        norms.append(np.max(np.abs(rep.defect[3:-3])))
    slope = np.polyfit(np.log(lams), np.log(norms), 1)[0]
    assert slope >= 1.8


def test_constant_graph_over_line_rescaled_residual():
    # u = const c over the flat expander: residual = c/2 exactly (E = 0)
    c = line_curve(n=401, length=10.0)
    rep = rescaled_flow_residual(GraphFunction.constant(c, 0.05))
    assert np.allclose(rep.values[2:-2], 0.025, atol=1e-10)
    assert np.allclose(jacobi_operator_apply(c, np.full(c.n_nodes, 0.05))[2:-2], -0.025, atol=1e-12)


# ---------------------------------------------------------------------------
# PlanarCone


def test_cross_cone_representation():
    cone = PlanarCone.cross()
    assert cone.n_rays == 4
    assert cone.sector_of(np.pi / 4) == 0
    assert cone.inside[cone.sector_of(np.pi / 4)]
    assert not cone.inside[cone.sector_of(3 * np.pi / 4)]


def test_cone_labels_must_alternate():
    with pytest.raises(ValueError):
        PlanarCone([0.0, 1.0, 2.0, 3.0], [True, True, False, False])


def test_cone_signed_distance():
    cone = PlanarCone.cross()
    pts = np.array([[1.0, 1.0], [-1.0, 1.0], [2.0, 0.0]])
    sd = cone.signed_distance(pts)
    assert sd[0] < 0  # first quadrant is inside W
    assert sd[1] > 0
    assert abs(abs(sd[0]) - 1.0) < 1e-12
    assert abs(sd[2]) < 1e-12


def test_cone_json_roundtrip():
    cone = PlanarCone.wedge(2 * np.pi / 3)
    again = PlanarCone.from_json_dict(cone.to_json_dict())
    assert np.allclose(again.ray_angles, cone.ray_angles)
    assert again.inside == cone.inside


# ---------------------------------------------------------------------------
# distances and I/O


def test_hausdorff_of_concentric_circles():
    a = circle(n=300, r=1.0)
    b = circle(n=300, r=1.5)
    d = hausdorff_distance(a, b)
    assert abs(d - 0.5) < 1e-3


def test_point_polyline_distance_exact_segment():
    d = point_polyline_distance([[0.5, 1.0], [2.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
    assert np.allclose(d, [1.0, 1.0])


def test_directed_hausdorff_ball_restriction():
    a = line_curve(n=201, length=20.0)
    b = a.translated([0.0, 0.1])
    big = DiscreteCurve(np.array([[30.0, 5.0], [31.0, 5.0], [32.0, 5.0]]))
    d = directed_hausdorff([a], [b, big], within_radius=5.0)
    assert abs(d - 0.1) < 1e-12


def test_curve_csv_roundtrip(tmp_path):
    c = circle(n=37, r=2.0, orientation=-1)
    path = tmp_path / "curve.csv"
    write_curve_csv(c, path)
    back = read_curve_csv(path)
    assert back.closed and back.orientation == -1
    assert np.allclose(back.nodes, c.nodes)
