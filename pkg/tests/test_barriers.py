import numpy as np
import pytest

from conical_mcf.barriers import (
    BarrierError,
    GraphicalityError,
    StaticBarrier,
    alpha_search,
    build_static_barrier,
    build_uniqueness_barriers,
    check_crossing,
    check_far_barrier,
    check_flow_between_barriers,
    check_supersolution,
    s_search,
    _boundary_values,
)
from conical_mcf.expanders import expander_family, rotation_family
from conical_mcf.geometry import DiscreteCurve, GraphFunction, PlanarCone
from conical_mcf.spectral import (
    assemble_operator,
    first_eigenpair,
    jacobi_field_from_family,
)

R = 2.0


@pytest.fixture(scope="module")
def cross_setup():
    fam = expander_family(PlanarCone.cross(), np.ones(4), s_max=0.04, count=5, h=0.005)
    jac = jacobi_field_from_family(fam, 0)
    sigma = fam.members[fam.base_index()][0]
    eig = first_eigenpair(assemble_operator(sigma, 3.0 * R))
    alpha0 = alpha_search(jac, eig, R)
    return fam, jac, sigma, eig, alpha0


@pytest.fixture(scope="module")
def cross_barrier(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    return build_static_barrier(sigma, jac, eig, R, alpha0 / 2.0, s=1e-2)


# ---------------------------------------------------------------------------
# build_static_barrier / check_crossing


def test_flat_cone_rejected_for_nonpositive_jacobi_field():
    rot = rotation_family(0.0, s_max=0.02, count=5, h=0.01)
    jac = jacobi_field_from_family(rot, 0)
    eig = first_eigenpair(assemble_operator(jac.v.base, 3.0 * R))
    with pytest.raises(BarrierError, match="not positive"):
        build_static_barrier(rot.members[2][0], jac, eig, R, 1.0, 1e-2)


def test_cross_barrier_structure(cross_barrier):
    b = cross_barrier
    # u equals the constant h outside B_{2R}
    outside = b.region == 2
    assert np.allclose(b.u.values[outside], b.h_const)
    # continuity across the weld: piecewise min agrees at region interfaces
    assert np.all(b.u.values <= np.maximum(b.f.values, b.h_const) + 1e-12)
    cert = check_crossing(b)
    assert cert.passed
    assert cert.margin_inner == 0.0  # h is the max of f on the inner crossing
    assert cert.margin_outer > 0.0


def test_crossing_margin_at_alpha_zero(cross_setup):
    _, jac, _, _, _ = cross_setup
    v = jac.v.values
    curve = jac.v.base
    margin = np.min(_boundary_values(curve, v, 2 * R)) - np.max(
        _boundary_values(curve, v, R)
    )
    # linearly growing v: the alpha = 0 margin is positive at this R
    assert margin > 0.5


def test_enormous_alpha_fails_crossing(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    with pytest.raises(BarrierError, match="crossing"):
        build_static_barrier(sigma, jac, eig, R, 50.0 * alpha0, 1e-2)


def test_alpha_search_threshold(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    build_static_barrier(sigma, jac, eig, R, 0.99 * alpha0, 1e-2)
    with pytest.raises(BarrierError):
        build_static_barrier(sigma, jac, eig, R, 1.01 * alpha0, 1e-2)


def test_inadmissible_s_rejected(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    with pytest.raises(ValueError, match="admissibility"):
        build_static_barrier(sigma, jac, eig, R, alpha0 / 2, s=2.0)


# ---------------------------------------------------------------------------
# check_supersolution


def test_cross_barrier_supersolution_passes(cross_barrier, cross_setup):
    _, _, _, eig, _ = cross_setup
    rep = check_supersolution(cross_barrier, eig)
    assert rep.passed
    assert rep.curvature_ok
    # the annulus f-branch floor tracks the model alpha mu_{3R} min phi
    measured = rep.annulus_f.min_residual / cross_barrier.s
    assert abs(measured - rep.model_f_min_over_s) <= 0.1 * rep.model_f_min_over_s


def test_supersolution_s_linearity(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    mins = []
    svals = (1e-2, 5e-3)
    for s in svals:
        b = build_static_barrier(sigma, jac, eig, R, alpha0 / 2, s)
        rep = check_supersolution(b, eig)
        assert rep.passed
        mins.append(rep.f_branch.min_residual)
    slope = np.log(mins[0] / mins[1]) / np.log(svals[0] / svals[1])
    assert 0.9 <= slope <= 1.1


def test_curvature_hypothesis_violation_flagged(cross_barrier):
    b = cross_barrier
    curve = b.u.base
    # inject a wiggle beyond 2R so |A|^2 > 1/4 in the h-region
    nodes = curve.nodes.copy()
    r = curve.radii
    s_arc = curve.arclength
    envelope = np.exp(-((r - 5.5) ** 2) / 0.1)
    nodes[:, 1] += 5e-3 * envelope * np.sin(s_arc / 0.05)
    doctored = DiscreteCurve(nodes, orientation=curve.orientation)
    b2 = StaticBarrier(
        sigma=b.sigma, R=b.R, alpha=b.alpha, s=b.s,
        f=GraphFunction(doctored, b.f.values), h_const=b.h_const,
        u=GraphFunction(doctored, b.u.values), region=b.region, crossing=b.crossing,
    )
    rep = check_supersolution(b2, expander_tol=np.inf)
    assert not rep.curvature_ok
    assert rep.curvature_failing.size > 0
    assert not rep.passed


def test_mesh_refinement_stability(cross_setup):
    _, jac5, sigma5, eig5, alpha0 = cross_setup
    alpha = alpha0 / 2
    b5 = build_static_barrier(sigma5, jac5, eig5, R, alpha, 1e-2)
    rep5 = check_supersolution(b5, eig5)

    fam = expander_family(PlanarCone.cross(), np.ones(4), s_max=0.04, count=5, h=0.01)
    jac = jacobi_field_from_family(fam, 0)
    sigma = fam.members[fam.base_index()][0]
    eig = first_eigenpair(assemble_operator(sigma, 3.0 * R))
    b10 = build_static_barrier(sigma, jac, eig, R, alpha, 1e-2)
    rep10 = check_supersolution(b10, eig)

    assert rep5.passed and rep10.passed
    for region in ("f", "h"):
        a = rep5.min_residual_over_s(region)
        c = rep10.min_residual_over_s(region)
        assert abs(a - c) <= 0.1 * abs(a)


def test_cross_barrier_symmetry(cross_barrier):
    b = cross_barrier
    curve = b.u.base
    # the component bisects the 3 pi / 4 direction: node reversal composed
    # with reflection across y = -x is a symmetry of the point set
    swapped = -curve.nodes[::-1, ::-1]
    assert np.allclose(swapped, curve.nodes, atol=1e-9)
    assert np.allclose(b.u.values, b.u.values[::-1], atol=1e-7)


def test_s_search_returns_passing_scale(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    s0 = s_search(sigma, jac, eig, R, alpha0 / 2, s_max=0.08)
    assert 0 < s0 <= 0.08
    b = build_static_barrier(sigma, jac, eig, R, alpha0 / 2, s0)
    assert check_supersolution(b, eig).passed


# ---------------------------------------------------------------------------
# uniqueness barriers


def self_similar_slices(sigma, times):
    return [
        (t, [DiscreteCurve(np.sqrt(t) * sigma.curve.nodes, False, sigma.curve.orientation)])
        for t in times
    ]


def test_uniqueness_barriers_self_similar(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    times = [0.25, 0.0625]
    slices = self_similar_slices(sigma, times)
    pair = build_uniqueness_barriers(
        slices, sigma, jac, eig, R, alpha0 / 2, s=1e-2, delta=0.05
    )
    assert pair.crossing_passed
    for sl in pair.slices:
        assert np.max(np.abs(sl.u)) <= 1e-12  # u = 0 reduction
    res = check_flow_between_barriers(pair, slices)
    for entry in res:
        assert entry["violations_above"] == 0
        assert entry["violations_below"] == 0
        assert entry["min_margin"] > 0.0


def test_uniqueness_barriers_reject_large_delta(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    slices = self_similar_slices(sigma, [0.25])
    with pytest.raises(BarrierError, match="delta"):
        build_uniqueness_barriers(slices, sigma, jac, eig, R, alpha0 / 2, 1e-2, delta=0.5)


def test_uniqueness_barriers_graphicality_window(cross_setup):
    _, jac, sigma, eig, alpha0 = cross_setup
    t = 0.25
    shifted = DiscreteCurve(
        np.sqrt(t) * sigma.curve.nodes + np.array([3.0, -3.0]),
        False,
        sigma.curve.orientation,
    )
    with pytest.raises(GraphicalityError) as err:
        build_uniqueness_barriers(
            [(t, [shifted])], sigma, jac, eig, R, alpha0 / 2, 1e-2, delta=0.05
        )
    assert err.value.t == t


# ---------------------------------------------------------------------------
# far barrier (pseudo-barrier claim)


def test_far_barrier_static_line_exact():
    y = np.linspace(-6.0, 6.0, 1201)
    line = DiscreteCurve(np.stack([np.full_like(y, 2.0), y], axis=1), orientation=1)
    slices = [(t, [line]) for t in (0.04, 0.16, 0.64)]
    rep = check_far_barrier(slices, s=0.01, eta=0.3)
    assert rep.passed
    for t, m in zip(rep.times, rep.min_residuals):
        assert abs(m - 0.01 / (2.0 * np.sqrt(t))) <= 1e-10


def circle_slices(r0, times, n=2000):
    out = []
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    for t in times:
        r = np.sqrt(r0**2 - 2.0 * t)
        nodes = r * np.stack([np.cos(th), np.sin(th)], axis=1)
        out.append((t, [DiscreteCurve(nodes, closed=True, orientation=-1)]))
    return out


def test_far_barrier_circle_sign_flip():
    # oracle: residual s sqrt(t) (1/(2t) - 1/r(t)^2) flips sign at t* = r0^2/4
    r0 = 1.0
    t_star = r0**2 / 4.0
    times = np.linspace(0.6 * t_star, 1.4 * t_star, 33)
    rep = check_far_barrier(circle_slices(r0, times), s=0.01, eta=2.0)
    flip = rep.sign_flip_time()
    assert flip is not None
    assert abs(flip - t_star) <= 0.1 * t_star
    before = rep.min_residuals[rep.times < 0.9 * t_star]
    assert np.all(before > 0.0)


def test_far_barrier_eta_window_violation():
    r0 = 1.0
    with pytest.raises(ValueError, match="eta-window"):
        check_far_barrier(circle_slices(r0, [0.1]), s=0.01, eta=0.5)
