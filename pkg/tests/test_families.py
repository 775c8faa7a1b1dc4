import math

import numpy as np
import pytest

from snalab.circle import Frequency, circle_dist, wrap
from snalab.families import (
    CircleMapFamily,
    FamilyKind,
    ForcingKind,
    estimate_constants,
    saturating_primitive,
    warp,
    warp_deriv,
    warp_lift,
)

OMEGA = Frequency.golden()


def make(kind, **kw):
    return CircleMapFamily(kind, OMEGA, **kw)


ALL_KINDS = [
    make(FamilyKind.ARCTAN, tau=0.525, alpha=3000.0, q=2,
         forcing=ForcingKind.ARCTAN_SINE, amplitude=1000.0),
    make(FamilyKind.ARCTAN, tau=0.2, alpha=30.0, q=3,
         forcing=ForcingKind.COSINE, amplitude=0.2),
    make(FamilyKind.DRIVEN_ARNOLD, tau=0.3, alpha=1.0,
         forcing=ForcingKind.COSINE, amplitude=0.3),
    make(FamilyKind.DRIVEN_ARNOLD, tau=0.77, alpha=0.6,
         forcing=ForcingKind.ARCTAN_SINE, amplitude=4.0),
    make(FamilyKind.PROJECTIVE, tau=0.3, alpha=3.0,
         forcing=ForcingKind.ARCTAN_SINE, amplitude=5.0),
    make(FamilyKind.RIGID, tau=0.25, forcing=ForcingKind.COSINE,
         amplitude=0.1),
]

IDS = [f"{f.kind.value}-{f.forcing.value}-q{f.q}" for f in ALL_KINDS]


# -- saturating primitive and warp ------------------------------------------

class TestSaturatingPrimitive:
    def test_q2_is_arctan(self):
        for x in [-3.0, -0.5, 0.0, 0.2, 1.0, 10.0]:
            assert saturating_primitive(2, x) == pytest.approx(
                math.atan(x), abs=1e-15)

    def test_q3_frozen_value(self):
        # closed form at 1: log(4)/6 + pi/(3 sqrt(3))
        assert saturating_primitive(3, 1.0) == pytest.approx(
            0.835648848264721, abs=5e-13)

    def test_odd(self):
        for q in (2, 3, 4):
            for x in (0.3, 1.7, 4.0):
                assert saturating_primitive(q, -x) == pytest.approx(
                    -saturating_primitive(q, x), abs=1e-14)

    def test_monotone_and_saturating(self):
        vals = [saturating_primitive(4, x) for x in (0.1, 0.5, 1.0, 5.0, 40.0)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        # tail beyond 5 adds little once q >= 4
        assert vals[-1] - vals[-2] < 0.01

    def test_quadrature_cross_check(self):
        integrate = pytest.importorskip("scipy.integrate")
        for q in (3, 4, 6):
            for x in (0.4, 1.0, 2.5):
                ref, _ = integrate.quad(lambda z: 1.0 / (1.0 + z**q), 0.0, x)
                assert saturating_primitive(q, x) == pytest.approx(
                    ref, abs=1e-10)

    def test_rejects_bad_q(self):
        with pytest.raises(ValueError):
            saturating_primitive(1, 0.5)


class TestWarp:
    @pytest.mark.parametrize("q,alpha", [(2, 2.0), (2, 300.0), (3, 30.0)])
    def test_fixes_zero_and_half(self, q, alpha):
        assert warp(q, alpha, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert warp(q, alpha, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_q2_closed_form(self):
        alpha = 17.0
        xs = np.linspace(0.0, 1.0, 101)[:-1]
        xh = xs - np.ceil(xs - 0.5)
        expect = wrap(np.arctan(alpha * xh) / (2.0 * math.atan(alpha / 2.0)))
        assert np.allclose(warp(2, alpha, xs), expect, atol=1e-14)

    def test_deriv_matches_finite_difference(self):
        h = 1e-6
        for q, alpha in [(2, 40.0), (3, 8.0)]:
            for x in (0.03, 0.2, 0.48, 0.81):
                fd = (warp_lift(q, alpha, x + h)
                      - warp_lift(q, alpha, x - h)) / (2 * h)
                assert warp_deriv(q, alpha, x) == pytest.approx(fd, rel=1e-7)

    def test_lift_degree_one(self):
        xs = np.linspace(-2.3, 2.3, 57)
        lifted = warp_lift(2, 50.0, xs)
        assert np.allclose(warp_lift(2, 50.0, xs + 1.0), lifted + 1.0,
                           atol=1e-12)
        assert np.all(np.diff(warp_lift(2, 50.0, np.linspace(0, 1, 400))) > 0)

    def test_lift_projects_to_warp(self):
        xs = np.linspace(-1.7, 1.7, 41)
        assert np.allclose(wrap(warp_lift(3, 5.0, xs)), warp(3, 5.0, wrap(xs)),
                           atol=1e-12)


# -- family construction -----------------------------------------------------

class TestConstruction:
    def test_tau_wrapped(self):
        fam = make(FamilyKind.RIGID, tau=1.75)
        assert fam.tau == pytest.approx(0.75)

    def test_arnold_rejects_noninvertible(self):
        with pytest.raises(ValueError):
            make(FamilyKind.DRIVEN_ARNOLD, alpha=1.2)
        make(FamilyKind.DRIVEN_ARNOLD, alpha=1.0)  # boundary case is fine

    def test_arctan_validation(self):
        with pytest.raises(ValueError):
            make(FamilyKind.ARCTAN, alpha=-2.0)
        with pytest.raises(ValueError):
            make(FamilyKind.ARCTAN, alpha=5.0, q=1)

    def test_projective_needs_positive_alpha(self):
        with pytest.raises(ValueError):
            make(FamilyKind.PROJECTIVE, alpha=0.0)


# -- fibre map properties, all kinds ----------------------------------------

@pytest.mark.parametrize("fam", ALL_KINDS, ids=IDS)
class TestFiberMaps:
    def test_derivative_positive(self, fam):
        rng = np.random.default_rng(7)
        th = rng.random(300)
        x = rng.random(300)
        d = fam.fiber_derivative(th, x)
        assert np.all(d >= 0.0)
        if not (fam.kind is FamilyKind.DRIVEN_ARNOLD and abs(fam.alpha) == 1.0):
            assert np.all(d > 0.0)

    def test_inverse_roundtrip(self, fam):
        rng = np.random.default_rng(11)
        th = rng.random(250)
        x = rng.random(250)
        y = fam.fiber_map(th, x)
        back = fam.fiber_inverse(th, y)
        assert np.max(circle_dist(back, x)) < 1e-10
        forward = fam.fiber_map(th, fam.fiber_inverse(th, x))
        assert np.max(circle_dist(forward, x)) < 1e-10

    def test_lift_degree_one_and_monotone(self, fam):
        rng = np.random.default_rng(13)
        th = rng.random(40)
        xh = rng.uniform(-3, 3, 40)
        up = fam.fiber_lift(th, xh + 1.0)
        assert np.allclose(up, fam.fiber_lift(th, xh) + 1.0, atol=1e-12)
        grid = np.linspace(-1.0, 2.0, 1200)
        lifted = fam.fiber_lift(0.37, grid)
        assert np.all(np.diff(lifted) >= 0.0)

    def test_lift_projects_to_map(self, fam):
        rng = np.random.default_rng(17)
        th = rng.random(60)
        xh = rng.uniform(-2, 2, 60)
        err = circle_dist(wrap(fam.fiber_lift(th, xh)),
                          fam.fiber_map(th, wrap(xh)))
        assert np.max(err) < 1e-12

    def test_derivative_matches_lift_slope(self, fam):
        rng = np.random.default_rng(19)
        th = rng.random(60)
        x = rng.random(60)
        h = 1e-6
        fd = (fam.fiber_lift(th, x + h) - fam.fiber_lift(th, x - h)) / (2 * h)
        assert np.allclose(fam.fiber_derivative(th, x), fd,
                           rtol=1e-4, atol=1e-7)

    def test_theta_derivative_matches_finite_difference(self, fam):
        rng = np.random.default_rng(23)
        th = rng.random(60)
        x = rng.random(60)
        h = 1e-7
        fd = (fam.fiber_lift(th + h, x) - fam.fiber_lift(th - h, x)) / (2 * h)
        assert np.allclose(fam.theta_derivative(th), fd, rtol=1e-4, atol=1e-5)

    def test_scalar_matches_array(self, fam):
        th = np.array([0.12, 0.8])
        x = np.array([0.31, 0.97])
        ys = fam.fiber_map(th, x)
        for i in range(2):
            y = fam.fiber_map(float(th[i]), float(x[i]))
            assert isinstance(y, float)
            assert y == pytest.approx(float(ys[i]), abs=1e-15)


class TestFiberFormulas:
    def test_projective_derivative_extremes(self):
        fam = make(FamilyKind.PROJECTIVE, alpha=4.0)
        assert fam.fiber_derivative(0.0, 0.0) == pytest.approx(1.0 / 16.0)
        assert fam.fiber_derivative(0.0, 0.5) == pytest.approx(16.0)

    def test_arctan_derivative_extremes(self):
        alpha, q = 100.0, 2
        fam = make(FamilyKind.ARCTAN, alpha=alpha, q=q)
        norm = 2.0 * math.atan(alpha / 2.0)
        assert fam.fiber_derivative(0.0, 0.0) == pytest.approx(alpha / norm)
        assert fam.fiber_derivative(0.0, 0.5) == pytest.approx(
            alpha / ((1.0 + (alpha / 2.0) ** q) * norm))

    def test_rigid_rotation_number_is_tau(self):
        fam = make(FamilyKind.RIGID, tau=0.3)
        x = 0.0
        lift_total = 0.0
        for k in range(100):
            lift_total += fam.fiber_lift(OMEGA.multiple(k), x) - x
            x = fam.fiber_map(OMEGA.multiple(k), x)
        assert lift_total / 100 == pytest.approx(0.3, abs=1e-12)


class TestForcing:
    def test_cosine_values(self):
        fam = make(FamilyKind.RIGID, forcing=ForcingKind.COSINE, amplitude=0.2)
        assert fam.forcing_value(0.0) == pytest.approx(0.2)
        assert fam.forcing_value(0.5) == pytest.approx(-0.2)
        assert fam.forcing_dtheta(0.25) == pytest.approx(-0.4 * math.pi)

    def test_arctan_sine_values(self):
        beta = 1000.0
        fam = make(FamilyKind.RIGID, forcing=ForcingKind.ARCTAN_SINE,
                   amplitude=beta)
        assert fam.forcing_value(0.25) == pytest.approx(
            math.atan(beta) / math.pi)
        assert fam.forcing_value(0.75) == pytest.approx(
            -math.atan(beta) / math.pi)
        # steepest at theta = 0, slope 2 beta
        assert fam.forcing_dtheta(0.0) == pytest.approx(2.0 * beta)

    def test_forcing_dtheta_finite_difference(self):
        for forcing, amp in [(ForcingKind.COSINE, 0.7),
                             (ForcingKind.ARCTAN_SINE, 12.0)]:
            fam = make(FamilyKind.RIGID, forcing=forcing, amplitude=amp)
            th = np.linspace(0.01, 0.99, 37)
            h = 1e-7
            fd = (fam.forcing_value(th + h) - fam.forcing_value(th - h)) / (2 * h)
            assert np.allclose(fam.forcing_dtheta(th), fd, rtol=1e-5, atol=1e-6)

    def test_none_forcing_is_zero(self):
        fam = make(FamilyKind.RIGID)
        assert np.all(fam.forcing_value(np.linspace(0, 1, 9)) == 0.0)


# -- contraction/expansion scan ----------------------------------------------

SHOWCASE = make(FamilyKind.ARCTAN, tau=0.525, alpha=3000.0, q=2,
                forcing=ForcingKind.ARCTAN_SINE, amplitude=1000.0)


class TestEstimateConstants:
    def test_rejects_small_grids(self):
        with pytest.raises(ValueError):
            estimate_constants(SHOWCASE, theta_grid_size=100)

    def test_rigid_has_no_split(self):
        data = estimate_constants(make(FamilyKind.RIGID, tau=0.3))
        assert not data.split_found
        assert "no" in data.reason and "split" in data.reason

    def test_mild_arnold_has_no_split(self):
        data = estimate_constants(
            make(FamilyKind.DRIVEN_ARNOLD, alpha=0.9, tau=0.3))
        assert not data.split_found

    def test_showcase_split_frozen_geometry(self):
        data = estimate_constants(SHOWCASE, level=256.0)
        assert data.split_found
        c_lo, c_hi = data.C
        e_lo, e_hi = data.E
        assert c_lo == pytest.approx(0.164845, abs=1e-4)
        assert c_hi == pytest.approx(0.835155, abs=1e-4)
        # expansion arc wraps through 0, half width about 5.5e-4
        assert e_lo == pytest.approx(0.9994491, abs=2e-5)
        assert e_hi == pytest.approx(0.0005509, abs=2e-5)
        assert data.alpha_bound == pytest.approx(256.0, abs=0.01)
        assert data.S == pytest.approx(2000.0, abs=1e-9)
        assert data.sandwich_floor == pytest.approx(48.5304, abs=1e-3)

    def test_showcase_critical_region(self):
        data = estimate_constants(SHOWCASE, level=256.0)
        assert data.n_components == 2
        for left, width in data.I0.arcs:
            assert 4e-4 < width < 8e-4
        # one window across theta = 1/2, one across theta = 0
        assert data.I0.contains(0.5)
        assert data.I0.contains(0.0)

    def test_showcase_derivative_bounds_hold(self):
        data = estimate_constants(SHOWCASE, level=256.0)
        rng = np.random.default_rng(31)
        th = rng.random(200)
        e_lo, _ = data.E
        xe = wrap(e_lo + rng.random(200) * data.E_length)
        assert np.min(SHOWCASE.fiber_derivative(th, xe)) >= data.alpha_bound - 1e-9
        c_lo, _ = data.C
        xc = wrap(c_lo + rng.random(200) * data.C_length)
        assert np.max(SHOWCASE.fiber_derivative(th, xc)) <= 1.0 / data.alpha_bound + 1e-9
        assert data.alpha_bound > 4.0
        assert data.alpha_bound >= data.sandwich_floor

    def test_showcase_funnel_condition(self):
        data = estimate_constants(SHOWCASE, level=256.0)
        e_lo, e_hi = data.E
        c_lo, c_hi = data.C
        c_len = wrap(c_hi - c_lo)
        comp_len = 1.0 - data.E_length
        rng = np.random.default_rng(37)
        # complement of the open expansion arc, endpoints included
        xs = wrap(e_hi + np.concatenate(([0.0, comp_len],
                                         rng.random(300) * comp_len)))

        def lands_inside_open_c(theta):
            y = SHOWCASE.fiber_map(np.full(xs.shape, theta), xs)
            rel = np.mod(y - c_lo, 1.0)
            return bool(np.all((rel > 0) & (rel < c_len)))

        good = [t for t in rng.random(150) if not data.I0.contains(t)][:100]
        for t in good:
            assert lands_inside_open_c(t)
        # dead centre of each critical window must fail
        for left, width in data.I0.arcs:
            assert not lands_inside_open_c(wrap(left + width / 2.0))

    def test_adaptive_level_formula(self):
        fam = make(FamilyKind.ARCTAN, alpha=50.0, q=2,
                   forcing=ForcingKind.COSINE, amplitude=0.05)
        data = estimate_constants(fam)
        norm = 2.0 * math.atan(25.0)
        sup_d = 50.0 / norm
        inf_d = 50.0 / ((1.0 + 625.0) * norm)
        floor = max(math.sqrt(sup_d), 1.0 / math.sqrt(inf_d))
        assert data.split_found
        assert data.level == pytest.approx(1.02 * max(5.0, floor), rel=1e-9)
        assert data.alpha_bound >= data.level - 1e-6

    def test_pinned_level_above_reach_reports_failure(self):
        fam = make(FamilyKind.ARCTAN, alpha=50.0, q=2)
        data = estimate_constants(fam, level=100.0)
        assert not data.split_found
        assert data.reason
