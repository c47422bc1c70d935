import json
import math

import numpy as np
import pytest

from nsl import (
    KernelSpec,
    ScalarField,
    SpaceSpec,
    build_space,
    doubling_constant,
)
from nsl.kernels import kernel_matrix
from nsl.verify import (
    check_annuli_bound,
    check_fubini_identity,
    check_hajlasz_bound,
    check_hks,
    check_mean_comparison,
    check_mollifier,
    check_nguyen_averaging,
    check_upper_gradient_scale,
    render_text,
    reports_to_json,
    run_suite,
    two_sided_report,
)


def sin_field(space):
    return ScalarField(np.sin(space.coords[:, 0]))


def step_field(space, threshold=0.5):
    return ScalarField((space.coords[:, 0] > threshold).astype(float))


class TestAnnuli:
    def test_two_point_trivial_tail(self, two_point, ahlfors1):
        rep = check_annuli_bound(two_point, ahlfors1, 2.0, [2.0])
        assert rep.passed
        assert rep.records[0].lhs == 0.0

    def test_circle_rho1(self):
        sp = build_space(SpaceSpec("circle", n=256))
        rep = check_annuli_bound(sp, KernelSpec("rho1"), 2.0, [math.pi / 8, math.pi / 4])
        assert rep.passed

    def test_matches_naive_loop(self, circle64):
        kernel = KernelSpec("rho1")
        r = math.pi / 8
        rep = check_annuli_bound(circle64, kernel, 2.0, [r])
        rho = kernel_matrix(circle64, kernel)
        naive = 0.0
        for x in range(64):
            tail = sum(
                circle64.weights[y] / (rho[x, y] * circle64.dist[x, y] ** 2)
                for y in range(64)
                if y != x and circle64.dist[x, y] >= r
            )
            naive = max(naive, tail * r**2)
        assert rep.records[0].lhs == pytest.approx(naive, rel=1e-12)

    def test_interval_ahlfors_stable_under_refinement(self, ahlfors1):
        sups = []
        for n in (256, 512):
            sp = build_space(SpaceSpec("interval", n=n))
            rep = check_annuli_bound(sp, ahlfors1, 1.0, [0.1])
            sups.append(rep.records[0].lhs)
        assert sups[1] == pytest.approx(sups[0], rel=0.10)


class TestMeanComparison:
    def test_two_point_hand_values(self, two_point, two_point_field):
        # ball = whole space: lower 0.25 <= middle 0.5 <= upper 1.0
        rep = check_mean_comparison(two_point, two_point_field, 2.0, [1.0])
        assert rep.passed
        vals = two_point_field.values
        mass = 1.0
        mean = 0.5
        osc = float(np.sum(two_point.weights * np.abs(vals - mean) ** 2))
        assert mass * osc == pytest.approx(0.25)

    def test_constant_field(self, circle64):
        rep = check_mean_comparison(circle64, ScalarField(np.zeros(64)), 2.0, [0.5])
        assert rep.passed

    def test_circle_sine(self, circle64):
        rep = check_mean_comparison(circle64, sin_field(circle64), 2.0, [math.pi / 8])
        assert rep.passed


class TestFubini:
    def test_two_point_hand_value(self, two_point, two_point_field, ahlfors1):
        rep = check_fubini_identity(two_point, two_point_field, 2.0, 0.5, ahlfors1)
        assert rep.passed
        assert rep.records[0].lhs == pytest.approx(0.5, rel=1e-12)
        assert rep.records[0].rhs == pytest.approx(0.5, rel=1e-12)

    def test_constant_field(self, circle64, ahlfors1):
        rep = check_fubini_identity(circle64, ScalarField(np.ones(64)), 2.0, 0.5, ahlfors1)
        assert rep.passed

    @pytest.mark.parametrize("s", [0.3, 0.7, 0.9])
    def test_interval_identity(self, interval128, ahlfors1, s):
        u = ScalarField(interval128.coords[:, 0])
        rep = check_fubini_identity(interval128, u, 2.0, s, ahlfors1)
        assert rep.passed

    def test_step_field_and_rho1(self, interval128):
        rep = check_fubini_identity(
            interval128, step_field(interval128), 2.0, 0.6, KernelSpec("rho1")
        )
        assert rep.passed


class TestHks:
    def test_constant_field(self, circle64):
        rep = check_hks(circle64, ScalarField(np.full(64, 2.0)), 2.0, [0.5])
        assert rep.passed

    def test_circle_sine_all_items(self):
        sp = build_space(SpaceSpec("circle", n=128))
        rep = check_hks(sp, sin_field(sp), 2.0, [math.pi / 16, math.pi / 8, math.pi / 4])
        assert rep.passed
        items = {rec.params["item"] for rec in rep.records}
        assert items == {"i-lower", "i-upper", "ii-lower", "ii-upper", "iv"}

    def test_two_point_item_ii_hand_values(self, two_point, two_point_field, ahlfors1):
        # t = 2d: S_t = 0.5 and H_{t/2} = 0.5 (radius-1 balls are everything)
        rep = check_hks(two_point, two_point_field, 2.0, [2.0])
        c_d = doubling_constant(two_point).c_d_hat
        assert c_d == pytest.approx(2.0)
        low = next(r for r in rep.records if r.params["item"] == "ii-lower")
        assert low.lhs == pytest.approx(0.5)
        assert low.rhs == pytest.approx(c_d**4 * 0.5)
        assert rep.passed

    def test_rejects_sub_mesh_scale(self, circle64):
        with pytest.raises(ValueError, match="mesh scale"):
            check_hks(circle64, sin_field(circle64), 2.0, [circle64.min_distance / 2])


class TestMollifier:
    def test_constant_field_zero_error(self, circle64):
        rep = check_mollifier(circle64, [ScalarField(np.ones(64))], 2.0, [0.5, 0.25])
        assert rep.passed

    def test_two_point_bound(self, two_point, two_point_field):
        rep = check_mollifier(two_point, [two_point_field], 2.0, [2.0, 0.4], eps_conv=0.05)
        # at t = 0.4 the balls are singletons, so the error vanishes
        assert rep.passed
        bound = next(r for r in rep.records if r.params.get("item") == "bounded")
        assert bound.lhs == pytest.approx(0.5)

    def test_circle_sine_converges(self):
        sp = build_space(SpaceSpec("circle", n=256))
        rep = check_mollifier(sp, [sin_field(sp)], 2.0, [math.pi / 4, math.pi / 16, 2 * math.pi / 64])
        assert rep.passed
        conv = next(r for r in rep.records if r.params.get("item") == "converges")
        assert conv.lhs < 0.05

    def test_grid_must_decrease(self, circle64):
        with pytest.raises(ValueError, match="decreasing"):
            check_mollifier(circle64, [sin_field(circle64)], 2.0, [0.1, 0.5])

    def test_step_field_fails_tight_epsilon(self):
        # a jump cannot be approximated at coarse scales: honest failure mode
        sp = build_space(SpaceSpec("interval", n=32))
        rep = check_mollifier(sp, [step_field(sp)], 2.0, [0.25, 0.125], eps_conv=0.01)
        assert not rep.passed


class TestUpperGradient:
    def test_constant_field(self, circle64):
        rep = check_upper_gradient_scale(circle64, ScalarField(np.zeros(64)), math.pi / 8)
        assert rep.passed

    def test_circle_sine(self):
        sp = build_space(SpaceSpec("circle", n=256))
        rep = check_upper_gradient_scale(sp, sin_field(sp), math.pi / 8, n_paths=100)
        assert rep.passed
        assert rep.constants["worst_ratio"] <= 1.0

    def test_interval_linear(self):
        sp = build_space(SpaceSpec("interval", n=256))
        rep = check_upper_gradient_scale(sp, ScalarField(sp.coords[:, 0]), 0.1, n_paths=60)
        assert rep.passed
        assert rep.constants["worst_ratio"] <= 1.0

    def test_matrix_space_not_applicable(self, two_point, two_point_field):
        rep = check_upper_gradient_scale(two_point, two_point_field, 0.5)
        assert not rep.applicable
        assert rep.passed  # skipped, not failed
        assert "not applicable" in rep.note

    def test_no_path_of_requested_length(self, circle64):
        with pytest.raises(ValueError, match="no geodesic chain"):
            check_upper_gradient_scale(circle64, sin_field(circle64), 1e-6)


class TestNguyenAveraging:
    def test_two_point_hand_value(self, two_point, two_point_field, ahlfors1):
        rep = check_nguyen_averaging(two_point, two_point_field, 2.0, 1.0, 1.0, ahlfors1)
        assert rep.passed
        assert rep.records[0].lhs == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_constant_field(self, circle64, ahlfors1):
        rep = check_nguyen_averaging(circle64, ScalarField(np.ones(64)), 2.0, 0.5, 0.5, ahlfors1)
        assert rep.passed
        assert rep.records[0].lhs == 0.0

    def test_interval_identity(self, interval128, ahlfors1):
        u = ScalarField(interval128.coords[:, 0])
        rep = check_nguyen_averaging(interval128, u, 2.0, 0.5, 0.5, ahlfors1)
        assert rep.passed

    def test_step_field_identity(self, interval128):
        rep = check_nguyen_averaging(
            interval128, step_field(interval128), 2.0, 0.8, 0.7, KernelSpec("rho1")
        )
        assert rep.passed

    def test_truncation_active(self, circle64, ahlfors1):
        # r below the oscillation: truncation actually bites, identity still exact
        rep = check_nguyen_averaging(circle64, sin_field(circle64), 2.0, 0.7, 0.3, ahlfors1)
        assert rep.passed


class TestHajlaszBound:
    def test_interval_ratio_quarter(self):
        sp = build_space(SpaceSpec("interval", n=256))
        rep = check_hajlasz_bound(
            sp,
            ScalarField(sp.coords[:, 0]),
            2.0,
            refine_field=lambda s: ScalarField(s.coords[:, 0]),
        )
        assert rep.passed
        assert rep.records[0].lhs == pytest.approx(0.25, rel=1e-3)

    def test_circle_sine_stable(self):
        sp = build_space(SpaceSpec("circle", n=128))
        rep = check_hajlasz_bound(
            sp, sin_field(sp), 2.0, refine_field=lambda s: ScalarField(np.sin(s.coords[:, 0]))
        )
        assert rep.passed

    def test_constant_rejected(self, circle64):
        with pytest.raises(ValueError, match="nonconstant"):
            check_hajlasz_bound(circle64, ScalarField(np.zeros(64)), 2.0)

    def test_degenerate_zero_slope_reported(self):
        # alternating field on a periodic grid: centered differences vanish
        sp = build_space(SpaceSpec("torus2d", nx=4, ny=4))
        i = np.arange(16) // 4
        j = np.arange(16) % 4
        u = ScalarField(((-1.0) ** (i + j)).astype(float))
        rep = check_hajlasz_bound(sp, u, 2.0)
        assert not rep.passed
        assert "degenerate" in rep.records[0].note

    def test_no_refinement_skips_stability(self, two_point, two_point_field):
        rep = check_hajlasz_bound(two_point, two_point_field, 2.0)
        assert rep.passed
        assert "skipped" in rep.note


class TestTwoSided:
    def test_interval_window(self):
        sp = build_space(SpaceSpec("interval", n=256))
        rep = two_sided_report(
            sp, ScalarField(sp.coords[:, 0]), 2.0, KernelSpec("ahlfors", 1.0),
            check_refinement=False,
        )
        assert rep.passed
        assert 0.05 <= rep.constants["R_bbm"] <= 20.0
        assert 0.05 <= rep.constants["R_nguyen"] <= 20.0
        # the threshold-functional route resolves the Dirichlet energy well
        assert rep.constants["R_nguyen"] == pytest.approx(1.0, rel=0.05)

    def test_constant_rejected(self, circle64):
        with pytest.raises(ValueError, match="nonconstant"):
            two_sided_report(circle64, ScalarField(np.zeros(64)), 2.0, KernelSpec("rho1"))

    def test_stability_records_present(self):
        sp = build_space(SpaceSpec("interval", n=128))
        rep = two_sided_report(
            sp, ScalarField(sp.coords[:, 0]), 2.0, KernelSpec("ahlfors", 1.0),
            refine_field=lambda s: ScalarField(s.coords[:, 0]),
        )
        items = [rec.params.get("item") for rec in rep.records]
        assert items.count("stability") == 2


class TestSuite:
    def test_full_suite_circle(self):
        sp = build_space(SpaceSpec("circle", n=64))
        reports = run_suite(
            sp,
            sin_field(sp),
            2.0,
            KernelSpec("rho1"),
            informational=("two-sided",),
            refine_field=lambda s: ScalarField(np.sin(s.coords[:, 0])),
        )
        names = {r.name for r in reports}
        assert "annuli-tail-bound" in names and "two-sided-limits" in names
        asserted = [r for r in reports if r.applicable]
        assert all(r.passed for r in asserted)

    def test_constant_field_suite_skips(self, circle64):
        reports = run_suite(
            circle64,
            ScalarField(np.ones(64)),
            2.0,
            KernelSpec("rho1"),
            checks=("nguyen-avg", "hajlasz", "two-sided"),
        )
        assert all(not r.applicable for r in reports)
        assert all(r.passed for r in reports)

    def test_render_and_json(self, tmp_path, circle64, ahlfors1):
        reports = run_suite(
            circle64, sin_field(circle64), 2.0, ahlfors1, checks=("fubini", "mean")
        )
        text = render_text(reports)
        assert "PASS" in text
        path = tmp_path / "reports.json"
        reports_to_json(reports, path)
        doc = json.loads(path.read_text())
        assert doc["passed"] is True
        assert len(doc["reports"]) == 2

    def test_unknown_check_rejected(self, circle64, ahlfors1):
        with pytest.raises(ValueError, match="unknown check"):
            run_suite(circle64, sin_field(circle64), 2.0, ahlfors1, checks=("bogus",))

    def test_sierpinski_two_sided_informational(self):
        # fractal spaces get no asserted limit ratios, only a report
        sp = build_space(SpaceSpec("sierpinski", level=3))
        u = ScalarField(sp.coords[:, 0])
        reports = run_suite(
            sp,
            u,
            2.0,
            KernelSpec("rho1"),
            checks=("fubini", "mean", "annuli", "two-sided"),
            informational=("two-sided",),
        )
        by_name = {r.name: r for r in reports}
        assert by_name["fubini-layer-cake"].passed
        assert by_name["ball-mean-comparison"].passed
        assert by_name["annuli-tail-bound"].passed
        assert by_name["two-sided-limits"].passed  # informational never fails the suite
