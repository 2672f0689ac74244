import math

import numpy as np
import pytest

from trpplan.bounds import crlb_rmse_2d, fim
from trpplan.channel import NoiseModel, form_tdoa
from trpplan.estimator import SolveOptions, initial_guess, residual, solve_tdoa
from trpplan.scenario import (
    Deployment,
    LayoutTag,
    ScenarioFamily,
    ScenarioSpec,
    Trp,
    make_edge_deployment,
    make_standard_deployment,
    preset_scenario,
)


def noiseless_measurements(deployment, truth, ref=0, sigma=1e-9):
    toas = np.array([math.dist(truth, t.position) for t in deployment.trps])
    return form_tdoa(toas, ref, NoiseModel(sigma_toa=sigma))


@pytest.fixture
def ioo_edge():
    return make_edge_deployment(preset_scenario("IOO"), 12)


class TestResidual:
    def test_zero_at_truth(self, ioo_edge):
        truth = (40.0, 20.0, 1.5)
        ms = noiseless_measurements(ioo_edge, truth)
        r = residual(truth, ms, ioo_edge)
        assert np.max(np.abs(r)) < 1e-7

    def test_unit_square_hand_case(self):
        # Hand-checked residual for a 4-anchor 10 m square with the probe
        # at the center and measurements fabricated as all ones.
        sc = ScenarioSpec(
            family=ScenarioFamily.IOO,
            x_len=10.0,
            y_len=10.0,
            ceiling_height=3.0,
            trp_mount_height=3.0,
        )
        trps = tuple(
            Trp(id=i, position=p)
            for i, p in enumerate(
                [(0.0, 0.0, 1.5), (10.0, 0.0, 1.5), (10.0, 10.0, 1.5), (0.0, 10.0, 1.5)]
            )
        )
        dep = Deployment(scenario=sc, trps=trps, layout_tag=LayoutTag.CUSTOM)
        ms = noiseless_measurements(dep, (5.0, 5.0, 1.5))
        ms_ones = type(ms)(
            ref_trp=0,
            values=np.ones(3),
            covariance=ms.covariance,
            used_trps=(0, 1, 2, 3),
            sigma_toa=ms.sigma_toa,
        )
        # all distances equal at the center, so h = 0 and residual = y
        r = residual((5.0, 5.0, 1.5), ms_ones, dep)
        assert np.allclose(r, 1.0)

    def test_descent_from_init_to_solution(self, ioo_edge):
        rng = np.random.default_rng(4)
        truth = (77.0, 13.0, 1.5)
        toas = np.array([math.dist(truth, t.position) for t in ioo_edge.trps])
        toas = toas + rng.normal(0, 0.2, size=12)
        ms = form_tdoa(toas, 0, NoiseModel(sigma_toa=0.2))
        init = initial_guess(ms, ioo_edge)
        fix = solve_tdoa(ms, ioo_edge, init)
        r_inv = np.linalg.inv(ms.covariance)

        def wcost(t):
            r = residual(t, ms, ioo_edge)
            return float(r @ r_inv @ r)

        assert wcost(fix.estimate) <= wcost(init) + 1e-12


class TestInitialGuess:
    def test_within_lattice_spacing_of_truth(self, ioo_edge):
        truth = (62.0, 27.0, 1.5)
        ms = noiseless_measurements(ioo_edge, truth)
        guess = initial_guess(ms, ioo_edge)
        assert math.hypot(guess[0] - truth[0], guess[1] - truth[1]) <= 5.0

    def test_inside_hall(self, ioo_edge):
        rng = np.random.default_rng(9)
        sc = ioo_edge.scenario
        for _ in range(20):
            truth = (rng.uniform(0, 120), rng.uniform(0, 50), 1.5)
            ms = noiseless_measurements(ioo_edge, truth)
            g = initial_guess(ms, ioo_edge)
            assert 0 <= g[0] <= sc.x_len and 0 <= g[1] <= sc.y_len

    def test_deterministic(self, ioo_edge):
        ms = noiseless_measurements(ioo_edge, (30.0, 30.0, 1.5))
        assert initial_guess(ms, ioo_edge) == initial_guess(ms, ioo_edge)


class TestSolve:
    def test_noiseless_round_trip_exact_point(self, ioo_edge):
        truth = (30.0, 20.0, 1.5)
        ms = noiseless_measurements(ioo_edge, truth, sigma=1e-9)
        init = initial_guess(ms, ioo_edge)
        fix = solve_tdoa(ms, ioo_edge, init)
        assert fix.converged
        err = math.dist(fix.estimate, truth)
        assert err < 1e-4

    def test_round_trip_random_probes(self):
        rng = np.random.default_rng(77)
        n, ok = 150, 0
        for fam, make in (
            ("IOO", lambda s: make_standard_deployment(s, 12)),
            ("InF-DH", lambda s: make_edge_deployment(s, 12)),
        ):
            sc = preset_scenario(fam)
            dep = make(sc)
            for _ in range(n // 2):
                truth = (rng.uniform(0, sc.x_len), rng.uniform(0, sc.y_len), sc.ue_height)
                ms = noiseless_measurements(dep, truth, ref=int(rng.integers(12)))
                init = (rng.uniform(0, sc.x_len), rng.uniform(0, sc.y_len), sc.ue_height)
                fix = solve_tdoa(ms, dep, init)
                err = math.hypot(fix.estimate[0] - truth[0], fix.estimate[1] - truth[1])
                if err < 1e-3:
                    ok += 1
                else:
                    assert not fix.converged, "wrong fix must not claim convergence"
        assert ok >= 0.99 * n

    def test_efficiency_against_bound(self, ioo_edge):
        # Gaussian-only trials at a fixed point: the sample RMSE should sit
        # just above the information bound.
        truth = (45.0, 30.0, 1.5)
        sigma = 0.2
        noise = NoiseModel(sigma_toa=sigma)
        dists = np.array([math.dist(truth, t.position) for t in ioo_edge.trps])
        rng = np.random.default_rng(2024)
        errs = []
        for _ in range(1000):
            toas = dists + rng.normal(0, sigma, size=12)
            ms = form_tdoa(toas, 0, noise)
            fix = solve_tdoa(ms, ioo_edge, initial_guess(ms, ioo_edge))
            errs.append(
                math.hypot(fix.estimate[0] - truth[0], fix.estimate[1] - truth[1])
            )
        rmse = float(np.sqrt(np.mean(np.square(errs))))
        bound = crlb_rmse_2d(fim(truth, ioo_edge, 0, ms.covariance))
        assert 0.95 <= rmse / bound <= 1.3

    def test_translation_equivariance(self):
        sc = ScenarioSpec(
            family=ScenarioFamily.INF_SH,
            x_len=200.0,
            y_len=200.0,
            ceiling_height=12.0,
            trp_mount_height=8.0,
            clutter_density=0.2,
            clutter_size=10.0,
            clutter_height=6.0,
        )
        pts = [(30.0, 30.0, 8.0), (90.0, 25.0, 8.0), (85.0, 80.0, 8.0), (25.0, 85.0, 8.0), (60.0, 55.0, 8.0)]
        t = np.array([50.0, 60.0, 0.0])
        dep = Deployment(
            scenario=sc,
            trps=tuple(Trp(id=i, position=p) for i, p in enumerate(pts)),
            layout_tag=LayoutTag.CUSTOM,
        )
        dep_shift = Deployment(
            scenario=sc,
            trps=tuple(
                Trp(id=i, position=tuple(np.array(p) + t)) for i, p in enumerate(pts)
            ),
            layout_tag=LayoutTag.CUSTOM,
        )
        truth = np.array([55.0, 50.0, 1.5])
        ms = noiseless_measurements(dep, tuple(truth), sigma=1e-6)
        ms_shift = noiseless_measurements(dep_shift, tuple(truth + t), sigma=1e-6)
        init = (60.0, 60.0, 1.5)
        fix = solve_tdoa(ms, dep, init)
        fix_shift = solve_tdoa(ms_shift, dep_shift, tuple(np.array(init) + t))
        moved = np.array(fix.estimate) + t
        assert np.allclose(moved[:2], np.array(fix_shift.estimate)[:2], atol=1e-5)

    def test_3d_mode_recovers_height(self):
        # Elevated radios at two heights make the vertical observable.
        sc = preset_scenario("InF-SH")
        pts = [
            (20.0, 10.0, 8.0),
            (100.0, 10.0, 4.0),
            (100.0, 50.0, 8.0),
            (20.0, 50.0, 4.0),
            (60.0, 30.0, 9.0),
            (60.0, 15.0, 3.0),
        ]
        dep = Deployment(
            scenario=sc,
            trps=tuple(Trp(id=i, position=p) for i, p in enumerate(pts)),
            layout_tag=LayoutTag.CUSTOM,
        )
        truth = (55.0, 28.0, 1.2)
        ms = noiseless_measurements(dep, truth, sigma=1e-9)
        fix = solve_tdoa(ms, dep, (50.0, 25.0, 1.5), SolveOptions(solve_3d=True))
        assert math.dist(fix.estimate, truth) < 1e-2
        assert 0 <= fix.estimate[2] <= sc.ceiling_height

    def test_iteration_budget_respected(self, ioo_edge):
        truth = (99.0, 41.0, 1.5)
        ms = noiseless_measurements(ioo_edge, truth)
        fix = solve_tdoa(ms, ioo_edge, (1.0, 1.0, 1.5), SolveOptions(max_iterations=1))
        assert fix.iterations <= 2  # one per descent attempt

    def test_covariance_estimate_present(self, ioo_edge):
        truth = (60.0, 25.0, 1.5)
        ms = noiseless_measurements(ioo_edge, truth, sigma=0.2)
        fix = solve_tdoa(ms, ioo_edge, initial_guess(ms, ioo_edge))
        assert fix.covariance_estimate is not None
        assert fix.covariance_estimate.shape == (3, 3)
        # 2D solve: x/y block is meaningful, z untouched
        assert fix.covariance_estimate[2, 2] == 0.0
