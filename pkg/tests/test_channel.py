import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trpplan.channel import (
    STREAM_LOS,
    NoiseModel,
    UeDrop,
    UnavailableFixError,
    filter_los_only,
    form_tdoa,
    los_probability,
    nlos_excess_mean,
    rng_stream,
    sample_los_states,
    synthesize_toa,
    synthesize_toas,
)
from trpplan.scenario import (
    Deployment,
    LayoutTag,
    ScenarioFamily,
    ScenarioSpec,
    Trp,
    make_standard_deployment,
    preset_scenario,
)


def custom_inf(family, r, d_clutter=2.0, h_c=6.0):
    return ScenarioSpec(
        family=family,
        x_len=120.0,
        y_len=60.0,
        ceiling_height=10.0,
        trp_mount_height=8.0,
        clutter_density=r,
        clutter_size=d_clutter,
        clutter_height=h_c,
    )


class TestLosProbability:
    def test_colocated_is_certain(self):
        for fam in ("IOO", "InF-SH", "InF-DH"):
            sc = preset_scenario(fam)
            trp = Trp(id=0, position=(40.0, 20.0, sc.trp_mount_height))
            assert los_probability(sc, trp, (40.0, 20.0, sc.ue_height)) == 1.0

    def test_inf_dh_at_ten_meters(self):
        # Independent evaluation: exp(-d/k), k = -d_clutter/ln(1-r), so at
        # r=0.6, d_clutter=2, d=10 the value is exp(10*ln(0.4)/2) = 0.4^5.
        expected = 0.4**5
        assert expected == pytest.approx(0.01024)
        sc = preset_scenario("InF-DH")
        trp = Trp(id=0, position=(40.0, 20.0, 8.0))
        got = los_probability(sc, trp, (50.0, 20.0, 1.5))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_sparse_beats_dense_at_same_distance(self):
        sh, dh = preset_scenario("InF-SH"), preset_scenario("InF-DH")
        for d in np.linspace(1.0, 80.0, 40):
            trp_sh = Trp(id=0, position=(0.0, 0.0, 8.0))
            trp_dh = Trp(id=0, position=(0.0, 0.0, 8.0))
            p_sh = los_probability(sh, trp_sh, (d, 0.0, 1.5))
            p_dh = los_probability(dh, trp_dh, (d, 0.0, 1.5))
            assert p_sh > p_dh

    def test_strictly_decreasing_in_clutter_density(self):
        trp = Trp(id=0, position=(0.0, 0.0, 8.0))
        ue = (15.0, 0.0, 1.5)
        probs = [
            los_probability(custom_inf(ScenarioFamily.INF_SH, r), trp, ue)
            for r in (0.1, 0.2, 0.3, 0.39)
        ]
        assert all(a > b for a, b in zip(probs, probs[1:]))

    @given(
        fam=st.sampled_from(["IOO", "InF-SH", "InF-DH"]),
        x=st.floats(0, 120),
        y=st.floats(0, 50),
        tx=st.floats(0, 120),
        ty=st.floats(0, 50),
    )
    @settings(max_examples=200, deadline=None)
    def test_is_probability(self, fam, x, y, tx, ty):
        sc = preset_scenario(fam)
        trp = Trp(id=0, position=(tx, ty, sc.trp_mount_height))
        p = los_probability(sc, trp, (x, y, sc.ue_height))
        assert 0.0 <= p <= 1.0

    @given(
        fam=st.sampled_from(["IOO", "InF-SH", "InF-DH"]),
        tx=st.floats(0, 120),
        ty=st.floats(0, 50),
        angle=st.floats(0, 2 * math.pi),
        d1=st.floats(0, 60),
        d2=st.floats(0, 60),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_distance(self, fam, tx, ty, angle, d1, d2):
        sc = preset_scenario(fam)
        trp = Trp(id=0, position=(tx, ty, sc.trp_mount_height))
        lo, hi = sorted((d1, d2))
        u = (math.cos(angle), math.sin(angle))
        p_near = los_probability(sc, trp, (tx + lo * u[0], ty + lo * u[1], sc.ue_height))
        p_far = los_probability(sc, trp, (tx + hi * u[0], ty + hi * u[1], sc.ue_height))
        assert p_near >= p_far - 1e-12


def tiny_hall_deployment():
    """Four TRPs within certain-LOS range of the hall center."""
    sc = ScenarioSpec(
        family=ScenarioFamily.IOO,
        x_len=8.0,
        y_len=8.0,
        ceiling_height=3.0,
        trp_mount_height=3.0,
    )
    trps = tuple(
        Trp(id=i, position=pos)
        for i, pos in enumerate(
            [(3.0, 3.0, 3.0), (5.0, 3.0, 3.0), (3.0, 5.0, 3.0), (5.0, 5.0, 3.0)]
        )
    )
    return Deployment(scenario=sc, trps=trps, layout_tag=LayoutTag.CUSTOM)


class TestSampleLosStates:
    def test_certain_los_all_true(self):
        dep = tiny_hall_deployment()
        flags = sample_los_states(dep, (4.0, 4.0, 1.5), rng_stream(1, 0, STREAM_LOS))
        assert flags == (True, True, True, True)

    def test_deterministic_given_stream(self):
        dep = make_standard_deployment(preset_scenario("InF-SH"), 12)
        ue = (33.0, 21.0, 1.5)
        a = sample_los_states(dep, ue, rng_stream(9, 5, STREAM_LOS))
        b = sample_los_states(dep, ue, rng_stream(9, 5, STREAM_LOS))
        assert a == b

    def test_empirical_fraction_matches_probability(self):
        dep = make_standard_deployment(preset_scenario("InF-SH"), 12)
        ue = (40.0, 30.0, 1.5)
        n = 100_000
        hits = np.zeros(dep.n_trps)
        master = np.random.default_rng(123)
        for i in range(n):
            flags = sample_los_states(dep, ue, np.random.default_rng(master.integers(2**63)))
            hits += flags
        for i, trp in enumerate(dep.trps):
            p = los_probability(dep.scenario, trp, ue)
            assert abs(hits[i] / n - p) < 0.01


class TestSynthesizeToa:
    def test_three_four_five_triangle(self):
        dep = tiny_hall_deployment()
        sc = dep.scenario
        trp = Trp(id=0, position=(0.0, 0.0, 3.0))
        ue = UeDrop(position=(3.0, 4.0, 3.0), los_flags=(True, True, True, True))
        noise = NoiseModel(sigma_toa=1e-12, nlos_bias_mean=2.0)
        got = synthesize_toa(trp, ue, noise, rng_stream(0, 0, 3), scenario=sc)
        assert got == pytest.approx(5.0, abs=1e-9)

    def test_nlos_adds_positive_bias(self):
        dep = tiny_hall_deployment()
        trp = dep.trps[0]
        ue = UeDrop(position=(4.0, 4.0, 1.5), los_flags=(False, True, True, True))
        noise = NoiseModel(sigma_toa=1e-12, nlos_bias_mean=2.0)
        dist = math.dist(ue.position, trp.position)
        for k in range(20):
            got = synthesize_toa(trp, ue, noise, rng_stream(k, 0, 3), scenario=dep.scenario)
            assert got >= dist - 1e-9

    def test_sample_mean_near_distance(self):
        trp = Trp(id=0, position=(0.0, 0.0, 3.0))
        ue = UeDrop(position=(30.0, 40.0, 1.5), los_flags=(True,))
        sigma = 0.2
        noise = NoiseModel(sigma_toa=sigma)
        n = 100_000
        rng = rng_stream(5, 0, 3)
        values = [synthesize_toa(trp, ue, noise, rng) for _ in range(n)]
        dist = math.dist(ue.position, trp.position)
        assert abs(np.mean(values) - dist) < 3 * sigma / math.sqrt(n)

    def test_vectorized_matches_flags(self):
        dep = make_standard_deployment(preset_scenario("InF-DH"), 12)
        ue = UeDrop(position=(60.0, 30.0, 1.5), los_flags=(True,) * 6 + (False,) * 6)
        noise = NoiseModel(sigma_toa=1e-12, nlos_bias_mean=2.0)
        toas = synthesize_toas(dep, ue, noise, rng_stream(3, 1, 3))
        dists = np.array([math.dist(ue.position, t.position) for t in dep.trps])
        # LOS rows track the distance, blocked rows sit above it
        assert np.allclose(toas[:6], dists[:6], atol=1e-6)
        assert np.all(toas[6:] >= dists[6:] - 1e-9)

    def test_excess_scale_orders_halls(self):
        noise = NoiseModel()
        d = 40.0
        ioo = nlos_excess_mean(noise, d, preset_scenario("IOO"))
        sh = nlos_excess_mean(noise, d, preset_scenario("InF-SH"))
        dh = nlos_excess_mean(noise, d, preset_scenario("InF-DH"))
        assert ioo < sh < dh


class TestFormTdoa:
    def test_equidistant_gives_zero_vector(self):
        noise = NoiseModel(sigma_toa=1e-13)
        toas = np.full(6, 25.0)
        ms = form_tdoa(toas, ref_trp=2, noise=noise)
        assert np.allclose(ms.values, 0.0, atol=1e-9)
        assert ms.non_ref_trps == (0, 1, 3, 4, 5)

    def test_covariance_pattern_four_trps(self):
        sigma = 0.7
        ms = form_tdoa(np.array([10.0, 11.0, 12.0, 13.0]), 0, NoiseModel(sigma_toa=sigma))
        # Cov(e_j - e_ref, e_k - e_ref): 2 sigma^2 on the diagonal (the two
        # independent errors), sigma^2 off it (shared reference error).
        expected = sigma**2 * (np.eye(3) + np.ones((3, 3)))
        assert ms.covariance.shape == (3, 3)
        assert np.allclose(ms.covariance, expected)

    def test_clock_bias_cancels_exactly(self):
        toas = np.array([12.0, 15.5, 19.25, 31.0, 8.125])
        noise = NoiseModel()
        plain = form_tdoa(toas, 1, noise)
        shifted = form_tdoa(toas + 7.0, 1, noise)
        assert np.array_equal(plain.values, shifted.values)

    @given(
        n=st.integers(4, 16),
        sigma=st.floats(0.01, 5.0),
        delta=st.floats(-50, 50),
    )
    @settings(max_examples=100, deadline=None)
    def test_bias_cancellation_property(self, n, sigma, delta):
        rng = np.random.default_rng(n)
        toas = rng.uniform(5, 80, size=n)
        noise = NoiseModel(sigma_toa=sigma)
        # algebraically exact; float rounding of (toa + delta) leaves ulps
        assert np.allclose(
            form_tdoa(toas, 0, noise).values,
            form_tdoa(toas + delta, 0, noise).values,
            rtol=0,
            atol=1e-9,
        )

    @given(n=st.integers(4, 20), sigma=st.floats(0.01, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_covariance_inverse_identity(self, n, sigma):
        noise = NoiseModel(sigma_toa=sigma)
        ms = form_tdoa(np.arange(n, dtype=float) + 5.0, 0, noise)
        m = n - 1
        expected_inv = (np.eye(m) - np.ones((m, m)) / n) / sigma**2
        assert np.allclose(np.linalg.inv(ms.covariance), expected_inv, rtol=1e-9, atol=1e-12)

    def test_bad_reference_rejected(self):
        with pytest.raises(ValueError):
            form_tdoa(np.zeros(5), 5, NoiseModel())

    def test_too_few_trps(self):
        with pytest.raises(UnavailableFixError):
            form_tdoa(np.zeros(3), 0, NoiseModel())


class TestFilterLosOnly:
    def make_measurements(self, dep, ue, sigma=0.3):
        noise = NoiseModel(sigma_toa=sigma)
        toas = np.array([math.dist(ue.position, t.position) for t in dep.trps])
        los_ids = [i for i, f in enumerate(ue.los_flags) if f]
        ref = los_ids[0] if los_ids else 0
        return form_tdoa(toas, ref, noise)

    def test_all_los_is_identity(self):
        dep = make_standard_deployment(preset_scenario("IOO"), 12)
        ue = UeDrop(position=(50.0, 20.0, 1.5), los_flags=(True,) * 12)
        ms = self.make_measurements(dep, ue)
        out = filter_los_only(ms, ue, dep)
        assert out.used_trps == ms.used_trps
        assert out.ref_trp == ms.ref_trp
        assert np.allclose(out.values, ms.values)

    def test_three_los_unavailable(self):
        dep = make_standard_deployment(preset_scenario("IOO"), 12)
        flags = [False] * 12
        for i in (0, 5, 9):
            flags[i] = True
        ue = UeDrop(position=(50.0, 20.0, 1.5), los_flags=tuple(flags))
        ms = self.make_measurements(dep, ue)
        with pytest.raises(UnavailableFixError):
            filter_los_only(ms, ue, dep)

    def test_five_of_twelve_kept(self):
        dep = make_standard_deployment(preset_scenario("IOO"), 12)
        flags = [False] * 12
        for i in (1, 3, 6, 8, 11):
            flags[i] = True
        ue = UeDrop(position=(50.0, 20.0, 1.5), los_flags=tuple(flags))
        ms = self.make_measurements(dep, ue, sigma=0.4)
        out = filter_los_only(ms, ue, dep)
        assert len(out.values) == 4
        assert out.covariance.shape == (4, 4)
        expected = 0.4**2 * (np.eye(4) + np.ones((4, 4)))
        assert np.allclose(out.covariance, expected)
        assert set(out.used_trps) == {1, 3, 6, 8, 11}

    def test_rereference_preserves_differences(self):
        # Blocked reference: surviving rows must equal TOA differences
        # against the new reference, reconstructed independently here.
        dep = make_standard_deployment(preset_scenario("IOO"), 12)
        flags = [True] * 12
        flags[0] = False  # original reference loses line of sight
        ue = UeDrop(position=(14.0, 18.0, 1.5), los_flags=tuple(flags))
        noise = NoiseModel(sigma_toa=0.3)
        toas = np.array([math.dist(ue.position, t.position) for t in dep.trps])
        ms = form_tdoa(toas, 0, noise)
        out = filter_los_only(ms, ue, dep)
        assert out.ref_trp != 0
        assert 0 not in out.used_trps
        expected = np.array(
            [toas[j] - toas[out.ref_trp] for j in out.used_trps if j != out.ref_trp]
        )
        assert np.allclose(out.values, expected, atol=1e-9)

    def test_new_reference_is_nearest_los(self):
        dep = make_standard_deployment(preset_scenario("IOO"), 12)
        ue_pos = (14.0, 18.0, 1.5)
        flags = [True] * 12
        flags[0] = False
        ue = UeDrop(position=ue_pos, los_flags=tuple(flags))
        ms = self.make_measurements(dep, UeDrop(position=ue_pos, los_flags=(True,) * 12))
        out = filter_los_only(ms, ue, dep)
        los_dists = {
            i: math.dist(ue_pos, dep.trps[i].position) for i in range(1, 12)
        }
        assert out.ref_trp == min(los_dists, key=los_dists.get)


class TestRngStreams:
    def test_same_key_same_sequence(self):
        a = rng_stream(42, 7, 2).random(8)
        b = rng_stream(42, 7, 2).random(8)
        assert np.array_equal(a, b)

    def test_distinct_purposes_differ(self):
        a = rng_stream(42, 7, 1).random(8)
        b = rng_stream(42, 7, 2).random(8)
        assert not np.array_equal(a, b)

    def test_distinct_drops_differ(self):
        a = rng_stream(42, 0, 1).random(8)
        b = rng_stream(42, 1, 1).random(8)
        assert not np.array_equal(a, b)
