import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maccfd.channel import (
    LINK_ORDER,
    LinkGeometry,
    PathAngles,
    SystemParams,
    channel_coefficient,
    channel_coefficients,
    cscg,
    db_to_linear,
    dbm_to_mw,
    field_response,
    propagation_distance_diff,
    sample_geometry,
)

half_pi = math.pi / 2
angle = st.floats(-half_pi, half_pi)
coord = st.floats(-5, 5)


class TestPropagationDistance:
    def test_origin_is_reference(self):
        assert propagation_distance_diff((0, 0), PathAngles(0.3, -1.1)) == 0

    def test_broadside_x(self):
        assert propagation_distance_diff((1, 0), PathAngles(0, half_pi)) == pytest.approx(1.0, abs=1e-15)

    def test_oblique(self):
        # 0.5*cos(pi/6)*sin(pi/6) + 0.5*sin(pi/6)
        expected = 0.5 * (math.sqrt(3) / 2) * 0.5 + 0.5 * 0.5
        got = propagation_distance_diff((0.5, 0.5), PathAngles(math.pi / 6, math.pi / 6))
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(0.466506, abs=1e-6)

    def test_angle_domain_enforced(self):
        with pytest.raises(ValueError):
            PathAngles(2.0, 0.0)


class TestFieldResponse:
    def test_origin_all_ones(self):
        angles = [PathAngles(0.1, 0.2), PathAngles(-0.4, 1.0), PathAngles(1.2, -0.3)]
        np.testing.assert_array_equal(field_response((0, 0), angles), np.ones(3, dtype=complex))

    def test_quarter_wavelength(self):
        got = field_response((0.25, 0), [PathAngles(0, half_pi)])
        assert got[0] == pytest.approx(1j, abs=1e-15)

    def test_composes_with_distance(self):
        paths = [PathAngles(math.pi / 6, math.pi / 6), PathAngles(0, 0)]
        rho = propagation_distance_diff((0.5, 0.5), paths[0])
        got = field_response((0.5, 0.5), paths)
        np.testing.assert_allclose(got, [np.exp(2j * math.pi * rho), 1.0], atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            field_response((0, 0), [])

    def test_unit_modulus_random(self):
        rng = np.random.default_rng(1)
        pos = rng.uniform(-3, 3, size=(1000, 2))
        angles = rng.uniform(-half_pi, half_pi, size=(7, 2))
        resp = field_response(pos, angles)
        assert resp.shape == (1000, 7)
        np.testing.assert_allclose(np.abs(resp), 1.0, atol=1e-12)

    @given(x=coord, y=coord, el=angle, az=angle)
    def test_unit_modulus_property(self, x, y, el, az):
        assert abs(abs(field_response((x, y), [PathAngles(el, az)])[0]) - 1) < 1e-12


class TestChannelCoefficient:
    def test_single_path_at_origin_is_sigma(self):
        link = LinkGeometry(aods=[[0.2, 0.3]], aoas=[[-0.5, 0.9]], sigma=[[0.3 - 0.4j]])
        assert channel_coefficient((0, 0), (0, 0), link) == pytest.approx(0.3 - 0.4j)

    @settings(max_examples=200)
    @given(tx=coord, ty=coord, rx=coord, ry=coord, a=st.lists(angle, min_size=4, max_size=4))
    def test_single_path_magnitude_invariant(self, tx, ty, rx, ry, a):
        link = LinkGeometry(aods=[a[:2]], aoas=[a[2:]], sigma=[[1.5 + 2j]])
        h = channel_coefficient((tx, ty), (rx, ry), link)
        assert abs(h) == pytest.approx(2.5, rel=1e-10)

    def test_two_paths_identity(self):
        link = LinkGeometry(aods=[[0.1, 0.2], [0.3, 0.4]], aoas=[[0.5, 0.6], [-0.7, 0.8]], sigma=np.eye(2))
        # direct matrix product oracle
        f = np.ones(2)
        g = np.ones(2)
        assert channel_coefficient((0, 0), (0, 0), link) == pytest.approx(complex(f.conj() @ np.eye(2) @ g))
        assert channel_coefficient((0, 0), (0, 0), link) == pytest.approx(2 + 0j)

    def test_origin_equals_trace_of_sigma(self, chan):
        for key in LINK_ORDER:
            link = chan[key]
            assert channel_coefficient((0, 0), (0, 0), link) == pytest.approx(np.trace(link.sigma), rel=1e-12)

    def test_matches_explicit_sum(self, chan):
        link = chan[("A", "B")]
        t, r = np.array([0.13, -0.41]), np.array([-0.22, 0.37])
        total = 0j
        for l in range(link.num_tx_paths):
            el_t, az_t = link.aods[l]
            el_r, az_r = link.aoas[l]
            rho_t = t[0] * math.cos(el_t) * math.sin(az_t) + t[1] * math.sin(el_t)
            rho_r = r[0] * math.cos(el_r) * math.sin(az_r) + r[1] * math.sin(el_r)
            total += np.conj(np.exp(2j * math.pi * rho_r)) * link.sigma[l, l] * np.exp(2j * math.pi * rho_t)
        assert channel_coefficient(t, r, link) == pytest.approx(total, rel=1e-12)
        batched = channel_coefficients(t[None], r[None], link)
        assert batched[0] == pytest.approx(total, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            LinkGeometry(aods=[[0, 0], [0, 0]], aoas=[[0, 0]], sigma=np.eye(2))

    def test_non_finite_sigma_rejected(self):
        with pytest.raises(ValueError):
            LinkGeometry(aods=[[0, 0]], aoas=[[0, 0]], sigma=[[np.nan]])


class TestUnits:
    def test_zero_db(self):
        assert db_to_linear(0) == 1.0

    def test_si_loss(self):
        assert db_to_linear(-90) == pytest.approx(1e-9, rel=1e-12)

    def test_transmit_power(self):
        assert dbm_to_mw(20) == pytest.approx(100.0, rel=1e-12)
        assert dbm_to_mw(-80) == pytest.approx(1e-8, rel=1e-12)


class TestSystemParams:
    def test_defaults(self, params):
        assert params.transmit_power == 100.0
        assert params.noise_power == pytest.approx(1e-8)
        assert params.si_loss_rho == pytest.approx(1e-9)
        assert params.soi_pathloss_beta == pytest.approx(1e-3)
        assert (params.pathloss_exponent_alpha, params.distance_d_pq) == (2.8, 100.0)
        assert (params.num_si_paths, params.num_soi_paths, params.region_size_d) == (5, 10, 1.0)

    def test_path_variances(self, params):
        assert params.si_path_variance == pytest.approx(2e-10, rel=1e-12)
        # dB route: -30 dB - 28*log10(100)... = -96 dB, minus 10 dB for 10 paths
        soi_db = -30 - 10 * 2.8 * math.log10(100) - 10 * math.log10(10)
        assert params.soi_path_variance == pytest.approx(10 ** (soi_db / 10), rel=1e-12)
        assert params.soi_path_variance == pytest.approx(2.5119e-10, rel=1e-4)

    @pytest.mark.parametrize("kwargs", [
        {"transmit_power": 0}, {"noise_power": -1}, {"num_si_paths": 0},
        {"num_soi_paths": 2.5}, {"region_size_d": -0.1}, {"si_loss_rho": float("inf")},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SystemParams(**kwargs)


class TestSampleGeometry:
    def test_deterministic(self, params):
        a = sample_geometry(99, params)
        b = sample_geometry(99, params)
        assert a == b
        for key in LINK_ORDER:
            assert a[key].sigma.tobytes() == b[key].sigma.tobytes()
            assert a[key].aods.tobytes() == b[key].aods.tobytes()

    def test_different_seeds_differ(self, params):
        assert sample_geometry(1, params) != sample_geometry(2, params)

    def test_structure(self, chan, params):
        assert set(chan.links) == set(LINK_ORDER)
        for (p, q), link in chan.links.items():
            L = params.num_si_paths if p == q else params.num_soi_paths
            assert link.aods.shape == (L, 2) and link.aoas.shape == (L, 2)
            assert link.sigma.shape == (L, L)
            off = link.sigma - np.diag(np.diagonal(link.sigma))
            assert np.count_nonzero(off) == 0
            assert np.all(np.abs(link.aods) <= math.pi / 2) and np.all(np.abs(link.aoas) <= math.pi / 2)

    def test_si_path_count_leaves_soi_links_alone(self, params):
        from dataclasses import replace
        a = sample_geometry(5, params)
        b = sample_geometry(5, replace(params, num_si_paths=12))
        assert a[("A", "B")] == b[("A", "B")] and a[("B", "A")] == b[("B", "A")]
        assert b[("A", "A")].num_tx_paths == 12

    def test_immutable(self, chan):
        with pytest.raises(ValueError):
            chan[("A", "A")].sigma[0, 0] = 1.0

    def test_path_sum(self, chan):
        # 2 SI links: 5*5+5, 2 SoI links: 10*10+10
        assert chan.path_sum == 2 * 30 + 2 * 110

    def test_empirical_variance(self, params):
        si, soi = [], []
        for seed in range(20_000):
            c = sample_geometry(seed, params)
            si.append(np.diagonal(c[("A", "A")].sigma))
            soi.append(np.diagonal(c[("A", "B")].sigma))
        si, soi = np.concatenate(si), np.concatenate(soi)
        assert si.size == 100_000
        assert np.mean(np.abs(si) ** 2) == pytest.approx(2e-10, rel=0.03)
        assert np.mean(np.abs(soi) ** 2) == pytest.approx(params.soi_path_variance, rel=0.03)
        # circular symmetry: real and imaginary parts each carry half the power
        assert np.var(si.real) == pytest.approx(1e-10, rel=0.03)
        assert abs(np.mean(si)) < 3 * math.sqrt(2e-10 / si.size)

    def test_box_muller_map(self):
        rng = np.random.default_rng(3)
        z = cscg(rng.random(200_000), rng.random(200_000), 4.0)
        assert np.var(z.real) == pytest.approx(2.0, rel=0.02)
        assert np.var(z.imag) == pytest.approx(2.0, rel=0.02)
        assert abs(np.corrcoef(z.real, z.imag)[0, 1]) < 0.01
