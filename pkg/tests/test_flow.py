"""
Tests for flow estimation, warping, warp accumulation and region propagation
"""
import numpy as np
import pytest
from scipy import ndimage

from qmd.errors import ConfigError, DimensionMismatchError, RejectedInputError
from qmd.flow import (
    FlowField,
    FlowParams,
    Warp,
    compose_chain,
    compose_warp,
    estimate_flow,
    estimate_region_flow,
    extend_flow,
    propagate_region,
    resize,
    warp_image,
)
from qmd.flow.warping import close_mask
from qmd.frames import RegionMask

from conftest import shifted_pair


def constant_flow(shape, u, v):
    return FlowField(np.full(shape, float(u)), np.full(shape, float(v)))


class TestTypes:

    def test_identity_warp_has_zero_displacement(self):
        d = Warp.identity((5, 7)).displacement()
        assert d.shape == (5, 7)
        assert np.all(d.u == 0) and np.all(d.v == 0)

    def test_from_flow_round_trips_displacement(self, rng):
        flow = FlowField(rng.normal(size=(6, 8)), rng.normal(size=(6, 8)))
        d = Warp.from_flow(flow).displacement()
        np.testing.assert_allclose(d.u, flow.u, atol=1e-12)
        np.testing.assert_allclose(d.v, flow.v, atol=1e-12)

    def test_component_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            FlowField(np.zeros((4, 4)), np.zeros((4, 5)))

    def test_non_finite_flow_rejected(self):
        u = np.zeros((4, 4))
        u[1, 1] = np.nan
        with pytest.raises(RejectedInputError):
            FlowField(u, np.zeros((4, 4)))

    def test_default_beta_from_dynamic_range(self):
        assert FlowParams().beta == pytest.approx((0.2 * 255.0) ** 2)
        assert FlowParams(dynamic_range=1.0).beta == pytest.approx(0.04)

    @pytest.mark.parametrize("kwargs", [{"scale_factor": 1.0}, {"pyramid_levels": 0}, {"beta": -1.0}])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            FlowParams(**kwargs)


class TestWarpImage:

    def test_integer_translation_samples_exactly(self, texture):
        frame = texture[:32, :32]
        warped = warp_image(frame, Warp.from_flow(constant_flow(frame.shape, 2, 1)))
        np.testing.assert_allclose(warped.values[:-1, :-2], frame[1:, 2:])
        assert warped.valid[:-1, :-2].all()
        assert not warped.valid[:, -1].any()
        assert not warped.valid[-1, :].any()

    def test_color_frames_keep_channels(self, texture):
        frame = np.stack([texture[:16, :16]] * 3, axis=-1)
        warped = warp_image(frame, Warp.identity((16, 16)))
        assert warped.values.shape == (16, 16, 3)
        np.testing.assert_allclose(warped.values, frame)

    def test_warp_then_inverse_warp_restores_the_frame(self, texture):
        frame = ndimage.gaussian_filter(texture, 2.0)[:64, :64]
        yy, xx = np.mgrid[0:64, 0:64].astype(np.float64)
        flow = FlowField(0.4 * np.sin(2 * np.pi * xx / 64.0), 0.4 * np.cos(2 * np.pi * yy / 64.0))
        there = warp_image(frame, Warp.from_flow(flow))
        back = warp_image(there.values, Warp.from_flow(flow.negated()))
        interior = (slice(4, -4), slice(4, -4))
        assert np.sqrt(np.mean((back.values[interior] - frame[interior]) ** 2)) < 2.0


class TestComposeWarp:

    def test_constant_flows_add(self):
        shape = (20, 20)
        flows = [constant_flow(shape, 0.5, -0.25) for _ in range(4)]
        warps = compose_chain(flows, shape)
        assert len(warps) == 5
        d = warps[-1].displacement()
        np.testing.assert_allclose(d.u[5:15, 5:15], 2.0)
        np.testing.assert_allclose(d.v[5:15, 5:15], -1.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            compose_warp(Warp.identity((8, 8)), FlowField.zeros((8, 9)))

    def test_five_step_chain_matches_functional_composition(self, rng):
        size = 64
        yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
        params = rng.uniform(-0.8, 0.8, size=(5, 4))
        phases = rng.uniform(0, 2 * np.pi, size=(5, 2))
        omega = 2 * np.pi / 64.0

        def field(i, x, y):
            a, b, c, d = params[i]
            u = a * np.sin(omega * x + phases[i, 0]) + b * np.cos(omega * y)
            v = c * np.cos(omega * y + phases[i, 1]) + d * np.sin(omega * x)
            return u, v

        flows = [FlowField(*field(i, xx, yy)) for i in range(5)]
        warp = compose_chain(flows, (size, size))[-1]

        px, py = xx.copy(), yy.copy()
        for i in range(5):
            u, v = field(i, px, py)
            px, py = px + u, py + v

        interior = (slice(12, -12), slice(12, -12))
        err = np.hypot(warp.map_x[interior] - px[interior], warp.map_y[interior] - py[interior])
        assert np.sqrt(np.mean(err ** 2)) < 0.1


class TestRegionPropagation:

    def test_square_follows_translation(self):
        shape = (32, 32)
        bits = np.zeros(shape, dtype=bool)
        bits[8:16, 8:16] = True
        moved = propagate_region(RegionMask(bits, frame_index=4), constant_flow(shape, 3, 0))
        expected = np.zeros(shape, dtype=bool)
        expected[8:16, 11:19] = True
        np.testing.assert_array_equal(moved.bits, expected)
        assert moved.frame_index == 5

    @pytest.mark.parametrize("dx,dy", [(1.5, 0.7), (-2.3, 1.2), (0.4, -3.6)])
    def test_area_survives_subpixel_translation(self, dx, dy):
        shape = (48, 48)
        yy, xx = np.mgrid[0:48, 0:48]
        disc = RegionMask((yy - 24) ** 2 + (xx - 22) ** 2 <= 81, frame_index=2)
        moved = propagate_region(disc, constant_flow(shape, dx, dy))
        assert moved.area == pytest.approx(disc.area, rel=0.15)

    def test_backward_flow_takes_precedence(self):
        shape = (32, 32)
        bits = np.zeros(shape, dtype=bool)
        bits[8:16, 8:16] = True
        moved = propagate_region(RegionMask(bits), constant_flow(shape, 0, 0),
                                 flow_bwd=constant_flow(shape, 0, -2), frame_index=9)
        assert moved.bits[10:18, 8:16].all()
        assert moved.area == 64
        assert moved.frame_index == 9

    def test_empty_mask_stays_empty(self):
        moved = propagate_region(RegionMask.empty((10, 10), 2), constant_flow((10, 10), 1, 1))
        assert moved.is_empty
        assert moved.frame_index == 3

    def test_close_mask_fills_pinhole(self):
        bits = np.ones((9, 9), dtype=bool)
        bits[4, 4] = False
        assert close_mask(bits).all()


class TestEstimateFlow:

    @pytest.mark.parametrize("dx,dy", [(1, 0), (2, 1), (-3, 2)])
    def test_recovers_translation(self, texture, dx, dy):
        a, b = shifted_pair(texture, dx, dy, size=64)
        flow = estimate_flow(a, b)
        interior = (slice(8, -8), slice(8, -8))
        err = np.hypot(flow.u[interior] - dx, flow.v[interior] - dy)
        assert np.median(err) < 0.5
        assert not flow.degenerate

    def test_identical_frames_give_near_zero_flow(self, texture):
        frame = texture[:48, :48]
        flow = estimate_flow(frame, frame)
        assert np.abs(flow.magnitude()).max() < 1e-6

    def test_empty_mask_gives_degenerate_zero_field(self, texture):
        frame = texture[:32, :32]
        flow = estimate_flow(frame, frame, mask=np.zeros((32, 32), dtype=bool))
        assert flow.degenerate
        assert not flow.u.any() and not flow.v.any()

    def test_masked_flow_is_extended_outside_the_mask(self, texture):
        a, b = shifted_pair(texture, 2, 0, size=64)
        mask = np.zeros((64, 64), dtype=bool)
        mask[16:48, 16:48] = True
        flow = estimate_flow(a, b, mask=mask)
        assert np.median(flow.u[mask]) == pytest.approx(2.0, abs=0.5)
        assert np.median(flow.u[~mask]) == pytest.approx(2.0, abs=0.75)

    def test_frame_shapes_must_match(self, texture):
        with pytest.raises(DimensionMismatchError):
            estimate_flow(texture[:32, :32], texture[:32, :30])

    def test_outlier_pixels_barely_move_the_flow(self, texture, rng):
        a, b = shifted_pair(texture, 2, 1, size=64)
        interior = (slice(8, -8), slice(8, -8))
        clean = estimate_flow(a, b)
        clean_err = np.median(np.hypot(clean.u[interior] - 2, clean.v[interior] - 1))

        corrupted = b.copy()
        hit = rng.random(b.shape) < 0.2
        corrupted[hit] += rng.choice([-1.0, 1.0], size=hit.sum()) * rng.uniform(60.0, 120.0, size=hit.sum())
        noisy = estimate_flow(a, corrupted)
        noisy_err = np.median(np.hypot(noisy.u[interior] - 2, noisy.v[interior] - 1))
        assert noisy_err <= max(2.0 * clean_err, 0.1)

    def test_equivariant_under_intensity_scaling(self, texture):
        a, b = shifted_pair(texture, 1, 2, size=64)
        flow = estimate_flow(a, b)
        scaled = estimate_flow(0.8 * a, 0.8 * b)
        interior = (slice(8, -8), slice(8, -8))
        diff = np.hypot(flow.u - scaled.u, flow.v - scaled.v)[interior]
        assert np.median(diff) < 0.05

    @pytest.mark.benchmark
    def test_translation_recovery_at_full_size(self, rng):
        from qmd.synth import band_limited_texture

        tex = band_limited_texture(rng, (160, 160))
        for shift in range(1, 6):
            a, b = shifted_pair(tex, shift, 0, size=128)
            flow = estimate_flow(a, b)
            interior = (slice(8, -8), slice(8, -8))
            assert np.median(np.hypot(flow.u[interior] - shift, flow.v[interior])) < 0.3


class TestEstimateRegionFlow:

    def test_recovers_translation(self, texture):
        a, b = shifted_pair(texture, 2, -1, size=64)
        flow = estimate_region_flow(a, b)
        interior = (slice(8, -8), slice(8, -8))
        assert np.median(np.hypot(flow.u[interior] - 2, flow.v[interior] + 1)) < 0.5
        assert flow.u.shape == a.shape

    def test_full_mask_reproduces_the_null_flow(self, texture):
        a, b = shifted_pair(texture, 1, 1, size=48)
        null = estimate_region_flow(a, b)
        full = estimate_region_flow(a, b, mask=np.ones((48, 48), dtype=bool))
        np.testing.assert_allclose(full.u, null.u, atol=1e-6)
        np.testing.assert_allclose(full.v, null.v, atol=1e-6)

    def test_masked_region_flow_is_extended(self, texture):
        a, b = shifted_pair(texture, 2, 0, size=64)
        bits = np.zeros((64, 64), dtype=bool)
        bits[16:48, 16:48] = True
        mask = RegionMask(bits)
        flow = estimate_region_flow(a, b, mask=mask)
        assert np.median(flow.u[mask.bits]) == pytest.approx(2.0, abs=0.5)
        assert np.median(flow.u[~mask.bits]) == pytest.approx(2.0, abs=0.75)

    def test_identical_frames_and_empty_mask(self, texture):
        frame = texture[:32, :32]
        assert np.abs(estimate_region_flow(frame, frame).magnitude()).max() < 1e-6
        empty = estimate_region_flow(frame, frame, mask=np.zeros((32, 32), dtype=bool))
        assert empty.degenerate


class TestHelpers:

    def test_resize_same_shape_copies(self):
        plane = np.arange(12.0).reshape(3, 4)
        out = resize(plane, (3, 4))
        np.testing.assert_array_equal(out, plane)
        assert out is not plane

    def test_resize_constant_stays_constant(self):
        out = resize(np.full((10, 10), 7.0), (5, 5))
        np.testing.assert_allclose(out, 7.0)

    def test_extend_flow_keeps_known_values(self):
        plane = np.zeros((16, 16))
        known = np.zeros((16, 16), dtype=bool)
        known[4:12, 4:12] = True
        plane[known] = 1.5
        out = extend_flow(plane, known)
        np.testing.assert_allclose(out[known], 1.5)
        np.testing.assert_allclose(out, 1.5, atol=1e-6)
