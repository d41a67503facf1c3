import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vizcritic.backends import SpectralResidualSaliency, UniformSaliencyStub
from vizcritic.errors import BackendError, EmptyReference
from vizcritic.image_io import from_array
from vizcritic.saliency import (
    ReferenceDistribution,
    SaliencyMap,
    center_saliency_fraction,
    colormap_color,
    compute_saliency,
    parse_reference_distributions,
    percentile_flag,
    render_heatmap_overlay,
    text_saliency_ratio,
    transition_zone_coverage,
)
from vizcritic.textzones import TextBox

from conftest import solid


def make_map(values: np.ndarray) -> SaliencyMap:
    values = np.asarray(values, dtype=np.float64)
    return SaliencyMap(width=values.shape[1], height=values.shape[0], values=values, backend_id="test")


def box(x, y, w, h, content="t"):
    return TextBox(x=x, y=y, w=w, h=h, content=content, confidence=1.0)


class TestComputeSaliency:
    def test_uniform_stub_gives_all_ones(self):
        img = from_array(solid(64, 48, (10, 20, 30)))
        smap = compute_saliency(img, UniformSaliencyStub())
        assert smap.values.shape == (48, 64)
        assert np.all(smap.values == 1.0)

    def test_spectral_residual_deterministic(self):
        rng = np.random.default_rng(11)
        img = from_array(rng.integers(0, 256, (120, 160, 3)).astype(np.uint8))
        a = compute_saliency(img, SpectralResidualSaliency())
        b = compute_saliency(img, SpectralResidualSaliency())
        assert np.array_equal(a.values, b.values)

    def test_bright_square_attracts_argmax(self):
        # independent desk-scale spectral-residual oracle, written first:
        # exact 2x2 block-mean downsample to the working size, explicit 3x3
        # log-amplitude mean filter, explicit separable Gaussian. Both the
        # oracle's argmax and the backend's must land inside the square's
        # 5 px dilation ([35..54] x [55..74] for a square at 40..49/60..69).
        arr = np.zeros((96, 128, 3), dtype=np.uint8)
        arr[40:50, 60:70] = 255

        gray = arr.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
        small = gray.reshape(48, 2, 64, 2).mean(axis=(1, 3))
        spec = np.fft.fft2(small)
        log_amp = np.log(np.abs(spec) + 1e-12)
        padded = np.pad(log_amp, 1, mode="edge")
        box_mean = sum(
            padded[dy : dy + 48, dx : dx + 64] for dy in (0, 1, 2) for dx in (0, 1, 2)
        ) / 9.0
        sal = np.abs(np.fft.ifft2(np.exp(log_amp - box_mean + 1j * np.angle(spec)))) ** 2
        xs = np.arange(-8, 9)
        kernel = np.exp(-(xs**2) / (2 * 3.0**2))
        kernel /= kernel.sum()
        sal = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, sal)
        sal = np.apply_along_axis(lambda c: np.convolve(c, kernel, mode="same"), 0, sal)
        sy, sx = np.unravel_index(sal.argmax(), sal.shape)
        oy, ox = sy * 2, sx * 2
        assert 35 <= oy <= 54 and 55 <= ox <= 74, "oracle sanity"

        smap = compute_saliency(from_array(arr), SpectralResidualSaliency())
        my, mx = np.unravel_index(smap.values.argmax(), smap.values.shape)
        assert 35 <= my <= 54 and 55 <= mx <= 74

    def test_malformed_backend_output(self):
        class Bad:
            backend_id = "bad"

            def predict(self, png):
                return b"not a png"

        with pytest.raises(BackendError):
            compute_saliency(from_array(solid(64, 64, (0, 0, 0))), Bad())

    def test_wrong_dimensions_rejected(self):
        class WrongSize:
            backend_id = "wrong"

            def predict(self, png):
                import io

                from PIL import Image

                buf = io.BytesIO()
                Image.new("L", (10, 10)).save(buf, format="PNG")
                return buf.getvalue()

        with pytest.raises(BackendError):
            compute_saliency(from_array(solid(64, 64, (0, 0, 0))), WrongSize())


class TestCenterFraction:
    def test_uniform_300(self):
        # oracle: center rectangle is 100x100 of 300x300 -> 10000/90000
        smap = make_map(np.ones((300, 300)))
        assert center_saliency_fraction(smap) == pytest.approx(100 * 100 / 90000, abs=1e-12)

    def test_all_mass_in_center(self):
        values = np.zeros((99, 99))
        values[33:66, 33:66] = 1.0
        assert center_saliency_fraction(make_map(values)) == 1.0

    def test_all_mass_at_corner(self):
        values = np.zeros((120, 90))
        values[0, 0] = 1.0
        assert center_saliency_fraction(make_map(values)) == 0.0

    def test_zero_map(self):
        assert center_saliency_fraction(make_map(np.zeros((50, 50)))) == 0.0

    def test_uniform_equals_area_fraction_random_sizes(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            w = int(rng.integers(7, 320))
            h = int(rng.integers(7, 320))
            expected = (w // 3) * (h // 3) / (w * h)
            got = center_saliency_fraction(make_map(np.ones((h, w))))
            assert got == pytest.approx(expected, abs=1e-9)


class TestTextRatio:
    def test_uniform_map_ratio_one(self):
        smap = make_map(np.ones((100, 200)))
        boxes = [box(0, 0, 10, 10), box(50, 50, 30, 20), box(190, 90, 10, 10)]
        assert text_saliency_ratio(smap, boxes) == pytest.approx(1.0, abs=1e-9)

    def test_all_mass_in_half_area_boxes(self):
        # oracle: mass fraction 1.0 over area fraction 0.5 -> 2.0
        values = np.zeros((100, 100))
        values[:, :50] = 1.0
        smap = make_map(values)
        assert text_saliency_ratio(smap, [box(0, 0, 50, 100)]) == pytest.approx(2.0, abs=1e-9)

    def test_no_boxes_absent(self):
        assert text_saliency_ratio(make_map(np.ones((10, 10))), []) is None

    def test_zero_mass_absent(self):
        assert text_saliency_ratio(make_map(np.zeros((10, 10))), [box(0, 0, 5, 5)]) is None

    def test_overlapping_boxes_count_once(self):
        values = np.zeros((100, 100))
        values[:, :50] = 1.0
        smap = make_map(values)
        boxes = [box(0, 0, 50, 100), box(0, 0, 50, 100)]
        assert text_saliency_ratio(smap, boxes) == pytest.approx(2.0, abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        values = rng.random((60, 80))
        boxes = [box(5, 5, 20, 10), box(40, 30, 25, 15)]
        r1 = text_saliency_ratio(make_map(values), boxes)
        r2 = text_saliency_ratio(make_map(values * 37.5), boxes)
        assert r1 == pytest.approx(r2, abs=1e-9)


class TestTransitionCoverage:
    def test_two_color_uniform_map(self, half_red_blue):
        smap = make_map(np.ones((100, 200)))
        assert transition_zone_coverage(half_red_blue, smap) == 1.0

    def test_zero_map(self, half_red_blue):
        smap = make_map(np.zeros((100, 200)))
        assert transition_zone_coverage(half_red_blue, smap) == 0.0

    def test_solid_image_absent(self, white_image):
        smap = make_map(np.ones((150, 200)))
        assert transition_zone_coverage(white_image, smap) is None

    def test_color_swap_invariance(self, half_red_blue):
        swapped = half_red_blue.pixels.copy()
        left = swapped[:, :100].copy()
        swapped[:, :100] = swapped[:, 100:]
        swapped[:, 100:] = left
        rng = np.random.default_rng(1)
        values = rng.random((100, 200))
        a = transition_zone_coverage(half_red_blue, make_map(values))
        b = transition_zone_coverage(from_array(swapped), make_map(values))
        assert a == pytest.approx(b, abs=1e-12)

    def test_zone_geometry(self):
        # one vertical edge at x=100: zone is an 11-wide band around the
        # two transition columns (99..110 inclusive after dilation)
        arr = solid(200, 50, (0, 0, 0))
        arr[:, 100:] = (255, 255, 255)
        img = from_array(arr)
        values = np.zeros((50, 200))
        values[:, 94:117] = 1.0  # covers the whole band
        assert transition_zone_coverage(img, make_map(values)) == 1.0
        # mass just outside the band leaves coverage at 0
        values = np.zeros((50, 200))
        values[:, :90] = 1.0
        assert transition_zone_coverage(img, make_map(values)) == 0.0

    def test_below_threshold_no_transition(self):
        arr = solid(100, 50, (100, 100, 100))
        arr[:, 50:] = (110, 110, 110)  # distance ~17.3 < 30
        assert transition_zone_coverage(from_array(arr), make_map(np.ones((50, 100)))) is None


class TestPercentileFlag:
    def ref(self, samples):
        return ReferenceDistribution(metric_name="m", samples=tuple(sorted(samples)))

    def test_spec_example(self):
        # oracle: ceil(0.9 * 10) - 1 = 8 -> samples[8] = 9; 9.5 > 9
        ref = self.ref(range(1, 11))
        assert percentile_flag(9.5, ref, 90, "above") is True

    def test_below_minimum_never_above(self):
        ref = self.ref(range(1, 11))
        for pct in (1, 10, 50, 90, 99):
            assert percentile_flag(0.5, ref, pct, "above") is False

    def test_empty_reference(self):
        with pytest.raises(EmptyReference):
            ReferenceDistribution(metric_name="m", samples=())

    def test_matches_sort_and_index_oracle(self):
        import math

        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 40))
            samples = sorted(float(x) for x in rng.normal(0, 10, n))
            ref = self.ref(samples)
            pct = int(rng.integers(1, 100))
            metric = float(rng.normal(0, 10))
            pivot = samples[math.ceil(pct / 100 * n) - 1]
            assert percentile_flag(metric, ref, pct, "above") == (metric > pivot)
            assert percentile_flag(metric, ref, pct, "below") == (metric < pivot)

    @given(
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30),
        st.integers(1, 99),
        st.floats(-1e6, 1e6, allow_nan=False),
        st.floats(0, 1e5, allow_nan=False),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_metric(self, samples, pct, metric, bump):
        ref = self.ref(samples)
        if percentile_flag(metric, ref, pct, "above"):
            assert percentile_flag(metric + bump, ref, pct, "above")

    def test_direction_validation(self):
        with pytest.raises(ValueError):
            percentile_flag(1.0, self.ref([1.0]), 50, "sideways")
        with pytest.raises(ValueError):
            percentile_flag(1.0, self.ref([1.0]), 0, "above")


class TestHeatmapOverlay:
    def test_dimensions_preserved(self, half_red_blue):
        smap = make_map(np.random.default_rng(0).random((100, 200)))
        out = render_heatmap_overlay(half_red_blue, smap)
        assert (out.width, out.height) == (200, 100)

    def test_zero_map_uses_darkest_entry(self, white_image):
        smap = make_map(np.zeros((150, 200)))
        out = render_heatmap_overlay(white_image, smap)
        dark = colormap_color(0.0)
        expected = tuple(int(np.floor(0.5 * 255 + 0.5 * c + 0.5)) for c in dark)
        assert np.all(out.pixels == np.array(expected, dtype=np.uint8))

    def test_peak_uses_yellow_endpoint(self):
        img = from_array(solid(10, 10, (0, 0, 0)))
        smap = make_map(np.ones((10, 10)))
        out = render_heatmap_overlay(img, smap)
        assert colormap_color(1.0) == (255, 255, 0)
        expected = tuple(int(np.floor(0.5 * 0 + 0.5 * c + 0.5)) for c in (255, 255, 0))
        assert tuple(out.pixels[5, 5]) == expected


class TestReferenceParsing:
    def test_round_trip(self):
        text = "# comment\nalpha: 0.1 0.2 0.3\nbeta: 5 6\n"
        refs = parse_reference_distributions(text)
        assert refs["alpha"].samples == (0.1, 0.2, 0.3)
        assert refs["beta"].samples == (5.0, 6.0)

    def test_bundled_references_load(self):
        from vizcritic.saliency import load_default_references

        refs = load_default_references()
        assert {"text_ratio", "center_fraction", "transition_coverage"} <= set(refs)
        for ref in refs.values():
            assert len(ref.samples) >= 30


class TestCenterFractionBounds:
    @given(
        st.integers(3, 60),
        st.integers(3, 60),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=100, deadline=None)
    def test_center_fraction_in_unit_interval(self, w, h, seed):
        rng = np.random.default_rng(seed)
        smap = make_map(rng.random((h, w)))
        fraction = center_saliency_fraction(smap)
        assert 0.0 <= fraction <= 1.0
