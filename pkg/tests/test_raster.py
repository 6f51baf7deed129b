import numpy as np
import pytest

from hmegen._kernels import (
    NUMBA_ENABLED,
    _stamp_polyline_loops,
    stamp_polyline_njit,
    stamp_polyline_numpy,
)
from hmegen.ink import OnlineHME, Stroke, Symbol
from hmegen.raster import Image, RasterConfig, draw_segment, rasterize, read_pgm, write_pgm


def seg_dist_sq(px, py, x0, y0, x1, y1):
    dx = x1 - x0
    dy = y1 - y0
    l2 = dx * dx + dy * dy
    if l2 > 0.0:
        t = ((px - x0) * dx + (py - y0) * dy) / l2
        t = min(1.0, max(0.0, t))
    else:
        t = 0.0
    ex = px - (x0 + t * dx)
    ey = py - (y0 + t * dy)
    return ex * ex + ey * ey


def ink_only_hme(strokes: list[list[tuple[float, float]]]) -> OnlineHME:
    return OnlineHME(
        [Stroke(pts) for pts in strokes],
        [Symbol(f"s{i}", "x", (i,)) for i in range(len(strokes))],
        None,
        "",
    )


class TestRasterize:
    def test_horizontal_stroke_has_three_ink_rows(self):
        img = rasterize(ink_only_hme([[(0.0, 5.0), (40.0, 5.0)]]))
        ink_rows = np.where((img.pixels == 0).any(axis=1))[0]
        assert len(ink_rows) == 3
        assert list(ink_rows) == [63, 64, 65]  # mid-height of the default 128

    def test_deterministic(self):
        hme = ink_only_hme([[(0, 0), (30, 18), (55, 3)], [(10, 20), (40, 25)]])
        a = rasterize(hme)
        b = rasterize(hme)
        assert np.array_equal(a.pixels, b.pixels)

    def test_single_dot_disc(self):
        img = rasterize(ink_only_hme([[(3.0, 4.0)]]))
        ink = np.argwhere(img.pixels == 0)
        assert len(ink) == 9  # 3x3 block: every offset within radius 1.5
        rows, cols = ink[:, 0], ink[:, 1]
        assert rows.max() - rows.min() == 2
        assert cols.max() - cols.min() == 2

    def test_ink_height_fills_band(self):
        config = RasterConfig()
        img = rasterize(ink_only_hme([[(0, 0), (35, 90)]]), config)
        ink_rows = np.where((img.pixels == 0).any(axis=1))[0]
        height = ink_rows.max() - ink_rows.min() + 1
        want = config.target_height - 2 * config.margin
        assert abs(height - want) <= 1

    def test_width_capped(self):
        config = RasterConfig(target_height=64, max_width=100, margin=4)
        img = rasterize(ink_only_hme([[(0, 0), (4000, 10)]]), config)
        assert img.width <= 100

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no ink"):
            rasterize(OnlineHME([], [], None, ""))

    def test_no_stray_pixels_known_transform(self):
        # vertical 17-unit stroke, band height 24-4-3=17: scale is exactly 1,
        # so the image-space segment is x=4, y in [3.5, 20.5]
        config = RasterConfig(target_height=24, margin=2, thickness=3)
        img = rasterize(ink_only_hme([[(0.0, 0.0), (0.0, 17.0)]]), config)
        assert img.width == 7
        for r, c in np.argwhere(img.pixels == 0):
            assert seg_dist_sq(c, r, 4.0, 3.5, 4.0, 20.5) <= (1.5 + 0.71) ** 2


class TestDrawSegment:
    def blank(self, side=48):
        return Image(np.full((side, side), 255, dtype=np.uint8))

    def test_point_segment_is_disc(self):
        img = draw_segment(self.blank(), (20.0, 20.0), (20.0, 20.0), 3.0)
        ink = np.argwhere(img.pixels == 0)
        assert len(ink) == 9

    def test_horizontal_pixel_count(self):
        length = 20.0
        img = draw_segment(self.blank(), (5.0, 10.0), (5.0 + length, 10.0), 3.0)
        count = int((img.pixels == 0).sum())
        assert abs(count - 3 * length) <= 2 * 3 * 3

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_distance_oracle_exactly(self, seed):
        rng = np.random.default_rng(seed)
        p0 = tuple(rng.uniform(5, 43, size=2))
        p1 = tuple(rng.uniform(5, 43, size=2))
        img = draw_segment(self.blank(), p0, p1, 3.0)
        for r in range(img.height):
            for c in range(img.width):
                expected = seg_dist_sq(c, r, *p0, *p1) <= 1.5 * 1.5
                assert (img.pixels[r, c] == 0) == expected, (r, c)

    def test_clamped_to_bounds(self):
        img = draw_segment(self.blank(16), (-10.0, 8.0), (30.0, 8.0), 3.0)
        assert img.pixels.shape == (16, 16)
        assert (img.pixels[7:10, :] == 0).all()


class TestKernels:
    def polyline(self, rng, n=12):
        xs = rng.uniform(2, 60, size=n)
        ys = rng.uniform(2, 60, size=n)
        return xs, ys

    def test_numpy_and_loop_paths_identical(self):
        rng = np.random.default_rng(77)
        for _ in range(3):
            xs, ys = self.polyline(rng)
            a = np.full((64, 64), 255, dtype=np.uint8)
            b = a.copy()
            stamp_polyline_numpy(a, xs, ys, 1.5, 0)
            fn = stamp_polyline_njit if NUMBA_ENABLED else _stamp_polyline_loops
            fn(b, xs, ys, 1.5, 0)
            assert np.array_equal(a, b)

    @pytest.mark.skipif(not NUMBA_ENABLED, reason="numba disabled or unavailable")
    def test_njit_path_is_compiled(self):
        assert hasattr(stamp_polyline_njit, "signatures")


class TestPgm:
    def test_round_trip(self, tmp_path):
        img = rasterize(ink_only_hme([[(0, 0), (10, 5), (20, 0)]]))
        path = tmp_path / "out.pgm"
        write_pgm(img, path)
        back = read_pgm(path)
        assert back.width == img.width and back.height == img.height
        assert np.array_equal(back.pixels, img.pixels)

    def test_header(self, tmp_path):
        img = Image(np.zeros((2, 3), dtype=np.uint8))
        path = tmp_path / "t.pgm"
        write_pgm(img, path)
        assert path.read_bytes().startswith(b"P5\n3 2\n255\n")
