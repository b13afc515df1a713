import numpy as np
import pytest
from scipy import ndimage

from linedensity import (
    AnnotationSet,
    DensityMap,
    KernelConfig,
    LineLabel,
    Point2,
    agk_density_map,
    count_from_density,
    density_map,
    dot_density_map,
    isotropic_patch,
    line_density_map,
    load_dmap,
    midpoint,
    save_dmap,
    save_pgm,
)
from tests.conftest import random_annotation


def line(x1, y1, x2, y2):
    return LineLabel(Point2(x1, y1), Point2(x2, y2))


ALL_GENERATORS = [dot_density_map, line_density_map, agk_density_map]


class TestDensityMapType:
    def test_shape_must_match(self):
        with pytest.raises(ValueError):
            DensityMap(4, 3, np.zeros((4, 3)))

    def test_negative_values_rejected(self):
        values = np.zeros((3, 4))
        values[1, 1] = -0.5
        with pytest.raises(ValueError):
            DensityMap(4, 3, values)


class TestCountFromDensity:
    def test_zero_map(self):
        assert count_from_density(DensityMap(8, 8, np.zeros((8, 8)))) == 0.0

    def test_not_rounded(self):
        values = np.zeros((4, 4))
        values[0, 0] = 6.7
        assert count_from_density(DensityMap(4, 4, values)) == pytest.approx(6.7)

    def test_agk_ground_truth(self, fig3_config):
        rng = np.random.default_rng(20)
        ann = random_annotation(rng, 128, 128, 7, max_length=40)
        dmap = agk_density_map(ann, fig3_config)
        assert count_from_density(dmap) == pytest.approx(7.0, abs=1e-5)


class TestDotDensityMap:
    def test_empty_annotation(self, fig3_config):
        dmap = dot_density_map(AnnotationSet("e", 16, 16, ()), fig3_config)
        assert dmap.values.sum() == 0.0

    def test_21_labels_sum_21(self, fig3_config):
        rng = np.random.default_rng(21)
        ann = random_annotation(rng, 256, 256, 21, max_length=30)
        dmap = dot_density_map(ann, fig3_config)
        assert count_from_density(dmap) == pytest.approx(21.0, abs=1e-6)

    def test_single_center_label_equals_patch(self, fig3_config):
        lb = line(28, 30, 36, 34)
        ann = AnnotationSet("one", 64, 64, (lb,))
        dmap = dot_density_map(ann, fig3_config)
        patch = isotropic_patch(midpoint(lb), fig3_config.sigma_basic, fig3_config)
        expected = np.zeros((64, 64))
        ox, oy = patch.origin
        expected[oy : oy + patch.height, ox : ox + patch.width] = patch.values
        assert np.abs(dmap.values - expected).max() < 1e-12

    def test_corner_label_renormalized(self, fig3_config):
        ann = AnnotationSet("c", 30, 30, (line(0, 0, 0, 0),))
        dmap = dot_density_map(ann, fig3_config)
        assert dmap.values.sum() == pytest.approx(1.0, abs=1e-9)


class TestLineDensityMap:
    def test_fig3_blob_sums_to_one(self, fig3_config, fig3_annotation):
        dmap = line_density_map(fig3_annotation, fig3_config)
        assert dmap.values.sum() == pytest.approx(1.0, abs=1e-6)
        # the blob leans along the diagonal: more mass on it than across it
        diag = sum(dmap.values[i, i] for i in range(30))
        anti = sum(dmap.values[i, 29 - i] for i in range(30))
        assert diag > anti

    def test_empty(self, fig3_config):
        dmap = line_density_map(AnnotationSet("e", 16, 16, ()), fig3_config)
        assert dmap.values.sum() == 0.0

    def test_each_disjoint_blob_sums_to_one(self):
        cfg = KernelConfig(sigma_basic=1.5, trunc_mult=3.0)
        labels = (line(20, 20, 28, 24), line(90, 30, 95, 40), line(40, 100, 52, 100))
        ann = AnnotationSet("three", 128, 128, labels)
        dmap = line_density_map(ann, cfg)
        assert dmap.values.sum() == pytest.approx(3.0, abs=1e-6)
        blobs, n_blobs = ndimage.label(dmap.values > 0)
        assert n_blobs == 3
        for blob_id in range(1, n_blobs + 1):
            mass = dmap.values[blobs == blob_id].sum()
            assert mass == pytest.approx(1.0, abs=1e-6)


class TestAgkDensityMap:
    def test_fig3_oval(self, fig3_config, fig3_annotation):
        dmap = agk_density_map(fig3_annotation, fig3_config)
        assert dmap.values.sum() == pytest.approx(1.0, abs=1e-6)
        peak_y, peak_x = np.unravel_index(dmap.values.argmax(), dmap.values.shape)
        assert (peak_x, peak_y) == (15, 15)
        # elongated along the line: the value 6 px along the diagonal beats 6 px across
        d = 6 / np.sqrt(2)
        along = dmap.values[round(15 + d), round(15 + d)]
        across = dmap.values[round(15 - d), round(15 + d)]
        assert along > across

    def test_rotated_annotation_rotates_map(self, fig3_config):
        rng = np.random.default_rng(22)
        size = 96
        ann = random_annotation(rng, size, size, 5, max_length=30)
        rot_labels = tuple(
            LineLabel(
                Point2(lb.a.y, size - 1 - lb.a.x),
                Point2(lb.b.y, size - 1 - lb.b.x),
            )
            for lb in ann.labels
        )
        ann_rot = AnnotationSet("r", size, size, rot_labels)
        base = agk_density_map(ann, fig3_config)
        turned = agk_density_map(ann_rot, fig3_config)
        assert np.abs(np.rot90(base.values) - turned.values).max() < 1e-6

    def test_degenerate_label_falls_back_to_dot(self, fig3_config):
        short = line(40.0, 40.0, 40.3, 40.2)  # length < 1 px
        ann = AnnotationSet("d", 96, 96, (short,))
        via_agk = agk_density_map(ann, fig3_config)
        via_dot = dot_density_map(ann, fig3_config)
        assert np.abs(via_agk.values - via_dot.values).max() < 1e-9

    def test_21_label_scene(self, fig3_config):
        rng = np.random.default_rng(23)
        ann = random_annotation(rng, 512, 512, 21, max_length=60)
        dmap = agk_density_map(ann, fig3_config)
        assert count_from_density(dmap) == pytest.approx(21.0, abs=1e-4)


class TestSharedInvariants:
    @pytest.mark.parametrize("generator", ALL_GENERATORS)
    def test_non_negative(self, generator, fig3_config):
        rng = np.random.default_rng(24)
        ann = random_annotation(rng, 128, 128, 12, max_length=50)
        assert generator(ann, fig3_config).values.min() >= 0.0

    @pytest.mark.parametrize("generator", ALL_GENERATORS)
    def test_translation_equivariance_exact(self, generator, fig3_config):
        # integer endpoints with dyadic dy/dx keep all arithmetic exact
        labels = (
            line(20, 30, 30, 35),
            line(40, 20, 32, 28),
            line(22, 50, 38, 46),
        )
        shift_x, shift_y = 13, 7
        shifted = tuple(
            line(lb.a.x + shift_x, lb.a.y + shift_y, lb.b.x + shift_x, lb.b.y + shift_y)
            for lb in labels
        )
        base = generator(AnnotationSet("b", 128, 128, labels), fig3_config)
        moved = generator(AnnotationSet("m", 128, 128, shifted), fig3_config)
        assert np.array_equal(
            base.values[5:100, 5:100],
            moved.values[5 + shift_y : 100 + shift_y, 5 + shift_x : 100 + shift_x],
        )

    def test_locality(self, fig3_config):
        # all mass stays inside the union of the per-label kernel windows
        labels = (line(30, 30, 44, 38), line(80, 90, 92, 84))
        ann = AnnotationSet("loc", 160, 160, labels)
        dmap = agk_density_map(ann, fig3_config)
        mask = np.zeros((160, 160), dtype=bool)
        for lb in labels:
            from linedensity import agk_sigmas, line_length

            sigma1, _ = agk_sigmas(lb, fig3_config)
            # window radius: max of the length square and the truncation rule
            length = line_length(lb)
            r = int(np.ceil(max(length / 2, fig3_config.trunc_mult * sigma1))) + 1
            mx, my = round(midpoint(lb).x), round(midpoint(lb).y)
            mask[max(my - r, 0) : my + r + 1, max(mx - r, 0) : mx + r + 1] = True
        outside = dmap.values[~mask].sum()
        assert outside < 1e-6 * dmap.values.sum()


class TestDispatch:
    def test_by_name(self, fig3_config, fig3_annotation):
        for scheme in ("dot", "line", "agk"):
            dmap = density_map(fig3_annotation, fig3_config, scheme)
            assert count_from_density(dmap) == pytest.approx(1.0, abs=1e-6)

    def test_unknown_scheme(self, fig3_config, fig3_annotation):
        with pytest.raises(ValueError, match="unknown scheme"):
            density_map(fig3_annotation, fig3_config, "blob")


class TestDmapFormat:
    def test_round_trip(self, tmp_path, fig3_config, fig3_annotation):
        dmap = agk_density_map(fig3_annotation, fig3_config)
        path = tmp_path / "fig3.dmap"
        save_dmap(path, dmap)
        loaded = load_dmap(path)
        assert (loaded.width, loaded.height) == (30, 30)
        # values survive up to float32 quantization
        assert np.abs(loaded.values - dmap.values).max() < 1e-7
        assert count_from_density(loaded) == pytest.approx(1.0, abs=1e-5)

    def test_header_layout(self, tmp_path):
        values = np.arange(6, dtype=np.float64).reshape(2, 3)
        path = tmp_path / "t.dmap"
        save_dmap(path, DensityMap(3, 2, values))
        raw = path.read_bytes()
        assert raw[:4] == b"DMAP"
        assert int.from_bytes(raw[4:8], "little") == 3
        assert int.from_bytes(raw[8:12], "little") == 2
        assert len(raw) == 12 + 4 * 6
        assert np.frombuffer(raw, "<f4", offset=12).tolist() == [0, 1, 2, 3, 4, 5]

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.dmap"
        path.write_bytes(b"XXXX" + b"\0" * 20)
        with pytest.raises(ValueError, match="not a DMAP file"):
            load_dmap(path)

    def test_truncated(self, tmp_path, fig3_config, fig3_annotation):
        path = tmp_path / "trunc.dmap"
        save_dmap(path, dot_density_map(fig3_annotation, fig3_config))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="expected"):
            load_dmap(path)


class TestPgmExport:
    def test_header_and_scaling(self, tmp_path):
        values = np.zeros((2, 2))
        values[0, 1] = 0.5
        values[1, 1] = 1.0
        path = tmp_path / "t.pgm"
        save_pgm(path, DensityMap(2, 2, values))
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n2 2\n65535\n")
        pixels = np.frombuffer(raw.split(b"65535\n", 1)[1], dtype=">u2").reshape(2, 2)
        assert pixels[1, 1] == 65535
        assert pixels[0, 1] == round(0.5 * 65535)
        assert pixels[0, 0] == 0

    def test_zero_map(self, tmp_path):
        path = tmp_path / "z.pgm"
        save_pgm(path, DensityMap(3, 2, np.zeros((2, 3))))
        pixels = np.frombuffer(path.read_bytes().split(b"65535\n", 1)[1], dtype=">u2")
        assert pixels.max() == 0
