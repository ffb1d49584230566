"""Detector layout, exit classification, and boundary-crossing geometry."""

import numpy as np
import pytest

import fountain_id as fid
from fountain_id.errors import ConfigError, InvalidSegment
from fountain_id.geometry import TWO_PI, classify_exit, classify_exits


class TestDetectorLayout:
    def test_equispaced_default_covers_half_the_boundary(self):
        layout = fid.DetectorLayout.equispaced(5)
        assert layout.count == 5
        np.testing.assert_allclose(layout.center_angles, TWO_PI * np.arange(5) / 5)
        np.testing.assert_allclose(layout.half_widths, np.pi / 10)
        assert layout.total_measure == pytest.approx(np.pi)

    def test_equispaced_coverage_knob(self):
        layout = fid.DetectorLayout.equispaced(4, coverage=0.8)
        assert layout.total_measure == pytest.approx(0.8 * TWO_PI)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5])
    def test_equispaced_rejects_bad_coverage(self, bad):
        with pytest.raises(ConfigError):
            fid.DetectorLayout.equispaced(4, coverage=bad)

    def test_needs_at_least_one_detector(self):
        with pytest.raises(ConfigError):
            fid.DetectorLayout.equispaced(0)

    def test_overlapping_arcs_rejected(self):
        with pytest.raises(ConfigError):
            fid.DetectorLayout(np.array([0.0, 0.1]), np.array([0.2, 0.2]))

    def test_full_coverage_rejected(self):
        with pytest.raises(ConfigError):
            fid.DetectorLayout(np.array([0.0, np.pi]), np.array([np.pi / 2, np.pi / 2]))

    def test_nonpositive_half_width_rejected(self):
        with pytest.raises(ConfigError):
            fid.DetectorLayout(np.array([0.0]), np.array([0.0]))

    def test_dict_roundtrip(self):
        layout = fid.DetectorLayout.equispaced(3, coverage=0.6)
        again = fid.DetectorLayout.from_dict(layout.to_dict())
        np.testing.assert_allclose(again.center_angles, layout.center_angles)
        np.testing.assert_allclose(again.half_widths, layout.half_widths)

    def test_dict_j_mismatch_rejected(self):
        d = fid.DetectorLayout.equispaced(3).to_dict()
        d["J"] = 4
        with pytest.raises(ConfigError):
            fid.DetectorLayout.from_dict(d)


class TestClassifyExit:
    def test_arc_center_hits(self, layout5):
        assert classify_exit(layout5, 0.0) == 0
        assert classify_exit(layout5, 2 * np.pi / 5) == 1

    def test_gap_midpoint_misses(self, layout5):
        assert classify_exit(layout5, np.pi / 5) is None

    def test_half_open_right_edge_excluded(self, layout5):
        hi = float(layout5.center_angles[0] + layout5.half_widths[0])
        lo = (layout5.center_angles[0] - layout5.half_widths[0]) % TWO_PI
        assert classify_exit(layout5, hi) is None
        assert classify_exit(layout5, float(lo)) == 0

    def test_vectorized_matches_scalar_on_random_layouts(self):
        rng = np.random.default_rng(7)
        tried = 0
        while tried < 20:
            J = int(rng.integers(1, 8))
            centers = np.sort(rng.uniform(0, TWO_PI, J))
            gaps = np.diff(np.concatenate((centers, [centers[0] + TWO_PI])))
            hw = rng.uniform(0.1, 0.45) * gaps.min() * np.ones(J)
            try:
                layout = fid.DetectorLayout(centers, hw)
            except ConfigError:
                continue
            tried += 1
            angles = rng.uniform(0, TWO_PI, 500)
            fast = classify_exits(layout, angles)
            slow = np.array(
                [
                    -1 if classify_exit(layout, a) is None else classify_exit(layout, a)
                    for a in angles
                ]
            )
            np.testing.assert_array_equal(fast, slow)

    def test_wraparound_arc(self):
        layout = fid.DetectorLayout(np.array([0.0, np.pi]), np.array([0.3, 0.3]))
        angles = np.array([0.0, 0.29, 0.31, TWO_PI - 0.29, TWO_PI - 0.31, np.pi])
        np.testing.assert_array_equal(
            classify_exits(layout, angles), [0, 0, -1, 0, -1, 1]
        )


class TestSegmentBoundaryCrossing:
    def test_radial_ray(self):
        t, hit = fid.segment_boundary_crossing(np.zeros(2), np.array([2.0, 0.0]))
        assert t == pytest.approx(0.5)
        assert hit.angle == pytest.approx(0.0)

    def test_oblique_segment(self):
        t, hit = fid.segment_boundary_crossing(np.array([0.5, 0.0]), np.array([0.5, 2.0]))
        assert t == pytest.approx(np.sqrt(0.75) / 2.0, abs=1e-12)
        assert hit.angle == pytest.approx(np.arctan2(np.sqrt(0.75), 0.5), abs=1e-12)

    def test_endpoint_on_boundary(self):
        t, hit = fid.segment_boundary_crossing(np.zeros(2), np.array([0.0, 1.0]))
        assert t == pytest.approx(1.0)
        assert hit.angle == pytest.approx(np.pi / 2)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(InvalidSegment):
            fid.segment_boundary_crossing(np.array([0.1, 0.1]), np.array([0.1, 0.1]))

    def test_bad_endpoints_rejected(self):
        with pytest.raises(InvalidSegment):
            fid.segment_boundary_crossing(np.array([1.5, 0.0]), np.array([2.0, 0.0]))
        with pytest.raises(InvalidSegment):
            fid.segment_boundary_crossing(np.array([0.1, 0.0]), np.array([0.2, 0.0]))

    def test_random_segments_land_on_circle_and_segment(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            r = np.sqrt(rng.random()) * 0.999
            a = rng.uniform(0, TWO_PI)
            p_in = r * np.array([np.cos(a), np.sin(a)])
            p_out = p_in + rng.normal(size=2) * 2.0
            if p_out @ p_out < 1.0:
                continue
            t, hit = fid.segment_boundary_crossing(p_in, p_out)
            assert 0.0 < t <= 1.0
            assert abs(np.linalg.norm(hit.point) - 1.0) <= 1e-12
            on_seg = p_in + t * (p_out - p_in)
            assert np.linalg.norm(on_seg - hit.point) <= 1e-10
