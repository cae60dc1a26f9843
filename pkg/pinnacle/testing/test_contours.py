import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pinnacle.contours.areas import area_statistics, level_scan
from pinnacle.contours.events import detect_circuit_event, detect_path_event, sub_box
from pinnacle.contours.level_lines import discordant_bond_count, extract_level_lines, macroscopic_filter
from pinnacle.models.lattice import HeightConfig
from pinnacle.utils.errors import DomainError


def _raised(L, sites, h=1, base=0):
    heights = np.full((L, L), base, dtype=np.int64)
    for s in sites:
        heights[s] = h
    return HeightConfig(heights=heights)


def _block(L, top_left, side, h=1):
    r, c = top_left
    return [(r + i, c + j) for i in range(side) for j in range(side)]


def _all_edges(levels):
    return [frozenset(e) for c in levels.contours for e in c.edges]


class TestExtractLevelLines:
    def test_flat_config_has_no_contours(self):
        assert len(extract_level_lines(HeightConfig.flat(6), 1)) == 0

    def test_single_site(self, spike):
        levels = extract_level_lines(spike(h=1), 1)
        assert len(levels) == 1
        contour, positive = next(iter(levels))
        assert positive
        assert contour.length == 4 and contour.area == 1
        assert contour.inner_boundary == {(2, 2)}
        assert {(1, 2), (3, 2), (2, 1), (2, 3)} <= contour.outer_boundary

    def test_level_above_spike_is_empty(self, spike):
        assert len(extract_level_lines(spike(h=2), 3)) == 0

    def test_touching_along_linked_corner_splits(self):
        # the shared corner pairs N with E, which cuts between these two sites
        levels = extract_level_lines(_raised(6, [(2, 2), (3, 3)]), 1)
        assert sorted(c.length for c in levels.contours) == [4, 4]
        assert all(levels.positive)

    def test_touching_along_other_corner_joins(self):
        levels = extract_level_lines(_raised(6, [(2, 3), (3, 2)]), 1)
        assert [c.length for c in levels.contours] == [8]
        assert levels.contours[0].area == 2
        assert len(levels.contours[0].turn_vertices) >= 1

    def test_nested_contours_with_a_hole(self):
        config = _raised(5, [(r, c) for r in range(5) for c in range(5) if (r, c) != (2, 2)])
        levels = extract_level_lines(config, 1)
        by_length = sorted(levels, key=lambda cp: cp[0].length)
        (inner, inner_positive), (outer, outer_positive) = by_length
        assert (inner.length, outer.length) == (4, 20)
        assert outer_positive and not inner_positive
        assert inner.area == 1 and outer.area == 25

    def test_boundary_above_level_makes_negative_contour(self):
        config = HeightConfig(heights=np.full((4, 4), 0), boundary_height=2)
        levels = extract_level_lines(config, 1)
        assert [c.length for c in levels.contours] == [16]
        assert levels.negative_contours() and not levels.positive_contours()

    @given(heights=st.integers(2, 7).flatmap(lambda L: arrays(np.int64, (L, L), elements=st.integers(-2, 2))),
           h=st.integers(-2, 3))
    @settings(max_examples=80, deadline=None)
    def test_every_discordant_bond_on_exactly_one_contour(self, heights, h):
        config = HeightConfig(heights=heights)
        levels = extract_level_lines(config, h)
        edges = _all_edges(levels)
        assert len(edges) == len(set(edges))
        assert levels.total_length == discordant_bond_count(config, h)

    @given(heights=st.integers(2, 7).flatmap(lambda L: arrays(np.int64, (L, L), elements=st.integers(0, 2))))
    @settings(max_examples=60, deadline=None)
    def test_area_bounded_by_squared_length(self, heights):
        for h in (1, 2):
            for contour in extract_level_lines(HeightConfig(heights=heights), h).contours:
                assert contour.area <= contour.length ** 2 / 16

    @pytest.mark.slow
    def test_every_binary_4x4_config(self):
        for bits in itertools.product((0, 1), repeat=16):
            config = HeightConfig(heights=np.array(bits, dtype=np.int64).reshape(4, 4))
            levels = extract_level_lines(config, 1)
            assert levels.total_length == discordant_bond_count(config, 1)
            for contour in levels.contours:
                assert contour.length % 2 == 0
                assert contour.area <= contour.length ** 2 / 16


class TestMacroscopicFilter:
    def test_threshold_is_strict(self):
        # (log 55)^2 is just above 16
        config = _raised(55, _block(55, (5, 5), 4) + _block(55, (20, 20), 5))
        levels = extract_level_lines(config, 1)
        assert sorted(c.length for c in levels.contours) == [16, 20]
        kept = macroscopic_filter(levels)
        assert [c.length for c in kept.contours] == [20]

    def test_explicit_side_overrides(self):
        config = _raised(10, _block(10, (3, 3), 2))
        levels = extract_level_lines(config, 1)
        assert len(macroscopic_filter(levels, L=10)) == 1
        assert len(macroscopic_filter(levels, L=10 ** 6)) == 0


class TestAreas:
    def test_plateau_fraction(self):
        config = _raised(64, _block(64, (1, 1), 62))
        stats = level_scan(config, [1, 2])
        first = stats.iloc[0]
        assert first['max_area'] == 62 ** 2
        assert first['area_fraction'] == pytest.approx((62 / 64) ** 2)
        assert first['n_macroscopic'] == 1
        assert not first['has_negative_macroscopic']
        assert stats.iloc[1]['n_contours'] == 0

    def test_macroscopic_count_includes_negative_contours(self):
        heights = np.zeros((16, 16), dtype=np.int64)
        heights[5:11, 5:11] = 1
        levels = extract_level_lines(HeightConfig(heights=heights, boundary_height=2), 1)
        assert sorted(c.length for c in levels.contours) == [24, 64]
        row = area_statistics(levels, 16).iloc[0]
        assert row['n_macroscopic'] == 2
        assert row['has_negative_macroscopic']
        assert row['max_area'] == 36

    def test_single_level_set(self, spike):
        stats = area_statistics(extract_level_lines(spike(h=1), 1), 5)
        assert list(stats['total_area']) == [1]


class TestPathEvent:
    def test_long_ridge(self):
        config = _raised(10, [(2, c) for c in range(10)])
        event = detect_path_event(config, 9, 0)
        assert event.occurred
        assert event.distance == pytest.approx(9)
        assert len(event.path) == 10

    def test_short_cluster(self):
        config = _raised(10, [(2, c) for c in range(10)])
        assert not detect_path_event(config, 9.5, 0).occurred

    def test_rejects_nonpositive_r(self, spike):
        with pytest.raises(DomainError):
            detect_path_event(spike(), 0, 0)


class TestCircuitEvent:
    def test_ring_encloses_sub_box(self):
        ring = [(r, c) for r in range(1, 9) for c in range(1, 9) if r in (1, 8) or c in (1, 8)]
        event = detect_circuit_event(_raised(10, ring), 1, 4)
        assert event.occurred
        assert len(event.circuit) == 28
        assert (1, 1) in event.circuit

    def test_flat_config_has_blocking_path(self):
        event = detect_circuit_event(HeightConfig.flat(10), 1, 4)
        assert not event.occurred
        end = event.blocking_path[-1]
        assert end[0] in (0, 9) or end[1] in (0, 9)

    def test_gap_in_ring(self):
        ring = [(r, c) for r in range(1, 9) for c in range(1, 9) if (r in (1, 8) or c in (1, 8)) and (r, c) != (1, 4)]
        assert not detect_circuit_event(_raised(10, ring), 1, 4).occurred

    def test_sub_box_bounds(self):
        assert sub_box(10, 4) == (slice(2, 8), slice(2, 8))
        with pytest.raises(DomainError):
            sub_box(10, 10)
