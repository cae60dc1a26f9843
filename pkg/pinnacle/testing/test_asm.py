import math

import numpy as np
import pytest

from pinnacle.asm.formula import ASMatrix, asm_growth_ratio, asm_product_formula, rsos_rate_constant
from pinnacle.asm.paths import PathFamily, enumerate_path_families, iter_path_families
from pinnacle.asm.six_vertex import (
    SixVertexConfig,
    asm_to_six_vertex,
    paths_to_six_vertex,
    six_vertex_count,
    six_vertex_to_asm,
    six_vertex_to_paths,
)
from pinnacle.utils import constants
from pinnacle.utils.errors import DomainError, StateSpaceTooLarge, ValidityError


KNOWN_COUNTS = {0: 1, 1: 1, 2: 2, 3: 7, 4: 42, 5: 429, 6: 7436, 7: 218348, 8: 10850216}


class TestProductFormula:
    @pytest.mark.parametrize('h, count', KNOWN_COUNTS.items())
    def test_known_values(self, h, count):
        assert asm_product_formula(h) == count

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            asm_product_formula(-1)

    def test_growth_ratio_approaches_one(self):
        assert asm_growth_ratio(100) == pytest.approx(1.0, abs=0.03)


class TestPathFamilies:
    @pytest.mark.parametrize('h', [1, 2, 3, 4, 5])
    def test_count_matches_formula(self, h):
        assert enumerate_path_families(h) == asm_product_formula(h)

    def test_over_limit(self):
        with pytest.raises(StateSpaceTooLarge):
            enumerate_path_families(constants.PATH_FAMILY_MAX_H + 1)

    def test_minimal_lengths(self):
        family = next(iter_path_families(4))
        assert family.lengths() == [6, 4, 2, 0]
        assert family.endpoints == ((3, 2, 1, 0), (3, 2, 1, 0))

    def test_rejects_shared_horizontal_edge(self):
        with pytest.raises(ValidityError):
            PathFamily(h=3, heights=((1, 1), (1,), ()))

    def test_rejects_wrong_span(self):
        with pytest.raises(ValidityError):
            PathFamily(h=2, heights=((1, 0), ()))

    def test_steps_word(self):
        family = PathFamily(h=3, heights=((2, 0), (0,), ()))
        assert family.steps(0) == 'RDDR'
        assert family.steps(1) == 'DR'


class TestSixVertex:
    @pytest.mark.parametrize('h', range(0, 9))
    def test_transfer_count_matches_formula(self, h):
        assert six_vertex_count(h) == KNOWN_COUNTS[h]

    def test_over_limit(self):
        with pytest.raises(StateSpaceTooLarge):
            six_vertex_count(constants.SIX_VERTEX_MAX_H + 1)

    @pytest.mark.parametrize('h', [1, 2, 3, 4])
    def test_bijection_is_one_to_one(self, h):
        families = list(iter_path_families(h))
        matrices = set()
        for family in families:
            config = paths_to_six_vertex(family)
            assert six_vertex_to_paths(config) == family
            matrix = six_vertex_to_asm(config)
            rebuilt = asm_to_six_vertex(matrix)
            assert np.array_equal(rebuilt.horizontal, config.horizontal)
            assert np.array_equal(rebuilt.vertical, config.vertical)
            matrices.add(matrix)
        assert len(matrices) == len(families) == asm_product_formula(h)

    def test_matrix_with_a_minus_one_is_reached(self):
        target = ASMatrix(entries=np.array([[0, 0, 1, 0], [1, 0, 0, 0], [0, 1, -1, 1], [0, 0, 1, 0]]))
        matrices = {six_vertex_to_asm(paths_to_six_vertex(f)) for f in iter_path_families(4)}
        assert target in matrices

    def test_identity_round_trip(self):
        identity = ASMatrix(entries=np.eye(3, dtype=np.int64))
        assert six_vertex_to_asm(asm_to_six_vertex(identity)) == identity

    def test_rejects_broken_domain_wall(self):
        with pytest.raises(ValidityError):
            SixVertexConfig(h=1, horizontal=np.array([[1, 0]]), vertical=np.array([[1], [1]]))

    def test_rejects_broken_ice_rule(self):
        # top-left vertex takes a path in and lets none out
        H = np.array([[1, 0, 0], [1, 0, 0]])
        V = np.array([[1, 1], [0, 1], [0, 0]])
        with pytest.raises(ValidityError):
            SixVertexConfig(h=2, horizontal=H, vertical=V)


class TestASMatrix:
    @pytest.mark.parametrize('entries', [
        [[1, 1], [0, 0]],
        [[0, 1, 0], [1, -1, 1], [0, 1, -1]],
        [[2]],
        [[1, 0, 0]],
    ])
    def test_rejects_invalid(self, entries):
        with pytest.raises(ValidityError):
            ASMatrix(entries=np.array(entries))

    def test_equal_matrices_hash_alike(self):
        a = ASMatrix(entries=np.eye(2, dtype=np.int64))
        b = ASMatrix(entries=[[1, 0], [0, 1]])
        assert a == b and hash(a) == hash(b)


class TestRsosRateConstant:
    def test_center(self):
        assert rsos_rate_constant(3.0).center == pytest.approx(16.186, abs=1e-3)

    def test_entropy_term(self):
        assert 2 * constants.LOG_27_16 == pytest.approx(math.log(729 / 256), rel=1e-12)

    def test_bracket_narrows_with_beta(self):
        low, high = rsos_rate_constant(5.0).bounds(C=2.0)
        assert high - low == pytest.approx(16 * math.exp(-5.0))

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(DomainError):
            rsos_rate_constant(0.0)
