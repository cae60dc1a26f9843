import math

import numpy as np
import pandas as pd
import pytest

from pinnacle.models.chain import ChainSpec
from pinnacle.models.lattice import HeightConfig, ModelParams
from pinnacle.models.tail import Backend, TailEstimate, tail_frame
from pinnacle.predict.predictors import predict_H, predict_M, predict_M_star, predict_table
from pinnacle.predict.rates import (
    RateTable,
    analytic_tail,
    analytic_tail_estimate,
    asymptote_table,
    threshold_crossing,
)
from pinnacle.predict.tails import empirical_tail, tail_from_samples
from pinnacle.simulations.sampler import run_chain
from pinnacle.utils.errors import DomainError, MisuseError, ValidityError


def _tail(h_values, tails, params=None):
    params = params or ModelParams(p=2, beta=1.0)
    return TailEstimate.from_frame(pd.DataFrame({'h': h_values, 'tail': tails}), params)


class TestAnalyticTail:
    def test_gaussian(self, dg):
        assert analytic_tail(dg, 10) == pytest.approx(math.exp(-2 * math.pi * 100 / math.log(10)), rel=1e-12)

    def test_absolute_value_model(self):
        assert analytic_tail(ModelParams(p=1, beta=1.0), 3) == pytest.approx(math.exp(-12), rel=1e-12)

    def test_restricted_model(self):
        assert -math.log(analytic_tail(ModelParams(p=math.inf, beta=2.0), 2)) == pytest.approx(48.74, abs=0.01)

    def test_intermediate_p_uses_rate_constant(self):
        params = ModelParams(p=1.5, beta=2.0)
        assert analytic_tail(params, 4, rate_constant=3.0) == pytest.approx(math.exp(-3.0 * 2.0 * 8.0))

    def test_gaussian_needs_h_at_least_two(self, dg):
        with pytest.raises(DomainError):
            analytic_tail(dg, 1)

    @pytest.mark.parametrize('p', [1.5, 3.0])
    def test_missing_rate_constant(self, p):
        with pytest.raises(DomainError):
            RateTable(ModelParams(p=p, beta=1.0))

    def test_bracket_exponents(self):
        table = RateTable(ModelParams(p=3.0, beta=1.0), rate_constant=5.0, bracket=(4.0, 6.0))
        low, high = table.bracket_exponents(2)
        assert (low, high) == (16.0, 24.0)
        assert table.label.startswith('bracket-dependent')

    def test_estimate_is_non_increasing(self, dg):
        estimate = analytic_tail_estimate(dg, range(2, 30))
        assert estimate.backend == Backend.ANALYTIC
        assert np.all(np.diff(estimate.table['neg_log_tail']) >= 0)


class TestThresholdCrossing:
    @pytest.mark.parametrize('p, rate_constant', [(1, None), (1.5, 3.0), (3.0, 5.0), (math.inf, None)])
    def test_inverts_the_rate(self, p, rate_constant):
        beta, x = 1.3, 40.0
        h = threshold_crossing(p, beta, x, rate_constant)
        exponent = RateTable(ModelParams(p=p, beta=beta), rate_constant).exponent(h)
        assert exponent == pytest.approx(x, rel=1e-12)

    def test_nonpositive_threshold(self):
        assert threshold_crossing(2, 1.0, -1.0) == 0.0

    def test_asymptote_p1(self):
        table = asymptote_table(1, 2.0, [1000])
        assert table['M_asymptote'].iloc[0] == pytest.approx(math.log(1000) / 4)


class TestTailEstimate:
    def test_rejects_increasing_tail(self):
        with pytest.raises(ValidityError):
            _tail([1, 2], [0.1, 0.2])

    def test_rejects_values_above_one(self):
        with pytest.raises(ValidityError):
            _tail([1], [1.5])

    def test_rejects_repeated_levels(self):
        with pytest.raises(ValidityError):
            _tail([1, 1], [0.5, 0.4])

    def test_rejects_missing_columns(self, dg):
        with pytest.raises(ValidityError):
            TailEstimate(backend=Backend.EMPIRICAL, params=dg, table=pd.DataFrame({'h': [1]}))

    def test_empirical_lookup_outside_range(self):
        tail = _tail([2, 3], [0.5, 0.25])
        assert tail(0) == 1.0 and tail(9) == 0.0 and tail(3) == 0.25

    def test_analytic_lookup_outside_range(self, dg):
        with pytest.raises(KeyError):
            analytic_tail_estimate(dg, range(2, 5))(9)


class TestEmpiricalTail:
    def test_frequencies_and_errors(self, dg):
        tail = tail_from_samples([0, 0, 1, 2], dg)
        assert list(tail.h_values) == [-1, 0, 1, 2, 3]
        assert list(tail.table['tail']) == [1.0, 1.0, 0.5, 0.25, 0.0]
        assert tail.table['se'].iloc[3] == pytest.approx(math.sqrt(0.25 * 0.75 / 4))
        assert tail.n_samples == 4

    def test_rejects_floored_samples(self):
        with pytest.raises(MisuseError):
            tail_from_samples([0, 1], ModelParams(p=2, beta=1.0, floor=True))

    def test_rejects_nonzero_boundary(self):
        with pytest.raises(MisuseError):
            tail_from_samples([0, 1], ModelParams(p=2, beta=1.0, boundary_height=2))

    def test_rejects_empty(self, dg):
        with pytest.raises(DomainError):
            tail_from_samples([], dg)

    def test_from_stream(self, dg):
        spec = ChainSpec(params=dg, L=8, seed=3, sweeps_burnin=10, sweeps_sample=50)
        tail = empirical_tail(run_chain(spec, HeightConfig.flat(8)))
        assert tail.backend == Backend.EMPIRICAL
        assert tail.n_samples == 50
        assert tail.spec == spec

    def test_off_center_site_needs_snapshots(self, dg):
        spec = ChainSpec(params=dg, L=8, sweeps_burnin=0, sweeps_sample=5, keep_snapshots=False)
        with pytest.raises(DomainError):
            empirical_tail(run_chain(spec, HeightConfig.flat(8)), site=(1, 1))


class TestPredictors:
    @pytest.fixture(scope='class')
    def gaussian(self):
        return analytic_tail_estimate(ModelParams(p=2, beta=1.0), range(2, 201))

    def test_tail_never_below_threshold_is_truncated(self):
        prediction = predict_M(100, _tail([1, 2, 3], [1.0, 1.0, 1.0]))
        assert prediction.value == 3
        assert prediction.truncated and not prediction.degenerate

    def test_nothing_meets_threshold(self):
        prediction = predict_M(100, TailEstimate(backend=Backend.EMPIRICAL, params=ModelParams(p=2, beta=1.0),
                                                 table=tail_frame([4, 5], [500.0, 600.0])))
        assert prediction.value == 3
        assert prediction.degenerate

    def test_largest_level_meeting_threshold(self):
        # threshold L^-2 (log L)^5 at L = 100 is about 0.207
        tail = _tail([1, 2, 3, 4], [0.9, 0.5, 0.21, 0.2])
        assert predict_M(100, tail).value == 3

    def test_h_degenerate_for_small_boxes(self, gaussian):
        prediction = predict_H(8, 2.0, gaussian)
        assert prediction.value == 0 and prediction.degenerate

    def test_rejects_tiny_box(self, gaussian):
        with pytest.raises(DomainError):
            predict_M(2, gaussian)

    def test_analytic_backend_reports_crossings(self, gaussian):
        prediction = predict_M(1e6, gaussian)
        assert prediction.crossing is not None and prediction.asymptote is not None
        assert abs(prediction.value - prediction.crossing) <= 1

    def test_ratios_at_large_L(self, gaussian):
        row = predict_table([1e15], 1.0, gaussian).iloc[0]
        assert row['H_over_M'] == pytest.approx(1 / math.sqrt(2), rel=0.1)
        assert row['M_star_over_M'] == pytest.approx(1 + 1 / math.sqrt(2), rel=0.1)

    def test_floored_window_scales_with_beta(self):
        one = predict_M_star(1e8, 1.0).asymptote
        four = predict_M_star(1e8, 4.0).asymptote
        assert one == pytest.approx(2 * four, rel=1e-9)

    def test_floored_window_needs_gaussian(self, sos):
        tail = analytic_tail_estimate(sos, range(1, 20))
        with pytest.raises(DomainError):
            predict_M_star(1e6, 1.5, tail)

    def test_table_columns(self, gaussian):
        table = predict_table([100, 1000], 1.0, gaussian)
        assert len(table) == 2
        assert (table['M_star'] == table['M'] + table['H']).all()
