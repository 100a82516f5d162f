"""Closed-form channel physics.

Frozen values come from a 40-digit mpmath evaluation of the impulse
response, independent of the package code.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molcomm import (
    UM,
    ChannelParams,
    ConcentrationSample,
    Emission,
    ParameterError,
    concentration_at,
    impulse_response,
    parse_length,
    peak_concentration,
    peak_time,
)
from molcomm.channel import superpose

# mpmath, 40 digits
C_MAX_PAPER = 21.81205476960760321094723893950072665598
T_PEAK_PAPER = 0.8720930232558139534883720930232558139535
T_PEAK_FIG3 = 0.7575757575757575757575757575757575757576

diffusions = st.floats(1e-9, 1.0)
distances = st.floats(1e-5, 10.0)
params_st = st.builds(ChannelParams, diffusions, distances)


class TestImpulseResponse:
    def test_value_at_peak(self, paper_channel):
        c = impulse_response(paper_channel, 1000.0, 0.872093023255814)
        assert c == pytest.approx(C_MAX_PAPER, rel=1e-12)
        assert round(c, 3) == 21.812

    def test_zero_quantity(self, paper_channel):
        assert impulse_response(paper_channel, 0.0, 1.3) == 0.0

    def test_zero_time_is_limit(self, paper_channel):
        assert impulse_response(paper_channel, 1000.0, 0.0) == 0.0

    def test_broadcasts(self, paper_channel):
        t = np.array([0.0, 0.5, 1.0])
        out = impulse_response(paper_channel, 1000.0, t)
        assert out.shape == (3,)
        assert out[1] == impulse_response(paper_channel, 1000.0, 0.5)

    def test_negative_inputs_rejected(self, paper_channel):
        with pytest.raises(ParameterError):
            impulse_response(paper_channel, 1000.0, -1.0)
        with pytest.raises(ParameterError):
            impulse_response(paper_channel, -1.0, 1.0)

    @pytest.mark.parametrize("D,d", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, math.inf),
                                     (math.nan, 1.0)])
    def test_invalid_params(self, D, d):
        with pytest.raises(ParameterError):
            ChannelParams(D, d)


class TestPeak:
    def test_peak_time_paper(self, paper_channel):
        assert peak_time(paper_channel) == pytest.approx(T_PEAK_PAPER, rel=1e-14)

    def test_peak_time_fig3(self):
        assert peak_time(ChannelParams(2.2e-7, 10 * UM)) == pytest.approx(T_PEAK_FIG3, rel=1e-12)

    def test_doubling_distance_quadruples_peak_time(self):
        a, b = ChannelParams(0.3, 1.0), ChannelParams(0.3, 2.0)
        assert peak_time(b) == pytest.approx(4 * peak_time(a), rel=1e-15)

    def test_peak_concentration_paper(self, paper_channel):
        assert peak_concentration(paper_channel, 1000.0) == pytest.approx(C_MAX_PAPER, rel=1e-13)

    def test_doubling_distance_divides_peak_by_eight(self):
        a = peak_concentration(ChannelParams(0.3, 1.0), 500.0)
        b = peak_concentration(ChannelParams(0.3, 2.0), 500.0)
        assert b == pytest.approx(a / 8, rel=1e-15)

    def test_diffusion_has_no_effect_on_peak(self):
        values = {peak_concentration(ChannelParams(D, 1.5), 1000.0)
                  for D in np.logspace(-8, -1, 29)}
        assert len(values) == 1

    @given(params_st, st.floats(0.0, 1e9))
    def test_closed_form_matches_response_at_peak(self, params, q):
        assert impulse_response(params, q, params.peak_time) == pytest.approx(
            peak_concentration(params, q), rel=1e-12, abs=0.0)

    @given(params_st)
    def test_exponent_identity(self, params):
        D, d = params.diffusion_coefficient, params.distance
        assert d * d / (4 * D * peak_time(params)) == pytest.approx(1.5, rel=1e-12)

    @settings(max_examples=50)
    @given(params_st)
    def test_dense_argmax_is_peak_time(self, params):
        tp = params.peak_time
        t = np.linspace(0.0, 10 * tp, 100_001)[1:]
        t_best = t[np.argmax(impulse_response(params, 1.0, t))]
        assert abs(t_best - tp) <= 1e-3 * tp


class TestSuperposition:
    def _species(self):
        return {"a": ChannelParams(0.43, 1.5), "b": ChannelParams(0.2, 1.5)}

    def test_empty_history(self):
        assert concentration_at(self._species(), [], "a", 3.0) == 0.0

    def test_single_emission_at_peak(self, paper_channel):
        hist = [Emission(0.0, 1000.0, "a")]
        c = concentration_at(self._species(), hist, "a", paper_channel.peak_time)
        assert c == pytest.approx(C_MAX_PAPER, rel=1e-12)

    def test_split_emission_is_linear(self):
        whole = [Emission(0.0, 1000.0, "a")]
        halves = [Emission(0.0, 500.0, "a"), Emission(0.0, 500.0, "a")]
        for t in np.linspace(0.0, 6.0, 25):
            assert concentration_at(self._species(), halves, "a", t) == pytest.approx(
                concentration_at(self._species(), whole, "a", t), rel=1e-14, abs=0.0)

    def test_other_species_and_future_emissions_ignored(self):
        hist = [Emission(0.0, 1000.0, "b"), Emission(5.0, 1000.0, "a")]
        assert concentration_at(self._species(), hist, "a", 4.0) == 0.0

    def test_unknown_species(self):
        with pytest.raises(KeyError):
            concentration_at(self._species(), [], "zzz", 1.0)

    @given(st.lists(st.tuples(st.floats(0, 20), st.floats(0, 1e4)), min_size=1, max_size=12),
           st.lists(st.tuples(st.floats(0, 20), st.floats(0, 1e4)), min_size=1, max_size=12),
           st.floats(0.01, 30))
    def test_concatenated_history_adds(self, first, second, t):
        sp = self._species()
        h1 = [Emission(r, q, "a") for r, q in first]
        h2 = [Emission(r, q, "a") for r, q in second]
        total = concentration_at(sp, h1 + h2, "a", t)
        parts = concentration_at(sp, h1, "a", t) + concentration_at(sp, h2, "a", t)
        assert total == pytest.approx(parts, rel=1e-12, abs=1e-300)
        assert total >= 0

    def test_superpose_blocks_match_direct(self, paper_channel):
        rng = np.random.default_rng(5)
        rel = np.sort(rng.uniform(0, 100, 40))
        q = rng.uniform(0, 1000, 40)
        times = np.linspace(0, 120, 1300)  # spans several blocks
        direct = [sum(impulse_response(paper_channel, qi, t - ri) for ri, qi in zip(rel, q) if ri <= t)
                  for t in times]
        np.testing.assert_allclose(superpose(paper_channel, rel, q, times), direct, rtol=1e-12)


class TestTypes:
    def test_emission_validation(self):
        with pytest.raises(ParameterError):
            Emission(0.0, -1.0)
        with pytest.raises(ParameterError):
            Emission(-1.0, 1.0)

    def test_sample_validation(self):
        with pytest.raises(ParameterError):
            ConcentrationSample(1.0, -0.1)


@pytest.mark.parametrize("text,cm", [("1.5cm", 1.5), ("10um", 1e-3), ("10 µm", 1e-3),
                                     ("2", 2.0), ("3mm", 0.3), (0.7, 0.7)])
def test_parse_length(text, cm):
    assert parse_length(text) == pytest.approx(cm, rel=1e-15)


@pytest.mark.parametrize("text", ["abc", "3parsec", "1.2.3cm"])
def test_parse_length_rejects(text):
    with pytest.raises(ParameterError):
        parse_length(text)
