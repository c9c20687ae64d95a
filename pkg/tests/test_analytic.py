from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hccasim.analytic import (
    SCHEDULERS,
    AnalyticInputs,
    ValidationReport,
    aggregate_delay,
    aggregate_delay_alt,
    analytic_inputs,
    d_si,
    td_i,
    validate,
)
from hccasim.phy import PROFILE_11G, FrameKind, airtime_control, airtime_multipoll
from hccasim.traces import Tspec, parse_trace

# jp1-class stream on the validation PHY: payload at 36 Mb/s, control at 1 Mb/s
REF = Fraction(7500 * 8 * 10**6, 36_000_000)      # 5000/3 us
MEAN = Fraction(3820 * 8 * 10**6, 36_000_000)     # 7640/9 us


def make_inputs(n=2, m=1, ref=REF, payload=MEAN, control_rate=1_000_000):
    return AnalyticInputs(
        profile=PROFILE_11G,
        ref_payload_us=(ref,) * n,
        payload_us=tuple(((payload,) * n) for _ in range(m)),
        control_rate=control_rate,
    )


def fractions(lo, hi):
    return st.fractions(min_value=Fraction(lo), max_value=Fraction(hi))


@st.composite
def random_inputs(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    m = draw(st.integers(min_value=1, max_value=4))
    refs = tuple(draw(fractions(100, 5000)) for _ in range(n))
    payload = tuple(
        tuple(draw(fractions(0, 5000)) for _ in range(n)) for _ in range(m)
    )
    return AnalyticInputs(
        profile=PROFILE_11G,
        ref_payload_us=refs,
        payload_us=payload,
        control_rate=draw(st.sampled_from([None, 1_000_000, 2_000_000])),
    )


class TestPredecessorTerm:
    def test_composition_at_54_control(self):
        # one mean MSDU at 54 Mb/s with control frames at the data rate
        payload = Fraction(3800 * 8 * 10**6, 54_000_000)
        assert td_i(payload, PROFILE_11G, 54_000_000) == Fraction(22832, 27)

    def test_composition_at_1_control(self):
        assert td_i(REF, PROFILE_11G, 1_000_000) == REF + 848


class TestPerStationDelay:
    def test_hcca_first_position(self):
        payload = Fraction(3800 * 8 * 10**6, 54_000_000)
        inputs = make_inputs(n=1, payload=payload, control_rate=54_000_000)
        assert d_si("hcca", 1, inputs) == Fraction(19124, 27)

    def test_hcca_second_position(self):
        assert d_si("hcca", 2, make_inputs()) == Fraction(34124, 9)

    def test_atxop_reclaims_predecessor_tail(self):
        assert d_si("atxop", 2, make_inputs()) == Fraction(26764, 9)

    def test_amtxop_second_position(self):
        assert d_si("amtxop", 2, make_inputs()) == Fraction(23650, 9)

    def test_first_positions_differ_only_by_poll_mechanism(self):
        inputs = make_inputs()
        sifs = PROFILE_11G.sifs_us
        assert d_si("hcca", 1, inputs) == MEAN + inputs.t_poll + 2 * sifs
        assert d_si("atxop", 1, inputs) == d_si("hcca", 1, inputs)
        assert d_si("amtxop", 1, inputs) == inputs.t_mpoll + MEAN + sifs

    def test_rejects_bad_arguments(self):
        inputs = make_inputs()
        with pytest.raises(ValueError):
            d_si("edca", 1, inputs)
        with pytest.raises(ValueError):
            d_si("hcca", 0, inputs)
        with pytest.raises(ValueError):
            d_si("hcca", 3, inputs)
        with pytest.raises(ValueError):
            d_si("hcca", 1, inputs, k=1)

    @given(inputs=random_inputs())
    @settings(max_examples=50, deadline=None)
    def test_multipoll_minus_adaptive_identity(self, inputs):
        # d_AM - d_AT = T_mpoll - i*T_poll - SIFS, independent of traffic
        for k in range(inputs.m_intervals):
            for i in range(1, inputs.n_stations + 1):
                gap = d_si("amtxop", i, inputs, k) - d_si("atxop", i, inputs, k)
                assert gap == inputs.t_mpoll - i * inputs.t_poll - PROFILE_11G.sifs_us

    @given(inputs=random_inputs())
    @settings(max_examples=50, deadline=None)
    def test_adaptive_never_behind_reference(self, inputs):
        for k in range(inputs.m_intervals):
            for i in range(1, inputs.n_stations + 1):
                assert d_si("atxop", i, inputs, k) <= d_si("hcca", i, inputs, k)

    @given(inputs=random_inputs())
    @settings(max_examples=50, deadline=None)
    def test_reference_delay_grows_with_position(self, inputs):
        for k in range(inputs.m_intervals):
            delays = [d_si("hcca", i, inputs, k) for i in range(1, inputs.n_stations + 1)]
            own = inputs.payload_us[k]
            # strip the own payload term: the positional part is strictly increasing
            positional = [d - t for d, t in zip(delays, own)]
            assert positional == sorted(positional)
            assert len(set(positional)) == len(positional)

    def test_degenerate_full_grants_collapse_to_reference(self):
        inputs = make_inputs(payload=REF)
        for i in (1, 2):
            assert d_si("atxop", i, inputs) == d_si("hcca", i, inputs)


class TestAggregate:
    def test_identical_intervals_average_to_single(self):
        one = make_inputs(m=1)
        many = make_inputs(m=5)
        for s in SCHEDULERS:
            single = sum(d_si(s, i, one) for i in (1, 2))
            assert aggregate_delay(s, many) == single

    def test_alt_reading_offset(self):
        inputs = make_inputs()
        gap = aggregate_delay_alt("hcca", inputs) - aggregate_delay("hcca", inputs)
        assert gap == 2 * MEAN + 2 * PROFILE_11G.sifs_us

    def test_varying_intervals(self):
        inputs = AnalyticInputs(
            profile=PROFILE_11G,
            ref_payload_us=(REF,),
            payload_us=((MEAN,), (Fraction(0),)),
            control_rate=1_000_000,
        )
        d0 = d_si("hcca", 1, inputs, k=0)
        d1 = d_si("hcca", 1, inputs, k=1)
        assert aggregate_delay("hcca", inputs) == (d0 + d1) / 2

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            AnalyticInputs(
                profile=PROFILE_11G,
                ref_payload_us=(REF,),
                payload_us=((MEAN, MEAN),),
            )
        with pytest.raises(ValueError):
            AnalyticInputs(profile=PROFILE_11G, ref_payload_us=(), payload_us=())


class TestInputBuilder:
    TRACE = "0 I 0 1000\n1 P 40 500\n2 B 80 250\n"

    def tspec(self):
        return Tspec(
            mean_msdu_bytes=500,
            max_msdu_bytes=1000,
            mean_rate_bps=Fraction(100_000),
            delay_bound_s=Fraction("0.08"),
            min_phy_rate_bps=1_000_000,
            msi_s=Fraction("0.04"),
        )

    def test_bins_follow_service_intervals(self):
        trace = parse_trace(self.TRACE)
        inputs = analytic_inputs(trace, 2, self.tspec(), Fraction(1, 25), PROFILE_11G)
        assert inputs.m_intervals == 3
        assert inputs.n_stations == 2
        assert inputs.payload_us == ((8000, 8000), (4000, 4000), (2000, 2000))
        # one 500-byte MSDU per SI, but the 1000-byte maximum dominates
        assert inputs.ref_payload_us == (8000, 8000)

    def test_window_slicing(self):
        trace = parse_trace(self.TRACE)
        inputs = analytic_inputs(
            trace, 1, self.tspec(), Fraction(1, 25), PROFILE_11G,
            m_intervals=2, start_interval=1,
        )
        assert inputs.payload_us == ((4000,), (2000,))

    def test_empty_interval_contributes_zero(self):
        trace = parse_trace("0 I 0 1000\n1 P 80 500\n")
        inputs = analytic_inputs(trace, 1, self.tspec(), Fraction(1, 25), PROFILE_11G)
        assert inputs.payload_us == ((8000,), (0,), (4000,))

    def test_rejects_zero_stations(self):
        with pytest.raises(ValueError):
            analytic_inputs(parse_trace(self.TRACE), 0, self.tspec(), Fraction(1, 25), PROFILE_11G)


class TestValidate:
    def test_pointwise_errors(self):
        report = validate([90, 110], [100, 100])
        assert report.rel_errors == (Fraction(1, 10), Fraction(1, 10))
        assert report.max_rel_error == 0.1
        assert report.within(0.1) and not report.within(0.09)

    def test_mean_and_max_differ(self):
        report = validate([100, 95], [100, 100])
        assert report.max_rel_error == 0.05
        assert report.mean_rel_error == 0.025

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            validate([1], [1, 2])
        with pytest.raises(ValueError):
            validate([], [])
        with pytest.raises(ValueError):
            validate([1], [0])

    def test_report_is_plain_data(self):
        report = validate([1], [2])
        assert isinstance(report, ValidationReport)
        assert report.rel_errors == (Fraction(1, 2),)
