import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleplan import (
    DomainError,
    InsufficientDataError,
    ScalingParams,
    SimulationConfig,
    TimingObservation,
    advise_node_count,
    detect_outliers,
    fit_extended,
    generate_timings,
)
from scaleplan.errors import DegenerateFitError
from scaleplan.fitting import fit_coefficients
from oracles import exact_weighted_fit

CPMD_ROWS = [TimingObservation(1, 89.3), TimingObservation(24, 4.8), TimingObservation(96, 2.53)]

# frozen from oracles.exact_weighted_fit on the three CPMD rows
ORACLE_A = 0.9557589626239511
ORACLE_B = 88.33742791762013
ORACLE_C = 0.006813119755911517
ORACLE_S = 0.010703604563982817
ORACLE_COMM = 0.0024416177740589178
ORACLE_T1 = 89.29318688024408

POW2 = [1, 2, 4, 8, 16, 32, 64, 128]


def rel(a, b):
    return abs(a - b) / abs(b)


def test_oracle_is_still_what_was_frozen():
    a, b, c = exact_weighted_fit([(o.n_units, o.wall_time) for o in CPMD_ROWS])
    assert (float(a), float(b), float(c)) == pytest.approx((ORACLE_A, ORACLE_B, ORACLE_C), rel=1e-15)


class TestFitExtended:
    def test_cpmd_three_point_solve(self):
        res = fit_extended(CPMD_ROWS, 32)
        a, b, c = res.coefficients
        assert (a, b, c) == pytest.approx((ORACLE_A, ORACLE_B, ORACLE_C), rel=1e-9)
        p = res.params
        assert p.serial_fraction == pytest.approx(ORACLE_S, rel=1e-9)
        assert p.comm_idle_fraction == pytest.approx(ORACLE_COMM, rel=1e-9)
        assert p.baseline_time == pytest.approx(ORACLE_T1, rel=1e-9)
        # spec-level values, +-1% relative
        assert p.serial_fraction == pytest.approx(0.01067, rel=0.01)
        assert p.comm_idle_fraction == pytest.approx(0.00244, rel=0.01)
        assert p.baseline_time == pytest.approx(89.3, rel=0.01)
        assert res.outliers == []

    def test_noiseless_round_trip(self):
        truth = ScalingParams(0.02, 0.001, 32, 100.0)
        obs = generate_timings(SimulationConfig(truth, [1, 8, 32, 128], jitter_fraction=0.0))
        p = fit_extended(obs, 32).params
        assert rel(p.serial_fraction, 0.02) < 1e-9
        assert rel(p.comm_idle_fraction, 0.001) < 1e-9
        assert rel(p.baseline_time, 100.0) < 1e-9

    def test_censored_row_excluded_and_flagged(self):
        rows = CPMD_ROWS + [TimingObservation(112, 100.0, censored=True)]
        with_censored = fit_extended(rows, 32)
        without = fit_extended(CPMD_ROWS, 32)
        assert with_censored.params == without.params
        assert with_censored.outliers == [112]
        assert len(with_censored.residuals) == 3

    def test_two_rows_is_insufficient(self):
        with pytest.raises(InsufficientDataError):
            fit_extended(CPMD_ROWS[:2], 32)

    def test_repeated_n_does_not_count_as_distinct(self):
        rows = [TimingObservation(1, 10.0), TimingObservation(1, 10.5), TimingObservation(4, 3.0)]
        with pytest.raises(InsufficientDataError):
            fit_extended(rows, 8)

    def test_censored_rows_do_not_count(self):
        rows = CPMD_ROWS[:2] + [TimingObservation(96, 150.0, censored=True)]
        with pytest.raises(InsufficientDataError):
            fit_extended(rows, 32)

    def test_negative_serial_is_clamped(self):
        # superlinear data pushes the constant term below zero
        rows = [TimingObservation(n, 100.0 / n - 0.5 + 0.01 * n) for n in (1, 2, 4, 8, 16)]
        a, b, c = fit_coefficients(rows)
        assert a == 0.0 and b > 0 and c >= 0
        assert fit_extended(rows, 4).params.serial_fraction == 0.0

    def test_negative_communication_is_clamped(self):
        rows = [TimingObservation(n, 10.0 + 90.0 / n - 0.001 * n) for n in (1, 2, 4, 8, 16)]
        a, b, c = fit_coefficients(rows)
        assert c == 0.0 and a > 0
        p = fit_extended(rows, 4).params
        assert p.comm_idle_fraction == 0.0

    def test_degenerate_fit(self):
        # time grows with N and the 1/N term is negative
        rows = [TimingObservation(n, 1.0 + n - 0.5 / n) for n in (1, 2, 4, 8)]
        with pytest.raises(DegenerateFitError):
            fit_extended(rows, 4)

    def test_bad_cores_per_node(self):
        with pytest.raises(DomainError):
            fit_extended(CPMD_ROWS, 0)

    def test_unit_consistency(self):
        base = fit_extended(CPMD_ROWS, 32).params
        scaled_rows = [TimingObservation(o.n_units, o.wall_time * 60.0) for o in CPMD_ROWS]
        scaled = fit_extended(scaled_rows, 32).params
        assert rel(scaled.baseline_time, base.baseline_time * 60.0) < 1e-9
        assert rel(scaled.serial_fraction, base.serial_fraction) < 1e-9
        assert rel(scaled.comm_idle_fraction, base.comm_idle_fraction) < 1e-9

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(0.001, 0.5),
        st.floats(1e-4, 0.05),
        st.integers(1, 128),
        st.floats(0.1, 1000.0),
        st.lists(st.integers(1, 1024), min_size=3, max_size=8, unique=True).map(sorted),
    )
    def test_round_trip_property(self, s, c, nc, t1, ns):
        truth = ScalingParams(s, c, nc, t1)
        p = fit_extended(generate_timings(SimulationConfig(truth, ns, jitter_fraction=0.0)), nc).params
        assert rel(p.serial_fraction, s) < 1e-9
        assert rel(p.comm_idle_fraction, c) < 1e-9
        assert rel(p.baseline_time, t1) < 1e-9


class TestDetectOutliers:
    def test_exact_model_data_has_no_outliers(self):
        truth = ScalingParams(0.02, 0.001, 32, 100.0)
        obs = generate_timings(SimulationConfig(truth, POW2, jitter_fraction=0.0))
        fitted = fit_extended(obs, 32)
        for k in (0.5, 1.0, 3.0, 10.0):
            assert detect_outliers(obs, fitted, k) == []

    def test_single_inflated_point(self):
        truth = ScalingParams(0.010703604563982817, 0.0024416177740589178, 32, 89.29318688024408)
        cfg = SimulationConfig(truth, POW2, jitter_fraction=0.0, pathological_nodes={16: 10.0}, censor_cutoff=None)
        obs = generate_timings(cfg)
        fitted = fit_extended(obs, 32)
        assert detect_outliers(obs, fitted, 3.0) == [16]

        # hand check: exact rational fit, relative residuals, k * median rule
        a, b, c = exact_weighted_fit([(o.n_units, o.wall_time) for o in obs])
        resid = {o.n_units: float((a + b / o.n_units + c * o.n_units - o.wall_time) / o.wall_time) for o in obs}
        cut = 3.0 * statistics.median(abs(r) for r in resid.values())
        assert [n for n, r in resid.items() if abs(r) > cut] == [16]

    def test_censored_always_reported(self):
        rows = CPMD_ROWS + [TimingObservation(7, 120.0, True), TimingObservation(140, 101.0, True)]
        fitted = fit_extended(rows, 32)
        assert detect_outliers(rows, fitted, 1e6) == [7, 140]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**64 - 1), st.floats(0.1, 10.0), st.floats(0.1, 10.0))
    def test_monotone_in_k(self, seed, k1, k2):
        truth = ScalingParams(0.05, 0.002, 16, 50.0)
        obs = generate_timings(SimulationConfig(truth, POW2, jitter_fraction=0.1, seed=seed))
        fitted = fit_extended(obs, 16)
        lo, hi = sorted((k1, k2))
        assert set(detect_outliers(obs, fitted, hi)) <= set(detect_outliers(obs, fitted, lo))

    def test_threshold_must_be_positive(self):
        fitted = fit_extended(CPMD_ROWS, 32)
        with pytest.raises(DomainError):
            detect_outliers(CPMD_ROWS, fitted, 0.0)


class TestAdvise:
    def test_96(self):
        adv = advise_node_count(96)
        assert adv.multiples[8][0] and adv.multiples[16][0]
        assert not adv.power_of_two
        assert not adv.flagged

    def test_7(self):
        adv = advise_node_count(7)
        divides, below, above = adv.multiples[8]
        assert not divides and below is None and above == 8
        assert adv.flagged

    def test_128(self):
        adv = advise_node_count(128, [8, 16])
        assert adv.multiples[8][0] and adv.multiples[16][0] and adv.power_of_two

    def test_neighbours(self):
        assert advise_node_count(112, [16, 32]).multiples == {16: (True, 112, 112), 32: (False, 96, 128)}

    def test_invalid(self):
        with pytest.raises(DomainError):
            advise_node_count(0)
        with pytest.raises(DomainError):
            advise_node_count(8, [])
